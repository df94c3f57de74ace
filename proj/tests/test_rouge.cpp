#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "mwsumm/rouge.hpp"

using Catch::Approx;
using mwsumm::rouge_l;
using mwsumm::rouge_l_tokens;
using mwsumm::rouge_n;
using mwsumm::rouge_n_tokens;
using mwsumm::rouge_tokenize;

namespace {

using Tokens = std::vector<std::string>;

// Independent oracle: clipped n-gram overlap counted by joining each n-gram
// to a string key and intersecting sorted lists, then the F1 formula. Fewer
// than n tokens on a side yields zero n-grams; both sides token-empty
// scores 1.
double oracle_rouge_n(const Tokens& cand, const Tokens& ref, std::size_t n) {
    if (cand.empty() && ref.empty()) return 1.0;
    auto grams = [n](const Tokens& tokens) {
        std::vector<std::string> out;
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
            std::string key;
            for (std::size_t k = 0; k < n; ++k) key += tokens[i + k] + "\x1f";
            out.push_back(key);
        }
        std::sort(out.begin(), out.end());
        return out;
    };
    std::vector<std::string> c = grams(cand);
    std::vector<std::string> r = grams(ref);
    if (c.empty() || r.empty()) return 0.0;
    std::size_t matched = 0;
    std::size_t i = 0, j = 0;
    while (i < c.size() && j < r.size()) {
        if (c[i] == r[j]) {
            ++matched;
            ++i;
            ++j;
        } else if (c[i] < r[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    double p = static_cast<double>(matched) / static_cast<double>(c.size());
    double rec = static_cast<double>(matched) / static_cast<double>(r.size());
    return p + rec == 0.0 ? 0.0 : 2.0 * p * rec / (p + rec);
}

// Plain recursive LCS; exponential but the exhaustive suite caps length at 5.
std::size_t oracle_lcs(const Tokens& a, const Tokens& b, std::size_t i,
                       std::size_t j) {
    if (i == a.size() || j == b.size()) return 0;
    if (a[i] == b[j]) return 1 + oracle_lcs(a, b, i + 1, j + 1);
    return std::max(oracle_lcs(a, b, i + 1, j), oracle_lcs(a, b, i, j + 1));
}

double oracle_rouge_l(const Tokens& cand, const Tokens& ref) {
    if (cand.empty() && ref.empty()) return 1.0;
    if (cand.empty() || ref.empty()) return 0.0;
    double lcs = static_cast<double>(oracle_lcs(cand, ref, 0, 0));
    double p = lcs / static_cast<double>(cand.size());
    double r = lcs / static_cast<double>(ref.size());
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

std::vector<Tokens> all_sequences(const Tokens& alphabet, std::size_t max_len) {
    std::vector<Tokens> out = {{}};
    std::vector<Tokens> frontier = {{}};
    for (std::size_t len = 1; len <= max_len; ++len) {
        std::vector<Tokens> next;
        for (const auto& seq : frontier) {
            for (const auto& token : alphabet) {
                Tokens extended = seq;
                extended.push_back(token);
                out.push_back(extended);
                next.push_back(std::move(extended));
            }
        }
        frontier = std::move(next);
    }
    return out;
}

}  // namespace

TEST_CASE("rouge tokenization lowercases and splits on punctuation", "[rouge]") {
    CHECK(rouge_tokenize("Added the Cat, dog; and bird!") ==
          Tokens{"added", "the", "cat", "dog", "and", "bird"});
    CHECK(rouge_tokenize("") == Tokens{});
    CHECK(rouge_tokenize("!!!") == Tokens{});
    CHECK(rouge_tokenize("one-two") == Tokens{"one", "two"});
}

TEST_CASE("rouge_n basics", "[rouge]") {
    CHECK(rouge_n("the cat sat", "the cat sat", 1) == 1.0);
    CHECK(rouge_n("alpha beta", "gamma delta", 1) == 0.0);
    // P = 2/2, R = 2/3, F1 = 2*(1)*(2/3)/(1+2/3) = 0.8
    CHECK(rouge_n("the cat", "the cat sat", 1) == Approx(0.8));
    CHECK(rouge_n("", "", 1) == 1.0);
    CHECK(rouge_n("", "something", 1) == 0.0);
    CHECK(rouge_n("something", "", 1) == 0.0);
}

TEST_CASE("rouge_2 counts bigram overlap", "[rouge]") {
    // cand bigrams: {the cat, cat sat}; ref: {the cat, cat ran}
    // match 1; P = R = 1/2 -> F1 = 1/2
    CHECK(rouge_n("the cat sat", "the cat ran", 2) == Approx(0.5));
    CHECK(rouge_n("the cat sat", "the cat sat", 2) == 1.0);
}

TEST_CASE("rouge_l basics", "[rouge]") {
    CHECK(rouge_l("a b c", "a b c") == 1.0);
    // LCS("a b c", "a x c") = 2; P = R = 2/3; F1 = 2/3
    CHECK(rouge_l("a b c", "a x c") == Approx(2.0 / 3.0));
    CHECK(rouge_l("", "a b") == 0.0);
    CHECK(rouge_l("a b", "") == 0.0);
    CHECK(rouge_l("", "") == 1.0);
}

TEST_CASE("score(x,x) = 1 and scores stay in [0,1]", "[rouge]") {
    const std::vector<std::string> texts = {
        "added a link", "ce", "fixed the typo in the lead",
        "removed unsourced claim about the bridge"};
    for (const auto& t : texts) {
        CHECK(rouge_n(t, t, 1) == 1.0);
        CHECK(rouge_l(t, t) == 1.0);
        if (rouge_tokenize(t).size() >= 2) CHECK(rouge_n(t, t, 2) == 1.0);
        for (const auto& u : texts) {
            for (double s : {rouge_n(t, u, 1), rouge_n(t, u, 2), rouge_l(t, u)}) {
                CHECK(s >= 0.0);
                CHECK(s <= 1.0);
            }
        }
    }
}

TEST_CASE("exhaustive oracle equivalence on short sequences", "[rouge][slow]") {
    // Every pair of token sequences of length <= 5 over a 3-token alphabet.
    const Tokens alphabet = {"aa", "bb", "cc"};
    const auto sequences = all_sequences(alphabet, 5);
    REQUIRE(sequences.size() == 364);

    std::size_t checked = 0;
    for (const auto& cand : sequences) {
        for (const auto& ref : sequences) {
            const double r1 = rouge_n_tokens(cand, ref, 1);
            const double r2 = rouge_n_tokens(cand, ref, 2);
            const double rl = rouge_l_tokens(cand, ref);
            const double o1 = oracle_rouge_n(cand, ref, 1);
            const double o2 = oracle_rouge_n(cand, ref, 2);
            const double ol = oracle_rouge_l(cand, ref);
            if (r1 != Approx(o1) || r2 != Approx(o2) || rl != Approx(ol)) {
                INFO("candidate size " << cand.size() << " ref size " << ref.size());
                REQUIRE(r1 == Approx(o1));
                REQUIRE(r2 == Approx(o2));
                REQUIRE(rl == Approx(ol));
            }
            ++checked;
        }
    }
    CHECK(checked == 364u * 364u);
}
