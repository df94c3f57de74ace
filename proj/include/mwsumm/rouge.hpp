#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mwsumm/strings.hpp"

namespace mwsumm {

// Lowercase and split on whitespace and ASCII punctuation; punctuation is a
// separator, not a token. Bytes >= 0x80 are treated as word characters, so
// non-ASCII text tokenizes by whitespace/punctuation only. No stemming.
inline std::vector<std::string> rouge_tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        unsigned char u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || u >= 0x80) {
            current.push_back(static_cast<char>(std::tolower(u)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

namespace detail {

inline double f1(double precision, double recall) {
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

inline std::map<std::vector<std::string>, std::size_t> ngram_counts(
    const std::vector<std::string>& tokens, std::size_t n) {
    std::map<std::vector<std::string>, std::size_t> counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)]++;
    }
    return counts;
}

inline std::size_t lcs_length(const std::vector<std::string>& a,
                              const std::vector<std::string>& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            if (a[i - 1] == b[j - 1])
                cur[j] = prev[j - 1] + 1;
            else
                cur[j] = std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace detail

// ROUGE-N F1 on token sequences. Clipped n-gram matching: each reference
// n-gram credits at most as many matches as it occurs in the candidate.
// Both texts empty at the token level scores 1; one side empty scores 0.
inline double rouge_n_tokens(const std::vector<std::string>& candidate,
                             const std::vector<std::string>& reference,
                             std::size_t n) {
    if (candidate.empty() && reference.empty()) return 1.0;
    auto cand = detail::ngram_counts(candidate, n);
    auto ref = detail::ngram_counts(reference, n);
    std::size_t cand_total = 0;
    for (const auto& [g, c] : cand) cand_total += c;
    std::size_t ref_total = 0;
    for (const auto& [g, c] : ref) ref_total += c;
    if (cand_total == 0 || ref_total == 0) return 0.0;
    std::size_t matched = 0;
    for (const auto& [gram, count] : cand) {
        auto it = ref.find(gram);
        if (it != ref.end()) matched += std::min(count, it->second);
    }
    double precision = static_cast<double>(matched) / static_cast<double>(cand_total);
    double recall = static_cast<double>(matched) / static_cast<double>(ref_total);
    return detail::f1(precision, recall);
}

inline double rouge_n(std::string_view candidate, std::string_view reference,
                      std::size_t n) {
    return rouge_n_tokens(rouge_tokenize(candidate), rouge_tokenize(reference), n);
}

// ROUGE-L F1 from the longest common subsequence of the token sequences.
inline double rouge_l_tokens(const std::vector<std::string>& candidate,
                             const std::vector<std::string>& reference) {
    if (candidate.empty() && reference.empty()) return 1.0;
    if (candidate.empty() || reference.empty()) return 0.0;
    std::size_t lcs = detail::lcs_length(candidate, reference);
    double precision = static_cast<double>(lcs) / static_cast<double>(candidate.size());
    double recall = static_cast<double>(lcs) / static_cast<double>(reference.size());
    return detail::f1(precision, recall);
}

inline double rouge_l(std::string_view candidate, std::string_view reference) {
    return rouge_l_tokens(rouge_tokenize(candidate), rouge_tokenize(reference));
}

}  // namespace mwsumm
