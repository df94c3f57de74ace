#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mwsumm/errors.hpp"
#include "mwsumm/records.hpp"
#include "mwsumm/sentences.hpp"
#include "mwsumm/strings.hpp"

namespace mwsumm {

// Contract constants of the serialized model-input format.
inline constexpr std::string_view kOldTextMarker = "<old_text>";
inline constexpr std::string_view kNewTextMarker = "<new_text>";
inline constexpr std::string_view kSentSepMarker = "<sent_sep>";

// Multiset difference of the two revisions' sentences: `removed` holds the
// sentences present more often in the old text, `added` the converse.
// Duplicated sentences are counted, and both sides are sorted ascending by
// code point, so the result is independent of sentence order in the input.
inline SentenceDiff extract_diff(const RevisionPair& pair) {
    std::vector<std::string> old_sents = segment_sentences(pair.old_text);
    std::vector<std::string> new_sents = segment_sentences(pair.new_text);

    std::map<std::string, long> counts;
    for (auto& s : old_sents) ++counts[std::move(s)];
    for (auto& s : new_sents) --counts[std::move(s)];

    SentenceDiff diff;
    for (const auto& [sentence, count] : counts) {
        for (long i = 0; i < count; ++i) diff.removed.push_back(sentence);
        for (long i = 0; i < -count; ++i) diff.added.push_back(sentence);
    }
    // std::map iteration is already sorted ascending by code point.
    return diff;
}

namespace detail {

inline std::string sanitize_sentence(std::string_view sentence) {
    if (sentence.find(kOldTextMarker) != std::string_view::npos ||
        sentence.find(kNewTextMarker) != std::string_view::npos ||
        sentence.find(kSentSepMarker) != std::string_view::npos) {
        throw MarkerCollisionError(std::string(sentence));
    }
    std::string out(sentence);
    std::replace(out.begin(), out.end(), '\n', ' ');
    std::replace(out.begin(), out.end(), '\r', ' ');
    return out;
}

inline void append_side(std::string& out, std::string_view prefix,
                        const std::vector<std::string>& sentences) {
    if (sentences.empty()) return;
    if (!out.empty()) out.push_back(' ');
    out.append(prefix);
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (i > 0) {
            out.push_back(' ');
            out.append(kSentSepMarker);
        }
        out.push_back(' ');
        out.append(sanitize_sentence(sentences[i]));
    }
}

}  // namespace detail

// Flatten a diff into the single-line model input:
//   "<old_text> s1 <sent_sep> s2 <new_text> t1 <sent_sep> t2"
// A side with no sentences omits its prefix entirely. Sentences containing
// one of the marker strings are rejected rather than escaped.
inline std::string serialize_diff(const SentenceDiff& diff) {
    if (diff.empty()) throw EmptyDiffError();
    std::string out;
    detail::append_side(out, kOldTextMarker, diff.removed);
    detail::append_side(out, kNewTextMarker, diff.added);
    return out;
}

// -- tokenizers ---------------------------------------------------------------

using Tokenizer = std::function<std::size_t(std::string_view)>;

inline std::map<std::string, Tokenizer>& tokenizer_registry() {
    static std::map<std::string, Tokenizer> registry{
        {"whitespace",
         [](std::string_view text) { return split_whitespace(text).size(); }},
    };
    return registry;
}

inline void register_tokenizer(const std::string& name, Tokenizer tokenizer) {
    tokenizer_registry()[name] = std::move(tokenizer);
}

// Token count of a serialized input under a registered tokenizer.
inline std::size_t token_length(std::string_view input,
                                const std::string& tokenizer = "whitespace") {
    const auto& registry = tokenizer_registry();
    auto it = registry.find(tokenizer);
    if (it == registry.end()) throw UnknownTokenizerError(tokenizer);
    return it->second(input);
}

}  // namespace mwsumm
