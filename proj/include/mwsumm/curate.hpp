#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mwsumm/diff.hpp"
#include "mwsumm/errors.hpp"
#include "mwsumm/records.hpp"
#include "mwsumm/rng.hpp"
#include "mwsumm/strings.hpp"

namespace mwsumm {

// Everything the cleaning rules and quality filters read, with defaults
// matching the documented pipeline. All lists are configurable: MediaWiki
// deployments differ in tags and tool signatures.
struct CurationConfig {
    std::vector<std::string> auto_summary_prefixes = {
        "Redirected page to",   "Blanked the page", "Created page with",
        "Replaced content with", "Undid revision",  "Reverted edits by"};
    std::vector<std::string> reverted_tags = {"mw-reverted"};
    std::vector<std::string> revert_tags = {"mw-undo", "mw-rollback",
                                            "mw-manual-revert"};
    std::vector<std::string> semi_automated_signatures = {
        "using [[Wikipedia:HotCat", "via #suggestededit", "([[WP:AES|", "AWB"};
    std::size_t min_summary_chars = 5;
    std::size_t max_summary_chars = 200;
    std::int64_t min_editor_edits = 30;
    std::size_t max_input_tokens = 1024;
    std::size_t duplicate_cap = 3;
    std::string tokenizer = "whitespace";
};

// Remove the leading "/* Section */" marker and the whitespace next to it.
// Everything after the marker is returned untouched.
inline std::string strip_section_marker(std::string_view summary_raw) {
    std::size_t i = 0;
    while (i < summary_raw.size() && is_space(summary_raw[i])) ++i;
    if (summary_raw.compare(i, 2, "/*") != 0) return std::string(summary_raw);
    std::size_t close = summary_raw.find("*/", i + 2);
    if (close == std::string_view::npos) return std::string(summary_raw);
    std::size_t rest = close + 2;
    while (rest < summary_raw.size() && is_space(summary_raw[rest])) ++rest;
    return std::string(summary_raw.substr(rest));
}

// Canonical form used for frequency counting and the duplicate cap:
// lower-cased, with every wiki link and bare URL replaced by "<link>".
inline std::string normalize_for_frequency(std::string_view summary) {
    std::string out;
    out.reserve(summary.size());
    std::size_t i = 0;
    while (i < summary.size()) {
        if (summary.compare(i, 2, "[[") == 0) {
            std::size_t end = detail::match_nested(summary, i, "[[", "]]");
            out.append("<link>");
            i = end == std::string_view::npos ? summary.size() : end;
            continue;
        }
        if (summary.compare(i, 7, "http://") == 0 ||
            summary.compare(i, 8, "https://") == 0 ||
            summary.compare(i, 6, "ftp://") == 0) {
            std::size_t end = i;
            while (end < summary.size() && !is_space(summary[end])) ++end;
            out.append("<link>");
            i = end;
            continue;
        }
        out.push_back(
            static_cast<char>(std::tolower(static_cast<unsigned char>(summary[i]))));
        ++i;
    }
    return out;
}

inline bool is_semi_automated(std::string_view summary,
                              const CurationConfig& config) {
    for (const auto& signature : config.semi_automated_signatures)
        if (contains(summary, signature)) return true;
    return false;
}

// One edit with the metadata annotations the filters read.
struct AnnotatedEdit {
    EditRecord edit;
    SentenceDiff diff;
    std::string input;
    std::string summary_clean;
    std::size_t summary_length = 0;     // code points of summary_clean
    std::size_t summary_frequency = 0;  // normalized-summary count in corpus
    std::size_t user_frequency = 0;     // editor's edit count in corpus
    bool semi_automated = false;
    std::size_t input_token_count = 0;
};

inline void to_json(json& j, const AnnotatedEdit& a) {
    j = json{{"edit", a.edit},
             {"removed", a.diff.removed},
             {"added", a.diff.added},
             {"input", a.input},
             {"summary_clean", a.summary_clean},
             {"summary_length", a.summary_length},
             {"summary_frequency", a.summary_frequency},
             {"user_frequency", a.user_frequency},
             {"semi_automated", a.semi_automated},
             {"input_token_count", a.input_token_count}};
}

inline void from_json(const json& j, AnnotatedEdit& a) {
    j.at("edit").get_to(a.edit);
    j.at("removed").get_to(a.diff.removed);
    j.at("added").get_to(a.diff.added);
    j.at("input").get_to(a.input);
    j.at("summary_clean").get_to(a.summary_clean);
    j.at("summary_length").get_to(a.summary_length);
    j.at("summary_frequency").get_to(a.summary_frequency);
    j.at("user_frequency").get_to(a.user_frequency);
    j.at("semi_automated").get_to(a.semi_automated);
    j.at("input_token_count").get_to(a.input_token_count);
}

// Compute all annotations for a corpus. Two passes: clean each summary,
// then count frequencies over the whole corpus.
inline std::vector<AnnotatedEdit> annotate(const std::vector<DiffRecord>& records,
                                           const CurationConfig& config = {}) {
    std::vector<AnnotatedEdit> out;
    out.reserve(records.size());
    std::unordered_map<std::string, std::size_t> summary_counts;
    std::unordered_map<std::string, std::size_t> user_counts;
    for (const auto& record : records) {
        AnnotatedEdit a;
        a.edit = record.edit;
        a.diff = record.diff;
        a.input = record.input;
        a.summary_clean = strip_section_marker(record.edit.summary_raw);
        a.summary_length = codepoint_length(a.summary_clean);
        a.semi_automated = is_semi_automated(record.edit.summary_raw, config);
        a.input_token_count = token_length(a.input, config.tokenizer);
        ++summary_counts[normalize_for_frequency(a.summary_clean)];
        ++user_counts[record.edit.editor_name];
        out.push_back(std::move(a));
    }
    for (auto& a : out) {
        a.summary_frequency = summary_counts[normalize_for_frequency(a.summary_clean)];
        a.user_frequency = user_counts[a.edit.editor_name];
    }
    return out;
}

// First violated cleaning rule, checked in order (i)..(vi); nullopt = keep.
inline std::optional<std::string> apply_cleaning_rules(
    const AnnotatedEdit& record, const CurationConfig& config = {}) {
    if (record.diff.empty()) return "i";
    for (const auto& prefix : config.auto_summary_prefixes)
        if (starts_with(record.summary_clean, prefix)) return "ii";
    if (record.edit.editor_is_bot) return "iii";
    for (const auto& tag : config.reverted_tags)
        if (record.edit.tags.count(tag) > 0) return "iv";
    for (const auto& tag : config.revert_tags)
        if (record.edit.tags.count(tag) > 0) return "v";
    if (trim(record.summary_clean).empty()) return "vi";
    return std::nullopt;
}

// Threshold filters; boundaries are strict on the reject side, so a 5-char
// summary, a 200-char summary, 30 edits, and 1024 tokens are all kept.
inline std::optional<std::string> apply_quality_filters(
    const AnnotatedEdit& record, const CurationConfig& config = {}) {
    if (record.summary_length < config.min_summary_chars) return "too_short";
    if (record.summary_length > config.max_summary_chars) return "too_long";
    if (record.edit.editor_edit_count < config.min_editor_edits)
        return "low_edit_count";
    if (record.input_token_count > config.max_input_tokens)
        return "input_too_long";
    return std::nullopt;
}

struct Rejection {
    std::int64_t revision_id = 0;
    std::string reason;
};

inline void to_json(json& j, const Rejection& r) {
    j = json{{"revision_id", r.revision_id}, {"reason", r.reason}};
}

inline void from_json(const json& j, Rejection& r) {
    j.at("revision_id").get_to(r.revision_id);
    j.at("reason").get_to(r.reason);
}

struct CurationResult {
    std::vector<AnnotatedEdit> kept;
    std::vector<Rejection> rejections;
};

// Keep at most `cap` records per normalized summary, choosing the first
// `cap` by timestamp (revision id as tiebreak). Output follows that order.
inline CurationResult dedup_cap(std::vector<AnnotatedEdit> records,
                                std::size_t cap) {
    std::stable_sort(records.begin(), records.end(),
                     [](const AnnotatedEdit& a, const AnnotatedEdit& b) {
                         if (a.edit.timestamp != b.edit.timestamp)
                             return a.edit.timestamp < b.edit.timestamp;
                         return a.edit.revision_id < b.edit.revision_id;
                     });
    CurationResult result;
    std::unordered_map<std::string, std::size_t> seen;
    for (auto& record : records) {
        std::size_t& count = seen[normalize_for_frequency(record.summary_clean)];
        if (count < cap) {
            ++count;
            result.kept.push_back(std::move(record));
        } else {
            result.rejections.push_back(
                {record.edit.revision_id, "duplicate_cap"});
        }
    }
    return result;
}

// Full curation pass: cleaning rules, then quality filters, then the
// duplicate cap. Every record lands in `kept` or in `rejections` exactly
// once, with the first violated rule as its reason.
inline CurationResult curate(const std::vector<AnnotatedEdit>& records,
                             const CurationConfig& config = {}) {
    CurationResult result;
    std::vector<AnnotatedEdit> surviving;
    for (const auto& record : records) {
        if (auto reason = apply_cleaning_rules(record, config)) {
            result.rejections.push_back({record.edit.revision_id, *reason});
        } else if (auto filter_reason = apply_quality_filters(record, config)) {
            result.rejections.push_back(
                {record.edit.revision_id, *filter_reason});
        } else {
            surviving.push_back(record);
        }
    }
    CurationResult deduped = dedup_cap(std::move(surviving), config.duplicate_cap);
    result.kept = std::move(deduped.kept);
    result.rejections.insert(result.rejections.end(),
                             deduped.rejections.begin(),
                             deduped.rejections.end());
    return result;
}

// -- dataset assembly -----------------------------------------------------------

struct DatasetSpec {
    double synthetic_fraction = 0.0;  // standard grid: 0, .25, .5, .75, 1
    std::size_t train_size = 0;
    std::size_t val_size = 0;
    std::uint64_t seed = 0;
};

inline bool is_standard_fraction(double s) {
    for (double grid : {0.0, 0.25, 0.5, 0.75, 1.0})
        if (s == grid) return true;
    return false;
}

struct DatasetSplits {
    std::vector<DatasetSample> train;
    std::vector<DatasetSample> val;
    std::vector<DatasetSample> test;
    std::size_t train_synthetic = 0;
    std::size_t val_synthetic = 0;
};

inline std::size_t round_half_up(double x) {
    return static_cast<std::size_t>(std::floor(x + 0.5));
}

// Seeded uniform draws without replacement. Train and validation mix
// synthetic and human samples at the requested fraction; the test split is
// the human remainder. Pools must carry unique, non-overlapping revision
// ids, which makes the three splits disjoint by revision id.
inline DatasetSplits assemble_dataset(const std::vector<DatasetSample>& human,
                                      const std::vector<DatasetSample>& synthetic,
                                      const DatasetSpec& spec) {
    std::set<std::int64_t> ids;
    for (const auto& s : human)
        if (!ids.insert(s.revision_id).second)
            throw Error("duplicate revision_id in pools: " +
                        std::to_string(s.revision_id));
    for (const auto& s : synthetic)
        if (!ids.insert(s.revision_id).second)
            throw Error("duplicate revision_id in pools: " +
                        std::to_string(s.revision_id));

    const double s_frac = spec.synthetic_fraction;
    const std::size_t train_syn = round_half_up(s_frac * static_cast<double>(spec.train_size));
    const std::size_t train_hum = spec.train_size - train_syn;
    const std::size_t val_syn = round_half_up(s_frac * static_cast<double>(spec.val_size));
    const std::size_t val_hum = spec.val_size - val_syn;

    if (synthetic.size() < train_syn + val_syn)
        throw InsufficientPoolError("synthetic", train_syn + val_syn,
                                    synthetic.size());
    if (human.size() < train_hum + val_hum)
        throw InsufficientPoolError("human", train_hum + val_hum, human.size());

    Rng rng(spec.seed);
    auto syn_idx = rng.sample_indices(synthetic.size(), train_syn + val_syn);
    auto hum_idx = rng.sample_indices(human.size(), train_hum + val_hum);

    DatasetSplits splits;
    splits.train_synthetic = train_syn;
    splits.val_synthetic = val_syn;
    for (std::size_t i = 0; i < train_syn; ++i)
        splits.train.push_back(synthetic[syn_idx[i]]);
    for (std::size_t i = 0; i < train_hum; ++i)
        splits.train.push_back(human[hum_idx[i]]);
    for (std::size_t i = train_syn; i < syn_idx.size(); ++i)
        splits.val.push_back(synthetic[syn_idx[i]]);
    for (std::size_t i = train_hum; i < hum_idx.size(); ++i)
        splits.val.push_back(human[hum_idx[i]]);

    std::vector<bool> drawn(human.size(), false);
    for (std::size_t i : hum_idx) drawn[i] = true;
    for (std::size_t i = 0; i < human.size(); ++i)
        if (!drawn[i]) splits.test.push_back(human[i]);

    rng.shuffle(splits.train);
    rng.shuffle(splits.val);
    return splits;
}

}  // namespace mwsumm
