#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "mwsumm/errors.hpp"

namespace mwsumm {

using json = nlohmann::json;

// One Wikipedia edit: the child revision of a (parent, child) pair plus its
// editor metadata. Field values are copied verbatim from the source; nothing
// is normalized at ingestion time.
struct EditRecord {
    std::int64_t revision_id = 0;
    std::int64_t parent_revision_id = 0;
    std::string page_title;
    std::string editor_name;
    bool editor_is_bot = false;
    bool editor_is_anonymous = false;
    std::int64_t editor_edit_count = 0;
    std::string summary_raw;
    std::set<std::string> tags;
    std::string timestamp;  // ISO-8601 UTC; lexicographic order == time order

    friend bool operator==(const EditRecord&, const EditRecord&) = default;
};

struct RevisionPair {
    std::string old_text;
    std::string new_text;

    friend bool operator==(const RevisionPair&, const RevisionPair&) = default;
};

inline void to_json(json& j, const EditRecord& r) {
    j = json{{"revision_id", r.revision_id},
             {"parent_revision_id", r.parent_revision_id},
             {"page_title", r.page_title},
             {"editor_name", r.editor_name},
             {"editor_is_bot", r.editor_is_bot},
             {"editor_is_anonymous", r.editor_is_anonymous},
             {"editor_edit_count", r.editor_edit_count},
             {"summary_raw", r.summary_raw},
             {"tags", r.tags},
             {"timestamp", r.timestamp}};
}

inline void from_json(const json& j, EditRecord& r) {
    j.at("revision_id").get_to(r.revision_id);
    j.at("parent_revision_id").get_to(r.parent_revision_id);
    j.at("page_title").get_to(r.page_title);
    j.at("editor_name").get_to(r.editor_name);
    j.at("editor_is_bot").get_to(r.editor_is_bot);
    r.editor_is_anonymous = j.value("editor_is_anonymous", false);
    j.at("editor_edit_count").get_to(r.editor_edit_count);
    j.at("summary_raw").get_to(r.summary_raw);
    j.at("tags").get_to(r.tags);
    j.at("timestamp").get_to(r.timestamp);
}

// Sentence-level diff of a revision pair. Both lists are sorted ascending by
// code point and share no sentence (multiset semantics upstream).
struct SentenceDiff {
    std::vector<std::string> removed;
    std::vector<std::string> added;

    bool empty() const { return removed.empty() && added.empty(); }
};

inline void to_json(json& j, const SentenceDiff& d) {
    j = json{{"removed", d.removed}, {"added", d.added}};
}

inline void from_json(const json& j, SentenceDiff& d) {
    j.at("removed").get_to(d.removed);
    j.at("added").get_to(d.added);
}

// Ingest-stage record: the edit plus both revision texts.
struct CollectedEdit {
    EditRecord edit;
    RevisionPair texts;
};

inline void to_json(json& j, const CollectedEdit& r) {
    j = json{{"edit", r.edit},
             {"old_text", r.texts.old_text},
             {"new_text", r.texts.new_text}};
}

inline void from_json(const json& j, CollectedEdit& r) {
    j.at("edit").get_to(r.edit);
    j.at("old_text").get_to(r.texts.old_text);
    j.at("new_text").get_to(r.texts.new_text);
}

// Diff-stage record: the edit plus its sentence diff and serialized model
// input. `input` is empty when the diff is empty or a sentence collided with
// a marker string (such records are rejected downstream).
struct DiffRecord {
    EditRecord edit;
    SentenceDiff diff;
    std::string input;
};

inline void to_json(json& j, const DiffRecord& r) {
    j = json{{"edit", r.edit},
             {"removed", r.diff.removed},
             {"added", r.diff.added},
             {"input", r.input}};
}

inline void from_json(const json& j, DiffRecord& r) {
    j.at("edit").get_to(r.edit);
    j.at("removed").get_to(r.diff.removed);
    j.at("added").get_to(r.diff.added);
    j.at("input").get_to(r.input);
}

enum class SampleSource { human, synthetic };

inline std::string to_string(SampleSource s) {
    return s == SampleSource::human ? "human" : "synthetic";
}

inline SampleSource sample_source_from_string(const std::string& s) {
    if (s == "human") return SampleSource::human;
    if (s == "synthetic") return SampleSource::synthetic;
    throw Error("unknown sample source: " + s);
}

struct DatasetSample {
    std::string input;
    std::string target;
    SampleSource source = SampleSource::human;
    std::int64_t revision_id = 0;
};

inline void to_json(json& j, const DatasetSample& s) {
    j = json{{"revision_id", s.revision_id},
             {"input", s.input},
             {"target", s.target},
             {"source", to_string(s.source)}};
}

inline void from_json(const json& j, DatasetSample& s) {
    j.at("revision_id").get_to(s.revision_id);
    j.at("input").get_to(s.input);
    j.at("target").get_to(s.target);
    s.source = sample_source_from_string(j.at("source").get<std::string>());
}

// One annotator's best/worst choice over the candidate summaries of one
// edit. The standard ballot lists 4 methods; the two chosen as neither are
// tied for second place. A reduced 2-method ballot (best/worst only) is
// accepted for head-to-head fits.
struct Ballot {
    std::string sample_id;
    std::string annotator_id;
    std::vector<std::string> methods;
    std::string best;
    std::string worst;
};

inline void validate(const Ballot& b) {
    if (b.methods.size() < 2 || b.methods.size() > 4)
        throw InvalidBallotError("ballot must list 2-4 methods, sample " +
                                 b.sample_id);
    if (b.best == b.worst)
        throw InvalidBallotError("best equals worst in sample " + b.sample_id);
    bool best_found = false;
    bool worst_found = false;
    for (std::size_t i = 0; i < b.methods.size(); ++i) {
        for (std::size_t j = i + 1; j < b.methods.size(); ++j) {
            if (b.methods[i] == b.methods[j])
                throw InvalidBallotError("duplicate method '" + b.methods[i] +
                                         "' in sample " + b.sample_id);
        }
        best_found = best_found || b.methods[i] == b.best;
        worst_found = worst_found || b.methods[i] == b.worst;
    }
    if (!best_found || !worst_found)
        throw InvalidBallotError("best/worst not among methods in sample " +
                                 b.sample_id);
}

inline void to_json(json& j, const Ballot& b) {
    j = json{{"sample_id", b.sample_id},
             {"annotator_id", b.annotator_id},
             {"methods", b.methods},
             {"best", b.best},
             {"worst", b.worst}};
}

inline void from_json(const json& j, Ballot& b) {
    j.at("sample_id").get_to(b.sample_id);
    j.at("annotator_id").get_to(b.annotator_id);
    j.at("methods").get_to(b.methods);
    j.at("best").get_to(b.best);
    j.at("worst").get_to(b.worst);
}

// Editor-experience stratum used in qualitative coding.
enum class Stratum { ip, newcomer, mid, experienced };

inline std::string to_string(Stratum s) {
    switch (s) {
        case Stratum::ip: return "IP";
        case Stratum::newcomer: return "newcomer";
        case Stratum::mid: return "mid";
        case Stratum::experienced: return "experienced";
    }
    return "?";
}

inline Stratum stratum_from_string(const std::string& s) {
    if (s == "IP") return Stratum::ip;
    if (s == "newcomer") return Stratum::newcomer;
    if (s == "mid") return Stratum::mid;
    if (s == "experienced") return Stratum::experienced;
    throw Error("unknown stratum: " + s);
}

// One item coded independently by two coders for one facet (category).
struct CodedItem {
    std::string item_id;
    std::string category;
    Stratum stratum = Stratum::ip;
    bool coder_a = false;
    bool coder_b = false;
};

inline void to_json(json& j, const CodedItem& c) {
    j = json{{"item_id", c.item_id},
             {"category", c.category},
             {"stratum", to_string(c.stratum)},
             {"coder_a", c.coder_a},
             {"coder_b", c.coder_b}};
}

inline void from_json(const json& j, CodedItem& c) {
    j.at("item_id").get_to(c.item_id);
    c.category = j.value("category", std::string{});
    c.stratum = stratum_from_string(j.at("stratum").get<std::string>());
    j.at("coder_a").get_to(c.coder_a);
    j.at("coder_b").get_to(c.coder_b);
}

struct MetricReport {
    std::string metric_name;
    std::vector<double> per_sample;
    double mean = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t n = 0;
};

inline void to_json(json& j, const MetricReport& r) {
    j = json{{"metric", r.metric_name}, {"per_sample", r.per_sample},
             {"mean", r.mean},          {"ci_low", r.ci_low},
             {"ci_high", r.ci_high},    {"n", r.n}};
}

}  // namespace mwsumm
