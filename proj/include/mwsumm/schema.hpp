#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mwsumm/curate.hpp"
#include "mwsumm/jsonl.hpp"
#include "mwsumm/rankstats.hpp"
#include "mwsumm/records.hpp"

namespace mwsumm {

inline constexpr const char* kEditsSchema = "edits";
inline constexpr const char* kDiffsSchema = "diffs";
inline constexpr const char* kAnnotatedSchema = "annotated";
inline constexpr const char* kSamplesSchema = "samples";
inline constexpr const char* kRejectsSchema = "rejects";
inline constexpr const char* kBallotsSchema = "ballots";
inline constexpr const char* kCodesSchema = "codes";
inline constexpr const char* kLabelsSchema = "labels";

struct SchemaViolation {
    std::size_t line = 0;
    std::string message;
};

namespace detail {

using RecordValidator = std::function<void(const nlohmann::json&)>;

inline void check_edit_invariants(const EditRecord& edit) {
    if (edit.revision_id == edit.parent_revision_id)
        throw Error("revision_id equals parent_revision_id");
    if (edit.editor_edit_count < 0) throw Error("editor_edit_count < 0");
}

inline const std::map<std::string, RecordValidator>& schema_validators() {
    static const std::map<std::string, RecordValidator> validators = {
        {kEditsSchema,
         [](const nlohmann::json& j) {
             check_edit_invariants(j.get<CollectedEdit>().edit);
         }},
        {kDiffsSchema,
         [](const nlohmann::json& j) {
             check_edit_invariants(j.get<DiffRecord>().edit);
         }},
        {kAnnotatedSchema,
         [](const nlohmann::json& j) {
             AnnotatedEdit record = j.get<AnnotatedEdit>();
             check_edit_invariants(record.edit);
             if (record.summary_length != codepoint_length(record.summary_clean))
                 throw Error("summary_length does not match summary_clean");
         }},
        {kSamplesSchema,
         [](const nlohmann::json& j) {
             DatasetSample sample = j.get<DatasetSample>();
             if (sample.input.empty()) throw Error("input is empty");
             if (sample.source == SampleSource::human && sample.target.empty())
                 throw Error("human sample with empty target");
         }},
        {kRejectsSchema,
         [](const nlohmann::json& j) {
             Rejection rejection = j.get<Rejection>();
             if (rejection.reason.empty()) throw Error("reason is empty");
         }},
        {kBallotsSchema,
         [](const nlohmann::json& j) {
             Ballot ballot = j.get<Ballot>();
             if (ballot.methods.size() != 4)
                 throw InvalidBallotError("ballot must list exactly 4 methods");
             validate(ballot);
         }},
        {kCodesSchema, [](const nlohmann::json& j) { j.get<CodedItem>(); }},
        {kLabelsSchema,
         [](const nlohmann::json& j) {
             ErrorLabel label = j.get<ErrorLabel>();
             tabulate_errors({label});  // reuses the taxonomy checks
         }},
    };
    return validators;
}

}  // namespace detail

// Check every line of a JSON-lines file against the schema declared in its
// header. An empty file is vacuously valid.
inline std::vector<SchemaViolation> validate_schema_file(const std::string& path) {
    std::vector<SchemaViolation> violations;
    JsonlReader reader(path);

    const detail::RecordValidator* validator = nullptr;
    if (reader.header()) {
        auto it = detail::schema_validators().find(reader.header()->schema);
        if (it == detail::schema_validators().end()) {
            violations.push_back({1, "unknown schema '" +
                                         reader.header()->schema + "'"});
            return violations;
        }
        validator = &it->second;
    }

    while (true) {
        std::optional<nlohmann::json> record;
        try {
            record = reader.next();
        } catch (const Error& e) {
            violations.push_back({reader.line_number(), e.what()});
            continue;
        }
        if (!record) break;
        if (validator == nullptr) {
            violations.push_back(
                {reader.line_number(),
                 "file has records but no schema header"});
            return violations;
        }
        try {
            (*validator)(*record);
        } catch (const std::exception& e) {
            violations.push_back({reader.line_number(), e.what()});
        }
    }
    return violations;
}

}  // namespace mwsumm
