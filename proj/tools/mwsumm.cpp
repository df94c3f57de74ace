// Pipeline driver: every stage of the corpus build and evaluation is a
// subcommand over JSON-lines files. See README.md for the full walkthrough.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mwsumm/curate.hpp"
#include "mwsumm/diff.hpp"
#include "mwsumm/dump.hpp"
#include "mwsumm/errors.hpp"
#include "mwsumm/jsonl.hpp"
#include "mwsumm/metrics.hpp"
#include "mwsumm/prompt.hpp"
#include "mwsumm/rankstats.hpp"
#include "mwsumm/records.hpp"
#include "mwsumm/rouge.hpp"
#include "mwsumm/schema.hpp"
#include "mwsumm/scorer_http.hpp"
#include "mwsumm/wiki_api.hpp"

namespace {

using json = nlohmann::json;

struct GlobalOptions {
    std::uint64_t seed = 0;
    std::size_t workers = 4;
};

template <typename T>
std::vector<T> read_records(const std::string& path, const char* schema) {
    mwsumm::JsonlReader reader(path);
    if (reader.header() && reader.header()->schema != schema)
        throw mwsumm::ConfigError(path + " has schema '" +
                                  reader.header()->schema + "', expected '" +
                                  schema + "'");
    return reader.template read_all<T>();
}

// In-order data-parallel map over a record vector.
template <typename In, typename Fn>
auto parallel_map(const std::vector<In>& inputs, std::size_t workers, Fn fn)
    -> std::vector<decltype(fn(inputs.front()))> {
    using Out = decltype(fn(inputs.front()));
    std::vector<Out> outputs(inputs.size());
    if (inputs.empty()) return outputs;
    workers = std::max<std::size_t>(1, std::min(workers, inputs.size()));
    if (workers == 1) {
        for (std::size_t i = 0; i < inputs.size(); ++i) outputs[i] = fn(inputs[i]);
        return outputs;
    }
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            while (true) {
                std::size_t i = cursor.fetch_add(1);
                if (i >= inputs.size()) return;
                try {
                    outputs[i] = fn(inputs[i]);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return outputs;
}

std::string env_or(const char* name, const std::string& fallback) {
    const char* value = std::getenv(name);
    return value != nullptr && *value != '\0' ? value : fallback;
}

void write_json_report(const std::string& path, const json& report) {
    if (path.empty() || path == "-") {
        std::cout << report.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw mwsumm::IoError("cannot open for writing: " + path);
    out << report.dump(2) << '\n';
}

// -- ingest ---------------------------------------------------------------------

struct IngestArgs {
    std::string dump_path;
    std::string api_url;
    std::string revision_ids_path;
    std::string output;
    double requests_per_second = 5.0;
    std::string ip_edit_count_mode = "contribs";
};

int run_ingest(const IngestArgs& args) {
    mwsumm::JsonlWriter writer(args.output, mwsumm::kEditsSchema);
    std::size_t written = 0;

    if (!args.dump_path.empty()) {
        mwsumm::DumpReader reader(args.dump_path);
        while (auto edit = reader.next()) {
            writer.write(json(*edit));
            ++written;
        }
        std::cerr << "ingest: " << written << " edits, "
                  << reader.skipped_pairs() << " pairs skipped (deleted text)\n";
        return 0;
    }

    mwsumm::WikiApiOptions options;
    options.requests_per_second = args.requests_per_second;
    options.ip_edit_count_from_contribs = args.ip_edit_count_mode == "contribs";
    mwsumm::WikiApiClient client(args.api_url, options);

    std::ifstream ids(args.revision_ids_path);
    if (!ids)
        throw mwsumm::IoError("cannot open: " + args.revision_ids_path);
    std::string line;
    std::size_t not_found = 0;
    while (std::getline(ids, line)) {
        line = mwsumm::trim(line);
        if (line.empty()) continue;
        std::int64_t revision_id = std::stoll(line);
        try {
            auto [record, texts] = client.fetch_edit(revision_id);
            writer.write(json(mwsumm::CollectedEdit{record, texts}));
            ++written;
        } catch (const mwsumm::NotFoundError& e) {
            ++not_found;
            std::cerr << "ingest: skipping " << revision_id << ": " << e.what()
                      << '\n';
        }
    }
    std::cerr << "ingest: " << written << " edits, " << not_found
              << " not found\n";
    return 0;
}

// -- diff -----------------------------------------------------------------------

int run_diff(const GlobalOptions& global, const std::string& input,
             const std::string& output, const std::string& reject_log) {
    auto edits = read_records<mwsumm::CollectedEdit>(input, mwsumm::kEditsSchema);

    struct Outcome {
        mwsumm::DiffRecord record;
        bool marker_collision = false;
    };
    auto outcomes = parallel_map(edits, global.workers,
                                 [](const mwsumm::CollectedEdit& edit) {
        Outcome out;
        out.record.edit = edit.edit;
        out.record.diff = mwsumm::extract_diff(edit.texts);
        if (!out.record.diff.empty()) {
            try {
                out.record.input = mwsumm::serialize_diff(out.record.diff);
            } catch (const mwsumm::MarkerCollisionError&) {
                out.marker_collision = true;
            }
        }
        return out;
    });

    mwsumm::JsonlWriter writer(output, mwsumm::kDiffsSchema);
    std::optional<mwsumm::JsonlWriter> rejects;
    if (!reject_log.empty())
        rejects.emplace(reject_log, mwsumm::kRejectsSchema);
    std::size_t written = 0, collisions = 0;
    for (const auto& outcome : outcomes) {
        if (outcome.marker_collision) {
            ++collisions;
            if (rejects)
                rejects->write(json(mwsumm::Rejection{
                    outcome.record.edit.revision_id, "marker_collision"}));
            continue;
        }
        writer.write(json(outcome.record));
        ++written;
    }
    std::cerr << "diff: " << written << " records, " << collisions
              << " marker collisions\n";
    return 0;
}

// -- curate -----------------------------------------------------------------------

int run_curate(const std::string& input, const std::string& output,
               const std::string& reject_log,
               const mwsumm::CurationConfig& config) {
    auto diffs = read_records<mwsumm::DiffRecord>(input, mwsumm::kDiffsSchema);
    auto annotated = mwsumm::annotate(diffs, config);
    auto result = mwsumm::curate(annotated, config);

    mwsumm::JsonlWriter writer(output, mwsumm::kAnnotatedSchema);
    for (const auto& record : result.kept) writer.write(json(record));
    mwsumm::JsonlWriter rejects(reject_log, mwsumm::kRejectsSchema);
    std::map<std::string, std::size_t> by_reason;
    for (const auto& rejection : result.rejections) {
        rejects.write(json(rejection));
        ++by_reason[rejection.reason];
    }

    std::cerr << "curate: " << result.kept.size() << " kept, "
              << result.rejections.size() << " rejected";
    for (const auto& [reason, count] : by_reason)
        std::cerr << "  " << reason << "=" << count;
    std::cerr << '\n';
    return 0;
}

// -- synth ------------------------------------------------------------------------

struct SynthArgs {
    std::string input;
    std::string output;
    std::string endpoint;
    std::string instruction_path = "assets/system_instruction.txt";
    std::string demonstrations_path = "assets/demonstrations.json";
    std::string checkpoint;
    std::string failures;
    std::size_t concurrency = 4;
    std::size_t max_inputs = 0;  // 0 = all
    mwsumm::GenerationParams params;
};

int run_synth(const SynthArgs& args) {
    auto diffs = read_records<mwsumm::DiffRecord>(args.input, mwsumm::kDiffsSchema);
    std::vector<mwsumm::GenerationInput> inputs;
    for (const auto& record : diffs) {
        if (record.input.empty()) continue;
        inputs.push_back({record.edit.revision_id, record.input});
        if (args.max_inputs > 0 && inputs.size() >= args.max_inputs) break;
    }

    mwsumm::PromptBundle bundle = mwsumm::load_prompt_bundle(
        args.instruction_path, args.demonstrations_path);
    std::string endpoint =
        args.endpoint.empty() ? env_or("MWSUMM_API_BASE_URL", "") : args.endpoint;
    if (endpoint.empty())
        throw mwsumm::ConfigError(
            "no endpoint: pass --endpoint or set MWSUMM_API_BASE_URL");

    mwsumm::ChatClient client(endpoint);
    mwsumm::GenerationJobOptions job;
    job.concurrency = args.concurrency;
    job.checkpoint_path = args.checkpoint;
    job.failures_path = args.failures;
    auto result =
        mwsumm::run_generation_job(inputs, client, bundle, args.params, job);

    mwsumm::JsonlWriter writer(args.output, mwsumm::kSamplesSchema);
    for (const auto& sample : result.samples) writer.write(json(sample));
    std::cerr << "synth: " << result.samples.size() << " samples ("
              << result.resumed_from_checkpoint << " from checkpoint), "
              << result.failures.size() << " failures\n";
    return 0;
}

// -- mix --------------------------------------------------------------------------

std::vector<mwsumm::DatasetSample> load_human_pool(const std::string& path) {
    mwsumm::JsonlReader reader(path);
    std::string schema =
        reader.header() ? reader.header()->schema : std::string{mwsumm::kSamplesSchema};
    std::vector<mwsumm::DatasetSample> pool;
    while (auto record = reader.next()) {
        if (schema == mwsumm::kAnnotatedSchema) {
            auto annotated = record->get<mwsumm::AnnotatedEdit>();
            mwsumm::DatasetSample sample;
            sample.revision_id = annotated.edit.revision_id;
            sample.input = annotated.input;
            sample.target = annotated.summary_clean;
            sample.source = mwsumm::SampleSource::human;
            pool.push_back(std::move(sample));
        } else {
            pool.push_back(record->get<mwsumm::DatasetSample>());
        }
    }
    return pool;
}

int run_mix(const GlobalOptions& global, const std::string& human_path,
            const std::string& synthetic_path, double fraction,
            std::size_t train, std::size_t val, const std::string& output_dir) {
    auto human = load_human_pool(human_path);
    auto synthetic =
        read_records<mwsumm::DatasetSample>(synthetic_path, mwsumm::kSamplesSchema);

    if (!mwsumm::is_standard_fraction(fraction))
        std::cerr << "mix: note: " << fraction
                  << " is outside the standard fraction grid {0, 0.25, 0.5, "
                     "0.75, 1}\n";

    mwsumm::DatasetSpec spec;
    spec.synthetic_fraction = fraction;
    spec.train_size = train;
    spec.val_size = val;
    spec.seed = global.seed;
    auto splits = mwsumm::assemble_dataset(human, synthetic, spec);

    std::filesystem::create_directories(output_dir);
    auto write_split = [&](const char* name,
                           const std::vector<mwsumm::DatasetSample>& samples) {
        mwsumm::JsonlWriter writer(output_dir + "/" + name + std::string(".jsonl"),
                                   mwsumm::kSamplesSchema);
        for (const auto& sample : samples) writer.write(json(sample));
    };
    write_split("train", splits.train);
    write_split("val", splits.val);
    write_split("test", splits.test);

    json manifest{
        {"synthetic_fraction", fraction},
        {"seed", global.seed},
        {"train",
         {{"total", splits.train.size()},
          {"synthetic", splits.train_synthetic},
          {"human", splits.train.size() - splits.train_synthetic}}},
        {"val",
         {{"total", splits.val.size()},
          {"synthetic", splits.val_synthetic},
          {"human", splits.val.size() - splits.val_synthetic}}},
        {"test", {{"total", splits.test.size()}, {"human", splits.test.size()}}}};
    write_json_report(output_dir + "/manifest.json", manifest);
    std::cout << manifest.dump(2) << '\n';
    return 0;
}

// -- eval-auto ---------------------------------------------------------------------

int run_eval_auto(const std::string& predictions_path,
                  const std::string& references_path, const std::string& output,
                  const std::string& scorer_cmd, const std::string& scorer_url,
                  bool bootstrap, std::uint64_t seed) {
    std::map<std::int64_t, std::string> references;
    for (const auto& sample : read_records<mwsumm::DatasetSample>(
             references_path, mwsumm::kSamplesSchema))
        references[sample.revision_id] = sample.target;

    mwsumm::JsonlReader reader(predictions_path);
    std::vector<std::pair<std::string, std::string>> pairs;  // candidate, reference
    std::size_t unmatched = 0;
    while (auto record = reader.next()) {
        std::int64_t id = record->at("revision_id").get<std::int64_t>();
        auto it = references.find(id);
        if (it == references.end()) {
            ++unmatched;
            continue;
        }
        pairs.emplace_back(record->at("prediction").get<std::string>(),
                           it->second);
    }
    if (pairs.empty()) throw mwsumm::EmptyInputError();

    auto aggregate_scores = [&](std::vector<double> scores,
                                const std::string& name) {
        return bootstrap
                   ? mwsumm::aggregate_bootstrap(std::move(scores), name, 2000, seed)
                   : mwsumm::aggregate(std::move(scores), name);
    };

    json metrics = json::array();
    auto add_metric = [&](const std::string& name, auto scorer) {
        std::vector<double> scores;
        scores.reserve(pairs.size());
        for (const auto& [candidate, reference] : pairs)
            scores.push_back(scorer(candidate, reference));
        metrics.push_back(json(aggregate_scores(std::move(scores), name)));
    };
    add_metric("rouge-1", [](const std::string& c, const std::string& r) {
        return mwsumm::rouge_n(c, r, 1);
    });
    add_metric("rouge-2", [](const std::string& c, const std::string& r) {
        return mwsumm::rouge_n(c, r, 2);
    });
    add_metric("rouge-l", [](const std::string& c, const std::string& r) {
        return mwsumm::rouge_l(c, r);
    });

    if (!scorer_cmd.empty() || !scorer_url.empty()) {
        std::vector<mwsumm::ScorePair> score_pairs;
        for (const auto& [candidate, reference] : pairs)
            score_pairs.push_back({candidate, reference});
        std::vector<double> scores =
            !scorer_cmd.empty()
                ? mwsumm::external_score_command(score_pairs, scorer_cmd)
                : mwsumm::external_score_http(score_pairs, scorer_url);
        metrics.push_back(json(aggregate_scores(std::move(scores), "external")));
    }

    json report{{"metrics", metrics},
                {"n", pairs.size()},
                {"unmatched_predictions", unmatched}};
    write_json_report(output, report);
    return 0;
}

// -- eval-human ---------------------------------------------------------------------

int run_eval_human(const std::string& ballots_path, const std::string& output,
                   const std::string& adjudicator, const std::string& mode,
                   const std::string& binomial_a, const std::string& binomial_b) {
    auto ballots =
        read_records<mwsumm::Ballot>(ballots_path, mwsumm::kBallotsSchema);
    if (ballots.empty()) throw mwsumm::EmptyInputError();
    for (const auto& ballot : ballots) mwsumm::validate(ballot);

    // Adjudicated ballots supersede the annotators' for the same sample when
    // running post-adjudication (the default).
    std::vector<mwsumm::Ballot> effective;
    if (!adjudicator.empty() && mode == "post") {
        std::set<std::string> adjudicated_samples;
        for (const auto& ballot : ballots)
            if (ballot.annotator_id == adjudicator)
                adjudicated_samples.insert(ballot.sample_id);
        for (const auto& ballot : ballots) {
            if (ballot.annotator_id == adjudicator ||
                adjudicated_samples.count(ballot.sample_id) == 0)
                effective.push_back(ballot);
        }
    } else {
        for (const auto& ballot : ballots)
            if (adjudicator.empty() || ballot.annotator_id != adjudicator)
                effective.push_back(ballot);
    }

    json report;

    json scores = json::array();
    for (const auto& method_score : mwsumm::score_ballots(effective)) {
        json entry(method_score.report);
        entry.erase("per_sample");
        entry["method"] = method_score.method;
        scores.push_back(std::move(entry));
    }
    report["scores"] = scores;

    // Kendall's tau-b between each pair of annotators, pre-adjudication.
    std::map<std::string, std::vector<mwsumm::Ballot>> by_annotator;
    for (const auto& ballot : ballots)
        if (ballot.annotator_id != adjudicator)
            by_annotator[ballot.annotator_id].push_back(ballot);
    json agreement = json::object();
    for (auto a = by_annotator.begin(); a != by_annotator.end(); ++a) {
        for (auto b = std::next(a); b != by_annotator.end(); ++b) {
            try {
                agreement[a->first + "|" + b->first] =
                    mwsumm::mean_kendall_tau_b(a->second, b->second);
            } catch (const mwsumm::EmptyInputError&) {
                // No common samples for this pair.
            }
        }
    }
    report["kendall_tau_b"] = agreement;

    auto fit = mwsumm::fit_plackett_luce(effective);
    json utilities = json::object();
    for (std::size_t j = 0; j < fit.methods.size(); ++j)
        utilities[fit.methods[j]] = fit.utilities[j];
    report["plackett_luce"] = {{"utilities", utilities},
                               {"iterations", fit.iterations},
                               {"degenerate", fit.degenerate_methods}};

    if (!binomial_a.empty() && !binomial_b.empty()) {
        std::uint64_t wins_a = 0, decided = 0;
        for (const auto& ballot : effective) {
            auto rank = [&](const std::string& m) {
                return m == ballot.best ? 0 : m == ballot.worst ? 2 : 1;
            };
            int ra = rank(binomial_a), rb = rank(binomial_b);
            if (ra == rb) continue;
            ++decided;
            if (ra < rb) ++wins_a;
        }
        report["binomial"] = {
            {"method_a", binomial_a},
            {"method_b", binomial_b},
            {"wins_a", wins_a},
            {"decided", decided},
            {"p_value", mwsumm::binomial_two_sided(wins_a, decided)}};
    }

    write_json_report(output, report);
    return 0;
}

// -- qualcode -----------------------------------------------------------------------

int run_qualcode(const std::string& input, const std::string& output) {
    auto items = read_records<mwsumm::CodedItem>(input, mwsumm::kCodesSchema);
    std::map<std::string, std::vector<mwsumm::CodedItem>> by_category;
    std::vector<std::string> order;
    for (const auto& item : items) {
        if (by_category.find(item.category) == by_category.end())
            order.push_back(item.category);
        by_category[item.category].push_back(item);
    }

    json categories = json::array();
    for (const auto& category : order) {
        const auto& group = by_category[category];
        json entry{{"category", category}, {"n", group.size()}};
        try {
            auto stats = mwsumm::cohen_kappa(group);
            entry["percent_agreement"] = stats.percent_agreement;
            entry["kappa"] = stats.kappa;
        } catch (const mwsumm::KappaUndefinedError&) {
            entry["percent_agreement"] = 1.0;
            entry["kappa"] = nullptr;
        }
        auto ranges = mwsumm::bound_ranges(group);
        entry["overall"] = {{"lower", ranges.overall.lower},
                            {"upper", ranges.overall.upper},
                            {"n", ranges.overall.n}};
        json strata = json::object();
        for (const auto& [stratum, range] : ranges.per_stratum)
            strata[stratum] = {{"lower", range.lower},
                               {"upper", range.upper},
                               {"n", range.n}};
        entry["strata"] = strata;
        categories.push_back(std::move(entry));
    }
    write_json_report(output, json{{"categories", categories}});
    return 0;
}

// -- errors -------------------------------------------------------------------------

int run_errors(const std::string& input, const std::string& output,
               const std::string& csv_path) {
    auto labels = read_records<mwsumm::ErrorLabel>(input, mwsumm::kLabelsSchema);
    auto rows = mwsumm::tabulate_errors(labels);

    json table = json::array();
    for (const auto& row : rows) {
        json what = json::object();
        for (const auto& [category, prop] : row.what)
            what[category] = {{"proportion", prop.value}, {"ci", prop.ci_half}};
        json why = json::object();
        for (const auto& [category, prop] : row.why)
            why[category] = {{"proportion", prop.value}, {"ci", prop.ci_half}};
        table.push_back(json{{"method", row.method},
                             {"outcome", row.outcome},
                             {"n", row.n},
                             {"what", what},
                             {"why", why}});
    }
    write_json_report(output, json{{"rows", table}});

    if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        if (!csv) throw mwsumm::IoError("cannot open for writing: " + csv_path);
        csv << "method,outcome,n,meta,category,proportion,ci\n";
        for (const auto& row : rows) {
            for (const auto& [category, prop] : row.what)
                csv << row.method << ',' << row.outcome << ',' << row.n
                    << ",what," << category << ',' << prop.value << ','
                    << prop.ci_half << '\n';
            for (const auto& [category, prop] : row.why)
                csv << row.method << ',' << row.outcome << ',' << row.n
                    << ",why," << category << ',' << prop.value << ','
                    << prop.ci_half << '\n';
        }
    }
    return 0;
}

// -- validate -----------------------------------------------------------------------

int run_validate(const std::string& input) {
    auto violations = mwsumm::validate_schema_file(input);
    if (violations.empty()) {
        std::cout << input << ": ok\n";
        return 0;
    }
    for (const auto& violation : violations)
        std::cout << input << ":" << violation.line << ": " << violation.message
                  << '\n';
    return 1;
}

int classify_exit_code(const std::exception& e) {
    if (dynamic_cast<const mwsumm::IoError*>(&e) != nullptr ||
        dynamic_cast<const mwsumm::TransportError*>(&e) != nullptr ||
        dynamic_cast<const mwsumm::RateLimitedError*>(&e) != nullptr ||
        dynamic_cast<const mwsumm::NotFoundError*>(&e) != nullptr ||
        dynamic_cast<const mwsumm::MalformedXmlError*>(&e) != nullptr ||
        dynamic_cast<const mwsumm::ScorerUnavailableError*>(&e) != nullptr ||
        dynamic_cast<const mwsumm::EmptyCompletionError*>(&e) != nullptr ||
        dynamic_cast<const mwsumm::ContextOverflowError*>(&e) != nullptr)
        return 2;
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wikipedia edit-summary corpus and evaluation toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Config file (INI, one section per subcommand)");
    app.allow_config_extras(false);

    GlobalOptions global;
    app.add_option("--seed", global.seed, "Global seed for all sampling");
    app.add_option("--workers", global.workers, "Worker threads for parallel stages");

    // ingest
    IngestArgs ingest;
    auto* cmd_ingest =
        app.add_subcommand("ingest", "Dump or API -> edits file");
    auto* dump_opt = cmd_ingest->add_option("--dump", ingest.dump_path,
                                            "pages-meta-history XML (.xml or .gz)");
    auto* api_opt = cmd_ingest->add_option("--api", ingest.api_url,
                                           "MediaWiki api.php endpoint URL");
    cmd_ingest->add_option("--revision-ids", ingest.revision_ids_path,
                           "File with one revision id per line (API mode)");
    cmd_ingest->add_option("--output", ingest.output, "Output edits.jsonl")
        ->required();
    cmd_ingest->add_option("--rps", ingest.requests_per_second,
                           "API requests per second");
    cmd_ingest
        ->add_option("--ip-edit-count", ingest.ip_edit_count_mode,
                     "IP editors' edit count: contribs|zero")
        ->check(CLI::IsMember({"contribs", "zero"}));
    dump_opt->excludes(api_opt);

    // diff
    std::string diff_input, diff_output, diff_reject_log;
    auto* cmd_diff = app.add_subcommand("diff", "Edits -> sentence diffs + inputs");
    cmd_diff->add_option("--input", diff_input, "edits.jsonl")->required();
    cmd_diff->add_option("--output", diff_output, "diffs.jsonl")->required();
    cmd_diff->add_option("--reject-log", diff_reject_log,
                         "Where to log marker collisions");

    // curate
    std::string curate_input, curate_output, curate_reject_log;
    mwsumm::CurationConfig curation;
    auto* cmd_curate =
        app.add_subcommand("curate", "Apply cleaning rules and filters");
    cmd_curate->add_option("--input", curate_input, "diffs.jsonl")->required();
    cmd_curate->add_option("--output", curate_output, "kept records")->required();
    cmd_curate->add_option("--reject-log", curate_reject_log, "reject reasons")
        ->required();
    cmd_curate->add_option("--min-summary-chars", curation.min_summary_chars);
    cmd_curate->add_option("--max-summary-chars", curation.max_summary_chars);
    cmd_curate->add_option("--min-editor-edits", curation.min_editor_edits);
    cmd_curate->add_option("--max-input-tokens", curation.max_input_tokens);
    cmd_curate->add_option("--duplicate-cap", curation.duplicate_cap);
    cmd_curate->add_option("--tokenizer", curation.tokenizer);
    cmd_curate->add_option("--auto-summary-prefix", curation.auto_summary_prefixes,
                           "Canned-summary prefixes (repeatable)");
    cmd_curate->add_option("--reverted-tag", curation.reverted_tags);
    cmd_curate->add_option("--revert-tag", curation.revert_tags);
    cmd_curate->add_option("--semi-automated-signature",
                           curation.semi_automated_signatures);

    // synth
    SynthArgs synth;
    auto* cmd_synth =
        app.add_subcommand("synth", "Generate synthetic summaries via an LLM");
    cmd_synth->add_option("--input", synth.input, "diffs.jsonl")->required();
    cmd_synth->add_option("--output", synth.output, "samples.jsonl")->required();
    cmd_synth->add_option("--endpoint", synth.endpoint,
                          "Chat-completions base URL (or $MWSUMM_API_BASE_URL)");
    cmd_synth->add_option("--instruction", synth.instruction_path);
    cmd_synth->add_option("--demonstrations", synth.demonstrations_path);
    cmd_synth->add_option("--checkpoint", synth.checkpoint,
                          "Append-only resume log");
    cmd_synth->add_option("--failures", synth.failures, "Failure log");
    cmd_synth->add_option("--concurrency", synth.concurrency);
    cmd_synth->add_option("--max-inputs", synth.max_inputs);
    cmd_synth->add_option("--model", synth.params.model);
    cmd_synth->add_option("--max-tokens", synth.params.max_tokens);
    cmd_synth->add_option("--temperature", synth.params.temperature);
    cmd_synth->add_option("--top-p", synth.params.top_p);
    cmd_synth->add_option("--frequency-penalty", synth.params.frequency_penalty);
    cmd_synth->add_option("--presence-penalty", synth.params.presence_penalty);
    cmd_synth->add_option("--stop", synth.params.stop);

    // mix
    std::string mix_human, mix_synthetic, mix_output_dir = "mix";
    double mix_fraction = 0.0;
    std::size_t mix_train = 0, mix_val = 0;
    auto* cmd_mix = app.add_subcommand("mix", "Assemble train/val/test splits");
    cmd_mix->add_option("--human", mix_human, "human pool (annotated or samples)")
        ->required();
    cmd_mix->add_option("--synthetic", mix_synthetic, "synthetic samples")
        ->required();
    cmd_mix->add_option("--synthetic-fraction", mix_fraction)->required();
    cmd_mix->add_option("--train", mix_train)->required();
    cmd_mix->add_option("--val", mix_val);
    cmd_mix->add_option("--output-dir", mix_output_dir);

    // eval-auto
    std::string ea_predictions, ea_references, ea_output, ea_scorer_cmd,
        ea_scorer_url;
    bool ea_bootstrap = false;
    auto* cmd_eval_auto =
        app.add_subcommand("eval-auto", "ROUGE and external-scorer reports");
    cmd_eval_auto->add_option("--predictions", ea_predictions,
                              "{revision_id, prediction} lines")
        ->required();
    cmd_eval_auto->add_option("--references", ea_references, "samples.jsonl")
        ->required();
    cmd_eval_auto->add_option("--output", ea_output, "report JSON (- = stdout)");
    cmd_eval_auto->add_option("--scorer-cmd", ea_scorer_cmd,
                              "External scorer subprocess command");
    cmd_eval_auto->add_option("--scorer-url", ea_scorer_url,
                              "External scorer HTTP endpoint");
    cmd_eval_auto->add_flag("--bootstrap", ea_bootstrap,
                            "Bootstrap CIs instead of normal approximation");

    // eval-human
    std::string eh_ballots, eh_output, eh_adjudicator, eh_mode = "post",
                            eh_binomial_a, eh_binomial_b;
    auto* cmd_eval_human =
        app.add_subcommand("eval-human", "Ballot scores, agreement, rankings");
    cmd_eval_human->add_option("--ballots", eh_ballots)->required();
    cmd_eval_human->add_option("--output", eh_output, "report JSON (- = stdout)");
    cmd_eval_human->add_option("--adjudicator", eh_adjudicator,
                               "Annotator id whose ballots supersede");
    cmd_eval_human->add_option("--mode", eh_mode, "post|pre adjudication")
        ->check(CLI::IsMember({"post", "pre"}));
    cmd_eval_human->add_option("--binomial-a", eh_binomial_a,
                               "Method A for the head-to-head binomial test");
    cmd_eval_human->add_option("--binomial-b", eh_binomial_b, "Method B");

    // qualcode
    std::string qc_input, qc_output;
    auto* cmd_qualcode =
        app.add_subcommand("qualcode", "Qualitative-coding agreement report");
    cmd_qualcode->add_option("--input", qc_input, "codes.jsonl")->required();
    cmd_qualcode->add_option("--output", qc_output, "report JSON (- = stdout)");

    // errors
    std::string er_input, er_output, er_csv;
    auto* cmd_errors =
        app.add_subcommand("errors", "Error-analysis tabulation with CIs");
    cmd_errors->add_option("--input", er_input, "labels.jsonl")->required();
    cmd_errors->add_option("--output", er_output, "report JSON (- = stdout)");
    cmd_errors->add_option("--csv", er_csv, "Also write a CSV table");

    // validate
    std::string validate_input;
    auto* cmd_validate =
        app.add_subcommand("validate", "Check a JSONL file against its schema");
    cmd_validate->add_option("--input", validate_input)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Flag/config mistakes are validation errors: exit 1 (0 for --help).
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (cmd_ingest->parsed()) {
            if (ingest.dump_path.empty() &&
                (ingest.api_url.empty() || ingest.revision_ids_path.empty()))
                throw mwsumm::ConfigError(
                    "ingest needs --dump or both --api and --revision-ids");
            return run_ingest(ingest);
        }
        if (cmd_diff->parsed())
            return run_diff(global, diff_input, diff_output, diff_reject_log);
        if (cmd_curate->parsed())
            return run_curate(curate_input, curate_output, curate_reject_log,
                              curation);
        if (cmd_synth->parsed()) return run_synth(synth);
        if (cmd_mix->parsed())
            return run_mix(global, mix_human, mix_synthetic, mix_fraction,
                           mix_train, mix_val, mix_output_dir);
        if (cmd_eval_auto->parsed())
            return run_eval_auto(ea_predictions, ea_references, ea_output,
                                 ea_scorer_cmd, ea_scorer_url, ea_bootstrap,
                                 global.seed);
        if (cmd_eval_human->parsed())
            return run_eval_human(eh_ballots, eh_output, eh_adjudicator, eh_mode,
                                  eh_binomial_a, eh_binomial_b);
        if (cmd_qualcode->parsed()) return run_qualcode(qc_input, qc_output);
        if (cmd_errors->parsed()) return run_errors(er_input, er_output, er_csv);
        if (cmd_validate->parsed()) return run_validate(validate_input);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return classify_exit_code(e);
    }
    return 0;
}
