#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "mwsumm/curate.hpp"
#include "mwsumm/jsonl.hpp"
#include "mwsumm/records.hpp"
#include "mwsumm/schema.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

fs::path work_dir() {
    auto dir = fs::temp_directory_path() / "mwsumm_cli_tests";
    fs::create_directories(dir);
    return dir;
}

RunResult run_cli(const std::string& args) {
    const char* bin = std::getenv("MWSUMM_BIN");
    REQUIRE(bin != nullptr);
    auto out_path = work_dir() / "stdout.txt";
    auto err_path = work_dir() / "stderr.txt";
    std::string command = std::string(bin) + " " + args + " > " +
                          out_path.string() + " 2> " + err_path.string();
    int status = std::system(command.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_path);
    result.err = slurp(err_path);
    return result;
}

mwsumm::DiffRecord base_diff_record(std::int64_t revision_id) {
    mwsumm::DiffRecord r;
    r.edit.revision_id = revision_id;
    r.edit.parent_revision_id = revision_id - 1;
    r.edit.page_title = "Page";
    r.edit.editor_name = "Editor" + std::to_string(revision_id);
    r.edit.editor_edit_count = 100;
    r.edit.summary_raw = "added a new paragraph " + std::to_string(revision_id);
    r.edit.timestamp = "2023-08-10T00:00:00Z";
    r.diff.added = {"New sentence " + std::to_string(revision_id) + "."};
    r.input = "<new_text> New sentence " + std::to_string(revision_id) + ".";
    return r;
}

}  // namespace

TEST_CASE("curate rejects the six-rule fixture with one reason each", "[cli]") {
    auto dir = work_dir();
    auto input = dir / "rules_fixture.jsonl";
    {
        mwsumm::JsonlWriter writer(input.string(), mwsumm::kDiffsSchema);

        // (i) no sentence-level change
        auto rule_i = base_diff_record(1);
        rule_i.diff = {};
        rule_i.input = "";
        writer.write(json(rule_i));

        // (ii) auto-generated summary
        auto rule_ii = base_diff_record(2);
        rule_ii.edit.summary_raw = "Redirected page to [[Elsewhere]]";
        writer.write(json(rule_ii));

        // (iii) bot editor
        auto rule_iii = base_diff_record(3);
        rule_iii.edit.editor_is_bot = true;
        writer.write(json(rule_iii));

        // (iv) reverted edit
        auto rule_iv = base_diff_record(4);
        rule_iv.edit.tags.insert("mw-reverted");
        writer.write(json(rule_iv));

        // (v) edit that made a revert
        auto rule_v = base_diff_record(5);
        rule_v.edit.tags.insert("mw-rollback");
        writer.write(json(rule_v));

        // (vi) blank summary after section-marker stripping
        auto rule_vi = base_diff_record(6);
        rule_vi.edit.summary_raw = "/* Early life */";
        writer.write(json(rule_vi));
    }

    auto kept = dir / "rules_kept.jsonl";
    auto rejects = dir / "rules_rejects.jsonl";
    auto result = run_cli("curate --input " + input.string() + " --output " +
                          kept.string() + " --reject-log " + rejects.string());
    CHECK(result.exit_code == 0);

    CHECK(mwsumm::read_jsonl<mwsumm::AnnotatedEdit>(kept.string()).empty());
    auto rejections = mwsumm::read_jsonl<mwsumm::Rejection>(rejects.string());
    REQUIRE(rejections.size() == 6);
    std::map<std::int64_t, std::string> reasons;
    for (const auto& r : rejections) reasons[r.revision_id] = r.reason;
    CHECK(reasons[1] == "i");
    CHECK(reasons[2] == "ii");
    CHECK(reasons[3] == "iii");
    CHECK(reasons[4] == "iv");
    CHECK(reasons[5] == "v");
    CHECK(reasons[6] == "vi");
}

TEST_CASE("curate totals add up and thresholds are flag-tunable", "[cli]") {
    auto dir = work_dir();
    auto input = dir / "threshold_fixture.jsonl";
    {
        mwsumm::JsonlWriter writer(input.string(), mwsumm::kDiffsSchema);
        for (int i = 1; i <= 8; ++i) writer.write(json(base_diff_record(i)));
    }
    auto kept = dir / "t_kept.jsonl";
    auto rejects = dir / "t_rejects.jsonl";

    auto result = run_cli("curate --input " + input.string() + " --output " +
                          kept.string() + " --reject-log " + rejects.string());
    CHECK(result.exit_code == 0);
    CHECK(mwsumm::read_jsonl<mwsumm::AnnotatedEdit>(kept.string()).size() == 8);

    // Raising the minimum edit count rejects everything.
    result = run_cli("curate --input " + input.string() + " --output " +
                     kept.string() + " --reject-log " + rejects.string() +
                     " --min-editor-edits 500");
    CHECK(result.exit_code == 0);
    CHECK(mwsumm::read_jsonl<mwsumm::AnnotatedEdit>(kept.string()).empty());
    auto rejections = mwsumm::read_jsonl<mwsumm::Rejection>(rejects.string());
    REQUIRE(rejections.size() == 8);
    for (const auto& r : rejections) CHECK(r.reason == "low_edit_count");
}

TEST_CASE("config files bind to subcommand options", "[cli]") {
    auto dir = work_dir();
    auto input = dir / "config_fixture.jsonl";
    {
        mwsumm::JsonlWriter writer(input.string(), mwsumm::kDiffsSchema);
        writer.write(json(base_diff_record(1)));
    }
    auto config = dir / "pipeline.ini";
    {
        std::ofstream out(config);
        out << "[curate]\nmin-editor-edits=500\n";
    }
    auto kept = dir / "c_kept.jsonl";
    auto rejects = dir / "c_rejects.jsonl";
    auto result = run_cli("--config " + config.string() + " curate --input " +
                          input.string() + " --output " + kept.string() +
                          " --reject-log " + rejects.string());
    CHECK(result.exit_code == 0);
    CHECK(mwsumm::read_jsonl<mwsumm::AnnotatedEdit>(kept.string()).empty());

    // Unknown config keys are rejected.
    auto bad_config = dir / "bad.ini";
    {
        std::ofstream out(bad_config);
        out << "[curate]\nno-such-threshold=1\n";
    }
    result = run_cli("--config " + bad_config.string() + " curate --input " +
                     input.string() + " --output " + kept.string() +
                     " --reject-log " + rejects.string());
    CHECK(result.exit_code == 1);
}

TEST_CASE("mix reports the manifest and is reproducible", "[cli]") {
    auto dir = work_dir();
    auto human = dir / "human.jsonl";
    auto synthetic = dir / "synthetic.jsonl";
    {
        mwsumm::JsonlWriter hw(human.string(), mwsumm::kSamplesSchema);
        mwsumm::JsonlWriter sw(synthetic.string(), mwsumm::kSamplesSchema);
        for (int i = 0; i < 60; ++i) {
            mwsumm::DatasetSample s;
            s.revision_id = i;
            s.input = "<new_text> H" + std::to_string(i) + ".";
            s.target = "human target " + std::to_string(i);
            s.source = mwsumm::SampleSource::human;
            hw.write(json(s));
            s.revision_id = 1000 + i;
            s.input = "<new_text> S" + std::to_string(i) + ".";
            s.target = "synthetic target " + std::to_string(i);
            s.source = mwsumm::SampleSource::synthetic;
            sw.write(json(s));
        }
    }

    auto out1 = dir / "mix1";
    std::string mix_args = " mix --human " + human.string() + " --synthetic " +
                           synthetic.string() +
                           " --synthetic-fraction 0.75 --train 20 --val 4";
    auto result =
        run_cli("--seed 9" + mix_args + " --output-dir " + out1.string());
    REQUIRE(result.exit_code == 0);

    auto manifest = json::parse(result.out);
    CHECK(manifest["train"]["synthetic"] == 15);
    CHECK(manifest["train"]["human"] == 5);
    CHECK(manifest["val"]["synthetic"] == 3);

    auto out2 = dir / "mix2";
    result = run_cli("--seed 9" + mix_args + " --output-dir " + out2.string());
    REQUIRE(result.exit_code == 0);
    for (const char* name : {"train.jsonl", "val.jsonl", "test.jsonl"}) {
        CHECK(slurp(out1 / name) == slurp(out2 / name));
    }

    // Disjoint splits by revision id.
    std::set<std::int64_t> seen;
    for (const char* name : {"train.jsonl", "val.jsonl", "test.jsonl"}) {
        for (const auto& s :
             mwsumm::read_jsonl<mwsumm::DatasetSample>((out1 / name).string()))
            CHECK(seen.insert(s.revision_id).second);
    }
}

TEST_CASE("eval-human reproduces the two-method head-to-head fit", "[cli]") {
    auto dir = work_dir();
    auto ballots = dir / "bt_ballots.jsonl";
    {
        mwsumm::JsonlWriter writer(ballots.string(), mwsumm::kBallotsSchema);
        for (int i = 0; i < 4; ++i) {
            mwsumm::Ballot b;
            b.sample_id = "s" + std::to_string(i);
            b.annotator_id = "a1";
            b.methods = {"modelA", "modelB"};
            b.best = i < 3 ? "modelA" : "modelB";
            b.worst = i < 3 ? "modelB" : "modelA";
            writer.write(json(b));
        }
    }
    auto report_path = dir / "bt_report.json";
    auto result =
        run_cli("eval-human --ballots " + ballots.string() + " --output " +
                report_path.string() + " --binomial-a modelA --binomial-b modelB");
    REQUIRE(result.exit_code == 0);

    auto report = json::parse(slurp(report_path));
    double ua = report["plackett_luce"]["utilities"]["modelA"];
    double ub = report["plackett_luce"]["utilities"]["modelB"];
    CHECK(ua / ub == Catch::Approx(3.0).margin(1e-2));
    CHECK(report["binomial"]["wins_a"] == 3);
    CHECK(report["binomial"]["decided"] == 4);
}

TEST_CASE("eval-human adjudication supersedes annotator ballots", "[cli]") {
    auto dir = work_dir();
    auto ballots = dir / "adj_ballots.jsonl";
    {
        mwsumm::JsonlWriter writer(ballots.string(), mwsumm::kBallotsSchema);
        auto add = [&writer](const std::string& sample, const std::string& who,
                             const std::string& best, const std::string& worst) {
            mwsumm::Ballot b;
            b.sample_id = sample;
            b.annotator_id = who;
            b.methods = {"m1", "m2", "m3", "m4"};
            b.best = best;
            b.worst = worst;
            writer.write(json(b));
        };
        add("s1", "a1", "m1", "m4");
        add("s1", "a2", "m2", "m4");
        add("s1", "boss", "m3", "m4");  // adjudicated: m3 wins s1
        add("s2", "a1", "m1", "m2");
    }
    auto report_path = dir / "adj_report.json";
    auto result = run_cli("eval-human --ballots " + ballots.string() +
                          " --adjudicator boss --output " + report_path.string());
    REQUIRE(result.exit_code == 0);
    auto report = json::parse(slurp(report_path));

    // Post-adjudication: s1 counts once, via the adjudicator: m3 best.
    for (const auto& entry : report["scores"]) {
        if (entry["metric"] == "m3") {
            CHECK(entry["n"] == 2);  // s1 (adjudicated) + s2
            CHECK(entry["mean"] == Catch::Approx((1.0 + 0.5) / 2.0));
        }
    }
    // Agreement is computed between the real annotators only.
    for (auto& [key, value] : report["kendall_tau_b"].items())
        CHECK(key.find("boss") == std::string::npos);
}

TEST_CASE("validate reports ok and violations", "[cli]") {
    auto dir = work_dir();
    auto good = dir / "good.jsonl";
    {
        mwsumm::JsonlWriter writer(good.string(), mwsumm::kBallotsSchema);
        mwsumm::Ballot b;
        b.sample_id = "s1";
        b.annotator_id = "a1";
        b.methods = {"m1", "m2", "m3", "m4"};
        b.best = "m1";
        b.worst = "m2";
        writer.write(json(b));
    }
    auto result = run_cli("validate --input " + good.string());
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("ok") != std::string::npos);

    auto bad = dir / "bad.jsonl";
    {
        std::ofstream out(bad);
        out << R"({"schema":"ballots","version":1})" << '\n';
        out << R"({"sample_id":"s1","annotator_id":"a1","methods":["m1","m2","m3","m4"],"best":"m1","worst":"m1"})"
            << '\n';
    }
    result = run_cli("validate --input " + bad.string());
    CHECK(result.exit_code == 1);
    CHECK(result.out.find(":2:") != std::string::npos);
}

TEST_CASE("qualcode groups by category with strata", "[cli]") {
    auto dir = work_dir();
    auto codes = dir / "codes.jsonl";
    {
        mwsumm::JsonlWriter writer(codes.string(), mwsumm::kCodesSchema);
        auto add = [&writer](const std::string& category, const char* stratum,
                             bool a, bool b, int copies) {
            for (int i = 0; i < copies; ++i)
                writer.write(json{{"item_id", category + std::to_string(i)},
                                  {"category", category},
                                  {"stratum", stratum},
                                  {"coder_a", a},
                                  {"coder_b", b}});
        };
        add("what", "IP", true, true, 10);
        add("what", "newcomer", false, false, 10);
        add("why", "IP", true, false, 10);
        add("why", "newcomer", false, true, 10);
    }
    auto report_path = dir / "qualcode.json";
    auto result = run_cli("qualcode --input " + codes.string() + " --output " +
                          report_path.string());
    REQUIRE(result.exit_code == 0);
    auto report = json::parse(slurp(report_path));
    REQUIRE(report["categories"].size() == 2);
    const auto& what = report["categories"][0];
    CHECK(what["category"] == "what");
    CHECK(what["percent_agreement"] == Catch::Approx(1.0));
    CHECK(what["kappa"] == Catch::Approx(1.0));
    CHECK(what["overall"]["lower"] == Catch::Approx(0.5));
    CHECK(what["strata"]["IP"]["lower"] == Catch::Approx(1.0));
    const auto& why = report["categories"][1];
    CHECK(why["percent_agreement"] == Catch::Approx(0.0));
    CHECK(why["overall"]["upper"] == Catch::Approx(1.0));
}

TEST_CASE("errors subcommand writes the tabulation and CSV", "[cli]") {
    auto dir = work_dir();
    auto labels = dir / "labels.jsonl";
    {
        mwsumm::JsonlWriter writer(labels.string(), mwsumm::kLabelsSchema);
        for (int i = 0; i < 13; ++i)
            writer.write(json{{"method", "human"},
                              {"outcome", "win"},
                              {"what", "Correct"},
                              {"why", "Correct"}});
        for (int i = 0; i < 7; ++i)
            writer.write(json{{"method", "human"},
                              {"outcome", "win"},
                              {"what", "Unexhaustive"},
                              {"why", "Missing"}});
    }
    auto report_path = dir / "errors.json";
    auto csv_path = dir / "errors.csv";
    auto result = run_cli("errors --input " + labels.string() + " --output " +
                          report_path.string() + " --csv " + csv_path.string());
    REQUIRE(result.exit_code == 0);
    auto report = json::parse(slurp(report_path));
    REQUIRE(report["rows"].size() == 1);
    CHECK(report["rows"][0]["what"]["Correct"]["proportion"] ==
          Catch::Approx(0.65));
    std::string csv = slurp(csv_path);
    CHECK(csv.find("human,win,20,what,Correct,0.65") != std::string::npos);
}

TEST_CASE("exit codes distinguish validation from I/O failures", "[cli]") {
    CHECK(run_cli("curate --no-such-flag 2>&1").exit_code == 1);
    CHECK(run_cli("validate --input /no/such/file.jsonl").exit_code == 2);
    auto dir = work_dir();
    CHECK(run_cli("diff --input /no/such/edits.jsonl --output " +
                  (dir / "x.jsonl").string())
              .exit_code == 2);
}

TEST_CASE("diff subcommand serializes and logs marker collisions", "[cli]") {
    auto dir = work_dir();
    auto edits = dir / "edits.jsonl";
    {
        mwsumm::JsonlWriter writer(edits.string(), mwsumm::kEditsSchema);
        mwsumm::CollectedEdit ordinary;
        ordinary.edit.revision_id = 11;
        ordinary.edit.parent_revision_id = 10;
        ordinary.edit.page_title = "P";
        ordinary.edit.editor_name = "A";
        ordinary.edit.editor_edit_count = 50;
        ordinary.edit.summary_raw = "expanded";
        ordinary.edit.timestamp = "2023-08-01T00:00:00Z";
        ordinary.texts.old_text = "Kept sentence stays.";
        ordinary.texts.new_text = "Kept sentence stays. Fresh sentence added.";
        writer.write(json(ordinary));

        mwsumm::CollectedEdit collision = ordinary;
        collision.edit.revision_id = 21;
        collision.edit.parent_revision_id = 20;
        collision.texts.new_text =
            "Kept sentence stays. Contains <sent_sep> the marker.";
        writer.write(json(collision));
    }
    auto diffs = dir / "diffs.jsonl";
    auto rejects = dir / "diff_rejects.jsonl";
    auto result = run_cli("diff --input " + edits.string() + " --output " +
                          diffs.string() + " --reject-log " + rejects.string());
    REQUIRE(result.exit_code == 0);

    auto records = mwsumm::read_jsonl<mwsumm::DiffRecord>(diffs.string());
    REQUIRE(records.size() == 1);
    CHECK(records[0].edit.revision_id == 11);
    CHECK(records[0].input == "<new_text> Fresh sentence added.");

    auto rejections = mwsumm::read_jsonl<mwsumm::Rejection>(rejects.string());
    REQUIRE(rejections.size() == 1);
    CHECK(rejections[0].revision_id == 21);
    CHECK(rejections[0].reason == "marker_collision");
}
