#pragma once

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "mwsumm/errors.hpp"
#include "mwsumm/http_util.hpp"
#include "mwsumm/jsonl.hpp"
#include "mwsumm/records.hpp"
#include "mwsumm/rng.hpp"

namespace mwsumm {

struct Demonstration {
    std::string input;    // serialized diff
    std::string summary;  // the edit summary it should produce
};

inline void to_json(json& j, const Demonstration& d) {
    j = json{{"input", d.input}, {"summary", d.summary}};
}

inline void from_json(const json& j, Demonstration& d) {
    j.at("input").get_to(d.input);
    j.at("summary").get_to(d.summary);
}

// Five-shot prompt: one system instruction, five fixed (diff, summary)
// demonstrations shared by every generation call in a run, and the target
// diff to summarize.
struct PromptBundle {
    std::string system_instruction;
    std::vector<Demonstration> demonstrations;
    std::string target;
};

struct ChatMessage {
    std::string role;
    std::string content;
};

inline void to_json(json& j, const ChatMessage& m) {
    j = json{{"role", m.role}, {"content", m.content}};
}

// [system] + five user/assistant demonstration turns + [user target]:
// 12 messages in total.
inline std::vector<ChatMessage> build_messages(const PromptBundle& bundle) {
    if (bundle.demonstrations.size() != 5)
        throw BadBundleError("expected 5 demonstrations, got " +
                             std::to_string(bundle.demonstrations.size()));
    std::vector<ChatMessage> messages;
    messages.reserve(12);
    messages.push_back({"system", bundle.system_instruction});
    for (const auto& demo : bundle.demonstrations) {
        messages.push_back({"user", demo.input});
        messages.push_back({"assistant", demo.summary});
    }
    messages.push_back({"user", bundle.target});
    return messages;
}

// Chat-completion request parameters. Defaults are the generation settings
// used for synthetic-data runs; all are overridable.
struct GenerationParams {
    std::string model = "gpt-3.5-turbo";
    int max_tokens = 1000;
    double temperature = 0.0;
    double top_p = 1.0;
    double frequency_penalty = 0.2;
    double presence_penalty = 0.0;
    std::string stop = "\n";
    int n = 1;
    int best_of = 1;
};

struct ChatClientOptions {
    std::string api_key;   // falls back to $MWSUMM_API_KEY
    std::string path = "/v1/chat/completions";
    BackoffPolicy backoff;
    int read_timeout_seconds = 120;
};

// Speaks the de-facto chat-completions JSON wire shape, so any compatible
// provider or local fixture works. Shareable across workers.
class ChatClient {
  public:
    explicit ChatClient(const std::string& base_url, ChatClientOptions options = {})
        : options_(std::move(options)) {
        if (options_.api_key.empty()) {
            const char* env = std::getenv("MWSUMM_API_KEY");
            if (env != nullptr) options_.api_key = env;
        }
        client_ = std::make_unique<httplib::Client>(base_url);
        client_->set_read_timeout(options_.read_timeout_seconds, 0);
    }

    // One completion for the given messages, truncated at the stop
    // sequence. An empty completion is retried once before erroring.
    std::string complete(const std::vector<ChatMessage>& messages,
                         const GenerationParams& params) {
        for (int empty_retries = 0;; ++empty_retries) {
            std::string text = complete_once(messages, params);
            if (!params.stop.empty()) {
                std::size_t cut = text.find(params.stop);
                if (cut != std::string::npos) text.resize(cut);
            }
            if (!text.empty()) return text;
            if (empty_retries >= 1) throw EmptyCompletionError();
        }
    }

    std::string generate_summary(const PromptBundle& bundle,
                                 const GenerationParams& params) {
        return complete(build_messages(bundle), params);
    }

  private:
    std::string complete_once(const std::vector<ChatMessage>& messages,
                              const GenerationParams& params) {
        json body{{"model", params.model},
                  {"messages", messages},
                  {"max_tokens", params.max_tokens},
                  {"temperature", params.temperature},
                  {"top_p", params.top_p},
                  {"frequency_penalty", params.frequency_penalty},
                  {"presence_penalty", params.presence_penalty},
                  {"n", params.n}};
        if (!params.stop.empty()) body["stop"] = params.stop;
        if (params.best_of != 1) body["best_of"] = params.best_of;

        httplib::Headers headers;
        if (!options_.api_key.empty())
            headers.emplace("Authorization", "Bearer " + options_.api_key);

        for (std::size_t attempt = 0;; ++attempt) {
            auto res = client_->Post(options_.path, headers, body.dump(),
                                     "application/json");
            if (!res) {
                if (attempt + 1 >= options_.backoff.max_attempts)
                    throw TransportError("no response from chat endpoint");
                options_.backoff.sleep(attempt);
                continue;
            }
            if (res->status == 429 || res->status >= 500) {
                if (attempt + 1 >= options_.backoff.max_attempts)
                    throw RateLimitedError("chat endpoint kept returning " +
                                           std::to_string(res->status));
                options_.backoff.sleep(attempt);
                continue;
            }
            if (res->status == 400 || res->status == 413) {
                if (looks_like_context_overflow(res->body))
                    throw ContextOverflowError("input exceeds the endpoint's "
                                               "context window");
                throw TransportError("chat endpoint rejected the request: " +
                                     res->body);
            }
            if (res->status != 200)
                throw TransportError("chat endpoint returned " +
                                     std::to_string(res->status));
            try {
                json parsed = json::parse(res->body);
                return parsed.at("choices").at(0).at("message")
                    .value("content", std::string{});
            } catch (const json::exception& e) {
                throw TransportError("bad chat response: " + std::string(e.what()));
            }
        }
    }

    static bool looks_like_context_overflow(const std::string& body) {
        try {
            json parsed = json::parse(body);
            const json& error = parsed.value("error", json::object());
            std::string code = error.value("code", std::string{});
            std::string message = error.value("message", std::string{});
            return code == "context_length_exceeded" ||
                   message.find("context length") != std::string::npos ||
                   message.find("maximum context") != std::string::npos;
        } catch (const json::exception&) {
            return false;
        }
    }

    ChatClientOptions options_;
    std::unique_ptr<httplib::Client> client_;
};

// -- batch generation -------------------------------------------------------------

struct GenerationInput {
    std::int64_t revision_id = 0;
    std::string input;
};

struct GenerationJobOptions {
    std::size_t concurrency = 4;  // in-flight requests
    std::string checkpoint_path;  // append-only success log
    std::string failures_path;    // per-item failures; retried on resume
};

struct GenerationFailure {
    std::int64_t revision_id = 0;
    std::string error;
};

struct GenerationJobResult {
    std::vector<DatasetSample> samples;  // one per succeeded input, input order
    std::vector<GenerationFailure> failures;
    std::size_t resumed_from_checkpoint = 0;
};

// Run the generation job over all inputs with bounded concurrency, using the
// run's fixed instruction and demonstrations (the bundle's target is replaced
// per input). Completed revision ids are appended to the checkpoint as they
// finish, so an interrupted job resumes without duplicating work or output;
// at most one sample per revision id is emitted. Per-item errors are
// collected; only checkpoint I/O failures abort the job.
inline GenerationJobResult run_generation_job(
    const std::vector<GenerationInput>& inputs, ChatClient& client,
    const PromptBundle& bundle, const GenerationParams& params,
    const GenerationJobOptions& options = {}) {
    std::unordered_map<std::int64_t, std::string> summaries;
    if (!options.checkpoint_path.empty()) {
        if (std::ifstream(options.checkpoint_path).good()) {
            JsonlReader reader(options.checkpoint_path);
            while (auto line = reader.next()) {
                summaries[line->at("revision_id").get<std::int64_t>()] =
                    line->at("summary").get<std::string>();
            }
        }
    }

    GenerationJobResult result;
    result.resumed_from_checkpoint = summaries.size();

    std::ofstream checkpoint;
    if (!options.checkpoint_path.empty()) {
        checkpoint.open(options.checkpoint_path, std::ios::app);
        if (!checkpoint)
            throw IoError("cannot open checkpoint: " + options.checkpoint_path);
    }

    // Work list: first occurrence of each revision id not yet checkpointed.
    std::vector<std::size_t> pending;
    {
        std::unordered_set<std::int64_t> seen;
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            if (summaries.count(inputs[i].revision_id) > 0) continue;
            if (!seen.insert(inputs[i].revision_id).second) continue;
            pending.push_back(i);
        }
    }

    std::mutex state_mutex;
    std::atomic<std::size_t> cursor{0};
    std::string fatal_error;

    auto worker = [&]() {
        while (true) {
            {
                std::lock_guard<std::mutex> lock(state_mutex);
                if (!fatal_error.empty()) return;
            }
            std::size_t slot = cursor.fetch_add(1);
            if (slot >= pending.size()) return;
            const GenerationInput& item = inputs[pending[slot]];
            try {
                PromptBundle request = bundle;
                request.target = item.input;
                std::string summary = client.generate_summary(request, params);
                std::lock_guard<std::mutex> lock(state_mutex);
                summaries[item.revision_id] = summary;
                if (checkpoint.is_open()) {
                    json line{{"revision_id", item.revision_id},
                              {"summary", summary}};
                    checkpoint << line.dump() << '\n';
                    checkpoint.flush();
                    if (!checkpoint) {
                        fatal_error = "checkpoint write failed: " +
                                      options.checkpoint_path;
                        return;
                    }
                }
            } catch (const Error& e) {
                std::lock_guard<std::mutex> lock(state_mutex);
                result.failures.push_back({item.revision_id, e.what()});
            }
        }
    };

    const std::size_t threads =
        std::max<std::size_t>(1, std::min(options.concurrency, pending.size()));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (!fatal_error.empty()) throw IoError(fatal_error);

    if (!options.failures_path.empty()) {
        JsonlWriter writer(options.failures_path, "generation_failures");
        for (const auto& failure : result.failures)
            writer.write(json{{"revision_id", failure.revision_id},
                              {"error", failure.error}});
    }

    std::unordered_set<std::int64_t> emitted;
    for (const auto& item : inputs) {
        if (!emitted.insert(item.revision_id).second) continue;
        auto it = summaries.find(item.revision_id);
        if (it == summaries.end()) continue;
        DatasetSample sample;
        sample.input = item.input;
        sample.target = it->second;
        sample.source = SampleSource::synthetic;
        sample.revision_id = item.revision_id;
        result.samples.push_back(std::move(sample));
    }
    return result;
}

// -- quality-check sampling ---------------------------------------------------------

struct QualityCheckFiles {
    std::size_t rows = 0;
};

// Write n rows pairing the human and synthetic summary of the same edit in
// randomized left/right order: a TSV for graders plus a JSON key file
// recording which side is which.
inline QualityCheckFiles sample_quality_check(
    const std::vector<DatasetSample>& human,
    const std::vector<DatasetSample>& synthetic, std::size_t n,
    std::uint64_t seed, const std::string& table_path,
    const std::string& key_path) {
    std::unordered_map<std::int64_t, const DatasetSample*> by_id;
    for (const auto& sample : synthetic) by_id[sample.revision_id] = &sample;
    std::vector<std::pair<const DatasetSample*, const DatasetSample*>> matched;
    for (const auto& sample : human) {
        auto it = by_id.find(sample.revision_id);
        if (it != by_id.end()) matched.emplace_back(&sample, it->second);
    }
    if (matched.size() < n)
        throw InsufficientPoolError("matched human/synthetic", n, matched.size());

    Rng rng(seed);
    auto picks = rng.sample_indices(matched.size(), n);

    std::ofstream table(table_path);
    if (!table) throw IoError("cannot open for writing: " + table_path);
    table << "row\tdiff\tsummary_a\tsummary_b\n";
    json key = json::array();
    auto escape_tabs = [](std::string s) {
        for (char& c : s)
            if (c == '\t' || c == '\n' || c == '\r') c = ' ';
        return s;
    };
    for (std::size_t row = 0; row < picks.size(); ++row) {
        const auto& [human_sample, synthetic_sample] = matched[picks[row]];
        const bool human_left = rng.next_below(2) == 0;
        const DatasetSample* left = human_left ? human_sample : synthetic_sample;
        const DatasetSample* right = human_left ? synthetic_sample : human_sample;
        table << row << '\t' << escape_tabs(human_sample->input) << '\t'
              << escape_tabs(left->target) << '\t' << escape_tabs(right->target)
              << '\n';
        key.push_back(json{{"row", row},
                           {"revision_id", human_sample->revision_id},
                           {"summary_a", human_left ? "human" : "synthetic"},
                           {"summary_b", human_left ? "synthetic" : "human"}});
    }
    if (!table) throw IoError("write failed: " + table_path);

    std::ofstream key_out(key_path);
    if (!key_out) throw IoError("cannot open for writing: " + key_path);
    key_out << key.dump(2) << '\n';

    QualityCheckFiles files;
    files.rows = picks.size();
    return files;
}

// -- prompt assets ------------------------------------------------------------------

inline std::string load_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Instruction text plus the five demonstrations shipped as editable assets.
inline PromptBundle load_prompt_bundle(const std::string& instruction_path,
                                       const std::string& demonstrations_path) {
    PromptBundle bundle;
    bundle.system_instruction = load_text_file(instruction_path);
    while (!bundle.system_instruction.empty() &&
           (bundle.system_instruction.back() == '\n' ||
            bundle.system_instruction.back() == '\r'))
        bundle.system_instruction.pop_back();
    json demos = json::parse(load_text_file(demonstrations_path));
    bundle.demonstrations = demos.get<std::vector<Demonstration>>();
    return bundle;
}

}  // namespace mwsumm
