#pragma once

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <cstring>
#include <string>
#include <utility>
#include <vector>

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "mwsumm/errors.hpp"
#include "mwsumm/records.hpp"
#include "mwsumm/rng.hpp"

namespace mwsumm {

// Mean with a normal-approximation 95% confidence interval,
// mean +/- 1.96 * s / sqrt(n), s the sample standard deviation.
inline MetricReport aggregate(std::vector<double> per_sample,
                              std::string metric_name = "") {
    if (per_sample.empty()) throw EmptyInputError();
    const std::size_t n = per_sample.size();
    double sum = 0.0;
    for (double x : per_sample) sum += x;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double x : per_sample) ss += (x - mean) * (x - mean);
    const double stddev = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    const double half = 1.96 * stddev / std::sqrt(static_cast<double>(n));

    MetricReport report;
    report.metric_name = std::move(metric_name);
    report.mean = mean;
    report.ci_low = mean - half;
    report.ci_high = mean + half;
    report.n = n;
    report.per_sample = std::move(per_sample);
    return report;
}

// Bootstrap percentile interval, available behind the CLI flag as an
// alternative to the normal approximation.
inline MetricReport aggregate_bootstrap(std::vector<double> per_sample,
                                        std::string metric_name = "",
                                        std::size_t resamples = 2000,
                                        std::uint64_t seed = 0) {
    if (per_sample.empty()) throw EmptyInputError();
    const std::size_t n = per_sample.size();
    double sum = 0.0;
    for (double x : per_sample) sum += x;

    Rng rng(seed);
    std::vector<double> means;
    means.reserve(resamples);
    for (std::size_t r = 0; r < resamples; ++r) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            s += per_sample[rng.next_below(n)];
        means.push_back(s / static_cast<double>(n));
    }
    std::sort(means.begin(), means.end());

    MetricReport report;
    report.metric_name = std::move(metric_name);
    report.mean = sum / static_cast<double>(n);
    report.ci_low = means[static_cast<std::size_t>(0.025 * (resamples - 1))];
    report.ci_high = means[static_cast<std::size_t>(0.975 * (resamples - 1))];
    report.n = n;
    report.per_sample = std::move(per_sample);
    return report;
}

struct ScorePair {
    std::string candidate;
    std::string reference;
};

namespace detail {

inline void validate_scores(const std::vector<double>& scores) {
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!(scores[i] >= 0.0 && scores[i] <= 1.0))
            throw ScoreOutOfRangeError(i, scores[i]);
    }
}

// Line-oriented child process: one NDJSON request per line on stdin, one
// NDJSON response per line on stdout.
class SubprocessScorer {
  public:
    explicit SubprocessScorer(const std::string& command) {
        // A scorer that exits mid-batch must surface as ScorerUnavailable,
        // not kill the process.
        signal(SIGPIPE, SIG_IGN);
        int to_child[2];
        int from_child[2];
        if (pipe(to_child) != 0 || pipe(from_child) != 0)
            throw ScorerUnavailableError("pipe: " + std::string(strerror(errno)));
        pid_ = fork();
        if (pid_ < 0)
            throw ScorerUnavailableError("fork: " + std::string(strerror(errno)));
        if (pid_ == 0) {
            dup2(to_child[0], STDIN_FILENO);
            dup2(from_child[1], STDOUT_FILENO);
            close(to_child[0]);
            close(to_child[1]);
            close(from_child[0]);
            close(from_child[1]);
            execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        close(to_child[0]);
        close(from_child[1]);
        in_ = fdopen(from_child[0], "r");
        out_ = fdopen(to_child[1], "w");
        if (in_ == nullptr || out_ == nullptr)
            throw ScorerUnavailableError("fdopen failed");
    }

    ~SubprocessScorer() {
        if (out_ != nullptr) fclose(out_);
        if (in_ != nullptr) fclose(in_);
        if (pid_ > 0) waitpid(pid_, nullptr, 0);
    }

    SubprocessScorer(const SubprocessScorer&) = delete;
    SubprocessScorer& operator=(const SubprocessScorer&) = delete;

    double score(const ScorePair& pair) {
        nlohmann::json request{{"candidate", pair.candidate},
                               {"reference", pair.reference}};
        std::string line = request.dump();
        line.push_back('\n');
        if (fwrite(line.data(), 1, line.size(), out_) != line.size() ||
            fflush(out_) != 0)
            throw ScorerUnavailableError("scorer closed its input");
        std::string response;
        int c;
        while ((c = fgetc(in_)) != EOF && c != '\n')
            response.push_back(static_cast<char>(c));
        if (response.empty() && c == EOF)
            throw ScorerUnavailableError("scorer closed its output");
        try {
            return nlohmann::json::parse(response).at("score").get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw ScorerUnavailableError("bad scorer response: " + response);
        }
    }

  private:
    pid_t pid_ = -1;
    FILE* in_ = nullptr;
    FILE* out_ = nullptr;
};

}  // namespace detail

// Delegate scoring to an external command speaking the NDJSON protocol
// {"candidate":..., "reference":...} -> {"score": x}. Order-preserving; all
// scores must lie in [0,1].
inline std::vector<double> external_score_command(
    const std::vector<ScorePair>& pairs, const std::string& command) {
    std::vector<double> scores;
    if (pairs.empty()) return scores;
    detail::SubprocessScorer scorer(command);
    scores.reserve(pairs.size());
    for (const auto& pair : pairs) scores.push_back(scorer.score(pair));
    detail::validate_scores(scores);
    return scores;
}

// The HTTP variant of the scorer protocol lives in scorer_http.hpp so that
// numeric code does not drag in the HTTP client.

}  // namespace mwsumm
