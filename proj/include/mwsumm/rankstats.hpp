#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "mwsumm/errors.hpp"
#include "mwsumm/metrics.hpp"
#include "mwsumm/records.hpp"

namespace mwsumm {

// -- best/worst ballot scoring ------------------------------------------------

// 1 for the best choice, 0 for the worst, 0.5 for the two middles.
inline double ballot_score(const Ballot& ballot, const std::string& method) {
    if (method == ballot.best) return 1.0;
    if (method == ballot.worst) return 0.0;
    return 0.5;
}

struct MethodScore {
    std::string method;
    MetricReport report;
};

// Per-method mean score over all ballots, with the usual 95% CI. On the
// standard 4-method ballot the per-ballot scores sum to 2.
inline std::vector<MethodScore> score_ballots(const std::vector<Ballot>& ballots) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<double>> scores;
    for (const auto& ballot : ballots) {
        validate(ballot);
        for (const auto& method : ballot.methods) {
            if (scores.find(method) == scores.end()) order.push_back(method);
            scores[method].push_back(ballot_score(ballot, method));
        }
    }
    std::vector<MethodScore> out;
    out.reserve(order.size());
    for (const auto& method : order)
        out.push_back({method, aggregate(scores[method], method)});
    return out;
}

// -- Kendall's tau-b -----------------------------------------------------------

// Rank vector over named items; equal ranks are ties. A ballot maps to
// (best 1, middles 2.5, worst 4).
struct PartialRanking {
    std::vector<std::string> methods;
    std::vector<double> ranks;
};

inline PartialRanking ranking_from_ballot(const Ballot& ballot) {
    validate(ballot);
    PartialRanking r;
    r.methods = ballot.methods;
    r.ranks.reserve(ballot.methods.size());
    for (const auto& method : ballot.methods) {
        if (method == ballot.best)
            r.ranks.push_back(1.0);
        else if (method == ballot.worst)
            r.ranks.push_back(4.0);
        else
            r.ranks.push_back(2.5);
    }
    return r;
}

// Tie-corrected rank correlation over all item pairs:
//   tau_b = (C - D) / sqrt((n0 - t_a)(n0 - t_b)).
// Throws DegenerateRanking when one side has every pair tied.
inline double kendall_tau_b(const PartialRanking& a, const PartialRanking& b) {
    const std::size_t m = a.methods.size();
    if (b.methods.size() != m) throw MethodMismatchError();
    std::unordered_map<std::string, double> rank_b;
    for (std::size_t i = 0; i < m; ++i) rank_b[b.methods[i]] = b.ranks[i];

    std::vector<double> x(m), y(m);
    for (std::size_t i = 0; i < m; ++i) {
        auto it = rank_b.find(a.methods[i]);
        if (it == rank_b.end()) throw MethodMismatchError();
        x[i] = a.ranks[i];
        y[i] = it->second;
    }

    long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const double dx = x[i] - x[j];
            const double dy = y[i] - y[j];
            if (dx == 0.0) ++ties_x;
            if (dy == 0.0) ++ties_y;
            if (dx == 0.0 || dy == 0.0) continue;
            if (dx * dy > 0.0)
                ++concordant;
            else
                ++discordant;
        }
    }
    const long n0 = static_cast<long>(m * (m - 1) / 2);
    const long denom_x = n0 - ties_x;
    const long denom_y = n0 - ties_y;
    if (denom_x == 0 || denom_y == 0) throw DegenerateRankingError();
    return static_cast<double>(concordant - discordant) /
           std::sqrt(static_cast<double>(denom_x) * static_cast<double>(denom_y));
}

// Agreement between two annotators: per-sample tau-b over the samples both
// rated, averaged.
inline double mean_kendall_tau_b(const std::vector<Ballot>& annotator_a,
                                 const std::vector<Ballot>& annotator_b) {
    std::unordered_map<std::string, const Ballot*> by_sample;
    for (const auto& ballot : annotator_b) by_sample[ballot.sample_id] = &ballot;
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& ballot : annotator_a) {
        auto it = by_sample.find(ballot.sample_id);
        if (it == by_sample.end()) continue;
        sum += kendall_tau_b(ranking_from_ballot(ballot),
                             ranking_from_ballot(*it->second));
        ++n;
    }
    if (n == 0) throw EmptyInputError();
    return sum / static_cast<double>(n);
}

// -- qualitative-coding agreement ----------------------------------------------

struct AgreementStats {
    double percent_agreement = 0.0;
    double kappa = 0.0;
};

// Percent agreement and Cohen's kappa for two coders with binary codes.
// Chance agreement uses the marginal products of the 2x2 table.
inline AgreementStats cohen_kappa(const std::vector<CodedItem>& items) {
    if (items.empty()) throw EmptyInputError();
    const double n = static_cast<double>(items.size());
    double both = 0, neither = 0, a_yes = 0, b_yes = 0;
    for (const auto& item : items) {
        a_yes += item.coder_a ? 1 : 0;
        b_yes += item.coder_b ? 1 : 0;
        if (item.coder_a && item.coder_b) ++both;
        if (!item.coder_a && !item.coder_b) ++neither;
    }
    const double p_o = (both + neither) / n;
    const double pa = a_yes / n;
    const double pb = b_yes / n;
    const double p_e = pa * pb + (1.0 - pa) * (1.0 - pb);
    if (p_e == 1.0) throw KappaUndefinedError();
    return {p_o, (p_o - p_e) / (1.0 - p_e)};
}

struct BoundRange {
    double lower = 0.0;  // both coders marked
    double upper = 0.0;  // at least one coder marked
    std::size_t n = 0;
};

struct BoundRanges {
    BoundRange overall;
    std::map<std::string, BoundRange> per_stratum;
};

inline BoundRanges bound_ranges(const std::vector<CodedItem>& items) {
    if (items.empty()) throw EmptyInputError();
    auto tally = [](BoundRange& range, const CodedItem& item) {
        range.lower += (item.coder_a && item.coder_b) ? 1.0 : 0.0;
        range.upper += (item.coder_a || item.coder_b) ? 1.0 : 0.0;
        ++range.n;
    };
    BoundRanges out;
    for (const auto& item : items) {
        tally(out.overall, item);
        tally(out.per_stratum[to_string(item.stratum)], item);
    }
    auto finish = [](BoundRange& range) {
        range.lower /= static_cast<double>(range.n);
        range.upper /= static_cast<double>(range.n);
    };
    finish(out.overall);
    for (auto& [stratum, range] : out.per_stratum) finish(range);
    return out;
}

// -- Plackett-Luce with a tied middle pair --------------------------------------

struct PlackettLuceOptions {
    double tolerance = 1e-8;        // max log-utility change at convergence
    std::size_t max_iterations = 10000;
    double damping = 1e-9;          // L2 on log-utilities
};

struct PlackettLuceResult {
    std::vector<std::string> methods;
    std::vector<double> utilities;        // normalized to sum to 1
    std::vector<double> objective_trace;  // damped log-likelihood, monotone
    std::size_t iterations = 0;
    std::vector<std::string> degenerate_methods;
};

// A ballot as ordered preference groups: groups[0] beats groups[1] beats ...
// and members of one group are tied. A best/worst ballot over 4 methods is
// ([best], [mid, mid], [worst]); the test-only 2-method reduction is
// ([best], [worst]).
using RankedGroups = std::vector<std::vector<std::size_t>>;

namespace detail {

// Log-likelihood and gradient (w.r.t. log-utilities) of one ballot,
// marginalizing over all orderings consistent with the tie groups:
//   P(ballot) = sum over linear extensions of prod_t u[s_t] / sum_remaining.
struct BallotTerm {
    double log_likelihood = 0.0;
    std::vector<double> gradient;  // indexed like utilities
};

inline void enumerate_extensions(const RankedGroups& groups, std::size_t g,
                                 std::vector<std::size_t>& prefix,
                                 std::vector<std::vector<std::size_t>>& out) {
    if (g == groups.size()) {
        out.push_back(prefix);
        return;
    }
    std::vector<std::size_t> group = groups[g];
    std::sort(group.begin(), group.end());
    do {
        const std::size_t before = prefix.size();
        prefix.insert(prefix.end(), group.begin(), group.end());
        enumerate_extensions(groups, g + 1, prefix, out);
        prefix.resize(before);
    } while (std::next_permutation(group.begin(), group.end()));
}

inline BallotTerm ballot_term(const RankedGroups& groups,
                              const std::vector<double>& utilities) {
    std::vector<std::vector<std::size_t>> extensions;
    std::vector<std::size_t> prefix;
    enumerate_extensions(groups, 0, prefix, extensions);

    const std::size_t dim = utilities.size();
    double total = 0.0;
    std::vector<double> probs;
    std::vector<std::vector<double>> grads;
    probs.reserve(extensions.size());
    for (const auto& order : extensions) {
        double prob = 1.0;
        std::vector<double> grad(dim, 0.0);
        double remaining = 0.0;
        for (std::size_t idx : order) remaining += utilities[idx];
        // The last stage's factor is u/u = 1 and its gradient is 0.
        for (std::size_t t = 0; t + 1 < order.size(); ++t) {
            prob *= utilities[order[t]] / remaining;
            grad[order[t]] += 1.0;
            for (std::size_t s = t; s < order.size(); ++s)
                grad[order[s]] -= utilities[order[s]] / remaining;
            remaining -= utilities[order[t]];
        }
        probs.push_back(prob);
        grads.push_back(std::move(grad));
        total += prob;
    }

    BallotTerm term;
    term.gradient.assign(dim, 0.0);
    term.log_likelihood = std::log(total);
    for (std::size_t e = 0; e < extensions.size(); ++e) {
        const double weight = probs[e] / total;
        for (std::size_t j = 0; j < dim; ++j)
            term.gradient[j] += weight * grads[e][j];
    }
    return term;
}

struct Objective {
    double value = 0.0;
    std::vector<double> gradient;
};

inline double objective_value(const std::vector<RankedGroups>& ballots,
                              const std::vector<double>& theta, double damping) {
    std::vector<double> u(theta.size());
    for (std::size_t j = 0; j < theta.size(); ++j) u[j] = std::exp(theta[j]);
    double value = 0.0;
    for (const auto& groups : ballots)
        value += ballot_term(groups, u).log_likelihood;
    for (double t : theta) value -= 0.5 * damping * t * t;
    return value;
}

inline Objective objective_with_gradient(const std::vector<RankedGroups>& ballots,
                                         const std::vector<double>& theta,
                                         double damping) {
    std::vector<double> u(theta.size());
    for (std::size_t j = 0; j < theta.size(); ++j) u[j] = std::exp(theta[j]);
    Objective obj;
    obj.gradient.assign(theta.size(), 0.0);
    for (const auto& groups : ballots) {
        BallotTerm term = ballot_term(groups, u);
        obj.value += term.log_likelihood;
        for (std::size_t j = 0; j < theta.size(); ++j)
            obj.gradient[j] += term.gradient[j];
    }
    for (std::size_t j = 0; j < theta.size(); ++j) {
        obj.value -= 0.5 * damping * theta[j] * theta[j];
        obj.gradient[j] -= damping * theta[j];
    }
    return obj;
}

}  // namespace detail

// Maximum-likelihood utilities by monotone gradient ascent on log-utilities
// with backtracking line search. Every accepted step increases the damped
// log-likelihood, so objective_trace is non-decreasing by construction.
inline PlackettLuceResult fit_plackett_luce_groups(
    const std::vector<RankedGroups>& ballots,
    std::vector<std::string> method_names,
    const PlackettLuceOptions& options = {}) {
    if (ballots.empty()) throw EmptyInputError();
    const std::size_t dim = method_names.size();

    PlackettLuceResult result;
    result.methods = std::move(method_names);

    std::vector<double> theta(dim, 0.0);
    double obj = detail::objective_value(ballots, theta, options.damping);
    result.objective_trace.push_back(obj);

    double step = 1.0;
    bool converged = false;
    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
        detail::Objective current =
            detail::objective_with_gradient(ballots, theta, options.damping);
        double grad_norm_sq = 0.0;
        double grad_max = 0.0;
        for (double g : current.gradient) {
            grad_norm_sq += g * g;
            grad_max = std::max(grad_max, std::abs(g));
        }
        // Cap the per-coordinate move at 1 so a single step cannot jump
        // onto the saturated boundary plateau.
        double trial_step = step * 2.0;
        if (grad_max > 0.0) trial_step = std::min(trial_step, 1.0 / grad_max);
        std::vector<double> candidate(dim);
        bool accepted = false;
        double candidate_obj = obj;
        for (int halvings = 0; halvings < 64; ++halvings) {
            for (std::size_t j = 0; j < dim; ++j)
                candidate[j] = theta[j] + trial_step * current.gradient[j];
            candidate_obj =
                detail::objective_value(ballots, candidate, options.damping);
            if (candidate_obj >= obj + 1e-4 * trial_step * grad_norm_sq) {
                accepted = true;
                break;
            }
            trial_step *= 0.5;
        }
        if (!accepted) {
            // No ascent direction at floating-point resolution.
            converged = true;
            result.iterations = iter;
            break;
        }
        double max_delta = 0.0;
        for (std::size_t j = 0; j < dim; ++j)
            max_delta = std::max(max_delta,
                                 std::abs(trial_step * current.gradient[j]));
        theta = candidate;
        obj = candidate_obj;
        step = trial_step;
        result.objective_trace.push_back(obj);
        result.iterations = iter + 1;
        if (max_delta < options.tolerance) {
            converged = true;
            break;
        }
    }
    if (!converged) throw NonConvergenceError(options.max_iterations);

    double total = 0.0;
    result.utilities.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        result.utilities[j] = std::exp(theta[j]);
        total += result.utilities[j];
    }
    for (double& u : result.utilities) u /= total;
    return result;
}

// Fit from best/worst ballots. Methods never chosen best or always chosen
// worst sit on the likelihood boundary; they are reported, not rejected,
// since the damping keeps the fit finite.
inline PlackettLuceResult fit_plackett_luce(
    const std::vector<Ballot>& ballots, const PlackettLuceOptions& options = {}) {
    if (ballots.empty()) throw EmptyInputError();
    std::vector<std::string> methods;
    std::unordered_map<std::string, std::size_t> index;
    for (const auto& ballot : ballots) {
        validate(ballot);
        for (const auto& method : ballot.methods) {
            if (index.emplace(method, methods.size()).second)
                methods.push_back(method);
        }
    }

    std::vector<RankedGroups> groups;
    groups.reserve(ballots.size());
    std::unordered_map<std::string, std::size_t> best_count, worst_count,
        appearance_count;
    for (const auto& ballot : ballots) {
        RankedGroups g;
        g.push_back({index.at(ballot.best)});
        std::vector<std::size_t> middle;
        for (const auto& method : ballot.methods) {
            ++appearance_count[method];
            if (method != ballot.best && method != ballot.worst)
                middle.push_back(index.at(method));
        }
        if (!middle.empty()) g.push_back(std::move(middle));
        g.push_back({index.at(ballot.worst)});
        groups.push_back(std::move(g));
        ++best_count[ballot.best];
        ++worst_count[ballot.worst];
    }

    PlackettLuceResult result =
        fit_plackett_luce_groups(groups, methods, options);
    for (const auto& method : methods) {
        if (best_count[method] == 0)
            result.degenerate_methods.push_back(method + " (never best)");
        if (worst_count[method] == appearance_count[method])
            result.degenerate_methods.push_back(method + " (always worst)");
    }
    return result;
}

// -- exact binomial test ---------------------------------------------------------

namespace detail {

inline double log_choose(std::uint64_t n, std::uint64_t k) {
    return std::lgamma(static_cast<double>(n) + 1.0) -
           std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace detail

// Two-sided exact binomial test: the sum of P(X = i) over all outcomes no
// more likely than the observed one, X ~ Binomial(n, p0).
inline double binomial_two_sided(std::uint64_t k, std::uint64_t n,
                                 double p0 = 0.5) {
    if (k > n) throw Error("k must be <= n");
    if (n == 0) return 1.0;
    if (p0 <= 0.0) return k == 0 ? 1.0 : 0.0;
    if (p0 >= 1.0) return k == n ? 1.0 : 0.0;
    // At p0 = 1/2 the distribution is symmetric; canonicalizing k makes
    // binomial_two_sided(k, n) == binomial_two_sided(n-k, n) bit-exact.
    if (p0 == 0.5) k = std::min(k, n - k);

    const double log_p = std::log(p0);
    const double log_q = std::log1p(-p0);
    auto log_pmf = [&](std::uint64_t i) {
        return detail::log_choose(n, i) + static_cast<double>(i) * log_p +
               static_cast<double>(n - i) * log_q;
    };
    // Relative slack absorbs rounding when comparing equally-likely tails.
    const double threshold = log_pmf(k) + 1e-7;
    double p_value = 0.0;
    for (std::uint64_t i = 0; i <= n; ++i) {
        const double lp = log_pmf(i);
        if (lp <= threshold) p_value += std::exp(lp);
    }
    return std::min(p_value, 1.0);
}

// -- error-analysis tabulation -----------------------------------------------------

inline const std::vector<std::string>& what_categories() {
    static const std::vector<std::string> categories = {
        "Correct", "No change", "Not specific", "Unclear", "Unexhaustive",
        "Unrelated"};
    return categories;
}

inline const std::vector<std::string>& why_categories() {
    static const std::vector<std::string> categories = {"Correct", "Incorrect",
                                                        "Missing"};
    return categories;
}

inline const std::vector<std::string>& outcome_categories() {
    static const std::vector<std::string> categories = {"win", "lose",
                                                        "neither"};
    return categories;
}

struct ErrorLabel {
    std::string method;
    std::string outcome;  // win | lose | neither
    std::string what;
    std::string why;
};

inline void to_json(json& j, const ErrorLabel& l) {
    j = json{{"method", l.method},
             {"outcome", l.outcome},
             {"what", l.what},
             {"why", l.why}};
}

inline void from_json(const json& j, ErrorLabel& l) {
    j.at("method").get_to(l.method);
    j.at("outcome").get_to(l.outcome);
    j.at("what").get_to(l.what);
    j.at("why").get_to(l.why);
}

struct Proportion {
    double value = 0.0;
    double ci_half = 0.0;  // 1.96 * sqrt(p(1-p)/n)
};

struct ErrorTableRow {
    std::string method;
    std::string outcome;
    std::size_t n = 0;
    std::map<std::string, Proportion> what;
    std::map<std::string, Proportion> why;
};

// Per (method, outcome): the proportion of each what/why category with a
// normal-approximation 95% CI. Proportions sum to 1 within a meta-category.
inline std::vector<ErrorTableRow> tabulate_errors(
    const std::vector<ErrorLabel>& labels) {
    auto assert_known = [](const std::vector<std::string>& taxonomy,
                           const std::string& value) {
        if (std::find(taxonomy.begin(), taxonomy.end(), value) == taxonomy.end())
            throw UnknownCategoryError(value);
    };

    std::vector<std::pair<std::string, std::string>> row_order;
    std::map<std::pair<std::string, std::string>, std::vector<const ErrorLabel*>>
        by_row;
    for (const auto& label : labels) {
        assert_known(outcome_categories(), label.outcome);
        assert_known(what_categories(), label.what);
        assert_known(why_categories(), label.why);
        auto key = std::make_pair(label.method, label.outcome);
        if (by_row.find(key) == by_row.end()) row_order.push_back(key);
        by_row[key].push_back(&label);
    }

    std::vector<ErrorTableRow> rows;
    rows.reserve(row_order.size());
    for (const auto& key : row_order) {
        const auto& group = by_row[key];
        ErrorTableRow row;
        row.method = key.first;
        row.outcome = key.second;
        row.n = group.size();
        const double n = static_cast<double>(row.n);
        auto fill = [&](const std::vector<std::string>& taxonomy,
                        std::map<std::string, Proportion>& out,
                        auto selector) {
            for (const auto& category : taxonomy) {
                double count = 0.0;
                for (const ErrorLabel* label : group)
                    if (selector(*label) == category) ++count;
                Proportion prop;
                prop.value = count / n;
                prop.ci_half =
                    1.96 * std::sqrt(prop.value * (1.0 - prop.value) / n);
                out[category] = prop;
            }
        };
        fill(what_categories(), row.what,
             [](const ErrorLabel& l) { return l.what; });
        fill(why_categories(), row.why,
             [](const ErrorLabel& l) { return l.why; });
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace mwsumm
