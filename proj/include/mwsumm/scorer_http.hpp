#pragma once

#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "mwsumm/errors.hpp"
#include "mwsumm/http_util.hpp"
#include "mwsumm/metrics.hpp"

namespace mwsumm {

// HTTP variant of the external-scorer protocol: POST each pair as JSON to
// the endpoint, expect {"score": x} back. Sequential, order-preserving.
inline std::vector<double> external_score_http(
    const std::vector<ScorePair>& pairs, const std::string& url) {
    std::vector<double> scores;
    if (pairs.empty()) return scores;
    SplitUrl split = split_url(url);
    httplib::Client client(split.origin);
    client.set_read_timeout(120, 0);
    scores.reserve(pairs.size());
    for (const auto& pair : pairs) {
        nlohmann::json request{{"candidate", pair.candidate},
                               {"reference", pair.reference}};
        auto res = client.Post(split.path, request.dump(), "application/json");
        if (!res || res->status != 200)
            throw ScorerUnavailableError(
                "scorer endpoint " + url + " returned " +
                (res ? std::to_string(res->status) : "no response"));
        try {
            scores.push_back(
                nlohmann::json::parse(res->body).at("score").get<double>());
        } catch (const nlohmann::json::exception&) {
            throw ScorerUnavailableError("bad scorer response: " + res->body);
        }
    }
    detail::validate_scores(scores);
    return scores;
}

}  // namespace mwsumm
