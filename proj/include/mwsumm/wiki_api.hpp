#pragma once

#include <cstdlib>
#include <memory>
#include <string>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "mwsumm/errors.hpp"
#include "mwsumm/http_util.hpp"
#include "mwsumm/rate_limit.hpp"
#include "mwsumm/records.hpp"

namespace mwsumm {

struct EditorEditCount {
    std::int64_t count = 0;
    bool is_anonymous = false;
};

struct WikiApiOptions {
    double requests_per_second = 5.0;
    BackoffPolicy backoff;
    std::string user_agent;  // falls back to $MWSUMM_USER_AGENT
    // Per-IP contribution count for anonymous editors; when false, IP
    // editors report 0 edits.
    bool ip_edit_count_from_contribs = true;
};

// Read-only MediaWiki Action API client (action=query). Safe to share
// across fetch workers: the rate limiter is internally synchronized and
// each request goes through it.
class WikiApiClient {
  public:
    explicit WikiApiClient(const std::string& endpoint, WikiApiOptions options = {})
        : options_(std::move(options)),
          limiter_(std::make_shared<TokenBucket>(options_.requests_per_second,
                                                 options_.requests_per_second)) {
        SplitUrl split = split_url(endpoint);
        api_path_ = split.path;
        client_ = std::make_unique<httplib::Client>(split.origin);
        client_->set_read_timeout(60, 0);
        if (options_.user_agent.empty()) {
            const char* env = std::getenv("MWSUMM_USER_AGENT");
            options_.user_agent = env != nullptr && *env != '\0'
                                      ? env
                                      : "mwsumm/0.1 (corpus toolkit)";
        }
        client_->set_default_headers({{"User-Agent", options_.user_agent}});
    }

    // Fetch one edit: the revision's metadata plus the parent and child
    // texts. Revert-related tags are copied verbatim from the response.
    std::pair<EditRecord, RevisionPair> fetch_edit(std::int64_t revision_id) {
        json rev = fetch_revision(revision_id);
        if (rev.value("texthidden", false) || rev.value("suppressed", false))
            throw NotFoundError("revision " + std::to_string(revision_id) +
                                " has deleted text");

        EditRecord record;
        record.revision_id = rev.at("revid").get<std::int64_t>();
        record.parent_revision_id = rev.value("parentid", std::int64_t{0});
        record.page_title = rev.value("page_title", std::string{});
        record.editor_name = rev.value("user", std::string{});
        record.editor_is_anonymous = rev.value("anon", false);
        record.summary_raw = rev.value("comment", std::string{});
        record.timestamp = rev.value("timestamp", std::string{});
        for (const auto& tag : rev.value("tags", json::array()))
            record.tags.insert(tag.get<std::string>());

        RevisionPair pair;
        pair.new_text = revision_content(rev);
        if (record.parent_revision_id != 0) {
            json parent = fetch_revision(record.parent_revision_id);
            if (!parent.value("texthidden", false))
                pair.old_text = revision_content(parent);
        }

        if (record.editor_is_anonymous) {
            EditorEditCount count = fetch_editor_edit_count(record.editor_name);
            record.editor_edit_count = count.count;
        } else if (!record.editor_name.empty()) {
            json user = fetch_user(record.editor_name);
            record.editor_edit_count = user.value("editcount", std::int64_t{0});
            for (const auto& group : user.value("groups", json::array()))
                if (group.get<std::string>() == "bot") record.editor_is_bot = true;
        }
        return {std::move(record), std::move(pair)};
    }

    // Edit count from list=users; IP editors are counted through their
    // contributions (or reported as 0, per configuration).
    EditorEditCount fetch_editor_edit_count(const std::string& editor_name) {
        json response = get({{"action", "query"},
                             {"format", "json"},
                             {"formatversion", "2"},
                             {"list", "users"},
                             {"ususers", editor_name},
                             {"usprop", "editcount|groups"}});
        const json& users = response.at("query").at("users");
        if (users.empty()) throw NotFoundError("user " + editor_name);
        const json& user = users.at(0);
        if (user.value("invalid", false)) {
            // Invalid user name: an IP editor.
            EditorEditCount result;
            result.is_anonymous = true;
            if (options_.ip_edit_count_from_contribs)
                result.count = count_contributions(editor_name);
            return result;
        }
        if (user.value("missing", false))
            throw NotFoundError("user " + editor_name);
        return {user.value("editcount", std::int64_t{0}), false};
    }

  private:
    json fetch_revision(std::int64_t revision_id) {
        json response = get({{"action", "query"},
                             {"format", "json"},
                             {"formatversion", "2"},
                             {"prop", "revisions"},
                             {"revids", std::to_string(revision_id)},
                             {"rvprop", "ids|timestamp|user|comment|tags|content|flags"},
                             {"rvslots", "main"}});
        const json& query = response.at("query");
        if (query.contains("badrevids"))
            throw NotFoundError("revision " + std::to_string(revision_id));
        for (const auto& page : query.value("pages", json::array())) {
            for (const auto& rev : page.value("revisions", json::array())) {
                json out = rev;
                out["page_title"] = page.value("title", std::string{});
                return out;
            }
        }
        throw NotFoundError("revision " + std::to_string(revision_id));
    }

    static std::string revision_content(const json& rev) {
        if (rev.contains("slots"))
            return rev.at("slots").at("main").value("content", std::string{});
        return rev.value("content", std::string{});
    }

    json fetch_user(const std::string& name) {
        json response = get({{"action", "query"},
                             {"format", "json"},
                             {"formatversion", "2"},
                             {"list", "users"},
                             {"ususers", name},
                             {"usprop", "editcount|groups"}});
        const json& users = response.at("query").at("users");
        if (users.empty() || users.at(0).value("missing", false))
            throw NotFoundError("user " + name);
        return users.at(0);
    }

    std::int64_t count_contributions(const std::string& editor_name) {
        std::int64_t total = 0;
        std::string continue_token;
        do {
            httplib::Params params{{"action", "query"},
                                   {"format", "json"},
                                   {"formatversion", "2"},
                                   {"list", "usercontribs"},
                                   {"ucuser", editor_name},
                                   {"uclimit", "500"},
                                   {"ucprop", "ids"}};
            if (!continue_token.empty()) params.emplace("uccontinue", continue_token);
            json response = get(params);
            total += static_cast<std::int64_t>(
                response.at("query").value("usercontribs", json::array()).size());
            continue_token =
                response.contains("continue")
                    ? response["continue"].value("uccontinue", std::string{})
                    : std::string{};
        } while (!continue_token.empty());
        return total;
    }

    json get(const httplib::Params& params) {
        for (std::size_t attempt = 0;; ++attempt) {
            limiter_->acquire();
            auto res = client_->Get(api_path_, params, httplib::Headers{});
            if (!res) {
                if (attempt + 1 >= options_.backoff.max_attempts)
                    throw TransportError("no response from API endpoint");
                options_.backoff.sleep(attempt);
                continue;
            }
            if (res->status == 429 || res->status >= 500) {
                if (attempt + 1 >= options_.backoff.max_attempts) {
                    if (res->status == 429)
                        throw RateLimitedError("API kept returning 429");
                    throw TransportError("API returned " +
                                         std::to_string(res->status));
                }
                options_.backoff.sleep(attempt);
                continue;
            }
            if (res->status != 200)
                throw TransportError("API returned " + std::to_string(res->status));
            try {
                return json::parse(res->body);
            } catch (const json::parse_error& e) {
                throw TransportError("API returned invalid JSON: " +
                                     std::string(e.what()));
            }
        }
    }

    WikiApiOptions options_;
    std::shared_ptr<TokenBucket> limiter_;
    std::unique_ptr<httplib::Client> client_;
    std::string api_path_;
};

}  // namespace mwsumm
