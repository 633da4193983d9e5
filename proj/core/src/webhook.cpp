#include "sentinel/webhook.hpp"

#include "sentinel/hashing.hpp"
#include "sentinel/text.hpp"

#include <nlohmann/json.hpp>

#include <stdexcept>

namespace sentinel {

using nlohmann::json;

void Headers::set(std::string_view name, std::string value) { values_[text::to_lower_ascii(name)] = std::move(value); }

std::optional<std::string> Headers::get(std::string_view name) const {
    auto it = values_.find(text::to_lower_ascii(name));
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string sign_payload(std::string_view secret, std::string_view body) {
    return "sha256=" + hmac_sha256_hex(secret, body);
}

bool verify_signature(std::string_view secret, std::string_view body, std::string_view header_value) {
    constexpr std::string_view prefix = "sha256=";
    if (!header_value.starts_with(prefix)) return false;
    auto given = text::to_lower_ascii(header_value.substr(prefix.size()));
    return constant_time_equals(hmac_sha256_hex(secret, body), given);
}

namespace {

const json& field(const json& doc, std::string_view path) {
    const json* cur = &doc;
    std::size_t start = 0;
    while (start <= path.size()) {
        auto dot = path.find('.', start);
        auto key = std::string(path.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
        if (!cur->is_object() || !cur->contains(key)) throw std::invalid_argument("missing field " + std::string(path));
        cur = &(*cur)[key];
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return *cur;
}

std::string string_field(const json& doc, std::string_view path) {
    const auto& v = field(doc, path);
    if (!v.is_string()) throw std::invalid_argument(std::string(path) + " is not a string");
    return v.get<std::string>();
}

std::vector<std::string> path_list(const json& commit, const char* key) {
    std::vector<std::string> out;
    if (!commit.contains(key)) return out;
    const auto& v = commit[key];
    if (!v.is_array()) throw std::invalid_argument(std::string("commits[].") + key + " is not a list");
    for (const auto& p : v) {
        if (!p.is_string()) throw std::invalid_argument(std::string("commits[].") + key + " holds a non-string");
        out.push_back(p.get<std::string>());
    }
    return out;
}

} // namespace

WebhookEvent parse_webhook(std::string_view event_name, std::string_view body, std::string delivery_id,
                           std::string_view default_host) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("payload is not JSON: ") + e.what());
    }
    WebhookEvent ev;
    ev.delivery_id = std::move(delivery_id);
    if (event_name == "ping") {
        ev.kind = WebhookKind::Ping;
        return ev;
    }
    if (event_name != "push" && event_name != "pull_request") {
        ev.kind = WebhookKind::Ignored;
        ev.ignored_reason = "event " + std::string(event_name);
        return ev;
    }
    ev.repo = RepoId::parse(string_field(doc, "repository.full_name"), default_host);

    if (event_name == "push") {
        const auto ref = string_field(doc, "ref");
        constexpr std::string_view heads = "refs/heads/";
        if (!ref.starts_with(heads)) {
            ev.kind = WebhookKind::Ignored;
            ev.ignored_reason = "not a branch push: " + ref;
            return ev;
        }
        ev.branch = ref.substr(heads.size());
        ev.push.after_sha = string_field(doc, "after");
        const bool deleted = doc.contains("deleted") && doc["deleted"].is_boolean() && doc["deleted"].get<bool>();
        if (deleted || ev.push.after_sha.find_first_not_of('0') == std::string::npos) {
            ev.kind = WebhookKind::Ignored;
            ev.ignored_reason = "branch deleted";
            return ev;
        }
        if (!text::is_hex_sha(ev.push.after_sha)) throw std::invalid_argument("after is not a commit sha");
        if (doc.contains("commits")) {
            if (!doc["commits"].is_array()) throw std::invalid_argument("commits is not a list");
            for (const auto& c : doc["commits"]) {
                ev.push.commits.push_back({path_list(c, "added"), path_list(c, "modified"), path_list(c, "removed")});
            }
        }
        ev.kind = WebhookKind::Push;
        return ev;
    }
    if (event_name == "pull_request") {
        ev.action = string_field(doc, "action");
        const auto& number = field(doc, "pull_request.number");
        if (!number.is_number_unsigned() && !number.is_number_integer())
            throw std::invalid_argument("pull_request.number is not an integer");
        ev.pull.number = number.get<std::uint64_t>();
        ev.pull.head_sha = string_field(doc, "pull_request.head.sha");
        if (!text::is_hex_sha(ev.pull.head_sha)) throw std::invalid_argument("pull_request.head.sha is not a commit sha");
        if (doc["pull_request"].contains("base") && doc["pull_request"]["base"].contains("ref"))
            ev.branch = doc["pull_request"]["base"]["ref"].get<std::string>();
        if (ev.action == "opened" || ev.action == "synchronize" || ev.action == "reopened") {
            ev.kind = WebhookKind::PullRequest;
        } else {
            ev.kind = WebhookKind::Ignored;
            ev.ignored_reason = "pull request action " + ev.action;
        }
    }
    return ev;
}

std::string make_push_payload(const RepoId& repo, std::string_view branch, std::string_view before,
                              std::string_view after, const std::vector<CommitFiles>& commits) {
    json cs = json::array();
    for (const auto& c : commits) {
        cs.push_back({{"added", c.added}, {"modified", c.modified}, {"removed", c.removed}});
    }
    json doc = {
        {"ref", "refs/heads/" + std::string(branch)},
        {"before", std::string(before)},
        {"after", std::string(after)},
        {"repository", {{"full_name", repo.full_name()}}},
        {"commits", cs},
    };
    return doc.dump();
}

std::string make_pull_request_payload(const RepoId& repo, std::string_view action, std::uint64_t number,
                                      std::string_view head_sha, std::string_view base_branch) {
    json doc = {
        {"action", std::string(action)},
        {"number", number},
        {"pull_request",
         {{"number", number}, {"head", {{"sha", std::string(head_sha)}}}, {"base", {{"ref", std::string(base_branch)}}}}},
        {"repository", {{"full_name", repo.full_name()}}},
    };
    return doc.dump();
}

} // namespace sentinel
