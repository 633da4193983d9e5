#include "config_json.hpp"

#include "sentinel/errors.hpp"
#include "sentinel/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace sentinel {

using nlohmann::json;

std::string_view to_string(Channel channel) {
    switch (channel) {
    case Channel::PullRequestComment: return "PullRequestComment";
    case Channel::CommitComment: return "CommitComment";
    case Channel::IssueCreation: return "IssueCreation";
    }
    return "?";
}

Channel parse_channel(std::string_view text) {
    std::string key;
    for (char c : text) {
        if (c != '_' && c != '-') key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (key == "pullrequestcomment" || key == "prcomment") return Channel::PullRequestComment;
    if (key == "commitcomment") return Channel::CommitComment;
    if (key == "issuecreation" || key == "issue") return Channel::IssueCreation;
    throw ConfigError("unknown output channel '" + std::string(text) + "'");
}

std::vector<RefPattern> RepoConfig::ref_patterns() const { return with_builtins(user_ref_patterns); }

bool RepoConfig::monitors(std::string_view branch) const {
    return std::find(branches.begin(), branches.end(), branch) != branches.end();
}

void RepoConfig::validate() const {
    const auto name = repo.full_name();
    if (repo.owner.empty() || repo.repo.empty()) throw ConfigError("repository name is empty");
    if (branches.empty()) throw ConfigError(name + ": branches must not be empty");
    if (output_channels.empty()) throw ConfigError(name + ": output_channels must not be empty");
    if (poll_interval < std::chrono::minutes(1)) throw ConfigError(name + ": poll_interval must be at least 1 minute");
    if (!(confidence_floor >= 0.0 && confidence_floor <= 1.0))
        throw ConfigError(name + ": confidence_floor must be within [0, 1]");
}

const RepoConfig* ServiceConfig::find_repo(const RepoId& repo) const {
    for (const auto& r : repos) {
        if (r.repo == repo) return &r;
    }
    return nullptr;
}

void ServiceConfig::validate() const {
    if (port < 0 || port > 65535) throw ConfigError("port out of range");
    if (workers < 0) throw ConfigError("workers must be >= 0");
    std::set<RepoId> seen;
    for (const auto& r : repos) {
        r.validate();
        if (!seen.insert(r.repo).second) throw ConfigError("repository configured twice: " + r.repo.full_name());
    }
    for (const auto& p : profiles) p.validate();
    // Extension clashes surface here rather than at first scan.
    std::set<std::string> exts;
    for (const auto& p : profiles) {
        for (const auto& e : p.file_extensions) {
            if (!exts.insert(e).second) throw ConfigError("extension '" + e + "' claimed by two language profiles");
        }
    }
}

Millis parse_duration(std::string_view text) {
    auto t = text::trim(text);
    std::size_t i = 0;
    while (i < t.size() && (std::isdigit(static_cast<unsigned char>(t[i])) || t[i] == '.')) ++i;
    if (i == 0) throw ConfigError("malformed duration '" + std::string(text) + "'");
    double value = 0;
    try {
        value = std::stod(std::string(t.substr(0, i)));
    } catch (const std::exception&) {
        throw ConfigError("malformed duration '" + std::string(text) + "'");
    }
    const auto unit = text::trim(t.substr(i));
    double scale = 0;
    if (unit.empty() || unit == "s") scale = 1000;
    else if (unit == "ms") scale = 1;
    else if (unit == "m" || unit == "min") scale = 60'000;
    else if (unit == "h") scale = 3'600'000;
    else if (unit == "d") scale = 86'400'000;
    else throw ConfigError("unknown duration unit in '" + std::string(text) + "'");
    return Millis(static_cast<std::int64_t>(value * scale));
}

namespace {

Millis duration_field(const json& v, std::string_view name) {
    if (v.is_number()) return Millis(static_cast<std::int64_t>(v.get<double>() * 1000));
    if (v.is_string()) return parse_duration(v.get<std::string>());
    throw ConfigError(std::string(name) + " must be a duration string or a number of seconds");
}

std::vector<std::string> string_list(const json& v, std::string_view name) {
    if (!v.is_array()) throw ConfigError(std::string(name) + " must be a list of strings");
    std::vector<std::string> out;
    for (const auto& item : v) {
        if (!item.is_string()) throw ConfigError(std::string(name) + " must be a list of strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_relative() && !base.empty()) return base / path;
    return path;
}

LanguageProfile parse_profile(const json& doc) {
    LanguageProfile p;
    p.name = doc.at("name").get<std::string>();
    for (auto& e : string_list(doc.value("file_extensions", json::array()), "file_extensions")) {
        if (!e.empty() && e.front() == '.') e.erase(0, 1);
        p.file_extensions.push_back(text::to_lower_ascii(e));
    }
    p.line_comment_markers = string_list(doc.value("line_comment_markers", json::array()), "line_comment_markers");
    for (const auto& pair : doc.value("block_comment_pairs", json::array())) {
        if (pair.is_array() && pair.size() == 2) {
            p.block_comment_pairs.push_back({pair[0].get<std::string>(), pair[1].get<std::string>()});
        } else {
            p.block_comment_pairs.push_back({pair.at("open").get<std::string>(), pair.at("close").get<std::string>()});
        }
    }
    for (const auto& d : doc.value("string_delimiters", json::array())) {
        StringDelimiter sd;
        if (d.is_string()) {
            sd.delimiter = d.get<std::string>();
        } else {
            sd.delimiter = d.at("delimiter").get<std::string>();
            auto esc = d.value("escape", std::string("\\"));
            sd.escape = esc.empty() ? '\0' : esc.front();
            sd.multiline = d.value("multiline", false);
        }
        p.string_delimiters.push_back(std::move(sd));
    }
    p.validate();
    return p;
}

} // namespace

RepoConfig parse_repo_config(const json& doc) {
    try {
        RepoConfig c;
        c.repo = RepoId::parse(doc.at("repo").get<std::string>());
        c.branches = string_list(doc.value("branches", json::array({"main"})), "branches");
        const json channels = doc.value("output_channels", json::array({"PullRequestComment", "CommitComment", "IssueCreation"}));
        for (const auto& ch : string_list(channels, "output_channels")) c.output_channels.insert(parse_channel(ch));
        int n = 0;
        for (const auto& p : doc.value("user_ref_patterns", json::array())) {
            CaptureMap captures;
            captures.number_group = p.value("number_group", 1);
            if (p.contains("owner_group")) captures.owner_group = p["owner_group"].get<int>();
            if (p.contains("repo_group")) captures.repo_group = p["repo_group"].get<int>();
            if (p.contains("host_group")) captures.host_group = p["host_group"].get<int>();
            auto id = p.value("id", "user-" + std::to_string(n));
            c.user_ref_patterns.push_back(compile_user_pattern(id, p.at("regex").get<std::string>(), captures));
            ++n;
        }
        c.user_onhold_patterns = string_list(doc.value("user_onhold_patterns", json::array()), "user_onhold_patterns");
        c.onhold = OnHoldPatterns::compile(c.user_onhold_patterns);
        if (doc.contains("poll_interval")) c.poll_interval = duration_field(doc["poll_interval"], "poll_interval");
        c.confidence_floor = doc.value("confidence_floor", 0.0);
        if (doc.contains("model_path")) c.model_path = doc["model_path"].get<std::string>();
        c.require_completed = doc.value("require_completed", false);
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("repository block: ") + e.what());
    }
}

ServiceConfig parse_service_document(const json& doc, const std::filesystem::path& base_dir) {
    try {
        ServiceConfig c;
        const json service = doc.value("service", json::object());
        c.bind_address = service.value("bind_address", c.bind_address);
        c.port = service.value("port", c.port);
        if (service.contains("store_path")) c.store_path = resolve(base_dir, service["store_path"].get<std::string>());
        else c.store_path = resolve(base_dir, c.store_path.string());
        c.token_env = service.value("token_env", c.token_env);
        c.webhook_secret_env = service.value("webhook_secret_env", c.webhook_secret_env);
        c.api_base = service.value("api_base", c.api_base);
        if (service.contains("model_path")) c.model_path = resolve(base_dir, service["model_path"].get<std::string>());
        c.workers = service.value("workers", c.workers);
        if (service.contains("request_interval"))
            c.request_interval = duration_field(service["request_interval"], "request_interval");
        if (service.contains("full_scan_interval"))
            c.full_scan_interval = duration_field(service["full_scan_interval"], "full_scan_interval");
        if (service.contains("reservation_timeout"))
            c.reservation_timeout = duration_field(service["reservation_timeout"], "reservation_timeout");

        bool java_enabled = doc.value("java_profile", true);
        if (java_enabled) c.profiles.push_back(java_profile());
        for (const auto& p : doc.value("profiles", json::array())) c.profiles.push_back(parse_profile(p));

        for (const auto& r : doc.value("repos", json::array())) {
            auto repo = parse_repo_config(r);
            if (repo.model_path) repo.model_path = resolve(base_dir, repo.model_path->string());
            c.repos.push_back(std::move(repo));
        }
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

json parse_json_with_comments(std::string_view text, std::string_view what) {
    try {
        return json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string(what) + ": " + e.what());
    }
}

ServiceConfig parse_service_config(std::string_view text, const std::filesystem::path& base_dir) {
    return parse_service_document(parse_json_with_comments(text, "config"), base_dir);
}

ServiceConfig load_service_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_service_config(ss.str(), path.parent_path());
}

} // namespace sentinel
