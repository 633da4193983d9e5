#include "sentinel/harness.hpp"

#include "config_json.hpp"
#include "sentinel/errors.hpp"
#include "sentinel/text.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <fstream>
#include <sstream>

namespace sentinel {

using nlohmann::json;

std::string_view to_string(ScenarioStep::Action action) {
    using A = ScenarioStep::Action;
    switch (action) {
    case A::SeedIssue: return "seed_issue";
    case A::CloseIssue: return "close_issue";
    case A::ReopenIssue: return "reopen_issue";
    case A::Push: return "push";
    case A::OpenPr: return "open_pr";
    case A::AdvanceClock: return "advance_clock";
    case A::Poll: return "poll";
    case A::InjectFailure: return "inject_failure";
    case A::ExpectPost: return "expect_post";
    case A::ExpectNoPost: return "expect_no_post";
    }
    return "?";
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ScenarioStep::Action parse_action(const std::string& name) {
    using A = ScenarioStep::Action;
    for (auto a : {A::SeedIssue, A::CloseIssue, A::ReopenIssue, A::Push, A::OpenPr, A::AdvanceClock, A::Poll,
                   A::InjectFailure, A::ExpectPost, A::ExpectNoPost}) {
        if (to_string(a) == name) return a;
    }
    throw ConfigError("unknown scenario action '" + name + "'");
}

TargetKind parse_target_kind(const std::string& s) {
    if (s == "pr" || s == "pull_request" || s == "PullRequestComment") return TargetKind::PullRequest;
    if (s == "commit" || s == "CommitComment") return TargetKind::Commit;
    if (s == "issue" || s == "IssueCreation") return TargetKind::NewIssue;
    throw ConfigError("unknown post kind '" + s + "'");
}

std::string_view kind_name(TargetKind k) {
    switch (k) {
    case TargetKind::PullRequest: return "pr";
    case TargetKind::Commit: return "commit";
    case TargetKind::NewIssue: return "issue";
    }
    return "?";
}

ExpectedPost parse_expected(const json& j) {
    ExpectedPost e;
    if (j.contains("kind")) e.kind = parse_target_kind(j["kind"].get<std::string>());
    if (j.contains("contains")) {
        if (j["contains"].is_string()) e.contains.push_back(j["contains"].get<std::string>());
        else e.contains = j["contains"].get<std::vector<std::string>>();
    }
    return e;
}

void parse_files(const json& j, const std::filesystem::path& base, ScenarioStep& step) {
    if (j.contains("directory")) {
        const auto dir = base / j["directory"].get<std::string>();
        if (!std::filesystem::is_directory(dir)) throw ConfigError("no such directory " + dir.string());
        for (const auto& f : local_tree(dir)) step.files[f.path] = f.fetch();
    }
    if (j.contains("files")) {
        for (const auto& [path, value] : j["files"].items()) {
            if (value.is_null()) step.files[path] = std::nullopt;
            else if (value.is_string()) step.files[path] = value.get<std::string>();
            else step.files[path] = read_file(base / value.at("file").get<std::string>());
        }
    }
}

ScenarioStep parse_step(const json& j, const std::filesystem::path& base) {
    using A = ScenarioStep::Action;
    ScenarioStep s;
    s.action = parse_action(j.at("action").get<std::string>());
    switch (s.action) {
    case A::SeedIssue:
        s.issue = IssueKey::parse(j.at("issue").get<std::string>());
        s.state = parse_issue_state(j.value("state", std::string("Open")));
        break;
    case A::CloseIssue:
        s.issue = IssueKey::parse(j.at("issue").get<std::string>());
        s.reason = j.value("reason", s.reason);
        break;
    case A::ReopenIssue: s.issue = IssueKey::parse(j.at("issue").get<std::string>()); break;
    case A::Push:
    case A::OpenPr:
        s.repo = RepoId::parse(j.at("repo").get<std::string>());
        s.branch = j.value("branch", s.branch);
        s.base = j.value("base", s.base);
        s.number = j.value("number", std::uint64_t{0});
        if (s.action == A::OpenPr && s.number == 0) throw ConfigError("open_pr needs a number");
        parse_files(j, base, s);
        s.corrupt_signature = j.value("corrupt_signature", false);
        s.replay = j.value("replay", false);
        break;
    case A::AdvanceClock: {
        const auto& by = j.at("by");
        s.by = by.is_number() ? Millis(static_cast<std::int64_t>(by.get<double>() * 1000))
                              : parse_duration(by.get<std::string>());
        break;
    }
    case A::Poll: break;
    case A::InjectFailure:
        s.failure = parse_failure_kind(j.at("kind").get<std::string>());
        s.op = parse_forge_op(j.at("op").get<std::string>());
        s.count = j.value("count", 1);
        break;
    case A::ExpectPost:
        if (j.contains("posts")) {
            for (const auto& p : j["posts"]) s.posts.push_back(parse_expected(p));
        } else {
            s.posts.push_back(parse_expected(j));
        }
        if (s.posts.empty()) throw ConfigError("expect_post lists no posts");
        break;
    case A::ExpectNoPost: break;
    }
    return s;
}

std::string describe(const OutboxEntry& e) {
    auto body = text::split_lines(e.body);
    return std::string(kind_name(e.target.kind)) + " " + e.target.to_string() + ": " +
           (body.empty() ? std::string() : std::string(body.front()));
}

} // namespace

Scenario Scenario::parse(std::string_view text, const std::filesystem::path& base_dir) {
    const auto doc = parse_json_with_comments(text, "scenario");
    try {
        Scenario s;
        s.name = doc.value("name", std::string("unnamed"));
        s.config = parse_service_document(doc.value("config", json::object()), base_dir);
        s.config.workers = 0;
        s.webhook_secret = doc.value("webhook_secret", s.webhook_secret);
        if (!doc.contains("steps") || !doc["steps"].is_array()) throw ConfigError("scenario has no steps");
        for (const auto& step : doc["steps"]) s.steps.push_back(parse_step(step, base_dir));
        return s;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
}

Scenario Scenario::load(const std::filesystem::path& path) {
    return parse(read_file(path), path.parent_path());
}

Harness::Harness(const Scenario& scenario, std::shared_ptr<const Classifier> classifier, HarnessOptions options)
    : scenario_(scenario), clock_(options.start_time), forge_(clock_) {
    if (options.journal_path) forge_.attach_journal(*options.journal_path);
    store_ = std::make_unique<WatchStore>(options.store_path, options.fault_hook);
    auto config = scenario.config;
    config.workers = 0;
    service_ = std::make_unique<BotService>(config, forge_, *store_, clock_, std::move(classifier),
                                            scenario.webhook_secret, options.fault_hook);
    delivery_counter_ = 0;
    last_delivery_.clear();
    checked_posts_ = forge_.outbox().size();
    scenario_delivery_prefix_ = options.delivery_prefix;
}

std::string Harness::next_delivery(bool replay) {
    if (!replay || last_delivery_.empty()) {
        last_delivery_ = scenario_delivery_prefix_ + "-" + std::to_string(++delivery_counter_);
    }
    return last_delivery_;
}

WebhookResult Harness::emit_signed_webhook(std::string_view event, const std::string& payload, WebhookOptions options) {
    return send_webhook(event, payload, next_delivery(options.replay), options.corrupt_signature);
}

WebhookResult Harness::send_webhook(std::string_view event, const std::string& payload, const std::string& delivery,
                                    bool corrupt_signature) {
    Headers headers;
    auto signature = sign_payload(scenario_.webhook_secret, payload);
    if (corrupt_signature) signature.back() = signature.back() == '0' ? '1' : '0';
    headers.set(kSignatureHeader, signature);
    headers.set(kDeliveryHeader, delivery);
    headers.set(kEventHeader, std::string(event));
    return service_->handle_webhook(payload, headers);
}

std::string Harness::branch_head(const RepoId& repo, const std::string& branch) const {
    auto it = heads_.find({repo, branch});
    return it == heads_.end() ? std::string() : it->second;
}

ScenarioResult Harness::run_step(const ScenarioStep& step, std::size_t index) {
    using A = ScenarioStep::Action;
    ScenarioResult result;
    auto fail = [&](std::string message) {
        result.passed = false;
        result.failed_step = index;
        result.message = "step " + std::to_string(index) + " (" + std::string(to_string(step.action)) + "): " + message;
        return result;
    };

    switch (step.action) {
    case A::SeedIssue: forge_.seed_issue(step.issue, step.state); break;
    case A::CloseIssue: forge_.close_issue(step.issue, step.reason); break;
    case A::ReopenIssue: forge_.reopen_issue(step.issue); break;
    case A::Push: {
        const auto parent = branch_head(step.repo, step.branch);
        CommitFiles files;
        for (const auto& [path, content] : step.files) {
            const bool existed = !parent.empty() && forge_.file_at(step.repo, parent, path).has_value();
            if (!content) files.removed.push_back(path);
            else if (existed) files.modified.push_back(path);
            else files.added.push_back(path);
        }
        const auto sha = forge_.commit(step.repo, parent, step.files);
        heads_[{step.repo, step.branch}] = sha;
        forge_.set_branch(step.repo, step.branch, sha);
        const auto before = parent.empty() ? std::string(40, '0') : parent;
        auto payload = make_push_payload(step.repo, step.branch, before, sha, {files});
        if (offline_) {
            replayed_ = ReplayedWebhook{"push", payload, next_delivery(step.replay), step.corrupt_signature};
            break;
        }
        emit_signed_webhook("push", payload, {step.corrupt_signature, step.replay});
        service_->run_pending();
        break;
    }
    case A::OpenPr: {
        const auto base_sha = branch_head(step.repo, step.base);
        const auto head = forge_.commit(step.repo, base_sha, step.files);
        forge_.open_pull_request(step.repo, step.number, base_sha, head);
        auto payload = make_pull_request_payload(step.repo, "opened", step.number, head, step.base);
        if (offline_) {
            replayed_ = ReplayedWebhook{"pull_request", payload, next_delivery(step.replay), step.corrupt_signature};
            break;
        }
        emit_signed_webhook("pull_request", payload, {step.corrupt_signature, step.replay});
        service_->run_pending();
        break;
    }
    case A::AdvanceClock:
        clock_.advance(step.by);
        if (!offline_) service_->tick();
        break;
    case A::Poll:
        if (!offline_) service_->poll_watched_issues();
        break;
    case A::InjectFailure: forge_.inject_failure(step.failure, step.op, step.count); break;
    case A::ExpectPost:
    case A::ExpectNoPost: {
        if (offline_) break;
        const auto outbox = forge_.outbox();
        std::vector<OutboxEntry> window(outbox.begin() + static_cast<std::ptrdiff_t>(checked_posts_), outbox.end());
        checked_posts_ = outbox.size();
        std::string actual;
        for (const auto& e : window) actual += "\n    " + describe(e);
        if (step.action == A::ExpectNoPost) {
            if (!window.empty()) return fail("expected no posts, got " + std::to_string(window.size()) + ":" + actual);
            break;
        }
        if (window.size() != step.posts.size()) {
            return fail("expected " + std::to_string(step.posts.size()) + " post(s), got " +
                        std::to_string(window.size()) + (actual.empty() ? "" : ":" + actual));
        }
        std::vector<bool> used(window.size(), false);
        for (const auto& want : step.posts) {
            bool matched = false;
            for (std::size_t i = 0; i < window.size() && !matched; ++i) {
                if (used[i]) continue;
                if (want.kind && window[i].target.kind != *want.kind) continue;
                bool all = true;
                for (const auto& needle : want.contains) {
                    if (window[i].body.find(needle) == std::string::npos) all = false;
                }
                if (all) matched = used[i] = true;
            }
            if (!matched) {
                std::string wanted = want.kind ? std::string(kind_name(*want.kind)) : "any";
                for (const auto& c : want.contains) wanted += " containing '" + c + "'";
                return fail("no post matches " + wanted + "; actual:" + actual);
            }
        }
        break;
    }
    }
    return result;
}

void Harness::resume_step(const ScenarioStep& step) {
    using A = ScenarioStep::Action;
    switch (step.action) {
    case A::Push:
    case A::OpenPr:
        if (replayed_) {
            send_webhook(replayed_->event, replayed_->payload, replayed_->delivery, replayed_->corrupt_signature);
            service_->run_pending();
        }
        break;
    case A::AdvanceClock: service_->tick(); break;
    case A::Poll: service_->poll_watched_issues(); break;
    default: break;
    }
    replayed_.reset();
}

void Harness::replay_world(const ScenarioStep& step, std::size_t index) {
    replayed_.reset();
    offline_ = true;
    try {
        run_step(step, index);
    } catch (...) {
        offline_ = false;
        throw;
    }
    offline_ = false;
}

ScenarioResult Harness::run() {
    ScenarioResult result;
    for (std::size_t i = 0; i < scenario_.steps.size(); ++i) {
        result = run_step(scenario_.steps[i], i);
        if (!result.passed) break;
    }
    result.outbox = forge_.outbox();
    return result;
}

} // namespace sentinel
