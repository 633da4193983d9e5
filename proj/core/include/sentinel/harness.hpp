#pragma once

#include "sentinel/bot_service.hpp"
#include "sentinel/clock.hpp"
#include "sentinel/mock_forge.hpp"
#include "sentinel/watch_store.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sentinel {

struct ExpectedPost {
    std::optional<TargetKind> kind;
    std::vector<std::string> contains;
};

struct ScenarioStep {
    enum class Action {
        SeedIssue,
        CloseIssue,
        ReopenIssue,
        Push,
        OpenPr,
        AdvanceClock,
        Poll,
        InjectFailure,
        ExpectPost,
        ExpectNoPost,
    };

    Action action = Action::ExpectNoPost;
    IssueKey issue;
    IssueState state = IssueState::Open;
    std::string reason = "completed";
    RepoId repo;
    std::string branch = "main";
    std::string base = "main";
    std::uint64_t number = 0;
    std::map<std::string, std::optional<std::string>> files; // nullopt deletes
    Millis by{0};
    FailureKind failure = FailureKind::Http500;
    ForgeOp op = ForgeOp::PostComment;
    int count = 1;
    std::vector<ExpectedPost> posts;
    bool corrupt_signature = false;
    bool replay = false; // resend the previous delivery id
};

std::string_view to_string(ScenarioStep::Action action);

/// A replayable end-to-end script: a config document plus ordered steps.
struct Scenario {
    std::string name;
    ServiceConfig config;
    std::string webhook_secret = "harness-secret";
    std::vector<ScenarioStep> steps;

    /// Throws ConfigError for a malformed scenario, before anything runs.
    /// File references ("file"/"directory" entries) resolve against `base_dir`.
    static Scenario parse(std::string_view text, const std::filesystem::path& base_dir = {});
    static Scenario load(const std::filesystem::path& path);
};

struct ScenarioResult {
    bool passed = true;
    std::size_t failed_step = 0; // 0-based
    std::string message;
    std::vector<OutboxEntry> outbox;
};

struct HarnessOptions {
    std::filesystem::path store_path = ":memory:";
    std::optional<std::filesystem::path> journal_path;
    FaultHook fault_hook;
    Timestamp start_time = 1'600'000'000'000;
    std::string delivery_prefix = "delivery";
};

/// Mock forge, simulated clock, store and service wired together. The
/// service runs synchronously (no worker threads) so replay is deterministic.
class Harness {
public:
    Harness(const Scenario& scenario, std::shared_ptr<const Classifier> classifier, HarnessOptions options = {});

    ManualClock& clock() { return clock_; }
    MockForge& forge() { return forge_; }
    WatchStore& store() { return *store_; }
    BotService& service() { return *service_; }

    struct WebhookOptions {
        bool corrupt_signature = false;
        bool replay = false;
    };
    /// Delivers a signed payload to the service; delivery ids are unique per
    /// call unless `replay` reuses the previous one.
    WebhookResult emit_signed_webhook(std::string_view event, const std::string& payload, WebhookOptions options);

    /// Executes one step. Expectation failures are reported, other errors throw.
    ScenarioResult run_step(const ScenarioStep& step, std::size_t index);
    /// Applies a step to the forge and clock only, as though the service
    /// were down while it happened. Webhook steps still consume their
    /// delivery id, so a later redelivery reuses it.
    void replay_world(const ScenarioStep& step, std::size_t index);
    /// The service half of a step whose world half went through
    /// replay_world(): a webhook step is redelivered under the same id, a
    /// clock step ticks, a poll step polls.
    void resume_step(const ScenarioStep& step);
    ScenarioResult run();

private:
    std::string branch_head(const RepoId& repo, const std::string& branch) const;
    std::string next_delivery(bool replay);
    WebhookResult send_webhook(std::string_view event, const std::string& payload, const std::string& delivery,
                               bool corrupt_signature);

    struct ReplayedWebhook {
        std::string event;
        std::string payload;
        std::string delivery;
        bool corrupt_signature = false;
    };

    const Scenario& scenario_;
    ManualClock clock_;
    MockForge forge_;
    std::unique_ptr<WatchStore> store_;
    std::unique_ptr<BotService> service_;
    std::map<std::pair<RepoId, std::string>, std::string> heads_;
    std::size_t delivery_counter_ = 0;
    std::string last_delivery_;
    std::size_t checked_posts_ = 0;
    std::string scenario_delivery_prefix_;
    bool offline_ = false;
    std::optional<ReplayedWebhook> replayed_;
};

} // namespace sentinel
