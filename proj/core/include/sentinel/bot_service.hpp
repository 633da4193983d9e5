#pragma once

#include "sentinel/clock.hpp"
#include "sentinel/config.hpp"
#include "sentinel/fault.hpp"
#include "sentinel/forge.hpp"
#include "sentinel/model.hpp"
#include "sentinel/scan_report.hpp"
#include "sentinel/watch_store.hpp"
#include "sentinel/webhook.hpp"

#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace sentinel {

struct ScanJob {
    enum class Kind { Push, PullRequest, FullBranch };

    Kind kind = Kind::Push;
    RepoId repo;
    std::string branch; // "pull/<n>" for pull requests
    std::string sha;
    PushChange push;
    std::uint64_t pull_request = 0;
    std::string delivery_id;
};

struct WebhookResult {
    int status = 202; // HTTP status to answer with
    std::string reason;
    std::size_t jobs_enqueued = 0;

    [[nodiscard]] bool accepted() const { return status < 300; }
};

struct DispatchTrigger {
    enum class Kind { PullRequest, Push, Poll };

    Kind kind = Kind::Poll;
    std::uint64_t pull_request = 0;
    std::string sha;
};

struct PollOutcome {
    std::size_t polled = 0;
    std::size_t failures = 0;
    std::vector<std::string> flipped;  // newly ReadyToBeFixed
    std::vector<std::string> reverted; // back to OnHold after a reopen
    std::vector<NotificationRecord> posted;
};

struct ServiceStats {
    std::size_t queued = 0;
    std::size_t running = 0;
    std::size_t scans_completed = 0;
    std::size_t scans_failed = 0;
    std::size_t posts = 0;
    std::size_t watched = 0;
};

/// The bot backend. With `workers == 0` nothing runs in the background:
/// callers drive it through run_pending() and tick(), which is how the
/// harness keeps scenarios deterministic.
class BotService {
public:
    BotService(ServiceConfig config, Forge& forge, WatchStore& store, Clock& clock,
               std::shared_ptr<const Classifier> classifier, std::string webhook_secret, FaultHook fault_hook = {});
    ~BotService();
    BotService(const BotService&) = delete;
    BotService& operator=(const BotService&) = delete;

    WebhookResult handle_webhook(std::string_view raw_body, const Headers& headers);

    void enqueue(ScanJob job);
    /// Runs queued jobs on the calling thread until the queue is empty.
    std::size_t run_pending();

    ScanReport run_scan(const ScanJob& job);
    /// Polls due watches and dispatches poll-triggered notifications.
    PollOutcome poll_watched_issues();
    std::vector<NotificationRecord> dispatch_notifications(const std::vector<std::string>& ready,
                                                           const DispatchTrigger& trigger, const RepoConfig& config);

    /// Settles reservations left pending by an earlier attempt or process:
    /// finalized when the forge shows the post, released otherwise.
    /// Only batches reserved at or before `reserved_before` are examined.
    std::size_t reconcile_pending(Timestamp reserved_before);
    /// Startup recovery: reconcile every pending reservation and requeue
    /// scans that were accepted but never finished. Returns the number of
    /// reservations settled.
    std::size_t recover();

    /// One scheduler step: pending jobs (synchronous mode), a poll cycle
    /// when due, full-branch scans when due.
    void tick();

    /// Starts scan workers and the monitor loop (workers > 0).
    void start();
    /// Stops accepting jobs, lets running scans finish and joins threads.
    void stop();

    [[nodiscard]] ServiceStats stats() const;
    [[nodiscard]] std::string health_json() const;
    [[nodiscard]] const ServiceConfig& config() const { return config_; }

private:
    std::shared_ptr<const Classifier> classifier_for(const RepoConfig& config);
    void observe_status(const WatchedIssue& watch, const IssueStatus& status, Timestamp now, Millis interval,
                        PollOutcome& outcome);
    Millis interval_for(const WatchedIssue& watch) const;
    std::vector<NotificationRecord> post_batch(const RepoConfig& config, Channel channel, const PostTarget& target,
                                               std::vector<StoredFinding> findings, const DispatchTrigger& trigger);
    void worker_loop();
    void monitor_loop();
    std::optional<ScanJob> take_job();
    void finish_job(const ScanJob& job, bool ok);
    void fault(std::string_view point) const;

    ServiceConfig config_;
    Forge& forge_;
    WatchStore& store_;
    Clock& clock_;
    std::shared_ptr<const Classifier> classifier_;
    std::string webhook_secret_;
    FaultHook fault_hook_;

    std::mutex model_mu_;
    std::map<std::string, std::shared_ptr<const Classifier>> models_;

    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<ScanJob> queue_;
    std::set<RepoId> busy_repos_;
    bool stopping_ = false;
    ServiceStats stats_;
    Timestamp next_poll_cycle_ = 0;
    Timestamp next_full_scan_ = 0;
    std::vector<std::thread> threads_;
};

} // namespace sentinel
