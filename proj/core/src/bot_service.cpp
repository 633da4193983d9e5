#include "sentinel/bot_service.hpp"

#include "sentinel/errors.hpp"
#include "sentinel/hashing.hpp"
#include "sentinel/render.hpp"
#include "sentinel/text.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>

namespace sentinel {

namespace {

constexpr Millis kMonitorPeriod{std::chrono::minutes(1)};
constexpr Millis kDeliveryRetention{std::chrono::hours(24)};
constexpr Millis kMaxBackoff{std::chrono::hours(6)};

std::string pull_branch(std::uint64_t number) { return "pull/" + std::to_string(number); }

std::optional<std::uint64_t> parse_number(std::string_view s) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
}

bool passes_floor(const StoredFinding& f, double floor) {
    return f.finding.source == FindingSource::Pattern || f.finding.confidence >= floor;
}

std::string_view job_kind_name(ScanJob::Kind kind) {
    switch (kind) {
    case ScanJob::Kind::Push: return "push";
    case ScanJob::Kind::PullRequest: return "pull_request";
    case ScanJob::Kind::FullBranch: return "full_branch";
    }
    return "push";
}

std::string job_to_json(const ScanJob& job) {
    nlohmann::json commits = nlohmann::json::array();
    for (const auto& c : job.push.commits) {
        commits.push_back({{"added", c.added}, {"modified", c.modified}, {"removed", c.removed}});
    }
    return nlohmann::json{
        {"kind", job_kind_name(job.kind)},
        {"repo", job.repo.host + "/" + job.repo.full_name()},
        {"branch", job.branch},
        {"sha", job.sha},
        {"commits", commits},
        {"pull_request", job.pull_request},
        {"delivery_id", job.delivery_id},
    }
        .dump();
}

ScanJob job_from_json(const std::string& text) {
    const auto doc = nlohmann::json::parse(text);
    ScanJob job;
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "push") job.kind = ScanJob::Kind::Push;
    else if (kind == "pull_request") job.kind = ScanJob::Kind::PullRequest;
    else if (kind == "full_branch") job.kind = ScanJob::Kind::FullBranch;
    else throw std::invalid_argument("unknown job kind " + kind);
    job.repo = RepoId::parse(doc.at("repo").get<std::string>());
    job.branch = doc.at("branch").get<std::string>();
    job.sha = doc.at("sha").get<std::string>();
    job.push.after_sha = job.sha;
    for (const auto& c : doc.at("commits")) {
        job.push.commits.push_back({c.at("added").get<std::vector<std::string>>(),
                                    c.at("modified").get<std::vector<std::string>>(),
                                    c.at("removed").get<std::vector<std::string>>()});
    }
    job.pull_request = doc.at("pull_request").get<std::uint64_t>();
    job.delivery_id = doc.at("delivery_id").get<std::string>();
    return job;
}

} // namespace

BotService::BotService(ServiceConfig config, Forge& forge, WatchStore& store, Clock& clock,
                       std::shared_ptr<const Classifier> classifier, std::string webhook_secret, FaultHook fault_hook)
    : config_(std::move(config)),
      forge_(forge),
      store_(store),
      clock_(clock),
      classifier_(std::move(classifier)),
      webhook_secret_(std::move(webhook_secret)),
      fault_hook_(std::move(fault_hook)) {
    config_.validate();
    next_poll_cycle_ = clock_.now();
    next_full_scan_ = clock_.now() + config_.full_scan_interval.count();
}

BotService::~BotService() { stop(); }

void BotService::fault(std::string_view point) const {
    if (fault_hook_) fault_hook_(point);
}

std::shared_ptr<const Classifier> BotService::classifier_for(const RepoConfig& config) {
    if (!config.model_path) {
        if (!classifier_) throw ConfigError("no classifier model configured for " + config.repo.full_name());
        return classifier_;
    }
    std::lock_guard lock(model_mu_);
    const auto key = config.model_path->string();
    auto it = models_.find(key);
    if (it == models_.end()) {
        it = models_.emplace(key, std::make_shared<LinearModel>(LinearModel::load(*config.model_path))).first;
    }
    return it->second;
}

WebhookResult BotService::handle_webhook(std::string_view raw_body, const Headers& headers) {
    const auto signature = headers.get(kSignatureHeader);
    if (webhook_secret_.empty() || !signature || !verify_signature(webhook_secret_, raw_body, *signature)) {
        spdlog::warn("webhook rejected: bad signature");
        return {401, "bad signature", 0};
    }
    const auto event = headers.get(kEventHeader);
    const auto delivery = headers.get(kDeliveryHeader);
    if (!event || !delivery || delivery->empty()) return {400, "missing event or delivery header", 0};

    WebhookEvent ev;
    try {
        ev = parse_webhook(*event, raw_body, *delivery);
    } catch (const std::exception& e) {
        spdlog::warn("webhook rejected: {}", e.what());
        return {400, e.what(), 0};
    }
    if (ev.kind == WebhookKind::Ping) return {200, "pong", 0};

    const RepoConfig* repo = config_.find_repo(ev.repo);
    if (!repo && ev.kind != WebhookKind::Ignored) {
        spdlog::warn("webhook for unconfigured repository {}", ev.repo.full_name());
        return {404, "unconfigured repository " + ev.repo.full_name(), 0};
    }
    const bool monitored = ev.kind != WebhookKind::Ignored && (ev.branch.empty() || repo->monitors(ev.branch));
    ScanJob job;
    if (monitored) {
        job.repo = ev.repo;
        job.delivery_id = ev.delivery_id;
        if (ev.kind == WebhookKind::Push) {
            job.kind = ScanJob::Kind::Push;
            job.branch = ev.branch;
            job.sha = ev.push.after_sha;
            job.push = ev.push;
        } else {
            job.kind = ScanJob::Kind::PullRequest;
            job.pull_request = ev.pull.number;
            job.branch = pull_branch(ev.pull.number);
            job.sha = ev.pull.head_sha;
        }
    }
    if (store_.check_and_record_delivery(ev.delivery_id, clock_.now(), kDeliveryRetention,
                                         monitored ? job_to_json(job) : std::string())) {
        spdlog::info("duplicate delivery {} ignored", ev.delivery_id);
        return {200, "duplicate delivery", 0};
    }
    if (ev.kind == WebhookKind::Ignored) return {202, "ignored: " + ev.ignored_reason, 0};
    if (!monitored) {
        spdlog::info("{}: branch {} not monitored", repo->repo.full_name(), ev.branch);
        return {202, "branch not monitored", 0};
    }
    enqueue(std::move(job));
    return {202, "scan queued", 1};
}

std::size_t BotService::recover() {
    const auto settled = reconcile_pending(clock_.now());
    for (const auto& queued : store_.unfinished_jobs()) {
        try {
            auto job = job_from_json(queued.payload);
            spdlog::info("requeueing scan of {}@{} accepted before restart", job.repo.full_name(),
                         job.sha.substr(0, 7));
            enqueue(std::move(job));
        } catch (const std::exception& e) {
            spdlog::error("dropping unreadable queued job {}: {}", queued.delivery_id, e.what());
            store_.complete_job(queued.delivery_id);
        }
    }
    return settled;
}

void BotService::enqueue(ScanJob job) {
    {
        std::lock_guard lock(mu_);
        if (stopping_) throw std::runtime_error("service is stopping");
        queue_.push_back(std::move(job));
        stats_.queued = queue_.size();
    }
    cv_.notify_all();
}

std::optional<ScanJob> BotService::take_job() {
    // Caller holds mu_. Jobs of a repository with a running scan wait.
    for (auto it = queue_.begin(); it != queue_.end(); ++it) {
        if (busy_repos_.contains(it->repo)) continue;
        ScanJob job = std::move(*it);
        queue_.erase(it);
        busy_repos_.insert(job.repo);
        stats_.queued = queue_.size();
        ++stats_.running;
        return job;
    }
    return std::nullopt;
}

void BotService::finish_job(const ScanJob& job, bool ok) {
    // A failed scan is not retried from the store; the monitor and the next
    // push cover it.
    if (!job.delivery_id.empty()) store_.complete_job(job.delivery_id);
    {
        std::lock_guard lock(mu_);
        busy_repos_.erase(job.repo);
        --stats_.running;
        if (ok) ++stats_.scans_completed;
        else ++stats_.scans_failed;
    }
    cv_.notify_all();
}

std::size_t BotService::run_pending() {
    std::size_t ran = 0;
    for (;;) {
        std::optional<ScanJob> job;
        {
            std::lock_guard lock(mu_);
            job = take_job();
        }
        if (!job) return ran;
        bool ok = true;
        try {
            run_scan(*job);
        } catch (const std::exception& e) {
            ok = false;
            spdlog::error("scan of {}@{} failed: {}", job->repo.full_name(), job->sha, e.what());
        }
        finish_job(*job, ok);
        ++ran;
    }
}

ScanReport BotService::run_scan(const ScanJob& job) {
    const RepoConfig* config = config_.find_repo(job.repo);
    if (!config) throw ScanError("repository not configured: " + job.repo.full_name());

    std::vector<ChangedFile> files;
    switch (job.kind) {
    case ScanJob::Kind::Push: files = forge_.list_changed_files(job.repo, job.push); break;
    case ScanJob::Kind::PullRequest:
        files = forge_.list_changed_files(job.repo, PullRequestChange{job.pull_request, job.sha});
        break;
    case ScanJob::Kind::FullBranch: files = forge_.list_tree(job.repo, job.sha); break;
    }

    const auto classifier = classifier_for(*config);
    const auto patterns = config->ref_patterns();
    ScanContext context{job.repo, config_.profiles, patterns, classifier.get(), &config->onhold, job.sha};
    const auto outcome = scan_files(files, context);
    fault("scan.classified");

    ScanRef ref;
    ref.branch = job.branch;
    ref.sha = job.sha;
    ref.full_scan = job.kind == ScanJob::Kind::FullBranch;
    if (job.kind == ScanJob::Kind::PullRequest) ref.pull_request = job.pull_request;
    const auto upsert = store_.upsert_findings(job.repo, ref, outcome.findings, clock_.now());

    // Fetch newly watched issues now so an already-closed reference is
    // reported on this very event.
    PollOutcome immediate;
    for (const auto& key : upsert.newly_watched) {
        auto watch = store_.watch(key);
        if (!watch) continue;
        try {
            const auto status = forge_.fetch_issue_status(key);
            observe_status(*watch, status, clock_.now(), interval_for(*watch), immediate);
        } catch (const TransportError& e) {
            spdlog::warn("status of {} unavailable: {}; the monitor will retry", key.to_string(), e.what());
        }
    }

    auto report = make_report(job.repo, job.branch, job.sha, outcome);
    std::vector<std::string> ready;
    for (auto& rf : report.findings) {
        auto stored = store_.finding(rf.finding_id);
        if (!stored) continue; // every reference was one of our own reports
        rf.status = stored->status;
        for (const auto& r : stored->finding.refs) {
            if (auto w = store_.watch(r.key)) rf.issue_states[r.key.to_string()] = w->status;
        }
        if (stored->status == FindingStatus::ReadyToBeFixed &&
            std::find(ready.begin(), ready.end(), rf.finding_id) == ready.end())
            ready.push_back(rf.finding_id);
    }
    report.ready_now = ready;

    if (!ready.empty() && job.kind != ScanJob::Kind::FullBranch) {
        DispatchTrigger trigger;
        trigger.kind = job.kind == ScanJob::Kind::PullRequest ? DispatchTrigger::Kind::PullRequest
                                                              : DispatchTrigger::Kind::Push;
        trigger.pull_request = job.pull_request;
        trigger.sha = job.sha;
        dispatch_notifications(ready, trigger, *config);
    }
    spdlog::info("scanned {}@{}: {} files, {} comments, {} on-hold, {} ready", job.repo.full_name(),
                 job.sha.substr(0, 7), report.files_scanned, report.comments, report.findings.size(), ready.size());
    return report;
}

Millis BotService::interval_for(const WatchedIssue& watch) const {
    std::optional<Millis> best;
    for (const auto& id : watch.linked_findings) {
        auto f = store_.finding(id);
        if (!f) continue;
        if (const auto* c = config_.find_repo(f->repo)) {
            if (!best || c->poll_interval < *best) best = c->poll_interval;
        }
    }
    return best.value_or(Millis(std::chrono::minutes(15)));
}

void BotService::observe_status(const WatchedIssue& watch, const IssueStatus& status, Timestamp now, Millis interval,
                                PollOutcome& outcome) {
    const auto next = now + interval.count();
    if (status.bot_report) {
        spdlog::info("{} is a report opened by this bot; no longer tracked", watch.key.to_string());
        store_.forget_issue(watch.key);
        return;
    }
    bool closed_not_completed = false;
    if (status.state == IssueState::Resolved && status.close_reason && *status.close_reason != "completed") {
        for (const auto& id : watch.linked_findings) {
            auto f = store_.finding(id);
            const auto* c = f ? config_.find_repo(f->repo) : nullptr;
            if (c && c->require_completed) closed_not_completed = true;
        }
    }
    if (status.state == IssueState::Resolved && !closed_not_completed) {
        if (watch.status != IssueState::Resolved) {
            auto flipped = store_.mark_resolved(watch.key, now, status.resolved_at);
            outcome.flipped.insert(outcome.flipped.end(), flipped.begin(), flipped.end());
        }
        store_.record_poll(watch.key, IssueState::Resolved, now, next);
    } else if (status.state == IssueState::Open || closed_not_completed) {
        if (watch.status == IssueState::Resolved) {
            auto reverted = store_.mark_reopened(watch.key, now);
            outcome.reverted.insert(outcome.reverted.end(), reverted.begin(), reverted.end());
        }
        store_.record_poll(watch.key, IssueState::Open, now, next);
    } else {
        store_.record_poll(watch.key, IssueState::Unknown, now, next);
    }
}

PollOutcome BotService::poll_watched_issues() {
    PollOutcome outcome;
    const auto start = clock_.now();
    reconcile_pending(start - config_.reservation_timeout.count());

    for (const auto& watch : store_.due_watches(start)) {
        const auto interval = interval_for(watch);
        const auto now = clock_.now();
        ++outcome.polled;
        try {
            const auto status = forge_.fetch_issue_status(watch.key);
            observe_status(watch, status, now, interval, outcome);
        } catch (const TransportError& e) {
            ++outcome.failures;
            const auto failures = std::min<std::uint32_t>(watch.consecutive_failures, 16);
            auto delay = Millis(std::chrono::minutes(1)) * (std::int64_t{1} << failures);
            delay = std::min(delay, kMaxBackoff);
            spdlog::warn("polling {} failed ({}); retry in {}s", watch.key.to_string(), e.what(),
                         std::chrono::duration_cast<std::chrono::seconds>(delay).count());
            store_.record_poll_failure(watch.key, now, now + delay.count());
        }
    }
    fault("poll.observed");

    DispatchTrigger trigger;
    trigger.kind = DispatchTrigger::Kind::Poll;
    for (const auto& repo : config_.repos) {
        auto posted = dispatch_notifications(outcome.flipped, trigger, repo);
        outcome.posted.insert(outcome.posted.end(), posted.begin(), posted.end());
    }
    return outcome;
}

std::vector<NotificationRecord> BotService::dispatch_notifications(const std::vector<std::string>& ready,
                                                                   const DispatchTrigger& trigger,
                                                                   const RepoConfig& config) {
    std::vector<NotificationRecord> posted;
    auto append = [&](std::vector<NotificationRecord> more) {
        posted.insert(posted.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    };

    if (trigger.kind != DispatchTrigger::Kind::Poll) {
        std::vector<StoredFinding> findings;
        for (const auto& id : ready) {
            auto f = store_.finding(id);
            if (f && f->repo == config.repo && f->status == FindingStatus::ReadyToBeFixed &&
                passes_floor(*f, config.confidence_floor))
                findings.push_back(std::move(*f));
        }
        if (findings.empty()) return posted;
        if (trigger.kind == DispatchTrigger::Kind::PullRequest && config.enabled(Channel::PullRequestComment)) {
            append(post_batch(config, Channel::PullRequestComment, PostTarget::pull_request(config.repo, trigger.pull_request),
                              findings, trigger));
        }
        if (trigger.kind == DispatchTrigger::Kind::Push && config.enabled(Channel::CommitComment)) {
            append(post_batch(config, Channel::CommitComment, PostTarget::commit(config.repo, trigger.sha), findings,
                              trigger));
        }
        return posted;
    }

    // Poll: every ReadyToBeFixed finding of the repository not yet announced
    // on a channel, whichever target it went to. Failed posts are retried here.
    auto all = store_.findings(config.repo, FindingStatus::ReadyToBeFixed);
    std::erase_if(all, [&](const StoredFinding& f) { return !f.present || !passes_floor(f, config.confidence_floor); });
    auto unannounced = [&](Channel channel) {
        std::vector<StoredFinding> out;
        for (const auto& f : all) {
            if (!store_.notified(f.finding_id, to_string(channel), f.epoch)) out.push_back(f);
        }
        return out;
    };

    if (config.enabled(Channel::IssueCreation)) {
        auto findings = unannounced(Channel::IssueCreation);
        if (!findings.empty())
            append(post_batch(config, Channel::IssueCreation, PostTarget::new_issue(config.repo), findings, trigger));
    }
    if (config.enabled(Channel::CommitComment)) {
        std::map<std::string, std::vector<StoredFinding>> by_commit;
        for (auto& f : unannounced(Channel::CommitComment)) {
            if (text::is_hex_sha(f.finding.comment.commit_sha)) by_commit[f.finding.comment.commit_sha].push_back(f);
        }
        for (auto& [sha, findings] : by_commit) {
            DispatchTrigger t = trigger;
            t.sha = sha;
            append(post_batch(config, Channel::CommitComment, PostTarget::commit(config.repo, sha), findings, t));
        }
    }
    if (config.enabled(Channel::PullRequestComment)) {
        std::map<std::uint64_t, std::vector<StoredFinding>> by_pull;
        for (auto& f : unannounced(Channel::PullRequestComment)) {
            if (f.last_pull_request) by_pull[*f.last_pull_request].push_back(f);
        }
        for (auto& [number, findings] : by_pull) {
            append(post_batch(config, Channel::PullRequestComment, PostTarget::pull_request(config.repo, number),
                              findings, trigger));
        }
    }
    return posted;
}

std::vector<NotificationRecord> BotService::post_batch(const RepoConfig& config, Channel channel,
                                                       const PostTarget& target, std::vector<StoredFinding> findings,
                                                       const DispatchTrigger& trigger) {
    const auto now = clock_.now();
    const auto target_text = target.to_string();
    std::vector<NotificationIntent> intents;
    std::vector<std::string> keys;
    for (const auto& f : findings) {
        NotificationIntent intent{make_dedup_key(f.finding_id, to_string(channel), target_text, f.epoch), f.finding_id,
                                  std::string(to_string(channel)), target_text, f.epoch};
        keys.push_back(intent.dedup_key);
        intents.push_back(std::move(intent));
    }
    std::sort(keys.begin(), keys.end());
    const auto batch_id =
        sha256_hex(target_text + "|" + std::string(to_string(channel)) + "|" + text::join(keys, ",") + "|" +
                   std::to_string(now))
            .substr(0, 16);

    const auto reservation = store_.reserve(intents, batch_id, now);
    if (reservation.reserved.empty()) return {};
    std::set<std::string> reserved_ids;
    for (const auto& r : reservation.reserved) reserved_ids.insert(r.finding_id);
    std::erase_if(findings, [&](const StoredFinding& f) { return !reserved_ids.contains(f.finding_id); });

    RenderTrigger render_trigger;
    switch (trigger.kind) {
    case DispatchTrigger::Kind::PullRequest:
        render_trigger = {RenderTrigger::Kind::PullRequest, "#" + std::to_string(trigger.pull_request)};
        break;
    case DispatchTrigger::Kind::Push: render_trigger = {RenderTrigger::Kind::Push, trigger.sha.substr(0, 7)}; break;
    case DispatchTrigger::Kind::Poll: render_trigger = {RenderTrigger::Kind::Poll, {}}; break;
    }
    const auto body = render_notification(findings, channel, render_trigger, batch_id);
    fault("dispatch.reserved");

    PostReceipt receipt;
    try {
        if (channel == Channel::IssueCreation) {
            receipt = forge_.create_issue(config.repo, issue_title(findings.size()), body);
            if (auto number = parse_number(receipt.id)) store_.add_bot_report({config.repo, *number}, clock_.now());
        } else {
            receipt = forge_.post_comment(target, body);
        }
    } catch (const TransportError& e) {
        if (e.kind() == TransportError::Kind::Timeout) {
            // The post may have landed; reconciliation decides after the reservation times out.
            spdlog::warn("posting to {} timed out; reservation kept for reconciliation", target_text);
        } else {
            spdlog::warn("posting to {} failed ({}); will retry", target_text, e.what());
            store_.release(batch_id);
        }
        return {};
    } catch (const ForgeError& e) {
        spdlog::error("posting to {} rejected ({}); will retry", target_text, e.what());
        store_.release(batch_id);
        return {};
    }
    fault("dispatch.posted");
    store_.finalize(batch_id, receipt, clock_.now());
    {
        std::lock_guard lock(mu_);
        ++stats_.posts;
    }

    std::vector<NotificationRecord> records;
    for (const auto& r : reservation.reserved) {
        NotificationRecord rec;
        rec.dedup_key = r.dedup_key;
        rec.finding_id = r.finding_id;
        rec.channel = r.channel;
        rec.target = r.target;
        rec.epoch = r.epoch;
        rec.batch_id = batch_id;
        rec.reserved_at = now;
        rec.posted_at = clock_.now();
        rec.receipt_id = receipt.id;
        rec.receipt_url = receipt.url;
        records.push_back(std::move(rec));
    }
    return records;
}

std::size_t BotService::reconcile_pending(Timestamp reserved_before) {
    std::size_t settled = 0;
    for (const auto& batch : store_.pending_batches(reserved_before)) {
        try {
            const auto target = PostTarget::parse(batch.target);
            const auto found = forge_.find_post(target, report_marker_line(batch.batch_id));
            if (found) {
                if (target.kind == TargetKind::NewIssue) {
                    if (auto number = parse_number(found->id))
                        store_.add_bot_report({target.repo, *number}, clock_.now());
                }
                store_.finalize(batch.batch_id, *found, clock_.now());
                spdlog::info("reservation {} was already posted; finalized", batch.batch_id);
            } else {
                store_.release(batch.batch_id);
                spdlog::info("reservation {} never posted; released for retry", batch.batch_id);
            }
            ++settled;
        } catch (const TransportError& e) {
            spdlog::warn("cannot reconcile reservation {}: {}", batch.batch_id, e.what());
        }
    }
    return settled;
}

void BotService::tick() {
    bool synchronous = false;
    {
        std::lock_guard lock(mu_);
        synchronous = threads_.empty();
    }
    if (synchronous) run_pending();
    const auto now = clock_.now();
    if (now >= next_full_scan_) {
        next_full_scan_ = now + config_.full_scan_interval.count();
        for (const auto& repo : config_.repos) {
            for (const auto& branch : repo.branches) {
                ScanJob job;
                job.kind = ScanJob::Kind::FullBranch;
                job.repo = repo.repo;
                job.branch = branch;
                job.sha = branch;
                enqueue(std::move(job));
            }
        }
        if (synchronous) run_pending();
    }
    if (now >= next_poll_cycle_) {
        next_poll_cycle_ = now + kMonitorPeriod.count();
        try {
            poll_watched_issues();
        } catch (const std::exception& e) {
            spdlog::error("monitor cycle failed: {}", e.what());
        }
    }
}

void BotService::start() {
    std::lock_guard lock(mu_);
    if (!threads_.empty() || config_.workers == 0) return;
    stopping_ = false;
    for (int i = 0; i < config_.workers; ++i) threads_.emplace_back([this] { worker_loop(); });
    threads_.emplace_back([this] { monitor_loop(); });
}

void BotService::stop() {
    std::vector<std::thread> threads;
    {
        std::lock_guard lock(mu_);
        stopping_ = true;
        threads.swap(threads_);
    }
    cv_.notify_all();
    for (auto& t : threads) t.join();
    std::lock_guard lock(mu_);
    stopping_ = false;
}

void BotService::worker_loop() {
    for (;;) {
        std::optional<ScanJob> job;
        {
            std::unique_lock lock(mu_);
            cv_.wait(lock, [&] {
                if (stopping_) return true;
                job = take_job();
                return job.has_value();
            });
            if (!job) return; // stopping; queued jobs stay unprocessed
        }
        bool ok = true;
        try {
            run_scan(*job);
        } catch (const std::exception& e) {
            ok = false;
            spdlog::error("scan of {}@{} failed: {}", job->repo.full_name(), job->sha, e.what());
        }
        finish_job(*job, ok);
    }
}

void BotService::monitor_loop() {
    for (;;) {
        {
            std::unique_lock lock(mu_);
            if (cv_.wait_for(lock, std::chrono::seconds(1), [&] { return stopping_; })) return;
        }
        tick();
    }
}

ServiceStats BotService::stats() const {
    ServiceStats s;
    {
        std::lock_guard lock(mu_);
        s = stats_;
    }
    s.watched = store_.watches().size();
    return s;
}

std::string BotService::health_json() const {
    const auto s = stats();
    nlohmann::json doc = {
        {"status", "ok"},
        {"queued", s.queued},
        {"running", s.running},
        {"scans_completed", s.scans_completed},
        {"scans_failed", s.scans_failed},
        {"posts", s.posts},
        {"watched_issues", s.watched},
        {"repos", config_.repos.size()},
    };
    return doc.dump();
}

} // namespace sentinel
