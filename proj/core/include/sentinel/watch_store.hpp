#pragma once

#include "sentinel/classify.hpp"
#include "sentinel/clock.hpp"
#include "sentinel/fault.hpp"
#include "sentinel/forge.hpp"

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

struct sqlite3;

namespace sentinel {

enum class FindingStatus { OnHold, ReadyToBeFixed, Dismissed };

std::string_view to_string(FindingStatus status);
FindingStatus parse_finding_status(std::string_view text);

/// Stable identity of a finding: repository, path, whitespace-normalized
/// comment body and the sorted canonical keys of its references. Line
/// numbers are deliberately excluded.
std::string finding_id_for(const RepoId& repo, const SatdFinding& finding);

struct StoredFinding {
    std::string finding_id;
    RepoId repo;
    SatdFinding finding;
    FindingStatus status = FindingStatus::OnHold;
    std::uint32_t epoch = 0; // bumped when a reopened issue reverts the finding
    Timestamp first_seen = 0;
    Timestamp last_seen = 0;
    bool present = true;
    std::optional<std::uint64_t> last_pull_request;
    std::vector<std::string> branches;
};

struct WatchedIssue {
    IssueKey key;
    IssueState status = IssueState::Unknown;
    Timestamp last_polled = 0; // 0 = never polled
    Timestamp next_poll = 0;
    std::uint32_t consecutive_failures = 0;
    std::optional<Timestamp> resolved_at;
    std::vector<std::string> linked_findings;
};

struct ScanRef {
    std::string branch; // "pull/<n>" for pull request scans
    std::string sha;
    std::optional<std::uint64_t> pull_request;
    bool full_scan = false;
};

struct UpsertResult {
    std::vector<std::string> new_ids;
    std::vector<std::string> refreshed_ids;
    std::vector<std::string> disappeared_ids;
    std::vector<IssueKey> newly_watched;
    std::vector<std::string> ready_ids; // every finding of this batch now ReadyToBeFixed
};

enum class RecordOutcome { Inserted, AlreadyPresent };

struct NotificationIntent {
    std::string dedup_key;
    std::string finding_id;
    std::string channel;
    std::string target;
    std::uint32_t epoch = 0;
};

struct NotificationRecord {
    std::string dedup_key;
    std::string finding_id;
    std::string channel;
    std::string target;
    std::uint32_t epoch = 0;
    bool pending = false;
    std::string batch_id;
    Timestamp reserved_at = 0;
    Timestamp posted_at = 0;
    std::string receipt_id;
    std::string receipt_url;
};

struct QueuedJob {
    std::string delivery_id;
    std::string payload;
    Timestamp queued_at = 0;
};

struct Reservation {
    std::vector<NotificationIntent> reserved;
    std::vector<NotificationIntent> skipped; // key already pending or done
};

/// Reservations of one posting attempt that never finalized.
struct PendingBatch {
    std::string batch_id;
    std::string target;
    Timestamp reserved_at = 0;
    std::vector<std::string> dedup_keys;
};

std::string make_dedup_key(std::string_view finding_id, std::string_view channel, std::string_view target,
                           std::uint32_t epoch);

/// Durable bot state in one SQLite file: findings, watched issues, the
/// notification log and webhook delivery ids. All methods are serialized;
/// every mutating call is one transaction.
class WatchStore {
public:
    static constexpr int kSchemaVersion = 1;

    /// ":memory:" opens a private in-memory store.
    explicit WatchStore(const std::filesystem::path& path, FaultHook fault_hook = {});
    ~WatchStore();
    WatchStore(const WatchStore&) = delete;
    WatchStore& operator=(const WatchStore&) = delete;

    /// Inserts new findings as OnHold, refreshes known ones (spans, sha,
    /// last_seen), marks findings missing from a full scan of the branch as
    /// disappeared and re-derives the watch list from live findings.
    UpsertResult upsert_findings(const RepoId& repo, const ScanRef& scan, std::span<const SatdFinding> findings,
                                 Timestamp now);

    /// Issue observed closed. Returns findings that became ReadyToBeFixed.
    std::vector<std::string> mark_resolved(const IssueKey& key, Timestamp now,
                                           std::optional<Timestamp> resolved_at = {});
    /// Issue observed open again. ReadyToBeFixed findings revert to OnHold
    /// with a new epoch; returns them.
    std::vector<std::string> mark_reopened(const IssueKey& key, Timestamp now);
    /// Records a poll outcome that did not change resolution.
    void record_poll(const IssueKey& key, IssueState observed, Timestamp now, Timestamp next_poll);
    void record_poll_failure(const IssueKey& key, Timestamp now, Timestamp next_poll);

    /// Drops `key` from every finding (the issue is one of our own reports);
    /// findings left without references are deleted. Remembers the key.
    void forget_issue(const IssueKey& key);
    void add_bot_report(const IssueKey& key, Timestamp now);
    [[nodiscard]] bool is_bot_report(const IssueKey& key) const;

    void dismiss(const std::string& finding_id);

    [[nodiscard]] std::vector<WatchedIssue> watches() const;
    [[nodiscard]] std::vector<WatchedIssue> due_watches(Timestamp now) const;
    [[nodiscard]] std::optional<WatchedIssue> watch(const IssueKey& key) const;
    [[nodiscard]] std::optional<StoredFinding> finding(const std::string& finding_id) const;
    [[nodiscard]] std::vector<StoredFinding> findings(std::optional<RepoId> repo = {},
                                                      std::optional<FindingStatus> status = {}) const;

    /// Unique insert of a completed notification.
    RecordOutcome record_notification(const NotificationIntent& intent, const PostReceipt& receipt, Timestamp now);

    /// Reservation protocol: insert each key as pending under `batch_id`
    /// before posting. Keys already present (pending or done) are skipped;
    /// a pending key only goes away through finalize or release.
    Reservation reserve(std::span<const NotificationIntent> intents, const std::string& batch_id, Timestamp now);
    /// Pending batches reserved at or before `reserved_before`.
    [[nodiscard]] std::vector<PendingBatch> pending_batches(Timestamp reserved_before) const;
    void finalize(const std::string& batch_id, const PostReceipt& receipt, Timestamp now);
    void finalize_keys(std::span<const std::string> dedup_keys, const PostReceipt& receipt, Timestamp now);
    /// Deletes the pending rows of `batch_id` so a later cycle retries them.
    void release(const std::string& batch_id);

    /// A done or pending notification exists for (finding, channel, epoch) on any target.
    [[nodiscard]] bool notified(const std::string& finding_id, std::string_view channel, std::uint32_t epoch) const;
    [[nodiscard]] std::vector<NotificationRecord> notifications() const;

    /// True when `delivery_id` was already accepted within the retention
    /// window; otherwise records it. Older ids are pruned. A non-empty `job`
    /// is stored with a new delivery in the same transaction and stays until
    /// complete_job(), so a scan accepted before a crash is not lost.
    bool check_and_record_delivery(const std::string& delivery_id, Timestamp now, Millis retention,
                                   std::string_view job = {});
    void complete_job(const std::string& delivery_id);
    [[nodiscard]] std::vector<QueuedJob> unfinished_jobs() const;

    [[nodiscard]] std::string export_json() const;
    /// PRAGMA integrity_check plus referential checks between tables.
    [[nodiscard]] bool integrity_ok(std::string* problem = nullptr) const;

private:
    void exec(const char* sql) const;
    void fault(std::string_view point) const;
    void refresh_watches(Timestamp now, std::vector<IssueKey>* newly_watched);
    bool all_refs_resolved(const std::string& finding_id) const;
    StoredFinding load_finding_row(void* stmt) const;

    sqlite3* db_ = nullptr;
    FaultHook fault_hook_;
    mutable std::recursive_mutex mu_;
};

} // namespace sentinel
