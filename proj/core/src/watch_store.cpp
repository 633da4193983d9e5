#include "sentinel/watch_store.hpp"

#include "sentinel/errors.hpp"
#include "sentinel/hashing.hpp"
#include "sentinel/text.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>
#include <sqlite3.h>

#include <algorithm>
#include <map>

namespace sentinel {

namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS meta (
    key TEXT PRIMARY KEY,
    value TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS findings (
    finding_id TEXT PRIMARY KEY,
    host TEXT NOT NULL,
    owner TEXT NOT NULL,
    repo TEXT NOT NULL,
    file_path TEXT NOT NULL,
    start_line INTEGER NOT NULL,
    end_line INTEGER NOT NULL,
    start_col INTEGER NOT NULL,
    raw_text TEXT NOT NULL,
    body_text TEXT NOT NULL,
    kind TEXT NOT NULL,
    commit_sha TEXT NOT NULL,
    label TEXT NOT NULL,
    confidence REAL NOT NULL,
    source TEXT NOT NULL,
    status TEXT NOT NULL CHECK (status IN ('OnHold', 'ReadyToBeFixed', 'Dismissed')),
    epoch INTEGER NOT NULL DEFAULT 0,
    first_seen INTEGER NOT NULL,
    last_seen INTEGER NOT NULL,
    present INTEGER NOT NULL DEFAULT 1,
    last_pr INTEGER
);
CREATE TABLE IF NOT EXISTS finding_branches (
    finding_id TEXT NOT NULL REFERENCES findings(finding_id) ON DELETE CASCADE,
    branch TEXT NOT NULL,
    PRIMARY KEY (finding_id, branch)
);
CREATE TABLE IF NOT EXISTS finding_refs (
    finding_id TEXT NOT NULL REFERENCES findings(finding_id) ON DELETE CASCADE,
    issue_key TEXT NOT NULL,
    raw_match TEXT NOT NULL,
    byte_offset INTEGER NOT NULL,
    pattern_id TEXT NOT NULL,
    PRIMARY KEY (finding_id, issue_key)
);
CREATE INDEX IF NOT EXISTS finding_refs_by_issue ON finding_refs(issue_key);
CREATE TABLE IF NOT EXISTS watches (
    issue_key TEXT PRIMARY KEY,
    status TEXT NOT NULL,
    last_polled INTEGER NOT NULL DEFAULT 0,
    next_poll INTEGER NOT NULL DEFAULT 0,
    failures INTEGER NOT NULL DEFAULT 0,
    resolved_at INTEGER
);
CREATE TABLE IF NOT EXISTS notifications (
    dedup_key TEXT PRIMARY KEY,
    finding_id TEXT NOT NULL,
    channel TEXT NOT NULL,
    target TEXT NOT NULL,
    epoch INTEGER NOT NULL,
    state TEXT NOT NULL CHECK (state IN ('pending', 'done')),
    batch_id TEXT NOT NULL,
    reserved_at INTEGER NOT NULL,
    posted_at INTEGER NOT NULL DEFAULT 0,
    receipt_id TEXT NOT NULL DEFAULT '',
    receipt_url TEXT NOT NULL DEFAULT ''
);
CREATE INDEX IF NOT EXISTS notifications_by_finding ON notifications(finding_id, channel, epoch);
CREATE INDEX IF NOT EXISTS notifications_by_batch ON notifications(batch_id);
CREATE TABLE IF NOT EXISTS deliveries (
    delivery_id TEXT PRIMARY KEY,
    received_at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS scan_jobs (
    delivery_id TEXT PRIMARY KEY,
    payload TEXT NOT NULL,
    queued_at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS bot_reports (
    issue_key TEXT PRIMARY KEY,
    created_at INTEGER NOT NULL
);
)sql";

class Stmt {
public:
    Stmt(sqlite3* db, const char* sql) : db_(db) {
        if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) {
            throw StoreError(std::string("prepare failed: ") + sqlite3_errmsg(db));
        }
    }
    ~Stmt() { sqlite3_finalize(stmt_); }
    Stmt(const Stmt&) = delete;
    Stmt& operator=(const Stmt&) = delete;

    Stmt& bind(int i, std::string_view v) {
        check(sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT));
        return *this;
    }
    Stmt& bind(int i, const std::string& v) { return bind(i, std::string_view(v)); }
    Stmt& bind(int i, const char* v) { return bind(i, std::string_view(v)); }
    Stmt& bind(int i, std::int64_t v) {
        check(sqlite3_bind_int64(stmt_, i, v));
        return *this;
    }
    Stmt& bind(int i, double v) {
        check(sqlite3_bind_double(stmt_, i, v));
        return *this;
    }
    Stmt& bind_null(int i) {
        check(sqlite3_bind_null(stmt_, i));
        return *this;
    }

    /// True while a row is available.
    bool step() {
        int rc = sqlite3_step(stmt_);
        if (rc == SQLITE_ROW) return true;
        if (rc == SQLITE_DONE) return false;
        throw StoreError(std::string("step failed: ") + sqlite3_errmsg(db_));
    }
    void run() {
        while (step()) {
        }
    }
    void reset() {
        sqlite3_reset(stmt_);
        sqlite3_clear_bindings(stmt_);
    }

    std::string text(int col) const {
        auto* p = sqlite3_column_text(stmt_, col);
        return p ? std::string(reinterpret_cast<const char*>(p), static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col)))
                 : std::string();
    }
    std::int64_t int64(int col) const { return sqlite3_column_int64(stmt_, col); }
    double real(int col) const { return sqlite3_column_double(stmt_, col); }
    bool is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }
    sqlite3_stmt* raw() const { return stmt_; }

private:
    void check(int rc) const {
        if (rc != SQLITE_OK) throw StoreError(std::string("bind failed: ") + sqlite3_errmsg(db_));
    }
    sqlite3* db_;
    sqlite3_stmt* stmt_ = nullptr;
};

class Transaction {
public:
    explicit Transaction(sqlite3* db) : db_(db) { exec("BEGIN IMMEDIATE"); }
    ~Transaction() {
        if (!done_) sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
    }
    void commit() {
        exec("COMMIT");
        done_ = true;
    }

private:
    void exec(const char* sql) {
        char* err = nullptr;
        if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
            std::string msg = err ? err : "unknown";
            sqlite3_free(err);
            throw StoreError(std::string(sql) + ": " + msg);
        }
    }
    sqlite3* db_;
    bool done_ = false;
};

SatdLabel label_from(std::string_view s) {
    return s == to_string(SatdLabel::OnHold) ? SatdLabel::OnHold : SatdLabel::CrossReference;
}

std::string sha_prefix(std::string_view s) { return sha256_hex(s).substr(0, 16); }

} // namespace

std::string_view to_string(FindingStatus status) {
    switch (status) {
    case FindingStatus::OnHold: return "OnHold";
    case FindingStatus::ReadyToBeFixed: return "ReadyToBeFixed";
    case FindingStatus::Dismissed: return "Dismissed";
    }
    return "OnHold";
}

FindingStatus parse_finding_status(std::string_view text) {
    if (text == "OnHold") return FindingStatus::OnHold;
    if (text == "ReadyToBeFixed") return FindingStatus::ReadyToBeFixed;
    if (text == "Dismissed") return FindingStatus::Dismissed;
    throw StoreError("unknown finding status: " + std::string(text));
}

std::string finding_id_for(const RepoId& repo, const SatdFinding& finding) {
    std::vector<std::string> keys;
    for (const auto& ref : finding.refs) keys.push_back(ref.key.to_string());
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    std::string material = repo.host + "/" + repo.full_name();
    material += '\n';
    material += finding.comment.file_path;
    material += '\n';
    material += text::normalize_whitespace(finding.comment.body_text);
    material += '\n';
    material += text::join(keys, ",");
    return sha_prefix(material);
}

std::string make_dedup_key(std::string_view finding_id, std::string_view channel, std::string_view target,
                           std::uint32_t epoch) {
    std::string material;
    material.append(finding_id).append("|").append(channel).append("|").append(target).append("|");
    material += std::to_string(epoch);
    return sha256_hex(material);
}

WatchStore::WatchStore(const std::filesystem::path& path, FaultHook fault_hook)
    : fault_hook_(std::move(fault_hook)) {
    if (path != ":memory:" && path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    if (sqlite3_open_v2(path.string().c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                        nullptr) != SQLITE_OK) {
        std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
        sqlite3_close(db_);
        db_ = nullptr;
        throw StoreError("cannot open store " + path.string() + ": " + msg);
    }
    sqlite3_busy_timeout(db_, 5000);
    try {
        exec("PRAGMA foreign_keys = ON");
        if (path != ":memory:") exec("PRAGMA journal_mode = WAL");
        exec("PRAGMA synchronous = FULL");
        exec(kSchema);
        Stmt version(db_, "SELECT value FROM meta WHERE key = 'schema_version'");
        if (version.step()) {
            if (version.text(0) != std::to_string(kSchemaVersion)) {
                throw StoreError("unsupported store schema version " + version.text(0));
            }
        } else {
            Stmt put(db_, "INSERT INTO meta(key, value) VALUES ('schema_version', ?1)");
            put.bind(1, std::to_string(kSchemaVersion)).run();
        }
    } catch (...) {
        sqlite3_close(db_);
        db_ = nullptr;
        throw;
    }
}

WatchStore::~WatchStore() {
    if (db_) sqlite3_close(db_);
}

void WatchStore::exec(const char* sql) const {
    char* err = nullptr;
    if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
        std::string msg = err ? err : "unknown";
        sqlite3_free(err);
        throw StoreError(msg);
    }
}

void WatchStore::fault(std::string_view point) const {
    if (fault_hook_) fault_hook_(point);
}

UpsertResult WatchStore::upsert_findings(const RepoId& repo, const ScanRef& scan, std::span<const SatdFinding> findings,
                                         Timestamp now) {
    std::lock_guard lock(mu_);
    UpsertResult result;
    Transaction tx(db_);
    fault("store.upsert.begin");

    Stmt find(db_, "SELECT status FROM findings WHERE finding_id = ?1");
    Stmt insert(db_, R"sql(
        INSERT INTO findings(finding_id, host, owner, repo, file_path, start_line, end_line, start_col, raw_text,
                             body_text, kind, commit_sha, label, confidence, source, status, epoch, first_seen,
                             last_seen, present, last_pr)
        VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10, ?11, ?12, ?13, ?14, ?15, 'OnHold', 0, ?16, ?16, 1, ?17))sql");
    Stmt refresh(db_, R"sql(
        UPDATE findings SET start_line = ?2, end_line = ?3, start_col = ?4, raw_text = ?5,
                            commit_sha = CASE WHEN length(?6) = 40 THEN ?6 ELSE commit_sha END,
                            confidence = ?7, source = ?8, last_seen = ?9, present = 1,
                            last_pr = COALESCE(?10, last_pr)
        WHERE finding_id = ?1)sql");
    Stmt add_ref(db_, R"sql(
        INSERT OR IGNORE INTO finding_refs(finding_id, issue_key, raw_match, byte_offset, pattern_id)
        VALUES (?1, ?2, ?3, ?4, ?5))sql");
    Stmt add_branch(db_, "INSERT OR IGNORE INTO finding_branches(finding_id, branch) VALUES (?1, ?2)");
    Stmt report(db_, "SELECT 1 FROM bot_reports WHERE issue_key = ?1");

    std::set<std::string> seen;
    for (const auto& f : findings) {
        SatdFinding kept = f;
        std::erase_if(kept.refs, [&](const IssueReference& ref) {
            report.reset();
            report.bind(1, ref.key.to_string());
            return report.step();
        });
        if (kept.refs.empty()) continue;
        std::string id = finding_id_for(repo, kept);
        if (!seen.insert(id).second) continue;

        std::optional<std::int64_t> pr;
        if (scan.pull_request) pr = static_cast<std::int64_t>(*scan.pull_request);

        find.reset();
        find.bind(1, id);
        if (find.step()) {
            refresh.reset();
            refresh.bind(1, id)
                .bind(2, static_cast<std::int64_t>(kept.comment.start_line))
                .bind(3, static_cast<std::int64_t>(kept.comment.end_line))
                .bind(4, static_cast<std::int64_t>(kept.comment.start_col))
                .bind(5, kept.comment.raw_text)
                .bind(6, kept.comment.commit_sha)
                .bind(7, kept.confidence)
                .bind(8, to_string(kept.source))
                .bind(9, now);
            if (pr) refresh.bind(10, *pr);
            else refresh.bind_null(10);
            refresh.run();
            result.refreshed_ids.push_back(id);
        } else {
            insert.reset();
            insert.bind(1, id)
                .bind(2, repo.host)
                .bind(3, repo.owner)
                .bind(4, repo.repo)
                .bind(5, kept.comment.file_path)
                .bind(6, static_cast<std::int64_t>(kept.comment.start_line))
                .bind(7, static_cast<std::int64_t>(kept.comment.end_line))
                .bind(8, static_cast<std::int64_t>(kept.comment.start_col))
                .bind(9, kept.comment.raw_text)
                .bind(10, kept.comment.body_text)
                .bind(11, to_string(kept.comment.kind))
                .bind(12, kept.comment.commit_sha)
                .bind(13, to_string(kept.label))
                .bind(14, kept.confidence)
                .bind(15, to_string(kept.source))
                .bind(16, now);
            if (pr) insert.bind(17, *pr);
            else insert.bind_null(17);
            insert.run();
            for (const auto& ref : kept.refs) {
                add_ref.reset();
                add_ref.bind(1, id)
                    .bind(2, ref.key.to_string())
                    .bind(3, ref.raw_match)
                    .bind(4, static_cast<std::int64_t>(ref.byte_offset))
                    .bind(5, ref.pattern_id)
                    .run();
            }
            result.new_ids.push_back(id);
        }
        add_branch.reset();
        add_branch.bind(1, id).bind(2, scan.branch).run();
        fault("store.upsert.finding");
    }

    if (scan.full_scan) {
        Stmt stale(db_, R"sql(
            SELECT b.finding_id FROM finding_branches b JOIN findings f ON f.finding_id = b.finding_id
            WHERE b.branch = ?1 AND f.host = ?2 AND f.owner = ?3 AND f.repo = ?4)sql");
        stale.bind(1, scan.branch).bind(2, repo.host).bind(3, repo.owner).bind(4, repo.repo);
        std::vector<std::string> gone;
        while (stale.step()) {
            auto id = stale.text(0);
            if (!seen.contains(id)) gone.push_back(id);
        }
        Stmt drop(db_, "DELETE FROM finding_branches WHERE finding_id = ?1 AND branch = ?2");
        Stmt remaining(db_, "SELECT COUNT(*) FROM finding_branches WHERE finding_id = ?1");
        Stmt absent(db_, "UPDATE findings SET present = 0 WHERE finding_id = ?1");
        for (const auto& id : gone) {
            drop.reset();
            drop.bind(1, id).bind(2, scan.branch).run();
            remaining.reset();
            remaining.bind(1, id);
            remaining.step();
            if (remaining.int64(0) == 0) {
                absent.reset();
                absent.bind(1, id).run();
                result.disappeared_ids.push_back(id);
            }
        }
    }

    refresh_watches(now, &result.newly_watched);

    // Findings whose issues are all known closed become ready immediately.
    Stmt onhold(db_, "SELECT finding_id FROM findings WHERE status = 'OnHold' AND present = 1");
    std::vector<std::string> candidates;
    while (onhold.step()) candidates.push_back(onhold.text(0));
    Stmt ready(db_, "UPDATE findings SET status = 'ReadyToBeFixed' WHERE finding_id = ?1");
    for (const auto& id : candidates) {
        if (!seen.contains(id) || !all_refs_resolved(id)) continue;
        ready.reset();
        ready.bind(1, id).run();
    }
    for (const auto& id : seen) {
        Stmt st(db_, "SELECT status FROM findings WHERE finding_id = ?1");
        st.bind(1, id);
        if (st.step() && st.text(0) == "ReadyToBeFixed") result.ready_ids.push_back(id);
    }
    fault("store.upsert.before_commit");
    tx.commit();
    fault("store.upsert.committed");
    return result;
}

void WatchStore::refresh_watches(Timestamp now, std::vector<IssueKey>* newly_watched) {
    Stmt live(db_, R"sql(
        SELECT DISTINCT r.issue_key FROM finding_refs r JOIN findings f ON f.finding_id = r.finding_id
        WHERE f.present = 1 AND f.status != 'Dismissed')sql");
    std::set<std::string> wanted;
    while (live.step()) wanted.insert(live.text(0));

    Stmt existing(db_, "SELECT issue_key FROM watches");
    std::set<std::string> have;
    while (existing.step()) have.insert(existing.text(0));

    Stmt add(db_, "INSERT INTO watches(issue_key, status, last_polled, next_poll, failures) VALUES (?1, 'Unknown', 0, ?2, 0)");
    for (const auto& key : wanted) {
        if (have.contains(key)) continue;
        add.reset();
        add.bind(1, key).bind(2, now).run();
        if (newly_watched) newly_watched->push_back(IssueKey::parse(key));
    }
    Stmt remove(db_, "DELETE FROM watches WHERE issue_key = ?1");
    for (const auto& key : have) {
        if (wanted.contains(key)) continue;
        remove.reset();
        remove.bind(1, key).run();
    }
}

bool WatchStore::all_refs_resolved(const std::string& finding_id) const {
    Stmt q(db_, R"sql(
        SELECT COUNT(*), SUM(CASE WHEN w.status = 'Resolved' THEN 1 ELSE 0 END)
        FROM finding_refs r LEFT JOIN watches w ON w.issue_key = r.issue_key
        WHERE r.finding_id = ?1)sql");
    q.bind(1, finding_id);
    q.step();
    return q.int64(0) > 0 && q.int64(0) == q.int64(1);
}

std::vector<std::string> WatchStore::mark_resolved(const IssueKey& key, Timestamp now,
                                                   std::optional<Timestamp> resolved_at) {
    std::lock_guard lock(mu_);
    Transaction tx(db_);
    auto k = key.to_string();
    Stmt upd(db_, R"sql(
        UPDATE watches SET status = 'Resolved', last_polled = ?2, failures = 0, resolved_at = ?3
        WHERE issue_key = ?1)sql");
    upd.bind(1, k).bind(2, now).bind(3, resolved_at.value_or(now)).run();
    fault("store.resolve.watch");

    Stmt linked(db_, R"sql(
        SELECT f.finding_id FROM findings f JOIN finding_refs r ON r.finding_id = f.finding_id
        WHERE r.issue_key = ?1 AND f.status = 'OnHold' ORDER BY f.finding_id)sql");
    linked.bind(1, k);
    std::vector<std::string> candidates;
    while (linked.step()) candidates.push_back(linked.text(0));
    std::vector<std::string> flipped;
    Stmt ready(db_, "UPDATE findings SET status = 'ReadyToBeFixed' WHERE finding_id = ?1");
    for (const auto& id : candidates) {
        if (!all_refs_resolved(id)) continue;
        ready.reset();
        ready.bind(1, id).run();
        flipped.push_back(id);
    }
    fault("store.resolve.before_commit");
    tx.commit();
    fault("store.resolve.committed");
    return flipped;
}

std::vector<std::string> WatchStore::mark_reopened(const IssueKey& key, Timestamp now) {
    std::lock_guard lock(mu_);
    Transaction tx(db_);
    auto k = key.to_string();
    Stmt upd(db_, R"sql(
        UPDATE watches SET status = 'Open', last_polled = ?2, failures = 0, resolved_at = NULL
        WHERE issue_key = ?1)sql");
    upd.bind(1, k).bind(2, now).run();
    Stmt linked(db_, R"sql(
        SELECT f.finding_id FROM findings f JOIN finding_refs r ON r.finding_id = f.finding_id
        WHERE r.issue_key = ?1 AND f.status = 'ReadyToBeFixed' ORDER BY f.finding_id)sql");
    linked.bind(1, k);
    std::vector<std::string> reverted;
    while (linked.step()) reverted.push_back(linked.text(0));
    Stmt back(db_, "UPDATE findings SET status = 'OnHold', epoch = epoch + 1 WHERE finding_id = ?1");
    for (const auto& id : reverted) {
        back.reset();
        back.bind(1, id).run();
    }
    tx.commit();
    return reverted;
}

void WatchStore::record_poll(const IssueKey& key, IssueState observed, Timestamp now, Timestamp next_poll) {
    std::lock_guard lock(mu_);
    Stmt upd(db_, R"sql(
        UPDATE watches SET status = CASE WHEN ?2 = 'Unknown' THEN status ELSE ?2 END,
                           last_polled = ?3, next_poll = ?4, failures = 0
        WHERE issue_key = ?1)sql");
    upd.bind(1, key.to_string()).bind(2, to_string(observed)).bind(3, now).bind(4, next_poll).run();
}

void WatchStore::record_poll_failure(const IssueKey& key, Timestamp now, Timestamp next_poll) {
    std::lock_guard lock(mu_);
    (void)now;
    Stmt upd(db_, "UPDATE watches SET failures = failures + 1, next_poll = ?2 WHERE issue_key = ?1");
    upd.bind(1, key.to_string()).bind(2, next_poll).run();
}

void WatchStore::forget_issue(const IssueKey& key) {
    std::lock_guard lock(mu_);
    Transaction tx(db_);
    auto k = key.to_string();
    Stmt drop(db_, "DELETE FROM finding_refs WHERE issue_key = ?1");
    drop.bind(1, k).run();
    exec("DELETE FROM findings WHERE finding_id NOT IN (SELECT finding_id FROM finding_refs)");
    Stmt add(db_, "INSERT OR IGNORE INTO bot_reports(issue_key, created_at) VALUES (?1, 0)");
    add.bind(1, k).run();
    refresh_watches(0, nullptr);
    tx.commit();
}

void WatchStore::add_bot_report(const IssueKey& key, Timestamp now) {
    std::lock_guard lock(mu_);
    Stmt add(db_, "INSERT OR REPLACE INTO bot_reports(issue_key, created_at) VALUES (?1, ?2)");
    add.bind(1, key.to_string()).bind(2, now).run();
}

bool WatchStore::is_bot_report(const IssueKey& key) const {
    std::lock_guard lock(mu_);
    Stmt q(db_, "SELECT 1 FROM bot_reports WHERE issue_key = ?1");
    q.bind(1, key.to_string());
    return q.step();
}

void WatchStore::dismiss(const std::string& finding_id) {
    std::lock_guard lock(mu_);
    Transaction tx(db_);
    Stmt upd(db_, "UPDATE findings SET status = 'Dismissed' WHERE finding_id = ?1");
    upd.bind(1, finding_id).run();
    if (sqlite3_changes(db_) == 0) throw StoreError("no such finding: " + finding_id);
    refresh_watches(0, nullptr);
    tx.commit();
}

namespace {

WatchedIssue watch_from(Stmt& q) {
    WatchedIssue w;
    w.key = IssueKey::parse(q.text(0));
    w.status = parse_issue_state(q.text(1));
    w.last_polled = q.int64(2);
    w.next_poll = q.int64(3);
    w.consecutive_failures = static_cast<std::uint32_t>(q.int64(4));
    if (!q.is_null(5)) w.resolved_at = q.int64(5);
    return w;
}

constexpr const char* kWatchColumns = "SELECT issue_key, status, last_polled, next_poll, failures, resolved_at FROM watches";

} // namespace

std::vector<WatchedIssue> WatchStore::watches() const {
    std::lock_guard lock(mu_);
    Stmt q(db_, (std::string(kWatchColumns) + " ORDER BY issue_key").c_str());
    Stmt links(db_, "SELECT finding_id FROM finding_refs WHERE issue_key = ?1 ORDER BY finding_id");
    std::vector<WatchedIssue> out;
    while (q.step()) {
        auto w = watch_from(q);
        links.reset();
        links.bind(1, q.text(0));
        while (links.step()) w.linked_findings.push_back(links.text(0));
        out.push_back(std::move(w));
    }
    return out;
}

std::vector<WatchedIssue> WatchStore::due_watches(Timestamp now) const {
    auto all = watches();
    std::erase_if(all, [&](const WatchedIssue& w) { return w.next_poll > now; });
    return all;
}

std::optional<WatchedIssue> WatchStore::watch(const IssueKey& key) const {
    for (auto& w : watches()) {
        if (w.key == key) return w;
    }
    return std::nullopt;
}

namespace {

constexpr const char* kFindingColumns = R"sql(
    SELECT finding_id, host, owner, repo, file_path, start_line, end_line, start_col, raw_text, body_text, kind,
           commit_sha, label, confidence, source, status, epoch, first_seen, last_seen, present, last_pr
    FROM findings)sql";

} // namespace

StoredFinding WatchStore::load_finding_row(void* raw) const {
    auto& q = *static_cast<Stmt*>(raw);
    StoredFinding s;
    s.finding_id = q.text(0);
    s.repo.host = q.text(1);
    s.repo.owner = q.text(2);
    s.repo.repo = q.text(3);
    auto& c = s.finding.comment;
    c.file_path = q.text(4);
    c.start_line = static_cast<std::size_t>(q.int64(5));
    c.end_line = static_cast<std::size_t>(q.int64(6));
    c.start_col = static_cast<std::size_t>(q.int64(7));
    c.raw_text = q.text(8);
    c.body_text = q.text(9);
    c.kind = q.text(10) == to_string(CommentKind::Block) ? CommentKind::Block : CommentKind::Line;
    c.commit_sha = q.text(11);
    s.finding.label = label_from(q.text(12));
    s.finding.confidence = q.real(13);
    s.finding.source = q.text(14) == to_string(FindingSource::Pattern) ? FindingSource::Pattern : FindingSource::Model;
    s.status = parse_finding_status(q.text(15));
    s.epoch = static_cast<std::uint32_t>(q.int64(16));
    s.first_seen = q.int64(17);
    s.last_seen = q.int64(18);
    s.present = q.int64(19) != 0;
    if (!q.is_null(20)) s.last_pull_request = static_cast<std::uint64_t>(q.int64(20));

    Stmt refs(db_, R"sql(
        SELECT issue_key, raw_match, byte_offset, pattern_id FROM finding_refs
        WHERE finding_id = ?1 ORDER BY byte_offset, issue_key)sql");
    refs.bind(1, s.finding_id);
    while (refs.step()) {
        IssueReference r;
        r.key = IssueKey::parse(refs.text(0));
        r.raw_match = refs.text(1);
        r.byte_offset = static_cast<std::size_t>(refs.int64(2));
        r.pattern_id = refs.text(3);
        s.finding.refs.push_back(std::move(r));
    }
    Stmt branches(db_, "SELECT branch FROM finding_branches WHERE finding_id = ?1 ORDER BY branch");
    branches.bind(1, s.finding_id);
    while (branches.step()) s.branches.push_back(branches.text(0));
    return s;
}

std::optional<StoredFinding> WatchStore::finding(const std::string& finding_id) const {
    std::lock_guard lock(mu_);
    Stmt q(db_, (std::string(kFindingColumns) + " WHERE finding_id = ?1").c_str());
    q.bind(1, finding_id);
    if (!q.step()) return std::nullopt;
    return load_finding_row(&q);
}

std::vector<StoredFinding> WatchStore::findings(std::optional<RepoId> repo, std::optional<FindingStatus> status) const {
    std::lock_guard lock(mu_);
    Stmt q(db_, (std::string(kFindingColumns) + " ORDER BY host, owner, repo, file_path, start_line, finding_id").c_str());
    std::vector<StoredFinding> out;
    while (q.step()) {
        auto s = load_finding_row(&q);
        if (repo && s.repo != *repo) continue;
        if (status && s.status != *status) continue;
        out.push_back(std::move(s));
    }
    return out;
}

RecordOutcome WatchStore::record_notification(const NotificationIntent& intent, const PostReceipt& receipt,
                                              Timestamp now) {
    std::lock_guard lock(mu_);
    Stmt ins(db_, R"sql(
        INSERT OR IGNORE INTO notifications(dedup_key, finding_id, channel, target, epoch, state, batch_id,
                                            reserved_at, posted_at, receipt_id, receipt_url)
        VALUES (?1, ?2, ?3, ?4, ?5, 'done', '', ?6, ?6, ?7, ?8))sql");
    ins.bind(1, intent.dedup_key)
        .bind(2, intent.finding_id)
        .bind(3, intent.channel)
        .bind(4, intent.target)
        .bind(5, static_cast<std::int64_t>(intent.epoch))
        .bind(6, now)
        .bind(7, receipt.id)
        .bind(8, receipt.url)
        .run();
    return sqlite3_changes(db_) > 0 ? RecordOutcome::Inserted : RecordOutcome::AlreadyPresent;
}

Reservation WatchStore::reserve(std::span<const NotificationIntent> intents, const std::string& batch_id,
                                Timestamp now) {
    std::lock_guard lock(mu_);
    Reservation out;
    Transaction tx(db_);
    Stmt ins(db_, R"sql(
        INSERT OR IGNORE INTO notifications(dedup_key, finding_id, channel, target, epoch, state, batch_id, reserved_at)
        VALUES (?1, ?2, ?3, ?4, ?5, 'pending', ?6, ?7))sql");
    for (const auto& intent : intents) {
        ins.reset();
        ins.bind(1, intent.dedup_key)
            .bind(2, intent.finding_id)
            .bind(3, intent.channel)
            .bind(4, intent.target)
            .bind(5, static_cast<std::int64_t>(intent.epoch))
            .bind(6, batch_id)
            .bind(7, now)
            .run();
        if (sqlite3_changes(db_) > 0) out.reserved.push_back(intent);
        else out.skipped.push_back(intent);
    }
    fault("store.reserve.before_commit");
    tx.commit();
    fault("store.reserve.committed");
    return out;
}

std::vector<PendingBatch> WatchStore::pending_batches(Timestamp reserved_before) const {
    std::lock_guard lock(mu_);
    Stmt q(db_, R"sql(
        SELECT batch_id, target, reserved_at, dedup_key FROM notifications
        WHERE state = 'pending' AND reserved_at <= ?1 ORDER BY reserved_at, batch_id, dedup_key)sql");
    q.bind(1, reserved_before);
    std::vector<PendingBatch> out;
    while (q.step()) {
        if (out.empty() || out.back().batch_id != q.text(0)) {
            out.push_back({q.text(0), q.text(1), q.int64(2), {}});
        }
        out.back().dedup_keys.push_back(q.text(3));
    }
    return out;
}

void WatchStore::finalize(const std::string& batch_id, const PostReceipt& receipt, Timestamp now) {
    std::lock_guard lock(mu_);
    Transaction tx(db_);
    Stmt upd(db_, R"sql(
        UPDATE notifications SET state = 'done', posted_at = ?2, receipt_id = ?3, receipt_url = ?4
        WHERE batch_id = ?1 AND state = 'pending')sql");
    upd.bind(1, batch_id).bind(2, now).bind(3, receipt.id).bind(4, receipt.url).run();
    tx.commit();
    fault("store.finalize.committed");
}

void WatchStore::finalize_keys(std::span<const std::string> dedup_keys, const PostReceipt& receipt, Timestamp now) {
    std::lock_guard lock(mu_);
    Transaction tx(db_);
    Stmt upd(db_, R"sql(
        UPDATE notifications SET state = 'done', posted_at = ?2, receipt_id = ?3, receipt_url = ?4
        WHERE dedup_key = ?1 AND state = 'pending')sql");
    for (const auto& key : dedup_keys) {
        upd.reset();
        upd.bind(1, key).bind(2, now).bind(3, receipt.id).bind(4, receipt.url).run();
    }
    tx.commit();
    fault("store.finalize.committed");
}

void WatchStore::release(const std::string& batch_id) {
    std::lock_guard lock(mu_);
    Stmt del(db_, "DELETE FROM notifications WHERE batch_id = ?1 AND state = 'pending'");
    del.bind(1, batch_id).run();
}

bool WatchStore::notified(const std::string& finding_id, std::string_view channel, std::uint32_t epoch) const {
    std::lock_guard lock(mu_);
    Stmt q(db_, "SELECT 1 FROM notifications WHERE finding_id = ?1 AND channel = ?2 AND epoch = ?3 LIMIT 1");
    q.bind(1, finding_id).bind(2, channel).bind(3, static_cast<std::int64_t>(epoch));
    return q.step();
}

std::vector<NotificationRecord> WatchStore::notifications() const {
    std::lock_guard lock(mu_);
    Stmt q(db_, R"sql(
        SELECT dedup_key, finding_id, channel, target, epoch, state, batch_id, reserved_at, posted_at, receipt_id,
               receipt_url
        FROM notifications ORDER BY reserved_at, dedup_key)sql");
    std::vector<NotificationRecord> out;
    while (q.step()) {
        NotificationRecord r;
        r.dedup_key = q.text(0);
        r.finding_id = q.text(1);
        r.channel = q.text(2);
        r.target = q.text(3);
        r.epoch = static_cast<std::uint32_t>(q.int64(4));
        r.pending = q.text(5) == "pending";
        r.batch_id = q.text(6);
        r.reserved_at = q.int64(7);
        r.posted_at = q.int64(8);
        r.receipt_id = q.text(9);
        r.receipt_url = q.text(10);
        out.push_back(std::move(r));
    }
    return out;
}

bool WatchStore::check_and_record_delivery(const std::string& delivery_id, Timestamp now, Millis retention,
                                           std::string_view job) {
    std::lock_guard lock(mu_);
    Transaction tx(db_);
    Stmt prune(db_, "DELETE FROM deliveries WHERE received_at < ?1");
    prune.bind(1, now - retention.count()).run();
    Stmt ins(db_, "INSERT OR IGNORE INTO deliveries(delivery_id, received_at) VALUES (?1, ?2)");
    ins.bind(1, delivery_id).bind(2, now).run();
    const bool duplicate = sqlite3_changes(db_) == 0;
    if (!duplicate && !job.empty()) {
        Stmt q(db_, "INSERT OR REPLACE INTO scan_jobs(delivery_id, payload, queued_at) VALUES (?1, ?2, ?3)");
        q.bind(1, delivery_id).bind(2, job).bind(3, now).run();
    }
    tx.commit();
    fault("store.delivery.committed");
    return duplicate;
}

void WatchStore::complete_job(const std::string& delivery_id) {
    std::lock_guard lock(mu_);
    Stmt q(db_, "DELETE FROM scan_jobs WHERE delivery_id = ?1");
    q.bind(1, delivery_id).run();
}

std::vector<QueuedJob> WatchStore::unfinished_jobs() const {
    std::lock_guard lock(mu_);
    Stmt q(db_, "SELECT delivery_id, payload, queued_at FROM scan_jobs ORDER BY queued_at, rowid");
    std::vector<QueuedJob> out;
    while (q.step()) out.push_back({q.text(0), q.text(1), q.int64(2)});
    return out;
}

std::string WatchStore::export_json() const {
    using nlohmann::json;
    json doc;
    doc["schema_version"] = kSchemaVersion;
    json fs = json::array();
    for (const auto& s : findings()) {
        json refs = json::array();
        for (const auto& r : s.finding.refs) {
            refs.push_back({{"key", r.key.to_string()}, {"raw_match", r.raw_match}, {"pattern_id", r.pattern_id}});
        }
        json f = {
            {"finding_id", s.finding_id},
            {"repo", s.repo.host + "/" + s.repo.full_name()},
            {"file_path", s.finding.comment.file_path},
            {"start_line", s.finding.comment.start_line},
            {"end_line", s.finding.comment.end_line},
            {"commit_sha", s.finding.comment.commit_sha},
            {"body_text", s.finding.comment.body_text},
            {"confidence", s.finding.confidence},
            {"source", to_string(s.finding.source)},
            {"status", to_string(s.status)},
            {"epoch", s.epoch},
            {"present", s.present},
            {"branches", s.branches},
            {"refs", refs},
        };
        if (s.last_pull_request) f["last_pull_request"] = *s.last_pull_request;
        fs.push_back(std::move(f));
    }
    doc["findings"] = std::move(fs);
    json ws = json::array();
    for (const auto& w : watches()) {
        json item = {{"issue", w.key.to_string()},
                     {"status", to_string(w.status)},
                     {"last_polled", w.last_polled},
                     {"next_poll", w.next_poll},
                     {"consecutive_failures", w.consecutive_failures},
                     {"linked_findings", w.linked_findings}};
        if (w.resolved_at) item["resolved_at"] = *w.resolved_at;
        ws.push_back(std::move(item));
    }
    doc["watches"] = std::move(ws);
    json ns = json::array();
    for (const auto& n : notifications()) {
        ns.push_back({{"dedup_key", n.dedup_key},
                      {"finding_id", n.finding_id},
                      {"channel", n.channel},
                      {"target", n.target},
                      {"epoch", n.epoch},
                      {"state", n.pending ? "pending" : "done"},
                      {"receipt_id", n.receipt_id}});
    }
    doc["notifications"] = std::move(ns);
    return doc.dump(2);
}

bool WatchStore::integrity_ok(std::string* problem) const {
    std::lock_guard lock(mu_);
    auto fail = [&](std::string why) {
        if (problem) *problem = std::move(why);
        return false;
    };
    try {
        Stmt check(db_, "PRAGMA integrity_check");
        if (!check.step() || check.text(0) != "ok") return fail("integrity_check: " + check.text(0));
        Stmt fk(db_, "PRAGMA foreign_key_check");
        if (fk.step()) return fail("dangling reference in " + fk.text(0));
        Stmt orphan(db_, "SELECT finding_id FROM findings WHERE finding_id NOT IN (SELECT finding_id FROM finding_refs)");
        if (orphan.step()) return fail("finding without references: " + orphan.text(0));
        Stmt unwatched(db_, R"sql(
            SELECT r.issue_key FROM finding_refs r JOIN findings f ON f.finding_id = r.finding_id
            WHERE f.present = 1 AND f.status != 'Dismissed'
              AND r.issue_key NOT IN (SELECT issue_key FROM watches))sql");
        if (unwatched.step()) return fail("live reference not watched: " + unwatched.text(0));
        Stmt version(db_, "SELECT value FROM meta WHERE key = 'schema_version'");
        if (!version.step() || version.text(0) != std::to_string(kSchemaVersion)) return fail("schema version missing");
    } catch (const StoreError& e) {
        return fail(e.what());
    }
    return true;
}

} // namespace sentinel
