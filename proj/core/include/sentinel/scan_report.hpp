#pragma once

#include "sentinel/classify.hpp"
#include "sentinel/comments.hpp"
#include "sentinel/forge.hpp"
#include "sentinel/watch_store.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sentinel {

struct ScanContext {
    RepoId home;
    std::span<const LanguageProfile> profiles;
    std::span<const RefPattern> ref_patterns;
    const Classifier* classifier = nullptr;
    const OnHoldPatterns* onhold = nullptr;
    std::string commit_sha{kWorktreeSha};
};

struct ScanOutcome {
    std::size_t files_scanned = 0;
    std::size_t comments = 0;
    std::size_t cross_references = 0;
    std::vector<SatdFinding> findings; // OnHold only, in file then comment order
    std::vector<ExtractionDiagnostic> diagnostics;
};

/// extract_comments -> extract_refs -> classify_comment over the files
/// claimed by a language profile. Files that cannot be fetched become
/// diagnostics.
ScanOutcome scan_files(std::span<const ChangedFile> files, const ScanContext& context);

/// Regular files under `root` (skipping .git), as sorted relative paths
/// with '/' separators.
std::vector<ChangedFile> local_tree(const std::filesystem::path& root);

struct ReportFinding {
    std::string finding_id;
    SatdFinding finding;
    std::optional<FindingStatus> status;
    std::map<std::string, IssueState> issue_states; // canonical key -> state, when known
};

struct ScanReport {
    static constexpr int kFormatVersion = 1;

    RepoId repo;
    std::string branch;
    std::string sha{kWorktreeSha};
    std::size_t files_scanned = 0;
    std::size_t comments = 0;
    std::size_t cross_references = 0;
    std::vector<ReportFinding> findings;
    std::vector<std::string> ready_now;
    std::vector<ExtractionDiagnostic> diagnostics;
};

ScanReport make_report(const RepoId& repo, std::string branch, std::string sha, const ScanOutcome& outcome);

/// The documented JSON shape (schemas/scan-report.schema.json).
std::string report_json(const ScanReport& report);
std::string report_markdown(const ScanReport& report);
std::string report_text(const ScanReport& report);

} // namespace sentinel
