#include "sentinel/scan_report.hpp"

#include "sentinel/errors.hpp"
#include "sentinel/issue_refs.hpp"
#include "sentinel/render.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace sentinel {

using nlohmann::json;

ScanOutcome scan_files(std::span<const ChangedFile> files, const ScanContext& context) {
    ScanOutcome out;
    std::vector<std::string> paths;
    for (const auto& f : files) paths.push_back(f.path);
    const auto selected = select_source_files(paths, context.profiles);

    std::map<std::string, const ChangedFile*> by_path;
    for (const auto& f : files) by_path.emplace(f.path, &f);

    for (const auto& sel : selected) {
        std::string content;
        try {
            content = by_path.at(sel.path)->fetch();
        } catch (const TransportError&) {
            throw;
        } catch (const std::exception& e) {
            out.diagnostics.push_back({sel.path, 0, std::string("cannot read file: ") + e.what()});
            continue;
        }
        ++out.files_scanned;
        auto extraction = extract_comments(content, sel.profile.get(), sel.path, context.commit_sha);
        out.comments += extraction.comments.size();
        for (auto& d : extraction.diagnostics) out.diagnostics.push_back(std::move(d));
        for (const auto& comment : extraction.comments) {
            auto refs = extract_refs(comment.body_text, context.home, context.ref_patterns);
            auto finding = classify_comment(comment, refs, *context.classifier, *context.onhold);
            if (!finding) continue;
            if (finding->label == SatdLabel::OnHold) out.findings.push_back(std::move(*finding));
            else ++out.cross_references;
        }
    }
    return out;
}

std::vector<ChangedFile> local_tree(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    std::vector<std::string> paths;
    fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied), end;
    for (; it != end; ++it) {
        if (it->is_directory() && it->path().filename() == ".git") {
            it.disable_recursion_pending();
            continue;
        }
        if (it->is_regular_file()) paths.push_back(fs::relative(it->path(), root).generic_string());
    }
    std::sort(paths.begin(), paths.end());
    std::vector<ChangedFile> files;
    for (auto& p : paths) {
        auto full = root / p;
        files.push_back({p, [full] {
                             std::ifstream in(full, std::ios::binary);
                             if (!in) throw ScanError("cannot read " + full.string());
                             std::ostringstream ss;
                             ss << in.rdbuf();
                             return ss.str();
                         }});
    }
    return files;
}

ScanReport make_report(const RepoId& repo, std::string branch, std::string sha, const ScanOutcome& outcome) {
    ScanReport r;
    r.repo = repo;
    r.branch = std::move(branch);
    r.sha = std::move(sha);
    r.files_scanned = outcome.files_scanned;
    r.comments = outcome.comments;
    r.cross_references = outcome.cross_references;
    r.diagnostics = outcome.diagnostics;
    for (const auto& f : outcome.findings) {
        ReportFinding rf;
        rf.finding_id = finding_id_for(repo, f);
        rf.finding = f;
        r.findings.push_back(std::move(rf));
    }
    return r;
}

std::string report_json(const ScanReport& report) {
    json findings = json::array();
    for (const auto& rf : report.findings) {
        const auto& c = rf.finding.comment;
        json refs = json::array();
        for (const auto& ref : rf.finding.refs) {
            json item = {{"key", ref.key.to_string()},
                         {"url", ref.key.url()},
                         {"raw_match", ref.raw_match},
                         {"pattern_id", ref.pattern_id}};
            if (auto it = rf.issue_states.find(ref.key.to_string()); it != rf.issue_states.end())
                item["state"] = std::string(to_string(it->second));
            refs.push_back(std::move(item));
        }
        json f = {
            {"finding_id", rf.finding_id},
            {"path", c.file_path},
            {"start_line", c.start_line},
            {"end_line", c.end_line},
            {"start_col", c.start_col},
            {"kind", std::string(to_string(c.kind))},
            {"commit_sha", c.commit_sha},
            {"body_text", c.body_text},
            {"raw_text", c.raw_text},
            {"label", std::string(to_string(rf.finding.label))},
            {"confidence", rf.finding.confidence},
            {"source", std::string(to_string(rf.finding.source))},
            {"refs", refs},
        };
        if (rf.status) f["status"] = std::string(to_string(*rf.status));
        findings.push_back(std::move(f));
    }
    json diagnostics = json::array();
    for (const auto& d : report.diagnostics) {
        diagnostics.push_back({{"path", d.file_path}, {"line", d.line}, {"message", d.message}});
    }
    json doc = {
        {"format_version", ScanReport::kFormatVersion},
        {"repo", report.repo.host + "/" + report.repo.full_name()},
        {"branch", report.branch},
        {"sha", report.sha},
        {"files_scanned", report.files_scanned},
        {"comments", report.comments},
        {"cross_references", report.cross_references},
        {"findings", findings},
        {"ready_now", report.ready_now},
        {"diagnostics", diagnostics},
    };
    return doc.dump(2);
}

std::string report_markdown(const ScanReport& report) {
    std::ostringstream out;
    out << "## On-hold SATD scan of " << report.repo.full_name();
    if (!report.branch.empty()) out << " (" << report.branch << ")";
    out << "\n\n";
    out << "- files scanned: " << report.files_scanned << "\n";
    out << "- comments: " << report.comments << "\n";
    out << "- on-hold findings: " << report.findings.size() << "\n";
    out << "- cross-reference comments: " << report.cross_references << "\n\n";
    if (!report.findings.empty()) {
        out << "| location | confidence | references |\n|---|---|---|\n";
        for (const auto& rf : report.findings) {
            const auto& c = rf.finding.comment;
            out << "| `" << c.file_path << ":" << c.start_line << "` | ";
            if (rf.finding.source == FindingSource::Pattern) out << "pattern match";
            else out << confidence_percent(rf.finding.confidence);
            out << " |";
            for (const auto& ref : rf.finding.refs) {
                out << " [" << ref.key.repo.full_name() << "#" << ref.key.number << "](" << ref.key.url() << ")";
            }
            out << " |\n";
        }
    }
    for (const auto& d : report.diagnostics) out << "\n> " << d.file_path << ":" << d.line << ": " << d.message << "\n";
    return out.str();
}

std::string report_text(const ScanReport& report) {
    std::ostringstream out;
    for (const auto& rf : report.findings) {
        const auto& c = rf.finding.comment;
        out << c.file_path << ":" << c.start_line << ": on-hold (";
        if (rf.finding.source == FindingSource::Pattern) out << "pattern match";
        else out << "confidence " << confidence_percent(rf.finding.confidence);
        out << ")";
        for (const auto& ref : rf.finding.refs) {
            out << " " << ref.key.repo.full_name() << "#" << ref.key.number;
            if (auto it = rf.issue_states.find(ref.key.to_string()); it != rf.issue_states.end())
                out << " [" << to_string(it->second) << "]";
        }
        out << "\n";
    }
    for (const auto& d : report.diagnostics) out << d.file_path << ":" << d.line << ": warning: " << d.message << "\n";
    out << report.findings.size() << " on-hold finding(s) in " << report.files_scanned << " file(s)\n";
    return out.str();
}

} // namespace sentinel
