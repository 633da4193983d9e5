#include "sentinel/render.hpp"

#include "sentinel/text.hpp"

#include <algorithm>
#include <cmath>

namespace sentinel {

namespace {

constexpr std::size_t kExcerptLines = 3;

std::string fence_for(std::string_view body) {
    std::size_t longest = 0;
    std::size_t run = 0;
    for (char c : body) {
        run = c == '`' ? run + 1 : 0;
        longest = std::max(longest, run);
    }
    return std::string(std::max<std::size_t>(3, longest + 1), '`');
}

std::string excerpt(std::string_view body) {
    auto lines = text::split_lines(text::trim(body));
    std::string out;
    const std::size_t n = std::min(lines.size(), kExcerptLines);
    for (std::size_t i = 0; i < n; ++i) {
        out.append(text::trim_right(lines[i]));
        if (i + 1 < n) out += '\n';
    }
    if (lines.size() > kExcerptLines) out += " …";
    return out;
}

std::string location(const SourceComment& c) {
    std::string s = c.file_path + ":" + std::to_string(c.start_line);
    if (c.end_line > c.start_line) s += "-" + std::to_string(c.end_line);
    return s;
}

std::string header(std::size_t count, const RenderTrigger& trigger) {
    std::string noun = count == 1 ? "On-hold SATD comment is" : "On-hold SATD comments are";
    std::string s = "### satd-sentinel: " + std::to_string(count) + " " + noun + " ready to be fixed";
    switch (trigger.kind) {
    case RenderTrigger::Kind::PullRequest: s += " (pull request " + trigger.detail + ")"; break;
    case RenderTrigger::Kind::Push: s += " (push " + trigger.detail + ")"; break;
    case RenderTrigger::Kind::Poll: s += " (issue monitor)"; break;
    }
    return s;
}

} // namespace

std::string report_marker_line(std::string_view batch_id) {
    return std::string(kReportMarker) + " batch=" + std::string(batch_id) + " -->";
}

std::string confidence_percent(double confidence) {
    const double clamped = std::clamp(confidence, 0.0, 1.0);
    // Guard against 0.87 * 100 = 86.99999...
    auto pct = static_cast<int>(std::floor(clamped * 100.0 + 1e-9));
    return std::to_string(pct) + "%";
}

std::string issue_title(std::size_t finding_count) {
    return "Ready-to-be-fixed On-hold SATD (" + std::to_string(finding_count) +
           (finding_count == 1 ? " comment)" : " comments)");
}

std::string render_notification(std::span<const StoredFinding> findings, Channel channel, const RenderTrigger& trigger,
                                 std::string_view batch_id) {
    std::vector<const StoredFinding*> sorted;
    for (const auto& f : findings) sorted.push_back(&f);
    std::sort(sorted.begin(), sorted.end(), [](const StoredFinding* a, const StoredFinding* b) {
        const auto& ca = a->finding.comment;
        const auto& cb = b->finding.comment;
        return std::tie(ca.file_path, ca.start_line, a->finding_id) < std::tie(cb.file_path, cb.start_line, b->finding_id);
    });

    std::string out = header(sorted.size(), trigger);
    out += "\n\n";
    out += "The issues these comments wait on have been resolved";
    out += channel == Channel::IssueCreation ? ". Consider revisiting the code below.\n\n" : ".\n\n";
    for (const auto* f : sorted) {
        const auto& c = f->finding.comment;
        out += "- `" + location(c) + "`";
        if (f->finding.source == FindingSource::Pattern) out += " (pattern match)";
        else out += " (confidence: " + confidence_percent(f->finding.confidence) + ")";
        out += "\n";
        const auto body = excerpt(c.body_text);
        const auto fence = fence_for(body);
        out += "  " + fence + "\n";
        for (auto line : text::split_lines(body)) {
            out += "  ";
            out.append(line);
            out += "\n";
        }
        out += "  " + fence + "\n";
        out += "  Resolved:";
        for (const auto& r : f->finding.refs) {
            out += " [" + r.key.repo.full_name() + "#" + std::to_string(r.key.number) + "](" + r.key.url() + ")";
        }
        out += "\n";
    }
    out += "\n" + report_marker_line(batch_id) + "\n";
    return out;
}

} // namespace sentinel
