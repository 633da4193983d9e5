#pragma once

#include "sentinel/config.hpp"
#include "sentinel/watch_store.hpp"

#include <span>
#include <string>

namespace sentinel {

/// What caused a notification; named in the header line.
struct RenderTrigger {
    enum class Kind { PullRequest, Push, Poll } kind = Kind::Poll;
    std::string detail; // "#12", a short sha, ...
};

std::string report_marker_line(std::string_view batch_id);

/// Floor of confidence * 100 ("87%"), for display.
std::string confidence_percent(double confidence);

/// Markdown listing `findings` (non-empty) sorted by (path, start_line),
/// ending with the hidden marker line. Byte-identical for identical inputs.
std::string render_notification(std::span<const StoredFinding> findings, Channel channel, const RenderTrigger& trigger,
                                 std::string_view batch_id);

std::string issue_title(std::size_t finding_count);

} // namespace sentinel
