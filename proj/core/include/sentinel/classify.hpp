#pragma once

#include "sentinel/comments.hpp"
#include "sentinel/issue_refs.hpp"
#include "sentinel/model.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sentinel {

class CompiledRegex;

/// Team-defined phrasings that mark a comment as On-hold regardless of the
/// model. Matching is case-insensitive.
class OnHoldPatterns {
public:
    OnHoldPatterns() = default;

    /// Throws ConfigError on a pattern that does not compile or that nests
    /// unbounded quantifiers.
    static OnHoldPatterns compile(std::span<const std::string> sources);

    [[nodiscard]] bool matches(std::string_view body_text) const;
    [[nodiscard]] bool empty() const { return compiled_.empty(); }
    [[nodiscard]] const std::vector<std::string>& sources() const { return sources_; }

private:
    std::vector<std::string> sources_;
    std::vector<std::shared_ptr<const CompiledRegex>> compiled_;
};

/// `(after|once)\s+(issue \d+) is resolved`
const std::vector<std::string>& default_onhold_pattern_sources();

enum class PatternVerdict { OnHold, NoMatch };

PatternVerdict pattern_detect(std::string_view body_text, const OnHoldPatterns& patterns);

enum class FindingSource { Model, Pattern };

std::string_view to_string(FindingSource source);

struct SatdFinding {
    SourceComment comment;
    std::vector<IssueReference> refs; // non-empty
    SatdLabel label = SatdLabel::CrossReference;
    double confidence = 0.0;
    FindingSource source = FindingSource::Model;
};

/// nullopt when `refs` is empty. A pattern hit yields OnHold with
/// confidence 1; otherwise the classifier decides.
std::optional<SatdFinding> classify_comment(const SourceComment& comment,
                                            std::span<const IssueReference> refs,
                                            const Classifier& classifier,
                                            const OnHoldPatterns& patterns);

} // namespace sentinel
