#include "sentinel/classify.hpp"

#include "regex_internal.hpp"
#include "sentinel/errors.hpp"

namespace sentinel {

OnHoldPatterns OnHoldPatterns::compile(std::span<const std::string> sources) {
    OnHoldPatterns out;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        const std::string what = "on-hold pattern #" + std::to_string(i + 1);
        auto re = regex_detail::compile(sources[i], /*icase=*/true, what);
        if (auto hazard = regex_detail::backtracking_hazard(sources[i]))
            throw ConfigError(what + ": " + *hazard);
        out.sources_.push_back(sources[i]);
        out.compiled_.push_back(std::make_shared<const CompiledRegex>(std::move(re)));
    }
    return out;
}

bool OnHoldPatterns::matches(std::string_view body_text) const {
    for (const auto& re : compiled_) {
        try {
            if (boost::regex_search(body_text.begin(), body_text.end(), re->get())) return true;
        } catch (const std::runtime_error&) {
            // complexity limit: treat as no match
        }
    }
    return false;
}

const std::vector<std::string>& default_onhold_pattern_sources() {
    static const std::vector<std::string> sources{R"((after|once)\s+(issue \d+) is resolved)"};
    return sources;
}

PatternVerdict pattern_detect(std::string_view body_text, const OnHoldPatterns& patterns) {
    return patterns.matches(body_text) ? PatternVerdict::OnHold : PatternVerdict::NoMatch;
}

std::string_view to_string(FindingSource source) {
    return source == FindingSource::Model ? "model" : "pattern";
}

std::optional<SatdFinding> classify_comment(const SourceComment& comment,
                                            std::span<const IssueReference> refs,
                                            const Classifier& classifier,
                                            const OnHoldPatterns& patterns) {
    if (refs.empty()) return std::nullopt;
    SatdFinding finding;
    finding.comment = comment;
    finding.refs.assign(refs.begin(), refs.end());
    if (pattern_detect(comment.body_text, patterns) == PatternVerdict::OnHold) {
        finding.label = SatdLabel::OnHold;
        finding.confidence = 1.0;
        finding.source = FindingSource::Pattern;
        return finding;
    }
    const auto prediction = classifier.predict(comment.body_text);
    finding.label = prediction.label;
    finding.confidence = prediction.confidence;
    finding.source = FindingSource::Model;
    return finding;
}

} // namespace sentinel
