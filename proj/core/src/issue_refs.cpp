#include "sentinel/issue_refs.hpp"

#include "regex_internal.hpp"
#include "sentinel/errors.hpp"
#include "sentinel/text.hpp"

#include <charconv>
#include <set>

namespace sentinel {

RepoId RepoId::parse(std::string_view text, std::string_view default_host) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const auto slash = text.find('/', start);
        parts.emplace_back(text.substr(start, slash == std::string_view::npos ? slash : slash - start));
        if (slash == std::string_view::npos) break;
        start = slash + 1;
    }
    for (const auto& p : parts)
        if (p.empty()) throw ConfigError("malformed repository name '" + std::string(text) + "'");
    if (parts.size() == 2)
        return {text::to_lower_ascii(default_host), text::to_lower_ascii(parts[0]),
                text::to_lower_ascii(parts[1])};
    if (parts.size() == 3)
        return {text::to_lower_ascii(parts[0]), text::to_lower_ascii(parts[1]),
                text::to_lower_ascii(parts[2])};
    throw ConfigError("malformed repository name '" + std::string(text) + "'");
}

std::string IssueKey::to_string() const {
    return repo.host + "/" + repo.owner + "/" + repo.repo + "#" + std::to_string(number);
}

std::string IssueKey::url() const {
    return "https://" + repo.host + "/" + repo.owner + "/" + repo.repo + "/issues/" +
           std::to_string(number);
}

IssueKey IssueKey::parse(std::string_view s) {
    const auto hash = s.rfind('#');
    if (hash == std::string_view::npos) throw ConfigError("malformed issue key '" + std::string(s) + "'");
    IssueKey key;
    key.repo = RepoId::parse(s.substr(0, hash));
    const auto digits = s.substr(hash + 1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), key.number);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || key.number == 0)
        throw ConfigError("malformed issue key '" + std::string(s) + "'");
    return key;
}

RefPattern::RefPattern(std::string id, std::string source, CaptureMap captures, PatternOrigin origin,
                       std::shared_ptr<const CompiledRegex> regex, bool number_group_is_digits)
    : id_(std::move(id)),
      source_(std::move(source)),
      captures_(captures),
      origin_(origin),
      regex_(std::move(regex)),
      number_group_is_digits_(number_group_is_digits) {}

namespace {

RefPattern make_builtin(std::string id, std::string source, CaptureMap captures) {
    auto re = regex_detail::compile(source, /*icase=*/true, "built-in pattern " + id);
    return RefPattern(std::move(id), std::move(source), captures, PatternOrigin::BuiltIn,
                      std::make_shared<const CompiledRegex>(std::move(re)), true);
}

std::optional<std::uint64_t> parse_number(std::string_view captured, bool digits_only) {
    std::string_view digits = captured;
    if (!digits_only) {
        const auto first = captured.find_first_of("0123456789");
        if (first == std::string_view::npos) return std::nullopt;
        auto last = captured.find_first_not_of("0123456789", first);
        if (last == std::string_view::npos) last = captured.size();
        digits = captured.substr(first, last - first);
    }
    if (digits.empty()) return std::nullopt;
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || value == 0) return std::nullopt;
    return value;
}

// Turns a regex match into a reference; nullopt when the number is invalid.
std::optional<IssueReference> to_reference(const boost::match_results<std::string_view::const_iterator>& m,
                                           std::string_view body, const RepoId& home,
                                           const RefPattern& pattern) {
    const auto& cap = pattern.captures();
    auto group = [&](std::optional<int> g) -> std::optional<std::string> {
        if (!g || *g >= static_cast<int>(m.size()) || !m[*g].matched) return std::nullopt;
        return text::to_lower_ascii(std::string(m[*g].first, m[*g].second));
    };
    if (cap.number_group >= static_cast<int>(m.size()) || !m[cap.number_group].matched)
        return std::nullopt;
    const std::string_view captured(&*m[cap.number_group].first,
                                    static_cast<std::size_t>(m[cap.number_group].length()));
    const auto number = parse_number(captured, pattern.number_group_is_digits());
    if (!number) return std::nullopt;

    IssueReference ref;
    ref.key.repo.host = group(cap.host_group).value_or(home.host);
    ref.key.repo.owner = group(cap.owner_group).value_or(home.owner);
    ref.key.repo.repo = group(cap.repo_group).value_or(home.repo);
    ref.key.number = *number;
    ref.byte_offset = static_cast<std::size_t>(m[0].first - body.begin());
    ref.raw_match = std::string(m[0].first, m[0].second);
    ref.pattern_id = pattern.id();
    return ref;
}

} // namespace

const std::vector<RefPattern>& builtin_patterns() {
    static const std::vector<RefPattern> patterns = [] {
        std::vector<RefPattern> p;
        p.push_back(make_builtin("url",
                                 R"(https?://([a-z0-9][a-z0-9.-]*)/([\w.-]+)/([\w.-]+)/issues/(\d+)\b)",
                                 {.number_group = 4, .owner_group = 2, .repo_group = 3, .host_group = 1}));
        p.push_back(make_builtin("cross-repo", R"((?<![\w./#-])([a-z0-9][\w.-]*)/([\w.-]+)#(\d+)\b)",
                                 {.number_group = 3, .owner_group = 1, .repo_group = 2}));
        p.push_back(make_builtin("local", R"((?<![\w&#/])#(\d+)\b)", {.number_group = 1}));
        p.push_back(make_builtin("issue-word", R"(\bissue\s+(?:id\s+|no\.?\s*|number\s+)?#?(\d+)\b)",
                                 {.number_group = 1}));
        return p;
    }();
    return patterns;
}

RefPattern compile_user_pattern(std::string id, std::string_view regex_source, CaptureMap captures) {
    const std::string what = "reference pattern '" + id + "'";
    auto re = regex_detail::compile(regex_source, /*icase=*/true, what);
    if (auto hazard = regex_detail::backtracking_hazard(regex_source))
        throw ConfigError(what + ": " + *hazard);

    const auto groups = regex_detail::capturing_groups(regex_source);
    const int group_count = static_cast<int>(re.mark_count());
    auto check_group = [&](std::optional<int> g, std::string_view role) {
        if (!g) return;
        if (*g < 1 || *g > group_count)
            throw ConfigError(what + ": " + std::string(role) + " group " + std::to_string(*g) +
                              " does not exist (pattern has " + std::to_string(group_count) + ")");
    };
    if (captures.number_group < 1 || captures.number_group > group_count)
        throw ConfigError(what + ": number group " + std::to_string(captures.number_group) +
                          " does not exist (pattern has " + std::to_string(group_count) + ")");
    check_group(captures.owner_group, "owner");
    check_group(captures.repo_group, "repo");
    check_group(captures.host_group, "host");

    const auto& span = groups.at(static_cast<std::size_t>(captures.number_group - 1));
    const auto group_source = regex_source.substr(span.begin, span.end - span.begin);
    if (!regex_detail::source_matches_digits(group_source))
        throw ConfigError(what + ": number group " + std::to_string(captures.number_group) +
                          " ('" + std::string(group_source) + "') does not match digits");
    const bool digits_only = regex_detail::source_is_digits_only(group_source);

    return RefPattern(std::move(id), std::string(regex_source), captures, PatternOrigin::UserDefined,
                      std::make_shared<const CompiledRegex>(std::move(re)), digits_only);
}

std::vector<RefPattern> with_builtins(std::span<const RefPattern> user) {
    std::vector<RefPattern> all = builtin_patterns();
    all.insert(all.end(), user.begin(), user.end());
    return all;
}

std::optional<IssueReference> match_at(std::string_view body, std::size_t offset, const RepoId& home,
                                       const RefPattern& pattern) {
    boost::match_results<std::string_view::const_iterator> m;
    auto flags = boost::match_continuous;
    if (offset > 0) flags |= boost::match_prev_avail;
    try {
        if (!boost::regex_search(body.begin() + static_cast<std::ptrdiff_t>(offset), body.end(), m,
                                 pattern.regex().get(), flags, body.begin()))
            return std::nullopt;
    } catch (const std::runtime_error&) {
        return std::nullopt; // complexity limit exceeded
    }
    return to_reference(m, body, home, pattern);
}

namespace {

// Next valid match of `pattern` starting at or after `from`.
std::optional<IssueReference> search_from(std::string_view body, std::size_t from, const RepoId& home,
                                          const RefPattern& pattern) {
    while (from <= body.size()) {
        boost::match_results<std::string_view::const_iterator> m;
        auto flags = boost::match_default;
        if (from > 0) flags |= boost::match_prev_avail;
        try {
            if (!boost::regex_search(body.begin() + static_cast<std::ptrdiff_t>(from), body.end(), m,
                                     pattern.regex().get(), flags, body.begin()))
                return std::nullopt;
        } catch (const std::runtime_error&) {
            return std::nullopt;
        }
        if (auto ref = to_reference(m, body, home, pattern)) return ref;
        from = static_cast<std::size_t>(m[0].first - body.begin()) + 1;
    }
    return std::nullopt;
}

} // namespace

std::vector<IssueReference> extract_refs(std::string_view body, const RepoId& home,
                                         std::span<const RefPattern> patterns) {
    std::vector<std::optional<IssueReference>> next(patterns.size());
    for (std::size_t i = 0; i < patterns.size(); ++i) next[i] = search_from(body, 0, home, patterns[i]);

    std::vector<IssueReference> out;
    std::set<IssueKey> seen;
    for (;;) {
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < patterns.size(); ++i) {
            if (!next[i]) continue;
            if (!best || next[i]->byte_offset < next[*best]->byte_offset) best = i;
        }
        if (!best) break;
        IssueReference chosen = *next[*best];
        const std::size_t end = chosen.byte_offset + chosen.raw_match.size();
        for (std::size_t i = 0; i < patterns.size(); ++i) {
            if (next[i] && next[i]->byte_offset < end)
                next[i] = search_from(body, std::max(end, next[i]->byte_offset + 1), home, patterns[i]);
        }
        if (seen.insert(chosen.key).second) out.push_back(std::move(chosen));
    }
    return out;
}

} // namespace sentinel
