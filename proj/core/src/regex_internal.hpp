#pragma once

#include <boost/regex.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sentinel {

class CompiledRegex {
public:
    explicit CompiledRegex(boost::regex re) : re_(std::move(re)) {}
    [[nodiscard]] const boost::regex& get() const { return re_; }

private:
    boost::regex re_;
};

namespace regex_detail {

/// Source span of a capturing group, [begin, end) excluding the parentheses.
struct GroupSpan {
    std::size_t begin;
    std::size_t end;
};

/// Capturing groups in numbering order (1-based group n is element n-1).
std::vector<GroupSpan> capturing_groups(std::string_view source);

/// Human-readable reason when the pattern nests unbounded quantifiers,
/// which backtracking engines evaluate in exponential time.
std::optional<std::string> backtracking_hazard(std::string_view source);

bool source_matches_digits(std::string_view group_source);
bool source_is_digits_only(std::string_view group_source);

/// Compiles with perl syntax; throws ConfigError with the error position.
boost::regex compile(std::string_view source, bool icase, std::string_view what);

} // namespace regex_detail
} // namespace sentinel
