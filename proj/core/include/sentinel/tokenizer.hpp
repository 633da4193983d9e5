#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sentinel {

inline constexpr std::string_view kUrlToken = "_url_";
inline constexpr std::string_view kNumberToken = "_num_";
inline constexpr std::string_view kIssueToken = "_issue_";

/// Lowercases, replaces URLs with `_url_`, `#N` and `owner/repo#N` shorthands
/// with `_issue_`, splits on non-alphanumeric bytes and maps all-digit tokens
/// to `_num_`. Bytes >= 0x80 count as word characters.
std::vector<std::string> tokenize(std::string_view body_text);

/// Every contiguous n-gram for n in 1..n_max, unigrams first; n-grams are
/// joined with a single space.
std::vector<std::string> ngrams(std::span<const std::string> tokens, std::size_t n_max = 2);

} // namespace sentinel
