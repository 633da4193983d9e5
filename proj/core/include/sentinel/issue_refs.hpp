#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sentinel {

/// A repository on a forge. All three parts are stored lowercase.
struct RepoId {
    std::string host = "github.com";
    std::string owner;
    std::string repo;

    [[nodiscard]] std::string full_name() const { return owner + "/" + repo; }

    /// Parses "owner/repo" (host defaults) or "host/owner/repo".
    static RepoId parse(std::string_view text, std::string_view default_host = "github.com");

    auto operator<=>(const RepoId&) const = default;
};

/// Canonical identity of an issue: two references with equal keys are the same issue.
struct IssueKey {
    RepoId repo;
    std::uint64_t number = 0;

    /// "host/owner/repo#number"
    [[nodiscard]] std::string to_string() const;
    [[nodiscard]] std::string url() const;
    static IssueKey parse(std::string_view text);

    auto operator<=>(const IssueKey&) const = default;
};

struct IssueReference {
    IssueKey key;
    std::string raw_match;
    std::size_t byte_offset = 0;
    std::string pattern_id;

    bool operator==(const IssueReference&) const = default;
};

enum class PatternOrigin { BuiltIn, UserDefined };

/// Which capture groups bind the parts of a reference. Owner and repo default
/// to the scanned repository when unbound.
struct CaptureMap {
    int number_group = 1;
    std::optional<int> owner_group;
    std::optional<int> repo_group;
    std::optional<int> host_group;
};

class CompiledRegex;

class RefPattern {
public:
    RefPattern(std::string id, std::string source, CaptureMap captures, PatternOrigin origin,
               std::shared_ptr<const CompiledRegex> regex, bool number_group_is_digits);

    [[nodiscard]] const std::string& id() const { return id_; }
    [[nodiscard]] const std::string& source() const { return source_; }
    [[nodiscard]] const CaptureMap& captures() const { return captures_; }
    [[nodiscard]] PatternOrigin origin() const { return origin_; }
    [[nodiscard]] const CompiledRegex& regex() const { return *regex_; }
    /// False when the number group contains more than digits (for example
    /// `(issue \d+)`); the number is then the first digit run inside it.
    [[nodiscard]] bool number_group_is_digits() const { return number_group_is_digits_; }

private:
    std::string id_;
    std::string source_;
    CaptureMap captures_;
    PatternOrigin origin_;
    std::shared_ptr<const CompiledRegex> regex_;
    bool number_group_is_digits_;
};

/// Full URL, owner/repo#N, #N, and "issue N", in that priority order.
const std::vector<RefPattern>& builtin_patterns();

/// Validates and compiles a user pattern. Throws ConfigError for a regex that
/// does not compile (with the error position), a missing or non-numeric
/// number group, or a construct prone to catastrophic backtracking.
RefPattern compile_user_pattern(std::string id, std::string_view regex_source, CaptureMap captures);

/// Built-ins followed by `user` in order.
std::vector<RefPattern> with_builtins(std::span<const RefPattern> user);

/// All non-overlapping matches over every pattern. The earliest-starting match
/// wins an overlap, ties go to the pattern listed first. Unbound owner/repo
/// come from `home`; duplicate keys keep their first occurrence.
std::vector<IssueReference> extract_refs(std::string_view body_text, const RepoId& home,
                                         std::span<const RefPattern> patterns);

/// Candidate match of one pattern anchored at a byte offset (used by tests as
/// a brute-force reference and by the tokenizer).
std::optional<IssueReference> match_at(std::string_view body_text, std::size_t offset,
                                       const RepoId& home, const RefPattern& pattern);

} // namespace sentinel
