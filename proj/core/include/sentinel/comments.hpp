#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sentinel {

struct BlockCommentPair {
    std::string open;
    std::string close;
};

/// A string or character literal delimiter. The same delimiter opens and
/// closes the literal; `escape` skips the following byte. Literals that are
/// not `multiline` end at the next newline even when unterminated.
struct StringDelimiter {
    std::string delimiter;
    char escape = '\\';
    bool multiline = false;
};

/// Lexical comment syntax of one language.
struct LanguageProfile {
    std::string name;
    std::vector<std::string> file_extensions; // lowercase, no leading dot
    std::vector<std::string> line_comment_markers;
    std::vector<BlockCommentPair> block_comment_pairs;
    std::vector<StringDelimiter> string_delimiters;

    /// Throws ConfigError when an invariant is violated.
    void validate() const;
};

/// The built-in Java profile: `//`, `/* */`, string, char and text-block literals.
LanguageProfile java_profile();

enum class CommentKind { Line, Block };

std::string_view to_string(CommentKind kind);

inline constexpr std::string_view kWorktreeSha = "WORKTREE";

struct SourceComment {
    std::string file_path;
    std::size_t start_line = 0; // 1-based, inclusive
    std::size_t end_line = 0;
    std::size_t start_col = 0; // 1-based byte column of the opener
    std::string raw_text;
    std::string body_text;
    CommentKind kind = CommentKind::Line;
    std::string commit_sha{kWorktreeSha};

    bool operator==(const SourceComment&) const = default;
};

struct ExtractionDiagnostic {
    std::string file_path;
    std::size_t line = 0;
    std::string message;
};

struct ExtractionResult {
    std::vector<SourceComment> comments;
    std::vector<ExtractionDiagnostic> diagnostics;

    [[nodiscard]] bool has_diagnostics() const { return !diagnostics.empty(); }
};

struct SelectedFile {
    std::string path;
    std::reference_wrapper<const LanguageProfile> profile;
};

/// Keeps the paths whose lowercase extension is claimed by a profile, in
/// input order. Two profiles claiming one extension is a ConfigError.
std::vector<SelectedFile> select_source_files(std::span<const std::string> paths,
                                              std::span<const LanguageProfile> profiles);

/// Lowercased text after the final '.' of the basename, or empty.
std::string file_extension(std::string_view path);

/// Single-pass lexer over `content` (decoded as UTF-8, invalid bytes
/// replaced). Comments inside literals are skipped. Runs of line comments on
/// consecutive lines that start in the same column, where nothing but
/// whitespace precedes each continuation, are merged into one comment.
ExtractionResult extract_comments(std::string_view content, const LanguageProfile& profile,
                                  std::string_view file_path,
                                  std::string_view commit_sha = kWorktreeSha);

/// Removes openers, closers, per-line `*` decorations and line markers.
/// Idempotent: stripping a stripped body returns it unchanged.
std::string strip_comment_markers(std::string_view raw_text, CommentKind kind,
                                  const LanguageProfile& profile);

} // namespace sentinel
