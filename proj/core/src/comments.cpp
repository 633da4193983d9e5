#include "sentinel/comments.hpp"

#include "sentinel/errors.hpp"
#include "sentinel/text.hpp"

#include <algorithm>
#include <map>
#include <optional>

namespace sentinel {

void LanguageProfile::validate() const {
    if (name.empty()) throw ConfigError("language profile without a name");
    if (file_extensions.empty())
        throw ConfigError("language profile '" + name + "' has no file extensions");
    for (const auto& ext : file_extensions) {
        if (ext.empty() || ext.front() == '.' || ext != text::to_lower_ascii(ext))
            throw ConfigError("language profile '" + name + "': extension '" + ext +
                              "' must be lowercase without a leading dot");
    }
    for (const auto& marker : line_comment_markers) {
        if (marker.empty())
            throw ConfigError("language profile '" + name + "': empty line comment marker");
    }
    for (const auto& pair : block_comment_pairs) {
        if (pair.open.empty() || pair.close.empty())
            throw ConfigError("language profile '" + name + "': block comment markers must be non-empty");
    }
    for (const auto& delim : string_delimiters) {
        if (delim.delimiter.empty())
            throw ConfigError("language profile '" + name + "': empty string delimiter");
    }
}

LanguageProfile java_profile() {
    return LanguageProfile{
        .name = "java",
        .file_extensions = {"java"},
        .line_comment_markers = {"//"},
        .block_comment_pairs = {{"/*", "*/"}},
        .string_delimiters = {{"\"\"\"", '\\', true}, {"\"", '\\', false}, {"'", '\\', false}},
    };
}

std::string_view to_string(CommentKind kind) {
    return kind == CommentKind::Line ? "line" : "block";
}

std::string file_extension(std::string_view path) {
    const auto slash = path.find_last_of('/');
    const auto base = slash == std::string_view::npos ? path : path.substr(slash + 1);
    const auto dot = base.find_last_of('.');
    if (dot == std::string_view::npos || dot + 1 == base.size()) return {};
    return text::to_lower_ascii(base.substr(dot + 1));
}

std::vector<SelectedFile> select_source_files(std::span<const std::string> paths,
                                              std::span<const LanguageProfile> profiles) {
    std::map<std::string, const LanguageProfile*, std::less<>> by_ext;
    for (const auto& profile : profiles) {
        for (const auto& ext : profile.file_extensions) {
            auto [it, inserted] = by_ext.emplace(text::to_lower_ascii(ext), &profile);
            if (!inserted && it->second != &profile)
                throw ConfigError("file extension '" + ext + "' is claimed by profiles '" +
                                  it->second->name + "' and '" + profile.name + "'");
        }
    }
    std::vector<SelectedFile> selected;
    for (const auto& path : paths) {
        const auto it = by_ext.find(file_extension(path));
        if (it != by_ext.end()) selected.push_back({path, std::cref(*it->second)});
    }
    return selected;
}

namespace {

enum class TokenKind { LineComment, BlockComment, String };

struct Token {
    TokenKind kind;
    std::size_t index; // into the matching profile vector
    std::size_t length;
};

// Longest opener at `pos`; ties resolved in favour of comments, then list order.
std::optional<Token> match_opener(std::string_view s, std::size_t pos, const LanguageProfile& p) {
    std::optional<Token> best;
    auto consider = [&](TokenKind kind, std::size_t index, std::string_view marker) {
        if (s.compare(pos, marker.size(), marker) != 0) return;
        if (!best || marker.size() > best->length) best = Token{kind, index, marker.size()};
    };
    for (std::size_t i = 0; i < p.line_comment_markers.size(); ++i)
        consider(TokenKind::LineComment, i, p.line_comment_markers[i]);
    for (std::size_t i = 0; i < p.block_comment_pairs.size(); ++i)
        consider(TokenKind::BlockComment, i, p.block_comment_pairs[i].open);
    for (std::size_t i = 0; i < p.string_delimiters.size(); ++i)
        consider(TokenKind::String, i, p.string_delimiters[i].delimiter);
    return best;
}

struct RawSpan {
    std::size_t begin;
    std::size_t end; // exclusive
    CommentKind kind;
};

// Byte offset -> (line, column), both 1-based.
class LineIndex {
public:
    explicit LineIndex(std::string_view s) {
        starts_.push_back(0);
        for (std::size_t i = 0; i < s.size(); ++i)
            if (s[i] == '\n') starts_.push_back(i + 1);
    }

    [[nodiscard]] std::size_t line_of(std::size_t offset) const {
        auto it = std::upper_bound(starts_.begin(), starts_.end(), offset);
        return static_cast<std::size_t>(it - starts_.begin());
    }

    [[nodiscard]] std::size_t line_start(std::size_t line) const { return starts_[line - 1]; }

private:
    std::vector<std::size_t> starts_;
};

bool only_whitespace(std::string_view s) { return text::trim(s).empty(); }

} // namespace

ExtractionResult extract_comments(std::string_view content, const LanguageProfile& profile,
                                  std::string_view file_path, std::string_view commit_sha) {
    const std::string decoded = text::sanitize_utf8(content);
    const std::string_view s = decoded;
    const LineIndex index(s);

    ExtractionResult result;
    std::vector<RawSpan> spans;

    std::size_t pos = 0;
    while (pos < s.size()) {
        const auto token = match_opener(s, pos, profile);
        if (!token) {
            ++pos;
            continue;
        }
        switch (token->kind) {
        case TokenKind::LineComment: {
            std::size_t end = s.find('\n', pos);
            if (end == std::string_view::npos) end = s.size();
            spans.push_back({pos, end, CommentKind::Line});
            pos = end;
            break;
        }
        case TokenKind::BlockComment: {
            const auto& close = profile.block_comment_pairs[token->index].close;
            const std::size_t found = s.find(close, pos + token->length);
            std::size_t end;
            if (found == std::string_view::npos) {
                end = s.size();
                result.diagnostics.push_back(
                    {std::string(file_path), index.line_of(pos),
                     "unterminated block comment; treated as extending to end of file"});
            } else {
                end = found + close.size();
            }
            spans.push_back({pos, end, CommentKind::Block});
            pos = end;
            break;
        }
        case TokenKind::String: {
            const auto& delim = profile.string_delimiters[token->index];
            std::size_t i = pos + token->length;
            while (i < s.size()) {
                if (s[i] == '\n' && !delim.multiline) break;
                if (s[i] == delim.escape) {
                    i += 2;
                    continue;
                }
                if (s.compare(i, delim.delimiter.size(), delim.delimiter) == 0) {
                    i += delim.delimiter.size();
                    break;
                }
                ++i;
            }
            pos = std::min(i, s.size());
            break;
        }
        }
    }

    // Merge runs of line comments.
    std::vector<RawSpan> merged;
    for (const auto& span : spans) {
        if (!merged.empty() && span.kind == CommentKind::Line &&
            merged.back().kind == CommentKind::Line) {
            const auto& prev = merged.back();
            const std::size_t prev_end_line = index.line_of(prev.end == 0 ? 0 : prev.end - 1);
            const std::size_t prev_start_line = index.line_of(prev.begin);
            const std::size_t line = index.line_of(span.begin);
            const std::size_t prev_col = prev.begin - index.line_start(prev_start_line);
            const std::size_t col = span.begin - index.line_start(line);
            const bool adjacent = line == prev_end_line + 1 ||
                                  (prev.end == prev.begin && line == prev_start_line + 1);
            if (adjacent && col == prev_col &&
                only_whitespace(s.substr(index.line_start(line), col))) {
                merged.back().end = span.end;
                continue;
            }
        }
        merged.push_back(span);
    }

    result.comments.reserve(merged.size());
    for (const auto& span : merged) {
        SourceComment c;
        c.file_path = std::string(file_path);
        c.start_line = index.line_of(span.begin);
        c.end_line = span.end > span.begin ? index.line_of(span.end - 1) : c.start_line;
        c.start_col = span.begin - index.line_start(c.start_line) + 1;
        c.raw_text = std::string(s.substr(span.begin, span.end - span.begin));
        c.kind = span.kind;
        c.body_text = strip_comment_markers(c.raw_text, c.kind, profile);
        c.commit_sha = std::string(commit_sha);
        result.comments.push_back(std::move(c));
    }
    return result;
}

namespace {

std::string_view longest_prefix(std::string_view s, const std::vector<std::string>& markers) {
    std::string_view best;
    for (const auto& m : markers)
        if (m.size() > best.size() && s.substr(0, m.size()) == m) best = m;
    return best;
}

std::string strip_block_once(std::string_view raw, const LanguageProfile& profile) {
    std::string_view body = text::trim(raw);
    for (const auto& pair : profile.block_comment_pairs) {
        if (body.substr(0, pair.open.size()) == pair.open) {
            body.remove_prefix(pair.open.size());
            if (body.size() >= pair.close.size() &&
                body.substr(body.size() - pair.close.size()) == pair.close)
                body.remove_suffix(pair.close.size());
            break;
        }
    }
    for (const auto& pair : profile.block_comment_pairs) {
        const auto trimmed = text::trim_right(body);
        if (trimmed.size() >= pair.close.size() &&
            trimmed.substr(trimmed.size() - pair.close.size()) == pair.close) {
            body = trimmed.substr(0, trimmed.size() - pair.close.size());
            break;
        }
    }

    std::vector<std::string> lines;
    for (auto line : text::split_lines(body)) {
        line = text::trim_left(line);
        while (!line.empty() && line.front() == '*') line.remove_prefix(1);
        lines.emplace_back(text::trim(line));
    }
    while (!lines.empty() && lines.front().empty()) lines.erase(lines.begin());
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return text::join(lines, "\n");
}

std::string strip_line_once(std::string_view raw, const LanguageProfile& profile) {
    std::vector<std::string> lines;
    for (auto line : text::split_lines(raw)) {
        line = text::trim_left(line);
        const auto marker = longest_prefix(line, profile.line_comment_markers);
        if (!marker.empty()) {
            line.remove_prefix(marker.size());
            while (!line.empty() && line.front() == marker.back()) line.remove_prefix(1);
        }
        lines.emplace_back(text::trim(line));
    }
    while (!lines.empty() && lines.front().empty()) lines.erase(lines.begin());
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return text::join(lines, "\n");
}

} // namespace

std::string strip_comment_markers(std::string_view raw_text, CommentKind kind,
                                  const LanguageProfile& profile) {
    // Each pass never grows the text, so iterating to a fixpoint terminates
    // and makes the result idempotent.
    std::string current(raw_text);
    for (;;) {
        std::string next = kind == CommentKind::Block ? strip_block_once(current, profile)
                                                      : strip_line_once(current, profile);
        if (next == current) return next;
        current = std::move(next);
    }
}

} // namespace sentinel
