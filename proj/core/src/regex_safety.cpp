#include "regex_internal.hpp"

#include "sentinel/errors.hpp"

#include <boost/regex.hpp>

#include <cctype>

namespace sentinel::regex_detail {

namespace {

// Skips a bracket expression starting at source[i] == '['; returns the index
// just past its closing ']'.
std::size_t skip_class(std::string_view source, std::size_t i) {
    std::size_t j = i + 1;
    if (j < source.size() && source[j] == '^') ++j;
    if (j < source.size() && source[j] == ']') ++j;
    while (j < source.size()) {
        if (source[j] == '\\') {
            j += 2;
            continue;
        }
        if (source[j] == '[' && j + 1 < source.size() && source[j + 1] == ':') {
            const auto close = source.find(":]", j + 2);
            if (close != std::string_view::npos) {
                j = close + 2;
                continue;
            }
        }
        if (source[j] == ']') return j + 1;
        ++j;
    }
    return source.size();
}

bool is_capturing_open(std::string_view source, std::size_t i) {
    if (i + 1 >= source.size() || source[i + 1] != '?') return true;
    if (i + 2 >= source.size()) return false;
    const char c = source[i + 2];
    if (c == 'P' && i + 3 < source.size() && source[i + 3] == '<') return true;
    if (c == '\'') return true;
    if (c == '<') {
        // (?<name> captures; (?<= and (?<! are lookbehinds.
        return i + 3 < source.size() && source[i + 3] != '=' && source[i + 3] != '!';
    }
    return false;
}

// Length of the quantifier at source[i], 0 if none. Sets `unbounded`.
std::size_t quantifier_at(std::string_view source, std::size_t i, bool& unbounded) {
    unbounded = false;
    if (i >= source.size()) return 0;
    const char c = source[i];
    if (c == '*' || c == '+') {
        unbounded = true;
        return 1;
    }
    if (c == '?') return 1;
    if (c == '{') {
        const auto close = source.find('}', i);
        if (close == std::string_view::npos) return 0;
        const auto body = source.substr(i + 1, close - i - 1);
        if (body.empty()) return 0;
        for (char ch : body)
            if (!(std::isdigit(static_cast<unsigned char>(ch)) || ch == ',')) return 0;
        unbounded = body.back() == ',';
        return close - i + 1;
    }
    return 0;
}

} // namespace

std::vector<GroupSpan> capturing_groups(std::string_view source) {
    std::vector<GroupSpan> groups;
    std::vector<std::optional<std::size_t>> stack; // group index or nullopt
    std::size_t i = 0;
    while (i < source.size()) {
        const char c = source[i];
        if (c == '\\') {
            i += 2;
            continue;
        }
        if (c == '[') {
            i = skip_class(source, i);
            continue;
        }
        if (c == '(') {
            if (is_capturing_open(source, i)) {
                std::size_t body = i + 1;
                if (body < source.size() && source[body] == '?') {
                    const char closer = source[body + 1] == '\'' ? '\'' : '>';
                    const auto end = source.find(closer, body + 2);
                    body = end == std::string_view::npos ? source.size() : end + 1;
                }
                groups.push_back({body, source.size()});
                stack.emplace_back(groups.size() - 1);
            } else {
                stack.emplace_back(std::nullopt);
            }
            ++i;
            continue;
        }
        if (c == ')') {
            if (!stack.empty()) {
                if (stack.back()) groups[*stack.back()].end = i;
                stack.pop_back();
            }
            ++i;
            continue;
        }
        ++i;
    }
    return groups;
}

std::optional<std::string> backtracking_hazard(std::string_view source) {
    // For every open group track whether its body contains an unbounded quantifier.
    std::vector<bool> stack;
    bool top_level_unbounded = false;
    std::size_t i = 0;
    auto mark_unbounded = [&] {
        if (stack.empty())
            top_level_unbounded = true;
        else
            stack.back() = true;
    };
    while (i < source.size()) {
        const char c = source[i];
        std::size_t atom_end = i + 1;
        bool group_closed = false;
        bool inner_unbounded = false;
        if (c == '\\') {
            atom_end = i + 2;
        } else if (c == '[') {
            atom_end = skip_class(source, i);
        } else if (c == '(') {
            stack.push_back(false);
            i += 1;
            continue;
        } else if (c == ')') {
            if (!stack.empty()) {
                inner_unbounded = stack.back();
                stack.pop_back();
            }
            group_closed = true;
        }
        bool unbounded = false;
        const std::size_t qlen = quantifier_at(source, atom_end, unbounded);
        if (group_closed && unbounded && inner_unbounded) {
            return "nested unbounded quantifier ending at offset " + std::to_string(atom_end) +
                   " can backtrack exponentially";
        }
        if (group_closed && inner_unbounded) mark_unbounded();
        if (unbounded) mark_unbounded();
        i = atom_end + qlen;
        // Lazy/possessive suffix.
        if (qlen > 0 && i < source.size() && (source[i] == '?' || source[i] == '+')) ++i;
    }
    (void)top_level_unbounded;
    return std::nullopt;
}

bool source_matches_digits(std::string_view g) {
    return g.find("\\d") != std::string_view::npos || g.find("[0-9") != std::string_view::npos ||
           g.find("[[:digit:]") != std::string_view::npos;
}

bool source_is_digits_only(std::string_view g) {
    static const boost::regex kDigitsOnly(R"(^(?:\\d|\[0-9\]|\[\[:digit:\]\])(?:[+*]|\{\d+(?:,\d*)?\})?$)");
    return boost::regex_match(g.begin(), g.end(), kDigitsOnly);
}

boost::regex compile(std::string_view source, bool icase, std::string_view what) {
    try {
        boost::regex::flag_type flags = boost::regex::perl;
        if (icase) flags |= boost::regex::icase;
        return boost::regex(source.begin(), source.end(), flags);
    } catch (const boost::regex_error& e) {
        throw ConfigError(std::string(what) + " does not compile at position " +
                          std::to_string(e.position()) + ": " + e.what());
    }
}

} // namespace sentinel::regex_detail
