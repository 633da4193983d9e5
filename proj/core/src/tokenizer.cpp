#include "sentinel/tokenizer.hpp"

#include "regex_internal.hpp"
#include "sentinel/issue_refs.hpp"
#include "sentinel/text.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace sentinel {

namespace {

const boost::regex& url_regex() {
    static const boost::regex re(R"((?:https?|ftp)://[^\s<>"'`()\[\]{}]+|\bwww\.[^\s<>"'`()\[\]{}]+)",
                                 boost::regex::perl | boost::regex::icase);
    return re;
}

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

struct Span {
    std::size_t begin;
    std::size_t end;
    std::string_view token;
};

void emit_words(std::string_view segment, std::vector<std::string>& out) {
    std::size_t i = 0;
    while (i < segment.size()) {
        if (!is_word_byte(static_cast<unsigned char>(segment[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < segment.size() && is_word_byte(static_cast<unsigned char>(segment[j]))) ++j;
        auto word = segment.substr(i, j - i);
        const bool all_digits = std::all_of(word.begin(), word.end(),
                                            [](unsigned char c) { return std::isdigit(c); });
        out.emplace_back(all_digits ? kNumberToken : word);
        i = j;
    }
}

} // namespace

std::vector<std::string> tokenize(std::string_view body_text) {
    const std::string lowered = text::to_lower_ascii(body_text);
    const std::string_view s = lowered;

    // Sentinel spans: URLs first, then issue shorthands outside URLs.
    std::vector<Span> spans;
    try {
        for (boost::regex_iterator<std::string_view::const_iterator> it(s.begin(), s.end(), url_regex()), end;
             it != end; ++it) {
            const auto b = static_cast<std::size_t>((*it)[0].first - s.begin());
            spans.push_back({b, b + static_cast<std::size_t>((*it)[0].length()), kUrlToken});
        }
    } catch (const std::runtime_error&) {
        spans.clear();
    }
    const auto& builtins = builtin_patterns();
    const std::vector<RefPattern> shorthand(builtins.begin() + 1, builtins.begin() + 3);
    for (const auto& ref : extract_refs(s, RepoId{}, shorthand)) {
        const std::size_t b = ref.byte_offset, e = b + ref.raw_match.size();
        const bool inside_url = std::any_of(spans.begin(), spans.end(), [&](const Span& sp) {
            return sp.token == kUrlToken && b < sp.end && e > sp.begin;
        });
        if (!inside_url) spans.push_back({b, e, kIssueToken});
    }
    std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.begin < b.begin; });

    std::vector<std::string> tokens;
    std::size_t pos = 0;
    for (const auto& sp : spans) {
        if (sp.begin < pos) continue;
        emit_words(s.substr(pos, sp.begin - pos), tokens);
        tokens.emplace_back(sp.token);
        pos = sp.end;
    }
    emit_words(s.substr(pos), tokens);
    return tokens;
}

std::vector<std::string> ngrams(std::span<const std::string> tokens, std::size_t n_max) {
    if (n_max == 0) throw std::invalid_argument("ngrams: n_max must be >= 1");
    std::vector<std::string> out;
    for (std::size_t n = 1; n <= n_max; ++n) {
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
            std::string gram = tokens[i];
            for (std::size_t k = 1; k < n; ++k) {
                gram += ' ';
                gram += tokens[i + k];
            }
            out.push_back(std::move(gram));
        }
    }
    return out;
}

} // namespace sentinel
