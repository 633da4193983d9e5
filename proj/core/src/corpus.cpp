#include "sentinel/corpus.hpp"

#include "sentinel/errors.hpp"
#include "sentinel/hashing.hpp"
#include "sentinel/text.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace sentinel {

SatdLabel parse_label(std::string_view raw) {
    std::string norm;
    for (char c : text::to_lower_ascii(text::trim(raw)))
        if (c != '-' && c != '_' && c != ' ') norm += c;
    if (norm == "onhold") return SatdLabel::OnHold;
    if (norm == "crossreference" || norm == "crossref") return SatdLabel::CrossReference;
    throw TrainingError("unknown label '" + std::string(raw) + "'");
}

namespace {

std::string unescape(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            const char n = s[++i];
            out += n == 'n' ? '\n' : n == 't' ? '\t' : n;
        } else {
            out += s[i];
        }
    }
    return out;
}

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '\n')
            out += "\\n";
        else if (c == '\t')
            out += "\\t";
        else if (c == '\\')
            out += "\\\\";
        else
            out += c;
    }
    return out;
}

} // namespace

LabeledCorpus LabeledCorpus::parse(std::string_view tsv) {
    LabeledCorpus corpus;
    std::size_t line_no = 0;
    for (auto line : text::split_lines(tsv)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (text::trim(line).empty()) continue;
        if (line.front() == '#') {
            constexpr std::string_view kTag = "# origin:";
            if (line.substr(0, kTag.size()) == kTag) corpus.origin = std::string(text::trim(line.substr(kTag.size())));
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string_view::npos)
            throw TrainingError("corpus line " + std::to_string(line_no) + ": expected label<TAB>text");
        try {
            corpus.records.push_back({parse_label(line.substr(0, tab)), unescape(line.substr(tab + 1))});
        } catch (const TrainingError& e) {
            throw TrainingError("corpus line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return corpus;
}

LabeledCorpus LabeledCorpus::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TrainingError("cannot open corpus " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string LabeledCorpus::serialize() const {
    std::string out;
    if (!origin.empty()) out += "# origin: " + origin + "\n";
    for (const auto& r : records) {
        out += to_string(r.label);
        out += '\t';
        out += escape(r.text);
        out += '\n';
    }
    return out;
}

std::string LabeledCorpus::content_hash() const {
    std::string body;
    for (const auto& r : records) {
        body += to_string(r.label);
        body += '\t';
        body += escape(r.text);
        body += '\n';
    }
    return sha256_hex(body).substr(0, 16);
}

std::size_t LabeledCorpus::count(SatdLabel label) const {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(),
                                                  [&](const LabeledRecord& r) { return r.label == label; }));
}

} // namespace sentinel
