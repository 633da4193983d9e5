#pragma once

#include "sentinel/model.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sentinel {

struct LabeledRecord {
    SatdLabel label;
    std::string text;
};

/// Labelled comment bodies. On disk: UTF-8, one `label<TAB>text` record per
/// line, `#` lines are comments, `\n` `\t` `\\` escapes inside text.
struct LabeledCorpus {
    std::vector<LabeledRecord> records;
    std::string origin;

    static LabeledCorpus parse(std::string_view tsv);
    static LabeledCorpus load(const std::filesystem::path& path);
    [[nodiscard]] std::string serialize() const;
    [[nodiscard]] std::string content_hash() const;
    [[nodiscard]] std::size_t count(SatdLabel label) const;
};

/// Accepts OnHold / CrossReference in any case, with or without '-' or '_'.
SatdLabel parse_label(std::string_view text);

} // namespace sentinel
