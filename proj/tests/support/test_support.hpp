#pragma once

#include "sentinel/model.hpp"

#include <filesystem>
#include <memory>
#include <string>

namespace sentinel::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

std::filesystem::path data_dir();
std::filesystem::path source_dir();
std::filesystem::path default_model_path();
std::filesystem::path cli_path();

/// The build's default model (trained on the desk corpus), loaded once.
std::shared_ptr<const LinearModel> default_model();

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& content);

} // namespace sentinel::testing
