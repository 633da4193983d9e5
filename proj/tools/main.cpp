#include "cli.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <filesystem>

int main(int argc, char** argv) {
    // Diagnostics go to stderr; stdout carries reports only.
    spdlog::set_default_logger(spdlog::stderr_color_mt("satd-sentinel"));

    std::filesystem::path exe_dir;
    std::error_code ec;
    auto self = std::filesystem::read_symlink("/proc/self/exe", ec);
    if (!ec) exe_dir = self.parent_path();
    else if (argc > 0) exe_dir = std::filesystem::absolute(argv[0]).parent_path();

    auto env = sentinel::cli::Environment::process(exe_dir);
    std::vector<std::string> args(argv + 1, argv + argc);
    return sentinel::cli::run(args, env);
}
