#include "cli.hpp"

#include "sentinel/bot_service.hpp"
#include "sentinel/errors.hpp"
#include "sentinel/evaluation.hpp"
#include "sentinel/github_client.hpp"
#include "sentinel/harness.hpp"
#include "sentinel/http_server.hpp"
#include "sentinel/scan_report.hpp"
#include "sentinel/text.hpp"
#include "sentinel/training.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

namespace sentinel::cli {

using nlohmann::json;

Environment Environment::process(std::filesystem::path executable_dir) {
    Environment env;
    env.out = &std::cout;
    env.err = &std::cerr;
    env.getenv = [](const std::string& name) -> std::optional<std::string> {
        const char* v = std::getenv(name.c_str());
        if (!v) return std::nullopt;
        return std::string(v);
    };
    env.make_forge = [](const ServiceConfig& config, const std::string& token, Clock& clock) -> std::unique_ptr<Forge> {
        GitHubOptions options;
        options.api_base = config.api_base;
        options.token = token;
        options.min_interval = config.request_interval;
        return std::make_unique<GitHubClient>(options, clock);
    };
    env.executable_dir = std::move(executable_dir);
    return env;
}

std::optional<std::filesystem::path> resolve_model_path(const std::optional<std::string>& explicit_path,
                                                        const ServiceConfig* config, const Environment& env) {
    if (explicit_path) return std::filesystem::path(*explicit_path);
    if (config && config->model_path) return config->model_path;
    if (env.getenv) {
        if (auto v = env.getenv("SATD_SENTINEL_MODEL"); v && !v->empty()) return std::filesystem::path(*v);
    }
    if (!env.executable_dir.empty()) {
        auto installed = env.executable_dir / ".." / "share" / "satd-sentinel" / "desk.model";
        if (std::filesystem::exists(installed)) return installed.lexically_normal();
    }
    return std::nullopt;
}

namespace {

/// Raised inside a command to leave with a specific exit code.
struct Exit {
    int code;
    std::string message;
};

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out += c;
    }
    return out + "'";
}

std::pair<int, std::string> capture(const std::string& command) {
    std::string output;
    FILE* pipe = ::popen((command + " 2>/dev/null").c_str(), "r");
    if (!pipe) throw std::runtime_error("cannot run " + command);
    char buffer[65536];
    std::size_t n = 0;
    while ((n = std::fread(buffer, 1, sizeof buffer, pipe)) > 0) output.append(buffer, n);
    const int status = ::pclose(pipe);
    return {status, output};
}

std::vector<ChangedFile> git_tree(const std::filesystem::path& repo, const std::string& ref, std::string& sha) {
    const auto git = "git -C " + shell_quote(repo.string());
    auto [st, out] = capture(git + " rev-parse --verify " + shell_quote(ref + "^{commit}"));
    if (st != 0) throw Exit{kUsage, "unknown git ref '" + ref + "'"};
    sha = std::string(text::trim(out));
    auto [st2, listing] = capture(git + " ls-tree -r -z --name-only " + sha);
    if (st2 != 0) throw Exit{kRuntime, "git ls-tree failed"};
    std::vector<ChangedFile> files;
    std::size_t start = 0;
    while (start < listing.size()) {
        auto end = listing.find('\0', start);
        if (end == std::string::npos) end = listing.size();
        std::string path = listing.substr(start, end - start);
        start = end + 1;
        if (path.empty()) continue;
        files.push_back({path, [git, sha, path] {
                             auto [rc, content] = capture(git + " show " + shell_quote(sha + ":" + path));
                             if (rc != 0) throw ScanError("git show failed for " + path);
                             return content;
                         }});
    }
    return files;
}

std::shared_ptr<const Classifier> load_model(const std::optional<std::filesystem::path>& path) {
    if (!path) {
        throw Exit{kRuntime, "no classifier model found; pass --model or set SATD_SENTINEL_MODEL"};
    }
    try {
        return std::make_shared<LinearModel>(LinearModel::load(*path));
    } catch (const std::exception& e) {
        throw Exit{kRuntime, "cannot load model " + path->string() + ": " + e.what()};
    }
}

ServiceConfig load_config_or_exit(const std::string& path) {
    try {
        return load_service_config(path);
    } catch (const ConfigError& e) {
        throw Exit{kUsage, e.what()};
    }
}

std::string require_env(const Environment& env, const std::string& name) {
    auto v = env.getenv ? env.getenv(name) : std::nullopt;
    if (!v || v->empty()) throw Exit{kUsage, "environment variable " + name + " is not set"};
    return *v;
}

json eval_json(const EvalReport& r) {
    auto metrics = [](const auto& m) {
        return json{{"precision", m.precision}, {"recall", m.recall}, {"f_measure", m.f_measure}, {"auc", m.auc}};
    };
    auto confusion = [](const Confusion& c) {
        return json{{"tp", c.true_positive}, {"fp", c.false_positive}, {"tn", c.true_negative}, {"fn", c.false_negative}};
    };
    json folds = json::array();
    for (const auto& f : r.folds) {
        auto j = metrics(f);
        j["fold"] = f.fold;
        j["test_size"] = f.test_size;
        j["confusion"] = confusion(f.confusion);
        folds.push_back(std::move(j));
    }
    auto mean = metrics(r);
    return json{{"requested_folds", r.requested_folds},
                {"effective_folds", r.effective_folds},
                {"folds", folds},
                {"mean", mean},
                {"confusion", confusion(r.confusion)},
                {"warnings", r.warnings}};
}

struct ScanArgs {
    std::string path;
    std::optional<std::string> ref;
    std::optional<std::string> model;
    std::optional<std::string> config;
    std::optional<std::string> repo;
    std::string format = "text";
    bool gate = false;
    bool check_issues = false;
};

int cmd_scan(const ScanArgs& a, Environment& env) {
    std::error_code ec;
    if (!std::filesystem::exists(a.path, ec)) throw Exit{kUsage, "no such path: " + a.path};

    std::optional<ServiceConfig> config;
    if (a.config) config = load_config_or_exit(*a.config);

    RepoId home;
    if (a.repo) {
        try {
            home = RepoId::parse(*a.repo);
        } catch (const ConfigError& e) {
            throw Exit{kUsage, e.what()};
        }
    } else if (config && config->repos.size() == 1) {
        home = config->repos.front().repo;
    } else {
        auto name = std::filesystem::absolute(a.path).lexically_normal().filename().string();
        if (name.empty()) name = "worktree";
        home = RepoId{"local", "local", text::to_lower_ascii(name)};
    }
    const RepoConfig* repo_config = config ? config->find_repo(home) : nullptr;

    std::optional<std::string> model_arg = a.model;
    if (!model_arg && repo_config && repo_config->model_path) model_arg = repo_config->model_path->string();
    const auto classifier = load_model(resolve_model_path(model_arg, config ? &*config : nullptr, env));

    std::vector<LanguageProfile> default_profiles{java_profile()};
    std::span<const LanguageProfile> profiles = config ? std::span<const LanguageProfile>(config->profiles)
                                                       : std::span<const LanguageProfile>(default_profiles);
    const auto patterns = repo_config ? repo_config->ref_patterns() : with_builtins({});
    const OnHoldPatterns no_patterns;
    const OnHoldPatterns& onhold = repo_config ? repo_config->onhold : no_patterns;

    std::string sha{kWorktreeSha};
    std::vector<ChangedFile> files;
    if (a.ref) {
        files = git_tree(a.path, *a.ref, sha);
    } else if (std::filesystem::is_directory(a.path)) {
        files = local_tree(a.path);
    } else {
        const std::filesystem::path file(a.path);
        files = local_tree(file.parent_path().empty() ? "." : file.parent_path());
        std::erase_if(files, [&](const ChangedFile& f) { return f.path != file.filename().string(); });
    }

    ScanContext context{home, profiles, patterns, classifier.get(), &onhold, sha};
    const auto outcome = scan_files(files, context);
    auto report = make_report(home, a.ref.value_or(""), sha, outcome);

    if (a.check_issues) {
        SystemClock clock;
        const auto token = require_env(env, config ? config->token_env : "SATD_SENTINEL_TOKEN");
        auto forge = env.make_forge(config ? *config : ServiceConfig{}, token, clock);
        std::map<std::string, IssueState> states;
        for (auto& rf : report.findings) {
            bool all_resolved = true;
            for (const auto& ref : rf.finding.refs) {
                const auto key = ref.key.to_string();
                if (!states.contains(key)) {
                    try {
                        states[key] = forge->fetch_issue_status(ref.key).state;
                    } catch (const TransportError& e) {
                        spdlog::warn("status of {} unavailable: {}", key, e.what());
                        states[key] = IssueState::Unknown;
                    }
                }
                rf.issue_states[key] = states[key];
                all_resolved = all_resolved && states[key] == IssueState::Resolved;
            }
            rf.status = all_resolved ? FindingStatus::ReadyToBeFixed : FindingStatus::OnHold;
            if (all_resolved) report.ready_now.push_back(rf.finding_id);
        }
    }

    if (a.format == "json") *env.out << report_json(report) << "\n";
    else if (a.format == "markdown") *env.out << report_markdown(report);
    else *env.out << report_text(report);
    return a.gate && !report.findings.empty() ? kFindings : kOk;
}

struct TrainArgs {
    std::string corpus;
    std::string out;
    double l2 = 1.0;
    std::uint32_t epochs = 20000;
    std::uint64_t seed = 0;
    bool calibrate = false;
};

LabeledCorpus load_corpus(const std::string& path) {
    try {
        return LabeledCorpus::load(path);
    } catch (const std::exception& e) {
        throw Exit{kUsage, e.what()};
    }
}

int cmd_train(const TrainArgs& a, Environment& env) {
    const auto corpus = load_corpus(a.corpus);
    TrainingOptions options;
    options.l2 = a.l2;
    options.epochs = a.epochs;
    options.seed = a.seed;
    options.calibrate = a.calibrate;
    try {
        const auto model = train(corpus, options);
        model.save(a.out);
        *env.out << "trained on " << corpus.records.size() << " records (" << corpus.count(SatdLabel::OnHold)
                 << " on-hold); " << model.vocabulary().size() << " features, " << model.metadata().epochs_run
                 << " epochs; wrote " << a.out << "\n";
    } catch (const TrainingError& e) {
        throw Exit{kUsage, e.what()};
    }
    return kOk;
}

struct EvalArgs {
    std::string corpus;
    std::optional<std::string> model;
    std::size_t folds = 5;
    std::uint64_t seed = 0;
    double l2 = 1.0;
    std::string learner = "linear";
    std::string format = "text";
};

int cmd_eval(const EvalArgs& a, Environment& env) {
    if (a.folds < 2) throw Exit{kUsage, "--folds must be at least 2"};
    const auto corpus = load_corpus(a.corpus);
    Learner learner;
    if (a.model) {
        learner = fixed_learner(load_model(std::filesystem::path(*a.model)));
    } else if (a.learner == "linear") {
        TrainingOptions options;
        options.l2 = a.l2;
        options.seed = a.seed;
        learner = linear_learner(options);
    } else if (a.learner == "majority") {
        learner = majority_learner();
    } else if (a.learner == "pattern") {
        learner = pattern_learner(std::make_shared<OnHoldPatterns>(OnHoldPatterns::compile(default_onhold_pattern_sources())));
    } else {
        throw Exit{kUsage, "unknown learner '" + a.learner + "'"};
    }
    EvalReport report;
    try {
        report = cross_validate(corpus, learner, a.folds, a.seed);
    } catch (const TrainingError& e) {
        throw Exit{kUsage, e.what()};
    }
    if (a.format == "json") {
        *env.out << eval_json(report).dump(2) << "\n";
        return kOk;
    }
    for (const auto& w : report.warnings) *env.err << "warning: " << w << "\n";
    auto line = [&](const std::string& label, const auto& m) {
        *env.out << fmt::format("{:<6} precision={:.4f} recall={:.4f} f1={:.4f} auc={:.4f}", label, m.precision,
                                m.recall, m.f_measure, m.auc);
    };
    for (const auto& f : report.folds) {
        line("fold " + std::to_string(f.fold), f);
        *env.out << fmt::format("  tp={} fp={} tn={} fn={}\n", f.confusion.true_positive, f.confusion.false_positive,
                                f.confusion.true_negative, f.confusion.false_negative);
    }
    line("mean", report);
    *env.out << "\n";
    return kOk;
}

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

int cmd_serve(const std::string& config_path, Environment& env) {
    auto config = load_config_or_exit(config_path);
    const auto token = require_env(env, config.token_env);
    const auto secret = require_env(env, config.webhook_secret_env);
    const auto classifier = load_model(resolve_model_path(std::nullopt, &config, env));
    SystemClock clock;
    auto forge = env.make_forge(config, token, clock);
    WatchStore store(config.store_path);
    if (config.workers == 0) config.workers = 1;
    BotService service(config, *forge, store, clock, classifier, secret);
    service.recover();

    HttpServer server(service, config.bind_address, config.port);
    try {
        server.bind();
    } catch (const std::exception& e) {
        throw Exit{kRuntime, e.what()};
    }
    service.start();
    g_stop = false;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::thread http([&] { server.serve(); });
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(200));
    spdlog::info("shutting down");
    server.stop();
    http.join();
    service.stop();
    return kOk;
}

int cmd_poll_now(const std::string& config_path, const std::string& format, Environment& env) {
    auto config = load_config_or_exit(config_path);
    const auto token = require_env(env, config.token_env);
    SystemClock clock;
    auto forge = env.make_forge(config, token, clock);
    WatchStore store(config.store_path);
    config.workers = 0;
    std::shared_ptr<const Classifier> none;
    BotService service(config, *forge, store, clock, none, "");
    const auto outcome = service.poll_watched_issues();
    if (format == "json") {
        json j = {{"polled", outcome.polled},
                  {"failures", outcome.failures},
                  {"flipped", outcome.flipped},
                  {"reverted", outcome.reverted},
                  {"posted", outcome.posted.size()}};
        *env.out << j.dump(2) << "\n";
    } else {
        for (const auto& id : outcome.flipped) *env.out << id << "\n";
    }
    return kOk;
}

int cmd_watch_list(const std::string& config_path, const std::string& format, Environment& env) {
    const auto config = load_config_or_exit(config_path);
    WatchStore store(config.store_path);
    const auto watches = store.watches();
    if (format == "json") {
        json arr = json::array();
        for (const auto& w : watches) {
            json item = {{"issue", w.key.to_string()},
                         {"url", w.key.url()},
                         {"status", to_string(w.status)},
                         {"last_polled", w.last_polled},
                         {"linked_findings", w.linked_findings}};
            arr.push_back(std::move(item));
        }
        *env.out << arr.dump(2) << "\n";
        return kOk;
    }
    for (const auto& w : watches) {
        *env.out << w.key.to_string() << "\t" << to_string(w.status) << "\t"
                 << (w.last_polled ? format_timestamp(w.last_polled) : std::string("never")) << "\t"
                 << w.linked_findings.size() << " finding(s)\n";
    }
    return kOk;
}

int cmd_export(const std::string& config_path, Environment& env) {
    const auto config = load_config_or_exit(config_path);
    WatchStore store(config.store_path);
    *env.out << store.export_json() << "\n";
    return kOk;
}

int cmd_scenario(const std::string& file, const std::optional<std::string>& model, Environment& env) {
    Scenario scenario;
    try {
        scenario = Scenario::load(file);
    } catch (const ConfigError& e) {
        throw Exit{kUsage, e.what()};
    }
    const auto classifier = load_model(resolve_model_path(model, &scenario.config, env));
    Harness harness(scenario, classifier);
    const auto result = harness.run();
    for (const auto& e : result.outbox) {
        *env.out << format_timestamp(e.posted_at) << "  " << e.target.to_string() << "  "
                 << text::split_lines(e.body).front() << "\n";
    }
    if (!result.passed) {
        *env.err << scenario.name << ": FAIL " << result.message << "\n";
        return kFindings;
    }
    *env.out << scenario.name << ": pass (" << scenario.steps.size() << " steps, " << result.outbox.size()
             << " posts)\n";
    return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, Environment& env) {
    CLI::App app{"Detects On-hold SATD comments and tells you when the issues they wait on are resolved.",
                 "satd-sentinel"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Log debug output to stderr");

    ScanArgs scan;
    auto* scan_cmd = app.add_subcommand("scan", "Scan a local tree for On-hold SATD comments");
    scan_cmd->add_option("path", scan.path, "Directory or file to scan")->required();
    scan_cmd->add_option("--ref", scan.ref, "Scan a git revision of the tree instead of the working copy");
    scan_cmd->add_option("--model", scan.model, "Classifier model file");
    scan_cmd->add_option("--config", scan.config, "Config file (patterns, profiles, model)");
    scan_cmd->add_option("--repo", scan.repo, "owner/repo the tree belongs to");
    scan_cmd->add_option("--format", scan.format, "text, markdown or json")
        ->check(CLI::IsMember({"text", "markdown", "json"}));
    scan_cmd->add_flag("--gate", scan.gate, "Exit 1 when any On-hold finding exists");
    scan_cmd->add_flag("--check-issues", scan.check_issues, "Fetch the status of referenced issues");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Train a classifier model");
    train_cmd->add_option("--corpus", train_args.corpus, "Labeled corpus (TSV)")->required();
    train_cmd->add_option("--out", train_args.out, "Output model file")->required();
    train_cmd->add_option("--l2", train_args.l2, "L2 penalty")->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--epochs", train_args.epochs, "Maximum gradient steps");
    train_cmd->add_option("--seed", train_args.seed, "Seed recorded in the model");
    train_cmd->add_flag("--calibrate", train_args.calibrate, "Fit Platt scaling");

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "Cross-validate on a labeled corpus");
    eval_cmd->add_option("--corpus", eval.corpus, "Labeled corpus (TSV)")->required();
    eval_cmd->add_option("--model", eval.model, "Evaluate this fixed model instead of retraining per fold");
    eval_cmd->add_option("--folds", eval.folds, "Number of folds (>= 2)");
    eval_cmd->add_option("--seed", eval.seed, "Fold assignment seed");
    eval_cmd->add_option("--l2", eval.l2, "L2 penalty")->check(CLI::NonNegativeNumber);
    eval_cmd->add_option("--learner", eval.learner, "linear, majority or pattern")
        ->check(CLI::IsMember({"linear", "majority", "pattern"}));
    eval_cmd->add_option("--format", eval.format, "text or json")->check(CLI::IsMember({"text", "json"}));

    std::string config_path;
    std::string format = "text";
    auto* serve_cmd = app.add_subcommand("serve", "Run the bot service");
    serve_cmd->add_option("--config", config_path, "Config file")->required();
    auto* poll_cmd = app.add_subcommand("poll-now", "Run one issue monitor cycle");
    poll_cmd->add_option("--config", config_path, "Config file")->required();
    poll_cmd->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
    auto* watch_cmd = app.add_subcommand("watch-list", "List watched issues");
    watch_cmd->add_option("--config", config_path, "Config file")->required();
    watch_cmd->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
    auto* export_cmd = app.add_subcommand("export", "Dump the watch store as JSON");
    export_cmd->add_option("--config", config_path, "Config file")->required();

    std::string scenario_file;
    std::optional<std::string> scenario_model;
    auto* scenario_cmd = app.add_subcommand("scenario", "Mock-forge scenarios");
    scenario_cmd->require_subcommand(1);
    auto* scenario_run = scenario_cmd->add_subcommand("run", "Replay a scenario file");
    scenario_run->add_option("file", scenario_file, "Scenario JSON")->required();
    scenario_run->add_option("--model", scenario_model, "Classifier model file");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        *env.out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        *env.out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        *env.err << e.what() << "\n";
        return kUsage;
    }
    spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::warn);

    try {
        if (*scan_cmd) return cmd_scan(scan, env);
        if (*train_cmd) return cmd_train(train_args, env);
        if (*eval_cmd) return cmd_eval(eval, env);
        if (*serve_cmd) return cmd_serve(config_path, env);
        if (*poll_cmd) return cmd_poll_now(config_path, format, env);
        if (*watch_cmd) return cmd_watch_list(config_path, format, env);
        if (*export_cmd) return cmd_export(config_path, env);
        if (*scenario_run) return cmd_scenario(scenario_file, scenario_model, env);
    } catch (const Exit& e) {
        if (!e.message.empty()) *env.err << "satd-sentinel: " << e.message << "\n";
        return e.code;
    } catch (const ConfigError& e) {
        *env.err << "satd-sentinel: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        *env.err << "satd-sentinel: " << e.what() << "\n";
        return kRuntime;
    }
    return kUsage;
}

} // namespace sentinel::cli
