#include "test_support.hpp"

#include "cli.hpp"
#include "sentinel/mock_forge.hpp"
#include "sentinel/model.hpp"
#include "sentinel/watch_store.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <sstream>

using namespace sentinel;
using namespace sentinel::testing;

namespace {

// Delegates to a MockForge owned by the test.
class Forwarding final : public Forge {
public:
    explicit Forwarding(MockForge& inner) : inner_(inner) {}
    IssueStatus fetch_issue_status(const IssueKey& key) override { return inner_.fetch_issue_status(key); }
    PostReceipt post_comment(const PostTarget& t, std::string_view b) override { return inner_.post_comment(t, b); }
    PostReceipt create_issue(const RepoId& r, std::string_view t, std::string_view b) override {
        return inner_.create_issue(r, t, b);
    }
    std::vector<ChangedFile> list_changed_files(const RepoId& r, const ChangeRequest& c) override {
        return inner_.list_changed_files(r, c);
    }
    std::vector<ChangedFile> list_tree(const RepoId& r, std::string_view ref) override { return inner_.list_tree(r, ref); }
    std::optional<PostReceipt> find_post(const PostTarget& t, std::string_view m) override {
        return inner_.find_post(t, m);
    }

private:
    MockForge& inner_;
};

struct Cli {
    std::ostringstream out;
    std::ostringstream err;
    std::map<std::string, std::string> vars;
    int forge_requests = 0;
    MockForge* forge = nullptr;
    cli::Environment env;

    Cli() {
        env.out = &out;
        env.err = &err;
        env.getenv = [this](const std::string& name) -> std::optional<std::string> {
            auto it = vars.find(name);
            if (it == vars.end()) return std::nullopt;
            return it->second;
        };
        env.make_forge = [this](const ServiceConfig&, const std::string&, Clock&) -> std::unique_ptr<Forge> {
            ++forge_requests;
            if (!forge) throw std::runtime_error("network access is not allowed in this test");
            return std::make_unique<Forwarding>(*forge);
        };
    }

    int operator()(std::vector<std::string> args) {
        out.str({});
        err.str({});
        return cli::run(args, env);
    }
};

const std::string kModel = default_model_path().string();
const std::string kFixture = (data_dir() / "fixtures" / "mock_project").string();

} // namespace

TEST_CASE("usage errors exit 2") {
    Cli cli;
    CHECK(cli({}) == cli::kUsage);
    CHECK(cli({"frobnicate"}) == cli::kUsage);
    CHECK(cli({"scan"}) == cli::kUsage);
    CHECK(cli({"scan", kFixture, "--format", "yaml"}) == cli::kUsage);
    CHECK(cli({"scan", "/no/such/dir", "--model", kModel}) == cli::kUsage);
    CHECK(cli({"eval", "--corpus", "x.tsv", "--folds", "1"}) == cli::kUsage);
    CHECK(cli({"eval", "--corpus", "x.tsv", "--learner", "oracle"}) == cli::kUsage);
    CHECK(cli({"--help"}) == cli::kOk);
    CHECK(cli.out.str().find("scan") != std::string::npos);
}

TEST_CASE("scan of the fixture project") {
    Cli cli;
    REQUIRE(cli({"scan", kFixture, "--model", kModel, "--repo", "example/inventory", "--format", "json"}) == cli::kOk);
    const auto report = nlohmann::json::parse(cli.out.str());
    CHECK(report["findings"].size() == 9);
    CHECK(report["files_scanned"] == 8);
    CHECK(cli.forge_requests == 0);

    bool mockito = false;
    for (const auto& f : report["findings"]) {
        for (const auto& r : f["refs"]) mockito = mockito || r["key"] == "github.com/mockito/mockito#769";
    }
    CHECK(mockito);

    CHECK(cli({"scan", kFixture, "--model", kModel, "--gate"}) == cli::kFindings);
    CHECK(cli({"scan", kFixture, "--model", kModel, "--format", "markdown"}) == cli::kOk);
    CHECK(cli.out.str().find("InventoryServiceTest.java") != std::string::npos);
}

TEST_CASE("scan gate passes on a clean tree") {
    TempDir dir;
    write_text(dir / "A.java", "class A {\n  // See #12 for history.\n  int x;\n}\n");
    Cli cli;
    CHECK(cli({"scan", dir.path().string(), "--model", kModel, "--gate"}) == cli::kOk);
}

TEST_CASE("a missing model is a runtime error") {
    Cli cli;
    CHECK(cli({"scan", kFixture}) == cli::kRuntime);
    CHECK(cli.err.str().find("model") != std::string::npos);
    cli.vars["SATD_SENTINEL_MODEL"] = kModel;
    CHECK(cli({"scan", kFixture}) == cli::kOk);
}

TEST_CASE("train then evaluate a small corpus") {
    TempDir dir;
    std::string corpus = "# label\ttext\n";
    for (int i = 0; i < 30; ++i) {
        corpus += "OnHold\tTODO remove this hack once #" + std::to_string(i + 1) + " is fixed\n";
        corpus += "CrossReference\tsee #" + std::to_string(i + 1) + " for the design notes\n";
    }
    write_text(dir / "c.tsv", corpus);
    const auto model = (dir / "m.model").string();
    Cli cli;
    REQUIRE(cli({"train", "--corpus", (dir / "c.tsv").string(), "--out", model}) == cli::kOk);
    CHECK_NOTHROW(LinearModel::load(model));
    REQUIRE(cli({"eval", "--corpus", (dir / "c.tsv").string(), "--folds", "3", "--format", "json"}) == cli::kOk);
    const auto doc = nlohmann::json::parse(cli.out.str());
    CHECK(doc.is_object());
    CHECK(cli({"train", "--corpus", (dir / "missing.tsv").string(), "--out", model}) != cli::kOk);
}

TEST_CASE("scenario command") {
    Cli cli;
    const auto scenarios = data_dir() / "scenarios";
    CHECK(cli({"scenario", "run", (scenarios / "end_to_end.json").string(), "--model", kModel}) == cli::kOk);
    CHECK(cli.out.str().find("pass") != std::string::npos);

    TempDir dir;
    write_text(dir / "fail.json", R"({"config": {"repos": [{"repo": "a/b"}]},
        "steps": [{"action": "expect_post", "posts": [{"kind": "issue", "contains": "x"}]}]})");
    CHECK(cli({"scenario", "run", (dir / "fail.json").string(), "--model", kModel}) == cli::kFindings);
    write_text(dir / "bad.json", R"({"steps": [{"action": "teleport"}]})");
    CHECK(cli({"scenario", "run", (dir / "bad.json").string(), "--model", kModel}) == cli::kUsage);
    CHECK(cli.forge_requests == 0);
}

TEST_CASE("store commands work offline; poll-now needs a token") {
    TempDir dir;
    const RepoId repo{"github.com", "acme", "widgets"};
    write_text(dir / "c.jsonc", R"({"service": {"store_path": "bot.db"},
        "repos": [{"repo": "acme/widgets", "output_channels": ["IssueCreation"]}]})");
    {
        WatchStore store(dir / "bot.db");
        SatdFinding f;
        f.comment.file_path = "A.java";
        f.comment.start_line = f.comment.end_line = 2;
        f.comment.body_text = "TODO remove once #1 is fixed";
        f.comment.raw_text = "// " + f.comment.body_text;
        f.comment.commit_sha = std::string(40, 'e');
        f.refs.push_back({IssueKey{repo, 1}, "#1", 18, "local"});
        f.label = SatdLabel::OnHold;
        f.confidence = 0.95;
        ScanRef ref;
        ref.branch = "main";
        ref.sha = f.comment.commit_sha;
        store.upsert_findings(repo, ref, std::vector{f}, 1);
    }
    const auto config = (dir / "c.jsonc").string();
    Cli cli;
    REQUIRE(cli({"watch-list", "--config", config, "--format", "json"}) == cli::kOk);
    const auto watches = nlohmann::json::parse(cli.out.str());
    REQUIRE(watches.size() == 1);
    CHECK(watches[0]["issue"] == "github.com/acme/widgets#1");
    REQUIRE(cli({"export", "--config", config}) == cli::kOk);
    CHECK(nlohmann::json::parse(cli.out.str()).is_object());
    CHECK(cli.forge_requests == 0);

    CHECK(cli({"poll-now", "--config", config}) == cli::kUsage); // no token in the environment

    ManualClock clock;
    MockForge forge(clock);
    forge.seed_issue({repo, 1}, IssueState::Open);
    forge.close_issue({repo, 1});
    cli.forge = &forge;
    cli.vars["SATD_SENTINEL_TOKEN"] = "t";
    REQUIRE(cli({"poll-now", "--config", config, "--format", "json"}) == cli::kOk);
    const auto outcome = nlohmann::json::parse(cli.out.str());
    CHECK(outcome["polled"] == 1);
    CHECK(outcome["flipped"].size() == 1);
    CHECK(outcome["posted"] == 1);
    CHECK(forge.outbox().size() == 1);
}
