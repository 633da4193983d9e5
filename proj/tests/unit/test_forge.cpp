#include "fake_github.hpp"
#include "test_support.hpp"

#include "sentinel/errors.hpp"
#include "sentinel/github_client.hpp"
#include "sentinel/mock_forge.hpp"
#include "sentinel/rate_limiter.hpp"
#include "sentinel/text.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace sentinel;
using namespace sentinel::testing;

namespace {

const RepoId kRepo{"github.com", "acme", "widgets"};

std::set<std::string> paths_of(const std::vector<ChangedFile>& files) {
    std::set<std::string> out;
    for (const auto& f : files) out.insert(f.path);
    return out;
}

struct World {
    ManualClock clock;
    MockForge mock{clock};
    std::string base;
    std::string head;

    World() {
        mock.seed_issue({kRepo, 1}, IssueState::Open);
        mock.seed_issue({kRepo, 2}, IssueState::Open);
        mock.close_issue({kRepo, 2}, "not_planned");
        base = mock.commit(kRepo, "", {{"src/A.java", std::string("class A {}\n")}, {"docs/x.md", std::string("x")}});
        head = mock.commit(kRepo, base,
                           {{"src/A.java", std::string("class A { /* TODO once #1 */ }\n")},
                            {"src/dir name/B.java", std::string("class B {}\n")},
                            {"docs/x.md", std::nullopt}});
        mock.set_branch(kRepo, "main", head);
        mock.open_pull_request(kRepo, 5, base, head);
    }
};

// The behaviour every Forge implementation shares. `world.mock` is the
// source of truth; `forge` is either the mock itself or a client of it.
void conformance(Forge& forge, World& world) {
    SUBCASE("issue status") {
        CHECK(forge.fetch_issue_status({kRepo, 1}).state == IssueState::Open);
        const auto closed = forge.fetch_issue_status({kRepo, 2});
        CHECK(closed.state == IssueState::Resolved);
        CHECK(closed.close_reason == "not_planned");
        CHECK(closed.resolved_at.has_value());
        CHECK(forge.fetch_issue_status({kRepo, 99}).state == IssueState::Unknown);
        world.mock.reopen_issue({kRepo, 2});
        CHECK(forge.fetch_issue_status({kRepo, 2}).state == IssueState::Open);
    }
    SUBCASE("posting and finding posts") {
        const auto pr = PostTarget::pull_request(kRepo, 5);
        const auto commit = PostTarget::commit(kRepo, world.head);
        const auto r1 = forge.post_comment(pr, "hello\n<!-- satd-sentinel:report b1 -->");
        const auto r2 = forge.post_comment(commit, "on commit <!-- satd-sentinel:report b2 -->");
        const auto r3 = forge.create_issue(kRepo, "SATD ready", "body <!-- satd-sentinel:report b3 -->");
        CHECK_FALSE(r1.id.empty());
        CHECK_FALSE(r2.id.empty());
        CHECK_FALSE(r3.id.empty());
        const auto outbox = world.mock.outbox();
        REQUIRE(outbox.size() == 3);
        CHECK(outbox[0].target == pr);
        CHECK(outbox[1].target == commit);
        CHECK(outbox[2].target.kind == TargetKind::NewIssue);
        CHECK(outbox[2].title == "SATD ready");

        CHECK(forge.find_post(pr, "report b1")->id == r1.id);
        CHECK_FALSE(forge.find_post(pr, "report b2"));
        CHECK(forge.find_post(commit, "report b2")->id == r2.id);
        CHECK(forge.find_post(PostTarget::new_issue(kRepo), "report b3").has_value());
        CHECK_FALSE(forge.find_post(PostTarget::new_issue(kRepo), "report zz"));

        // The created issue is ours, so its status says so.
        CHECK(forge.fetch_issue_status({kRepo, outbox[2].target.number}).bot_report);
        CHECK_FALSE(forge.fetch_issue_status({kRepo, 1}).bot_report);
    }
    SUBCASE("changed files of a push and a pull request") {
        PushChange push{world.head, {{{"src/dir name/B.java"}, {"src/A.java"}, {"docs/x.md"}}}};
        const auto files = forge.list_changed_files(kRepo, push);
        CHECK(paths_of(files) == std::set<std::string>{"src/A.java", "src/dir name/B.java"});
        for (const auto& f : files) CHECK(f.fetch() == *world.mock.file_at(kRepo, world.head, f.path));

        const auto pr_files = forge.list_changed_files(kRepo, PullRequestChange{5, world.head});
        CHECK(paths_of(pr_files) == std::set<std::string>{"src/A.java", "src/dir name/B.java"});
    }
    SUBCASE("tree listing") {
        const auto tree = forge.list_tree(kRepo, world.head);
        CHECK(paths_of(tree) == std::set<std::string>{"src/A.java", "src/dir name/B.java"});
        const auto base_tree = forge.list_tree(kRepo, world.base);
        CHECK(paths_of(base_tree) == std::set<std::string>{"docs/x.md", "src/A.java"});
        for (const auto& f : base_tree) CHECK(f.fetch() == *world.mock.file_at(kRepo, world.base, f.path));
    }
    SUBCASE("injected failures") {
        world.mock.inject_failure(FailureKind::Timeout, ForgeOp::FetchIssueStatus, 1);
        try {
            forge.fetch_issue_status({kRepo, 1});
            FAIL("expected a timeout");
        } catch (const TransportError& e) {
            CHECK(e.kind() == TransportError::Kind::Timeout);
        }
        world.mock.inject_failure(FailureKind::Http500, ForgeOp::FetchIssueStatus, 1);
        CHECK_THROWS_AS(forge.fetch_issue_status({kRepo, 1}), TransportError);
        world.mock.inject_failure(FailureKind::Http404, ForgeOp::FetchIssueStatus, 1);
        CHECK(forge.fetch_issue_status({kRepo, 1}).state == IssueState::Unknown);
        CHECK(forge.fetch_issue_status({kRepo, 1}).state == IssueState::Open);

        world.mock.inject_failure(FailureKind::Http500, ForgeOp::PostComment, 1);
        CHECK_THROWS_AS(forge.post_comment(PostTarget::pull_request(kRepo, 5), "x"), TransportError);
        world.mock.inject_failure(FailureKind::Http404, ForgeOp::PostComment, 1);
        try {
            forge.post_comment(PostTarget::pull_request(kRepo, 5), "x");
            FAIL("expected a ForgeError");
        } catch (const ForgeError& e) {
            CHECK(e.status() == 404);
        }
        world.mock.inject_failure(FailureKind::Http500, ForgeOp::CreateIssue, 1);
        CHECK_THROWS_AS(forge.create_issue(kRepo, "t", "b"), TransportError);
        CHECK(world.mock.outbox().empty());
        forge.post_comment(PostTarget::pull_request(kRepo, 5), "x");
        CHECK(world.mock.outbox().size() == 1);
    }
}

} // namespace

TEST_CASE("conformance: MockForge") {
    World world;
    conformance(world.mock, world);
}

TEST_CASE("conformance: GitHubClient over an in-process fake") {
    World world;
    FakeGitHub github(world.mock);
    GitHubClient client({.token = "t0ken", .min_interval = Millis{0}}, world.clock,
                        std::make_unique<FakeTransport>(github));
    conformance(client, world);
    for (const auto& r : github.requests()) CHECK(r.headers.at("authorization") == "Bearer t0ken");
}

TEST_CASE("conformance: GitHubClient over loopback HTTP") {
    World world;
    FakeGitHub github(world.mock);
    LoopbackGitHub server(github);
    SystemClock clock;
    GitHubClient client({.api_base = server.base_url(), .min_interval = Millis{0}, .timeout = Millis{500}}, clock);
    conformance(client, world);
}

TEST_CASE("rate limiting: Retry-After and exhausted windows pause the client") {
    World world;
    FakeGitHub github(world.mock);
    GitHubClient client({.min_interval = Millis{0}}, world.clock, std::make_unique<FakeTransport>(github));
    const auto start = world.clock.now();

    github.script({429, {{"retry-after", "30"}}, ""});
    CHECK(client.fetch_issue_status({kRepo, 1}).state == IssueState::Open);
    CHECK(world.clock.now() >= start + 30'000);

    const auto reset_at = world.clock.now() / 1000 + 120;
    github.script({403, {{"x-ratelimit-remaining", "0"}, {"x-ratelimit-reset", std::to_string(reset_at)}}, ""});
    CHECK(client.fetch_issue_status({kRepo, 1}).state == IssueState::Open);
    CHECK(world.clock.now() >= reset_at * 1000);

    for (int i = 0; i < 4; ++i) github.script({429, {{"retry-after", "1"}}, ""});
    CHECK_THROWS_AS(client.fetch_issue_status({kRepo, 1}), TransportError);
}

TEST_CASE("authentication failures are credential errors") {
    World world;
    FakeGitHub github(world.mock);
    GitHubClient client({.min_interval = Millis{0}}, world.clock, std::make_unique<FakeTransport>(github));
    github.script({401, {}, R"({"message":"Bad credentials"})"});
    CHECK_THROWS_AS(client.post_comment(PostTarget::pull_request(kRepo, 5), "x"), CredentialError);
}

TEST_CASE("conditional requests reuse the cached status") {
    World world;
    FakeGitHub github(world.mock);
    GitHubClient client({.min_interval = Millis{0}}, world.clock, std::make_unique<FakeTransport>(github));
    CHECK(client.fetch_issue_status({kRepo, 1}).state == IssueState::Open);
    CHECK(client.fetch_issue_status({kRepo, 1}).state == IssueState::Open);
    const auto log = github.requests();
    REQUIRE(log.size() == 2);
    CHECK_FALSE(log[0].headers.count("if-none-match"));
    CHECK(log[1].headers.count("if-none-match"));
    world.mock.close_issue({kRepo, 1});
    CHECK(client.fetch_issue_status({kRepo, 1}).state == IssueState::Resolved);
}

TEST_CASE("rate limiter spacing on a manual clock") {
    ManualClock clock(1000);
    RateLimiter limiter(clock, Millis{250});
    std::vector<Timestamp> slots;
    for (int i = 0; i < 5; ++i) {
        limiter.acquire();
        slots.push_back(clock.now());
    }
    for (std::size_t i = 1; i < slots.size(); ++i) CHECK(slots[i] - slots[i - 1] >= 250);
    limiter.defer_until(clock.now() + 10'000);
    const auto before = clock.now();
    limiter.acquire();
    CHECK(clock.now() >= before + 10'000);
}

TEST_CASE("post targets round-trip through text") {
    const std::vector<PostTarget> targets{PostTarget::pull_request(kRepo, 12), PostTarget::commit(kRepo, std::string(40, 'f')),
                                          PostTarget::new_issue(kRepo)};
    for (const auto& t : targets) CHECK(PostTarget::parse(t.to_string()) == t);
    CHECK_THROWS_AS(PostTarget::parse("nonsense"), std::invalid_argument);
    CHECK_THROWS_AS(PostTarget::commit(kRepo, "abc").validate(), std::invalid_argument);
    CHECK_THROWS_AS(PostTarget::pull_request(kRepo, 0).validate(), std::invalid_argument);
}

TEST_CASE("oversized bodies are cut on a character boundary") {
    const auto [small, cut_small] = fit_body("short");
    CHECK(small == "short");
    CHECK_FALSE(cut_small);

    std::string big;
    while (big.size() < kMaxBodyChars * 3) big += "\xE2\x82\xAC"; // three-byte euro sign
    const auto [fitted, cut] = fit_body(big);
    CHECK(cut);
    // Count code points: bytes that are not continuation bytes.
    const auto chars = std::count_if(fitted.begin(), fitted.end(),
                                     [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; });
    CHECK(static_cast<std::size_t>(chars) <= kMaxBodyChars);
    CHECK(text::sanitize_utf8(fitted) == fitted);
}

TEST_CASE("push paths drop files removed later") {
    PushChange push{std::string(40, 'a'), {{{"A", "B"}, {"C"}, {}}, {{}, {"A"}, {"B"}}, {{"B"}, {}, {}}}};
    CHECK(push_paths(push) == std::vector<std::string>{"A", "C", "B"});
}

TEST_CASE("mock forge journal survives a restart") {
    TempDir dir;
    const auto journal = dir / "outbox.jsonl";
    {
        ManualClock clock;
        MockForge forge(clock);
        forge.attach_journal(journal);
        forge.post_comment(PostTarget::pull_request(kRepo, 1), "one");
        forge.create_issue(kRepo, "t", "two");
    }
    ManualClock clock;
    MockForge forge(clock);
    forge.attach_journal(journal);
    const auto outbox = forge.outbox();
    REQUIRE(outbox.size() == 2);
    CHECK(outbox[0].body == "one");
    CHECK(outbox[1].title == "t");
}
