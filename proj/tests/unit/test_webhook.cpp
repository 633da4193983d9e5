#include "java_gen.hpp"
#include "test_support.hpp"

#include "sentinel/bot_service.hpp"
#include "sentinel/config.hpp"
#include "sentinel/harness.hpp"
#include "sentinel/mock_forge.hpp"
#include "sentinel/webhook.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

using namespace sentinel;
using namespace sentinel::testing;

namespace {

const RepoId kRepo{"github.com", "acme", "widgets"};
const std::string kSha(40, 'c');

std::string random_bytes(Rng& rng, std::size_t n) {
    std::string s(n, '\0');
    for (auto& c : s) c = static_cast<char>(rng() & 0xFF);
    return s;
}

} // namespace

TEST_CASE("known HMAC-SHA256 vector") {
    // RFC 4231 test case 2.
    CHECK(sign_payload("Jefe", "what do ya want for nothing?") ==
          "sha256=5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843");
}

TEST_CASE("signatures verify and any tampering is rejected") {
    Rng rng(4242);
    for (int trial = 0; trial < 500; ++trial) {
        const auto secret = random_bytes(rng, 1 + rng() % 40);
        const auto body = random_bytes(rng, rng() % 300);
        const auto sig = sign_payload(secret, body);
        REQUIRE(verify_signature(secret, body, sig));

        switch (rng() % 5) {
        case 0: { // flip one body bit
            if (body.empty()) break;
            auto b = body;
            b[rng() % b.size()] ^= static_cast<char>(1u << (rng() % 8));
            CHECK_FALSE(verify_signature(secret, b, sig));
            break;
        }
        case 1: { // change one hex digit of the signature
            auto s = sig;
            const auto pos = 7 + rng() % 64;
            s[pos] = s[pos] == '0' ? '1' : '0';
            CHECK_FALSE(verify_signature(secret, body, s));
            break;
        }
        case 2: { // truncate or extend the signature
            auto s = sig;
            if (rng() % 2) s.pop_back();
            else s += "0";
            CHECK_FALSE(verify_signature(secret, body, s));
            break;
        }
        case 3: { // another secret
            auto other = secret + static_cast<char>('a' + rng() % 26);
            CHECK_FALSE(verify_signature(other, body, sig));
            break;
        }
        default: { // appended byte
            CHECK_FALSE(verify_signature(secret, body + static_cast<char>(rng() & 0xFF), sig));
            break;
        }
        }
    }
    CHECK_FALSE(verify_signature("s", "b", ""));
    CHECK_FALSE(verify_signature("s", "b", "sha1=abc"));
    const auto sig = sign_payload("s", "b");
    CHECK_FALSE(verify_signature("s", "b", sig.substr(7)));
}

TEST_CASE("uppercase hex digests are accepted") {
    auto sig = sign_payload("k", "payload");
    for (std::size_t i = 7; i < sig.size(); ++i) sig[i] = static_cast<char>(std::toupper(static_cast<unsigned char>(sig[i])));
    CHECK(verify_signature("k", "payload", sig));
}

TEST_CASE("headers are case-insensitive") {
    Headers h;
    h.set("x-github-event", "push");
    CHECK(h.get("X-GitHub-Event") == "push");
    CHECK_FALSE(h.get("X-GitHub-Delivery"));
}

TEST_CASE("push payloads") {
    const std::vector<CommitFiles> commits{{{"A.java"}, {"B.java"}, {}}, {{}, {}, {"B.java"}}};
    const auto payload = make_push_payload(kRepo, "main", std::string(40, '0'), kSha, commits);
    const auto ev = parse_webhook("push", payload, "d1");
    CHECK(ev.kind == WebhookKind::Push);
    CHECK(ev.repo == kRepo);
    CHECK(ev.branch == "main");
    CHECK(ev.delivery_id == "d1");
    CHECK(ev.push.after_sha == kSha);
    REQUIRE(ev.push.commits.size() == 2);
    CHECK(ev.push.commits[1].removed == std::vector<std::string>{"B.java"});

    SUBCASE("tags and deletions are ignored") {
        auto doc = nlohmann::json::parse(payload);
        doc["ref"] = "refs/tags/v1";
        CHECK(parse_webhook("push", doc.dump(), "d").kind == WebhookKind::Ignored);
        doc["ref"] = "refs/heads/main";
        doc["deleted"] = true;
        CHECK(parse_webhook("push", doc.dump(), "d").kind == WebhookKind::Ignored);
    }
    SUBCASE("malformed payloads throw") {
        CHECK_THROWS_AS(parse_webhook("push", "{not json", "d"), std::invalid_argument);
        auto doc = nlohmann::json::parse(payload);
        doc["after"] = "xyz";
        CHECK_THROWS_AS(parse_webhook("push", doc.dump(), "d"), std::invalid_argument);
        doc = nlohmann::json::parse(payload);
        doc.erase("repository");
        CHECK_THROWS_AS(parse_webhook("push", doc.dump(), "d"), std::invalid_argument);
        doc = nlohmann::json::parse(payload);
        doc["commits"][0]["added"] = "A.java";
        CHECK_THROWS_AS(parse_webhook("push", doc.dump(), "d"), std::invalid_argument);
    }
}

TEST_CASE("pull request payloads") {
    const auto payload = make_pull_request_payload(kRepo, "opened", 7, kSha, "main");
    const auto ev = parse_webhook("pull_request", payload, "d2");
    CHECK(ev.kind == WebhookKind::PullRequest);
    CHECK(ev.pull.number == 7);
    CHECK(ev.pull.head_sha == kSha);
    CHECK(ev.branch == "main");
    CHECK(parse_webhook("pull_request", make_pull_request_payload(kRepo, "synchronize", 7, kSha, "main"), "d").kind ==
          WebhookKind::PullRequest);
    CHECK(parse_webhook("pull_request", make_pull_request_payload(kRepo, "closed", 7, kSha, "main"), "d").kind ==
          WebhookKind::Ignored);
    CHECK(parse_webhook("issues", "{}", "d").kind == WebhookKind::Ignored);
    CHECK(parse_webhook("ping", R"({"zen":"hi"})", "d").kind == WebhookKind::Ping);
}

TEST_CASE("service answers webhooks with the right status") {
    ManualClock clock;
    MockForge forge(clock);
    WatchStore store(":memory:");
    auto config = parse_service_config(R"({
        "service": {"workers": 0},
        "repos": [{"repo": "acme/widgets", "branches": ["main"], "output_channels": ["CommitComment"]}]
    })");
    BotService service(config, forge, store, clock, default_model(), "secret");

    const auto empty = forge.commit(kRepo, "", {{"src/A.java", std::string("class A {}\n")}});
    const auto head = forge.commit(kRepo, empty, {{"src/A.java", std::string("class A {\n  // TODO drop once #4 is fixed\n}\n")}});
    forge.set_branch(kRepo, "main", head);
    const auto payload = make_push_payload(kRepo, "main", empty, head, {{{}, {"src/A.java"}, {}}});

    auto headers = [&](std::string event, std::string delivery, const std::string& body) {
        Headers h;
        h.set(kEventHeader, std::move(event));
        h.set(kDeliveryHeader, std::move(delivery));
        h.set(kSignatureHeader, sign_payload("secret", body));
        return h;
    };

    SUBCASE("bad signature is 401 and changes nothing") {
        auto h = headers("push", "d-1", payload);
        h.set(kSignatureHeader, sign_payload("wrong", payload));
        CHECK(service.handle_webhook(payload, h).status == 401);
        Headers none;
        CHECK(service.handle_webhook(payload, none).status == 401);
        CHECK(service.run_pending() == 0);
        CHECK(store.findings().empty());
    }
    SUBCASE("missing headers and bad payloads are 400") {
        auto h = headers("push", "", payload);
        CHECK(service.handle_webhook(payload, h).status == 400);
        const std::string junk = "{\"ref\": 3}";
        CHECK(service.handle_webhook(junk, headers("push", "d-2", junk)).status == 400);
    }
    SUBCASE("ping is 200") {
        const std::string body = R"({"zen":"x"})";
        CHECK(service.handle_webhook(body, headers("ping", "d-3", body)).status == 200);
    }
    SUBCASE("an unconfigured repository is 404") {
        const auto other = make_push_payload(RepoId{"github.com", "else", "where"}, "main", empty, head, {});
        CHECK(service.handle_webhook(other, headers("push", "d-4", other)).status == 404);
    }
    SUBCASE("an unmonitored branch is accepted and skipped") {
        const auto dev = make_push_payload(kRepo, "dev", empty, head, {{{}, {"src/A.java"}, {}}});
        const auto r = service.handle_webhook(dev, headers("push", "d-5", dev));
        CHECK(r.status == 202);
        CHECK(r.jobs_enqueued == 0);
    }
    SUBCASE("a delivery is processed once") {
        const auto first = service.handle_webhook(payload, headers("push", "d-6", payload));
        CHECK(first.status == 202);
        CHECK(first.jobs_enqueued == 1);
        for (int i = 0; i < 5; ++i) {
            const auto again = service.handle_webhook(payload, headers("push", "d-6", payload));
            CHECK(again.status == 200);
            CHECK(again.jobs_enqueued == 0);
        }
        CHECK(service.run_pending() == 1);
        CHECK(store.findings().size() == 1);
    }
}

TEST_CASE("harness: replayed and forged deliveries do nothing") {
    const auto scenario = Scenario::parse(R"({
        "name": "dup",
        "config": {"repos": [{"repo": "acme/widgets", "branches": ["main"], "output_channels": ["CommitComment"]}]},
        "steps": []
    })");
    Harness harness(scenario, default_model());
    const auto base = harness.forge().commit(kRepo, "", {{"A.java", std::string("class A {}\n")}});
    const auto head =
        harness.forge().commit(kRepo, base, {{"A.java", std::string("class A {\n  // TODO drop once #4 is fixed\n}\n")}});
    harness.forge().set_branch(kRepo, "main", head);
    const auto payload = make_push_payload(kRepo, "main", base, head, {{{}, {"A.java"}, {}}});

    CHECK(harness.emit_signed_webhook("push", payload, {.corrupt_signature = true}).status == 401);
    CHECK(harness.service().run_pending() == 0);
    CHECK(harness.emit_signed_webhook("push", payload, {}).status == 202);
    CHECK(harness.emit_signed_webhook("push", payload, {.replay = true}).status == 200);
    CHECK(harness.service().run_pending() == 1);
    CHECK(harness.store().findings().size() == 1);
}
