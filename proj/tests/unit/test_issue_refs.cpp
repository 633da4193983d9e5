#include "java_gen.hpp"

#include "sentinel/errors.hpp"
#include "sentinel/issue_refs.hpp"

#include <doctest.h>

#include <set>

using namespace sentinel;
using namespace sentinel::testing;

namespace {

const RepoId kHome{"github.com", "acme", "widgets"};

std::vector<std::string> keys(std::string_view text, std::span<const RefPattern> patterns = builtin_patterns()) {
    std::vector<std::string> out;
    for (const auto& r : extract_refs(text, kHome, patterns)) out.push_back(r.key.to_string());
    return out;
}

// Scan every offset left to right; at each, the first pattern (priority
// order) that matches there wins and the scan resumes after it.
std::vector<IssueReference> brute_force_refs(std::string_view text, std::span<const RefPattern> patterns) {
    std::vector<IssueReference> out;
    std::set<IssueKey> seen;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::optional<IssueReference> hit;
        for (const auto& p : patterns) {
            if (auto r = match_at(text, pos, kHome, p)) {
                hit = r;
                break;
            }
        }
        if (!hit || hit->raw_match.empty()) {
            ++pos;
            continue;
        }
        pos += hit->raw_match.size();
        if (seen.insert(hit->key).second) out.push_back(*hit);
    }
    return out;
}

} // namespace

TEST_CASE("built-in forms resolve to canonical keys") {
    CHECK(keys("see #12") == std::vector<std::string>{"github.com/acme/widgets#12"});
    CHECK(keys("square/okhttp#4212 breaks") == std::vector<std::string>{"github.com/square/okhttp#4212"});
    CHECK(keys("https://github.com/mockito/mockito/issues/769 is fixed") ==
          std::vector<std::string>{"github.com/mockito/mockito#769"});
    CHECK(keys("after issue 52 is resolved") == std::vector<std::string>{"github.com/acme/widgets#52"});
    CHECK(keys("Issue No. 7") == std::vector<std::string>{"github.com/acme/widgets#7"});
}

TEST_CASE("keys are lowercased so spellings collapse") {
    CHECK(keys("Square/OkHttp#1 and square/okhttp#1") == std::vector<std::string>{"github.com/square/okhttp#1"});
    CHECK(keys("https://GitHub.com/A/B/issues/3") == std::vector<std::string>{"github.com/a/b#3"});
}

TEST_CASE("non-references") {
    CHECK(keys("C# code").empty());
    CHECK(keys("&#38; entity").empty());
    CHECK(keys("color #fff").empty());
    CHECK(keys("##5").empty());
    CHECK(keys("a/#7").empty());
    CHECK(keys("#12abc").empty());
    CHECK(keys("#0").empty());
}

TEST_CASE("lookbehind sees text before a previous match") {
    CHECK(keys("a/b#1#2") == std::vector<std::string>{"github.com/a/b#1"});
    CHECK_FALSE(match_at("x/#7", 2, kHome, builtin_patterns()[2]).has_value());
}

TEST_CASE("the same issue written twice is reported once") {
    const auto refs = extract_refs("#3 then https://github.com/acme/widgets/issues/3", kHome, builtin_patterns());
    REQUIRE(refs.size() == 1);
    CHECK(refs[0].raw_match == "#3");
}

TEST_CASE("user patterns") {
    const auto jira = compile_user_pattern("jira", R"(\bWID-(\d+)\b)", {});
    const std::vector<RefPattern> user{jira};
    const auto all = with_builtins(user);
    CHECK(keys("blocked on WID-77", all) == std::vector<std::string>{"github.com/acme/widgets#77"});

    SUBCASE("number group with text takes the first digit run") {
        const auto p = compile_user_pattern("t", R"((ticket \d+))", {});
        CHECK_FALSE(p.number_group_is_digits());
        const std::vector<RefPattern> ps{p};
        CHECK(keys("see ticket 41", ps) == std::vector<std::string>{"github.com/acme/widgets#41"});
    }
    SUBCASE("owner and repo groups") {
        const auto p = compile_user_pattern("gh", R"(gh:(\w+)/(\w+)/(\d+))",
                                            {.number_group = 3, .owner_group = 1, .repo_group = 2});
        const std::vector<RefPattern> ps{p};
        CHECK(keys("gh:Foo/bar/9", ps) == std::vector<std::string>{"github.com/foo/bar#9"});
    }
}

TEST_CASE("invalid user patterns are config errors") {
    CHECK_THROWS_AS(compile_user_pattern("bad", "(unclosed", {}), ConfigError);
    CHECK_THROWS_AS(compile_user_pattern("nogroup", R"(WID-\d+)", {}), ConfigError);
    CHECK_THROWS_AS(compile_user_pattern("letters", R"(WID-([a-z]+))", {}), ConfigError);
    CHECK_THROWS_AS(compile_user_pattern("owner", R"(WID-(\d+))", {.number_group = 1, .owner_group = 4}),
                    ConfigError);
    CHECK_THROWS_AS(compile_user_pattern("redos", R"(((a+)+)#(\d+))", {.number_group = 3}), ConfigError);
}

TEST_CASE("generated text: extraction matches the embedded references") {
    Rng rng(99);
    for (int i = 0; i < 500; ++i) {
        const auto generated = generate_ref_text(rng, kHome);
        INFO(generated.text);
        std::vector<IssueKey> actual;
        for (const auto& r : extract_refs(generated.text, kHome, builtin_patterns())) actual.push_back(r.key);
        CHECK(actual == generated.expected);
    }
}

TEST_CASE("generated text: extraction matches a brute-force offset scan") {
    Rng rng(1234);
    const auto jira = compile_user_pattern("jira", R"(\b(?:WID|X)-(\d+)\b)", {});
    const std::vector<RefPattern> user{jira};
    const auto patterns = with_builtins(user);
    for (int i = 0; i < 300; ++i) {
        auto generated = generate_ref_text(rng, kHome);
        generated.text += " WID-" + std::to_string(i + 1) + " x/X-5#2";
        INFO(generated.text);
        const auto expected = brute_force_refs(generated.text, patterns);
        const auto actual = extract_refs(generated.text, kHome, patterns);
        CHECK(actual == expected);
    }
}

TEST_CASE("byte offsets point at the raw match") {
    const std::string text = "fix once square/okhttp#4 and #5";
    for (const auto& r : extract_refs(text, kHome, builtin_patterns()))
        CHECK(text.substr(r.byte_offset, r.raw_match.size()) == r.raw_match);
}
