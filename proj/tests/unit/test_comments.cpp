#include "java_gen.hpp"
#include "test_support.hpp"

#include "sentinel/comments.hpp"
#include "sentinel/errors.hpp"
#include "sentinel/scan_report.hpp"

#include <doctest.h>

#include <algorithm>

using namespace sentinel;
using namespace sentinel::testing;

namespace {

std::vector<SourceComment> extract(std::string_view text) {
    return extract_comments(text, java_profile(), "T.java").comments;
}

} // namespace

TEST_CASE("line and block comments with positions") {
    const auto comments = extract("int a; // one\n/* two\n   lines */ int b;\n");
    REQUIRE(comments.size() == 2);
    CHECK(comments[0].kind == CommentKind::Line);
    CHECK(comments[0].start_line == 1);
    CHECK(comments[0].start_col == 8);
    CHECK(comments[0].raw_text == "// one");
    CHECK(comments[0].body_text == "one");
    CHECK(comments[1].kind == CommentKind::Block);
    CHECK(comments[1].start_line == 2);
    CHECK(comments[1].end_line == 3);
    CHECK(comments[1].body_text == "two\nlines");
}

TEST_CASE("markers inside literals are not comments") {
    const auto comments = extract(R"(String s = "// nope /* nope */"; char c = '"'; String t = """
    // text block /* still text */
    """; // yes
)");
    REQUIRE(comments.size() == 1);
    CHECK(comments[0].raw_text == "// yes");
    CHECK(comments[0].start_line == 3);
}

TEST_CASE("escaped quotes keep the literal open") {
    const auto comments = extract("String s = \"a\\\"// x\"; // real\n");
    REQUIRE(comments.size() == 1);
    CHECK(comments[0].raw_text == "// real");
}

TEST_CASE("aligned consecutive line comments merge") {
    const auto comments = extract("    // first\n    // second\n  // other column\nx; // trailing\n// after code\n");
    REQUIRE(comments.size() == 4);
    CHECK(comments[0].start_line == 1);
    CHECK(comments[0].end_line == 2);
    CHECK(comments[0].raw_text == "// first\n    // second");
    CHECK(comments[0].body_text == "first\nsecond");
    CHECK(comments[1].raw_text == "// other column");
    CHECK(comments[2].raw_text == "// trailing");
    CHECK(comments[3].raw_text == "// after code");
}

TEST_CASE("a blank line separates comment runs") {
    const auto comments = extract("// a\n\n// b\n");
    CHECK(comments.size() == 2);
}

TEST_CASE("unterminated block comment extends to EOF with a diagnostic") {
    const auto result = extract_comments("int x; /* open\nstill open", java_profile(), "U.java");
    REQUIRE(result.comments.size() == 1);
    CHECK(result.comments[0].raw_text == "/* open\nstill open");
    REQUIRE(result.diagnostics.size() == 1);
    CHECK(result.diagnostics[0].line == 1);
}

TEST_CASE("javadoc decorations are stripped") {
    const auto comments = extract("/**\n * TODO: remove once #3 is fixed\n * second line\n */\n");
    REQUIRE(comments.size() == 1);
    CHECK(comments[0].body_text == "TODO: remove once #3 is fixed\nsecond line");
}

TEST_CASE("invalid UTF-8 is replaced, valid text unchanged") {
    const std::string bad = "// caf\xC3\xA9 \xFF\n";
    const auto comments = extract(bad);
    REQUIRE(comments.size() == 1);
    CHECK(comments[0].raw_text == "// caf\xC3\xA9 \xEF\xBF\xBD");
}

TEST_CASE("select_source_files honours extensions case-insensitively") {
    const std::vector<std::string> paths = {"A.java", "b.JAVA", "c.kt", "README", "dir.java/x.txt"};
    const auto profiles = std::vector<LanguageProfile>{java_profile()};
    const auto selected = select_source_files(paths, profiles);
    REQUIRE(selected.size() == 2);
    CHECK(selected[0].path == "A.java");
    CHECK(selected[1].path == "b.JAVA");
}

TEST_CASE("two profiles claiming one extension is a config error") {
    auto a = java_profile();
    auto b = java_profile();
    b.name = "other";
    const std::vector<LanguageProfile> profiles{a, b};
    const std::vector<std::string> paths{"x.java"};
    CHECK_THROWS_AS(select_source_files(paths, profiles), ConfigError);
}

TEST_CASE("profile validation") {
    LanguageProfile p = java_profile();
    CHECK_NOTHROW(p.validate());
    p.line_comment_markers.push_back("");
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("file_extension") {
    CHECK(file_extension("src/A.Java") == "java");
    CHECK(file_extension("Makefile") == "");
    CHECK(file_extension("a.b/c") == "");
}

TEST_CASE("strip_comment_markers is idempotent on generated comments") {
    Rng rng(7);
    const auto profile = java_profile();
    for (int i = 0; i < 100; ++i) {
        const auto program = generate_program(rng);
        for (const auto& c : extract_comments(program.text, profile, "G.java").comments) {
            const auto once = strip_comment_markers(c.raw_text, c.kind, profile);
            CHECK(strip_comment_markers(once, c.kind, profile) == once);
        }
    }
}

TEST_CASE("generated programs: lexer matches the brute-force oracle and the grammar") {
    Rng rng(20240611);
    const auto profile = java_profile();
    for (int i = 0; i < 200; ++i) {
        const auto program = generate_program(rng);
        const auto brute = brute_force_comment_spans(program.text);
        INFO("program ", i, ":\n", program.text);
        REQUIRE(brute == program.comments);
        const auto expected = merge_and_locate(program.text, brute);
        const auto actual = to_oracle(extract_comments(program.text, profile, "G.java").comments);
        REQUIRE(actual.size() == expected.size());
        for (std::size_t k = 0; k < actual.size(); ++k) {
            INFO("comment ", k);
            CHECK(describe(actual[k]) == describe(expected[k]));
        }
    }
}

TEST_CASE("fixture comments round-trip byte-exactly") {
    const auto root = data_dir() / "fixtures" / "mock_project";
    const auto profile = java_profile();
    std::size_t total = 0;
    for (const auto& file : local_tree(root)) {
        const auto content = file.fetch();
        const auto comments = extract_comments(content, profile, file.path).comments;
        // Offsets of line starts.
        std::vector<std::size_t> starts{0};
        for (std::size_t i = 0; i < content.size(); ++i)
            if (content[i] == '\n') starts.push_back(i + 1);
        std::string rebuilt;
        std::size_t cursor = 0;
        for (const auto& c : comments) {
            const auto offset = starts[c.start_line - 1] + c.start_col - 1;
            REQUIRE(content.compare(offset, c.raw_text.size(), c.raw_text) == 0);
            rebuilt += content.substr(cursor, offset - cursor) + c.raw_text;
            cursor = offset + c.raw_text.size();
            const auto newlines = static_cast<std::size_t>(std::count(c.raw_text.begin(), c.raw_text.end(), '\n'));
            CHECK(c.end_line == c.start_line + newlines);
            ++total;
        }
        rebuilt += content.substr(cursor);
        CHECK(rebuilt == content);
    }
    CHECK(total > 9);
}
