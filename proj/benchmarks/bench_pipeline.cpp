#include "sentinel/classify.hpp"
#include "sentinel/comments.hpp"
#include "sentinel/corpus.hpp"
#include "sentinel/issue_refs.hpp"
#include "sentinel/model.hpp"
#include "sentinel/scan_report.hpp"
#include "sentinel/tokenizer.hpp"
#include "sentinel/watch_store.hpp"

#include <benchmark/benchmark.h>

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

using namespace sentinel;

namespace {

const std::filesystem::path kData = SENTINEL_BENCH_DATA_DIR;
const RepoId kHome{"github.com", "acme", "widgets"};

std::string synthetic_java(int methods) {
    std::string s = "package acme;\n\n/**\n * Generated.\n */\npublic class Big {\n";
    for (int i = 0; i < methods; ++i) {
        const auto n = std::to_string(i);
        s += "    // TODO: remove this workaround once #" + n + " is fixed\n";
        s += "    // see also acme/other#" + n + "\n";
        s += "    String m" + n + "() { return \"// not a comment \\\" #" + n + "\"; } /* tail " + n + " */\n";
        s += "    char c" + n + " = '/';\n\n";
    }
    return s + "}\n";
}

std::shared_ptr<const LinearModel> model_or_null() {
    static std::shared_ptr<const LinearModel> model = [] () -> std::shared_ptr<const LinearModel> {
        if (!std::filesystem::exists(SENTINEL_BENCH_MODEL)) return nullptr;
        return std::make_shared<LinearModel>(LinearModel::load(SENTINEL_BENCH_MODEL));
    }();
    return model;
}

const LabeledCorpus& desk() {
    static const LabeledCorpus corpus = LabeledCorpus::load(kData / "corpus" / "desk.tsv");
    return corpus;
}

void BM_ExtractComments(benchmark::State& state) {
    const auto text = synthetic_java(static_cast<int>(state.range(0)));
    const auto profile = java_profile();
    for (auto _ : state) {
        auto result = extract_comments(text, profile, "Big.java");
        benchmark::DoNotOptimize(result);
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_ExtractComments)->Arg(10)->Arg(100)->Arg(1000);

void BM_ExtractRefs(benchmark::State& state) {
    const auto patterns = with_builtins({});
    const auto& records = desk().records;
    std::size_t bytes = 0;
    for (auto _ : state) {
        for (const auto& r : records) {
            auto refs = extract_refs(r.text, kHome, patterns);
            benchmark::DoNotOptimize(refs);
            bytes += r.text.size();
        }
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(bytes));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * records.size()));
}
BENCHMARK(BM_ExtractRefs);

void BM_Tokenize(benchmark::State& state) {
    const auto& records = desk().records;
    for (auto _ : state) {
        for (const auto& r : records) benchmark::DoNotOptimize(tokenize(r.text));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * records.size()));
}
BENCHMARK(BM_Tokenize);

void BM_Predict(benchmark::State& state) {
    const auto model = model_or_null();
    if (!model) {
        state.SkipWithError("default model not built");
        return;
    }
    const auto& records = desk().records;
    for (auto _ : state) {
        for (const auto& r : records) benchmark::DoNotOptimize(model->predict(r.text));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * records.size()));
}
BENCHMARK(BM_Predict);

void BM_ScanFixture(benchmark::State& state) {
    const auto model = model_or_null();
    if (!model) {
        state.SkipWithError("default model not built");
        return;
    }
    const auto files = local_tree(kData / "fixtures" / "mock_project");
    const std::vector<LanguageProfile> profiles{java_profile()};
    const auto patterns = with_builtins({});
    const OnHoldPatterns onhold;
    const ScanContext context{RepoId{"github.com", "example", "inventory"}, profiles, patterns, model.get(), &onhold};
    for (auto _ : state) {
        auto outcome = scan_files(files, context);
        benchmark::DoNotOptimize(outcome);
    }
}
BENCHMARK(BM_ScanFixture);

void BM_StoreUpsert(benchmark::State& state) {
    const auto n = static_cast<int>(state.range(0));
    std::vector<SatdFinding> findings;
    for (int i = 0; i < n; ++i) {
        SatdFinding f;
        f.comment.file_path = "src/F" + std::to_string(i % 20) + ".java";
        f.comment.start_line = f.comment.end_line = static_cast<std::size_t>(i + 1);
        f.comment.body_text = "TODO remove once #" + std::to_string(i % 50 + 1) + " is fixed (" + std::to_string(i) + ")";
        f.comment.raw_text = "// " + f.comment.body_text;
        f.comment.commit_sha = std::string(40, 'a');
        f.refs.push_back({IssueKey{kHome, static_cast<std::uint64_t>(i % 50 + 1)}, "#1", 0, "local"});
        f.label = SatdLabel::OnHold;
        f.confidence = 0.9;
        findings.push_back(std::move(f));
    }
    ScanRef ref;
    ref.branch = "main";
    ref.sha = std::string(40, 'a');
    for (auto _ : state) {
        state.PauseTiming();
        WatchStore store(":memory:");
        state.ResumeTiming();
        benchmark::DoNotOptimize(store.upsert_findings(kHome, ref, findings, 1));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_StoreUpsert)->Arg(10)->Arg(200);

} // namespace

BENCHMARK_MAIN();
