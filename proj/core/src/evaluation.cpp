#include "sentinel/evaluation.hpp"

#include "sentinel/classify.hpp"
#include "sentinel/errors.hpp"

#include <algorithm>
#include <numeric>

namespace sentinel {

Confusion& Confusion::operator+=(const Confusion& o) {
    true_positive += o.true_positive;
    false_positive += o.false_positive;
    true_negative += o.true_negative;
    false_negative += o.false_negative;
    return *this;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t bounded_draw(std::uint64_t& state, std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    for (;;) {
        const std::uint64_t r = splitmix64(state);
        if (r < limit) return r % bound;
    }
}

double auc_rank_sum(std::span<const double> scores, const std::vector<bool>& positive) {
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Mid-ranks are half-integers; keep them doubled so sums stay integral.
    std::uint64_t doubled_rank_sum = 0;
    std::uint64_t n_pos = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const std::uint64_t doubled_mid = (i + 1) + (j + 1); // 2 * average of ranks i+1..j+1
        for (std::size_t k = i; k <= j; ++k) {
            if (positive[order[k]]) {
                doubled_rank_sum += doubled_mid;
                ++n_pos;
            }
        }
        i = j + 1;
    }
    const std::uint64_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) return 0.5;
    // U = R_pos - P(P+1)/2, doubled to count tied pairs as halves.
    const std::uint64_t doubled_u = doubled_rank_sum - n_pos * (n_pos + 1);
    return static_cast<double>(doubled_u) / 2.0 / static_cast<double>(n_pos * n_neg);
}

FoldMetrics metrics_from(const Confusion& c) {
    FoldMetrics m;
    m.confusion = c;
    const double tp = static_cast<double>(c.true_positive);
    const double predicted = tp + static_cast<double>(c.false_positive);
    const double actual = tp + static_cast<double>(c.false_negative);
    m.precision = predicted > 0 ? tp / predicted : 0.0;
    m.recall = actual > 0 ? tp / actual : 0.0;
    m.f_measure = (m.precision + m.recall) > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    m.test_size = c.true_positive + c.false_positive + c.true_negative + c.false_negative;
    return m;
}

std::vector<std::size_t> stratified_folds(std::span<const SatdLabel> labels, std::size_t folds,
                                          std::uint64_t seed) {
    std::vector<std::size_t> assignment(labels.size(), 0);
    std::uint64_t state = seed;
    std::size_t next_fold = 0;
    for (SatdLabel cls : {SatdLabel::OnHold, SatdLabel::CrossReference}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == cls) members.push_back(i);
        for (std::size_t i = members.size(); i > 1; --i)
            std::swap(members[i - 1], members[bounded_draw(state, i)]);
        for (std::size_t idx : members) {
            assignment[idx] = next_fold;
            next_fold = (next_fold + 1) % folds;
        }
    }
    return assignment;
}

EvalReport cross_validate(const LabeledCorpus& corpus, const Learner& learner, std::size_t folds,
                          std::uint64_t seed) {
    if (folds < 2) throw TrainingError("cross-validation needs at least 2 folds");
    if (corpus.count(SatdLabel::OnHold) == 0 || corpus.count(SatdLabel::CrossReference) == 0)
        throw TrainingError("evaluation corpus must contain both OnHold and CrossReference records");

    std::vector<SatdLabel> labels;
    for (const auto& r : corpus.records) labels.push_back(r.label);
    const auto assignment = stratified_folds(labels, folds, seed);

    EvalReport report;
    report.requested_folds = folds;
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<LabeledRecord> train_split, test_split;
        for (std::size_t i = 0; i < corpus.records.size(); ++i)
            (assignment[i] == f ? test_split : train_split).push_back(corpus.records[i]);
        const bool has_pos = std::any_of(test_split.begin(), test_split.end(),
                                         [](const auto& r) { return r.label == SatdLabel::OnHold; });
        const bool has_neg = std::any_of(test_split.begin(), test_split.end(),
                                         [](const auto& r) { return r.label == SatdLabel::CrossReference; });
        if (!has_pos || !has_neg) {
            report.warnings.push_back("fold " + std::to_string(f) + " skipped: test split holds a single class");
            continue;
        }
        const Scorer scorer = learner(train_split);
        Confusion c;
        std::vector<double> scores;
        std::vector<bool> positive;
        for (const auto& r : test_split) {
            const Prediction p = scorer(r.text);
            const bool actual = r.label == SatdLabel::OnHold;
            const bool predicted = p.label == SatdLabel::OnHold;
            if (actual && predicted) ++c.true_positive;
            if (!actual && predicted) ++c.false_positive;
            if (!actual && !predicted) ++c.true_negative;
            if (actual && !predicted) ++c.false_negative;
            scores.push_back(p.confidence);
            positive.push_back(actual);
        }
        FoldMetrics m = metrics_from(c);
        m.fold = f;
        m.auc = auc_rank_sum(scores, positive);
        report.confusion += c;
        report.folds.push_back(m);
    }
    report.effective_folds = report.folds.size();
    if (report.effective_folds > 0) {
        const double k = static_cast<double>(report.effective_folds);
        for (const auto& m : report.folds) {
            report.precision += m.precision / k;
            report.recall += m.recall / k;
            report.f_measure += m.f_measure / k;
            report.auc += m.auc / k;
        }
    }
    return report;
}

Learner linear_learner(TrainingOptions options) {
    return [options](std::span<const LabeledRecord> train_split) -> Scorer {
        auto model = std::make_shared<const LinearModel>(train(train_split, options));
        return [model](std::string_view body) { return model->predict(body); };
    };
}

Learner majority_learner() {
    return [](std::span<const LabeledRecord> train_split) -> Scorer {
        const auto pos = std::count_if(train_split.begin(), train_split.end(),
                                       [](const auto& r) { return r.label == SatdLabel::OnHold; });
        const bool onhold = 2 * static_cast<std::size_t>(pos) >= train_split.size();
        const Prediction constant{onhold ? SatdLabel::OnHold : SatdLabel::CrossReference, onhold ? 1.0 : 0.0};
        return [constant](std::string_view) { return constant; };
    };
}

Learner pattern_learner(std::shared_ptr<const OnHoldPatterns> patterns) {
    return [patterns](std::span<const LabeledRecord>) -> Scorer {
        return [patterns](std::string_view body) {
            return pattern_detect(body, *patterns) == PatternVerdict::OnHold
                       ? Prediction{SatdLabel::OnHold, 1.0}
                       : Prediction{SatdLabel::CrossReference, 0.0};
        };
    };
}

Learner fixed_learner(std::shared_ptr<const Classifier> classifier) {
    return [classifier](std::span<const LabeledRecord>) -> Scorer {
        return [classifier](std::string_view body) { return classifier->predict(body); };
    };
}

} // namespace sentinel
