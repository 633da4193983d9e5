#pragma once

#include "sentinel/corpus.hpp"
#include "sentinel/model.hpp"
#include "sentinel/training.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sentinel {

class OnHoldPatterns;

struct Confusion {
    std::size_t true_positive = 0;
    std::size_t false_positive = 0;
    std::size_t true_negative = 0;
    std::size_t false_negative = 0;

    Confusion& operator+=(const Confusion& o);
};

struct FoldMetrics {
    std::size_t fold = 0;
    std::size_t test_size = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
    double auc = 0.0;
    Confusion confusion;
};

struct EvalReport {
    std::vector<FoldMetrics> folds;
    std::size_t requested_folds = 0;
    std::size_t effective_folds = 0;
    // Means over effective folds.
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
    double auc = 0.0;
    Confusion confusion; // summed over folds
    std::vector<std::string> warnings;
};

/// Scores one comment body; the learner sees only the training split.
using Scorer = std::function<Prediction(std::string_view)>;
using Learner = std::function<Scorer(std::span<const LabeledRecord>)>;

/// Rank-sum AUC with mid-ranks for ties; equals the fraction of
/// (positive, negative) pairs ordered correctly, ties counting 0.5.
double auc_rank_sum(std::span<const double> scores, const std::vector<bool>& positive);

/// Precision, recall and F-measure on the OnHold class. Undefined ratios are 0.
FoldMetrics metrics_from(const Confusion& c);

/// Fold index for each record: each class is shuffled with `seed` and dealt
/// round-robin, so folds are stratified.
std::vector<std::size_t> stratified_folds(std::span<const SatdLabel> labels, std::size_t folds,
                                          std::uint64_t seed);

/// k-fold cross-validation. Folds whose test split holds a single class are
/// skipped with a warning. Throws TrainingError for k < 2 or a single-label corpus.
EvalReport cross_validate(const LabeledCorpus& corpus, const Learner& learner, std::size_t folds,
                          std::uint64_t seed);

Learner linear_learner(TrainingOptions options);
/// Predicts the training split's majority class with confidence 1 or 0.
Learner majority_learner();
/// Pattern-only detector used as a classifier.
Learner pattern_learner(std::shared_ptr<const OnHoldPatterns> patterns);
/// A fixed, already-trained classifier; training splits are ignored.
Learner fixed_learner(std::shared_ptr<const Classifier> classifier);

/// Deterministic bounded draw in [0, bound) independent of the standard
/// library's distribution implementations.
std::uint64_t bounded_draw(std::uint64_t& state, std::uint64_t bound);

} // namespace sentinel
