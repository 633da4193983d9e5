#pragma once

#include "sentinel/corpus.hpp"
#include "sentinel/model.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace sentinel {

struct TrainingOptions {
    double l2 = 1.0;
    std::uint32_t epochs = 20000; // upper bound on gradient steps
    std::uint64_t seed = 0;       // recorded in metadata; descent from zero is seed-free
    std::size_t n_max = 2;
    std::size_t min_document_frequency = 2;
    std::size_t min_features = 10;
    double tolerance = 1e-6; // stop when max |gradient| falls below this
    double threshold = 0.5;
    bool calibrate = false;
    std::int64_t created_at = 0;
};

/// Row-sparse design matrix; one row per document.
struct DesignMatrix {
    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows;
    std::size_t cols = 0;
};

struct ObjectiveValue {
    double loss = 0.0;
    std::vector<double> grad_weights;
    double grad_bias = 0.0;
};

/// Sum of logistic losses log(1 + exp(-y z)) with z = w.x + b, plus
/// (l2 / 2) * ||w||^2. Labels are +1 (OnHold) / -1. The bias is not penalized.
ObjectiveValue logistic_objective(const DesignMatrix& x, std::span<const double> labels,
                                  std::span<const double> weights, double bias, double l2);

/// N-grams with document frequency >= min_df; every n-gram when that leaves
/// fewer than `min_features`.
Vocabulary build_vocabulary(std::span<const LabeledRecord> records, std::size_t n_max,
                            std::size_t min_df, std::size_t min_features);

DesignMatrix design_matrix(std::span<const LabeledRecord> records, const Vocabulary& vocabulary,
                           std::size_t n_max);

/// Full-batch gradient descent from zero weights with step 1/L, where L bounds
/// the Lipschitz constant of the gradient. Reproducible for equal inputs.
/// Throws TrainingError for a corpus missing either label.
LinearModel train(std::span<const LabeledRecord> records, const TrainingOptions& options,
                  std::string corpus_hash = {});
LinearModel train(const LabeledCorpus& corpus, const TrainingOptions& options);

/// Fits p = 1 / (1 + exp(a z + b)) to decision values (Platt, with Lin et al.'s
/// target smoothing and Newton steps).
PlattCalibration fit_platt(std::span<const double> decision_values, const std::vector<bool>& positive);

} // namespace sentinel
