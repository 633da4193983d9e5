#include "sentinel/training.hpp"

#include "sentinel/errors.hpp"
#include "sentinel/tokenizer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace sentinel {

namespace {

// log(1 + exp(-m)) without overflow.
double log1p_exp_neg(double m) {
    if (m > 0) return std::log1p(std::exp(-m));
    return -m + std::log1p(std::exp(m));
}

double dot_row(const std::vector<std::pair<std::uint32_t, double>>& row, std::span<const double> w) {
    double z = 0.0;
    for (const auto& [j, v] : row) z += w[j] * v;
    return z;
}

// Largest eigenvalue of A^T A for A = [X | 1], by power iteration.
double top_eigenvalue(const DesignMatrix& x) {
    const std::size_t d = x.cols + 1;
    std::vector<double> v(d, 1.0 / std::sqrt(static_cast<double>(d)));
    double lambda = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<double> next(d, 0.0);
        for (const auto& row : x.rows) {
            double av = v[x.cols];
            for (const auto& [j, val] : row) av += val * v[j];
            for (const auto& [j, val] : row) next[j] += val * av;
            next[x.cols] += av;
        }
        double norm = 0.0;
        for (double e : next) norm += e * e;
        norm = std::sqrt(norm);
        if (norm == 0.0) return 0.0;
        lambda = norm;
        for (std::size_t k = 0; k < d; ++k) v[k] = next[k] / norm;
    }
    return lambda;
}

} // namespace

ObjectiveValue logistic_objective(const DesignMatrix& x, std::span<const double> labels,
                                  std::span<const double> weights, double bias, double l2) {
    ObjectiveValue out;
    out.grad_weights.assign(x.cols, 0.0);
    for (std::size_t i = 0; i < x.rows.size(); ++i) {
        const double y = labels[i];
        const double margin = y * (dot_row(x.rows[i], weights) + bias);
        out.loss += log1p_exp_neg(margin);
        // d/dz log(1 + exp(-y z)) = -y * sigmoid(-y z)
        const double g = -y * sigmoid(-margin);
        for (const auto& [j, v] : x.rows[i]) out.grad_weights[j] += g * v;
        out.grad_bias += g;
    }
    for (std::size_t j = 0; j < x.cols; ++j) {
        out.loss += 0.5 * l2 * weights[j] * weights[j];
        out.grad_weights[j] += l2 * weights[j];
    }
    return out;
}

Vocabulary build_vocabulary(std::span<const LabeledRecord> records, std::size_t n_max,
                            std::size_t min_df, std::size_t min_features) {
    std::map<std::string, std::size_t> df;
    for (const auto& r : records) {
        const auto tokens = tokenize(r.text);
        const auto grams = ngrams(tokens, n_max);
        for (const auto& g : std::set<std::string>(grams.begin(), grams.end())) ++df[g];
    }
    std::vector<std::string> kept;
    for (const auto& [g, n] : df)
        if (n >= min_df) kept.push_back(g);
    if (kept.size() < min_features) {
        kept.clear();
        for (const auto& [g, n] : df) kept.push_back(g);
    }
    return Vocabulary(std::move(kept));
}

DesignMatrix design_matrix(std::span<const LabeledRecord> records, const Vocabulary& vocabulary,
                           std::size_t n_max) {
    DesignMatrix x;
    x.cols = vocabulary.size();
    x.rows.reserve(records.size());
    for (const auto& r : records) {
        const auto fv = featurize(tokenize(r.text), vocabulary, n_max);
        auto& row = x.rows.emplace_back();
        for (std::size_t k = 0; k < fv.indices.size(); ++k) row.emplace_back(fv.indices[k], fv.values[k]);
    }
    return x;
}

LinearModel train(std::span<const LabeledRecord> records, const TrainingOptions& options,
                  std::string corpus_hash) {
    const auto positives = std::count_if(records.begin(), records.end(),
                                         [](const LabeledRecord& r) { return r.label == SatdLabel::OnHold; });
    if (positives == 0 || static_cast<std::size_t>(positives) == records.size())
        throw TrainingError("training corpus must contain both OnHold and CrossReference records");
    if (options.l2 < 0.0) throw TrainingError("l2 must be >= 0");
    if (options.n_max == 0) throw TrainingError("n_max must be >= 1");

    Vocabulary vocab = build_vocabulary(records, options.n_max, options.min_document_frequency,
                                        options.min_features);
    const DesignMatrix x = design_matrix(records, vocab, options.n_max);
    std::vector<double> y;
    y.reserve(records.size());
    for (const auto& r : records) y.push_back(r.label == SatdLabel::OnHold ? 1.0 : -1.0);

    double step = 1.0 / (0.25 * top_eigenvalue(x) * 1.1 + options.l2);
    std::vector<double> w(x.cols, 0.0);
    double b = 0.0;
    ObjectiveValue current = logistic_objective(x, y, w, b, options.l2);
    std::uint32_t epoch = 0;
    for (; epoch < options.epochs; ++epoch) {
        double gmax = std::abs(current.grad_bias);
        for (double g : current.grad_weights) gmax = std::max(gmax, std::abs(g));
        if (gmax < options.tolerance) break;

        // Backtrack if the power-iteration estimate was too optimistic.
        for (;;) {
            std::vector<double> w_next(w);
            for (std::size_t j = 0; j < w.size(); ++j) w_next[j] -= step * current.grad_weights[j];
            const double b_next = b - step * current.grad_bias;
            ObjectiveValue next = logistic_objective(x, y, w_next, b_next, options.l2);
            if (next.loss <= current.loss || step < 1e-12) {
                w = std::move(w_next);
                b = b_next;
                current = std::move(next);
                break;
            }
            step *= 0.5;
        }
    }

    PlattCalibration calibration;
    if (options.calibrate) {
        std::vector<double> z;
        std::vector<bool> pos;
        for (std::size_t i = 0; i < x.rows.size(); ++i) {
            z.push_back(dot_row(x.rows[i], w) + b);
            pos.push_back(y[i] > 0);
        }
        calibration = fit_platt(z, pos);
    }

    ModelMetadata meta;
    meta.corpus_hash = std::move(corpus_hash);
    meta.created_at = options.created_at;
    meta.seed = options.seed;
    meta.l2 = options.l2;
    meta.epochs_run = epoch;
    return LinearModel(std::move(vocab), std::move(w), b, options.n_max, options.threshold, calibration,
                       std::move(meta));
}

LinearModel train(const LabeledCorpus& corpus, const TrainingOptions& options) {
    return train(corpus.records, options, corpus.content_hash());
}

PlattCalibration fit_platt(std::span<const double> z, const std::vector<bool>& positive) {
    double n_pos = 0, n_neg = 0;
    for (bool p : positive) (p ? n_pos : n_neg) += 1;
    const double hi = (n_pos + 1.0) / (n_pos + 2.0);
    const double lo = 1.0 / (n_neg + 2.0);

    double a = 0.0, b = std::log((n_neg + 1.0) / (n_pos + 1.0));
    auto objective = [&](double aa, double bb) {
        double f = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double t = positive[i] ? hi : lo;
            const double fz = z[i] * aa + bb;
            f += fz >= 0 ? t * fz + std::log1p(std::exp(-fz)) : (t - 1.0) * fz + std::log1p(std::exp(fz));
        }
        return f;
    };
    double fval = objective(a, b);
    constexpr double kSigma = 1e-12;
    for (int iter = 0; iter < 100; ++iter) {
        double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double t = positive[i] ? hi : lo;
            const double fz = z[i] * a + b;
            double p, q;
            if (fz >= 0) {
                p = std::exp(-fz) / (1.0 + std::exp(-fz));
                q = 1.0 / (1.0 + std::exp(-fz));
            } else {
                p = 1.0 / (1.0 + std::exp(fz));
                q = std::exp(fz) / (1.0 + std::exp(fz));
            }
            const double d2 = p * q;
            h11 += z[i] * z[i] * d2;
            h22 += d2;
            h21 += z[i] * d2;
            const double d1 = t - p;
            g1 += z[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;
        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * da + g2 * db;
        double stepsize = 1.0;
        bool moved = false;
        while (stepsize >= 1e-10) {
            const double na = a + stepsize * da, nb = b + stepsize * db;
            const double nf = objective(na, nb);
            if (nf < fval + 1e-4 * stepsize * gd) {
                a = na;
                b = nb;
                fval = nf;
                moved = true;
                break;
            }
            stepsize /= 2.0;
        }
        if (!moved) break;
    }
    return {true, a, b};
}

} // namespace sentinel
