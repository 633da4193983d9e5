#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace sentinel::testing {

double pairwise_auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
    std::uint64_t doubled = 0, pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!positive[i]) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (positive[j]) continue;
            ++pairs;
            if (scores[i] > scores[j]) doubled += 2;
            else if (scores[i] == scores[j]) doubled += 1;
        }
    }
    if (pairs == 0) return 0.5;
    return static_cast<double>(doubled) / 2.0 / static_cast<double>(pairs);
}

double objective_at(const DesignMatrix& x, const std::vector<double>& y, const std::vector<double>& w, double b,
                    double l2) {
    double loss = 0;
    for (std::size_t i = 0; i < x.rows.size(); ++i) {
        double z = b;
        for (const auto& [j, v] : x.rows[i]) z += w[j] * v;
        const double m = -y[i] * z;
        loss += m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
    }
    double norm = 0;
    for (double wi : w) norm += wi * wi;
    return loss + 0.5 * l2 * norm;
}

double gradient_relative_error(std::mt19937_64& rng, double h) {
    auto unit = [&] { return static_cast<double>(rng() % 2'000'001) / 1'000'000.0 - 1.0; };
    DesignMatrix x;
    x.cols = 5 + rng() % 20;
    const std::size_t rows = 5 + rng() % 30;
    std::vector<double> y;
    for (std::size_t i = 0; i < rows; ++i) {
        std::vector<std::pair<std::uint32_t, double>> row;
        for (std::uint32_t j = 0; j < x.cols; ++j)
            if (rng() % 3 == 0) row.emplace_back(j, static_cast<double>(1 + rng() % 3));
        x.rows.push_back(row);
        y.push_back(rng() % 2 ? 1.0 : -1.0);
    }
    std::vector<double> w(x.cols);
    for (auto& wi : w) wi = unit();
    const double b = unit();
    const double l2 = 1.1 + unit();

    const auto value = logistic_objective(x, y, w, b, l2);
    std::vector<double> numeric(x.cols + 1);
    for (std::size_t j = 0; j < x.cols; ++j) {
        auto wp = w, wm = w;
        wp[j] += h;
        wm[j] -= h;
        numeric[j] = (objective_at(x, y, wp, b, l2) - objective_at(x, y, wm, b, l2)) / (2 * h);
    }
    numeric[x.cols] = (objective_at(x, y, w, b + h, l2) - objective_at(x, y, w, b - h, l2)) / (2 * h);

    std::vector<double> analytic = value.grad_weights;
    analytic.push_back(value.grad_bias);
    double diff = 0, na = 0, nn = 0;
    for (std::size_t j = 0; j < analytic.size(); ++j) {
        diff += (analytic[j] - numeric[j]) * (analytic[j] - numeric[j]);
        na += analytic[j] * analytic[j];
        nn += numeric[j] * numeric[j];
    }
    return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nn), 1e-12});
}

} // namespace sentinel::testing
