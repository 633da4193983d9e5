#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sentinel {

enum class SatdLabel { OnHold, CrossReference };

std::string_view to_string(SatdLabel label);

struct Prediction {
    SatdLabel label = SatdLabel::CrossReference;
    double confidence = 0.0; // estimated probability of OnHold
};

/// Sorted n-gram vocabulary. The version string identifies its exact content.
class Vocabulary {
public:
    Vocabulary() = default;
    explicit Vocabulary(std::vector<std::string> terms);

    [[nodiscard]] std::size_t size() const { return terms_.size(); }
    [[nodiscard]] bool empty() const { return terms_.empty(); }
    [[nodiscard]] const std::vector<std::string>& terms() const { return terms_; }
    [[nodiscard]] const std::string& version() const { return version_; }
    [[nodiscard]] std::optional<std::uint32_t> index_of(std::string_view term) const;

private:
    std::vector<std::string> terms_;
    std::unordered_map<std::string, std::uint32_t> index_;
    std::string version_;
};

struct FeatureVector {
    std::vector<std::uint32_t> indices; // strictly increasing
    std::vector<double> values;         // term counts, > 0
    std::string vocab_version;
};

/// Counts in-vocabulary n-grams of `tokens`; out-of-vocabulary n-grams are dropped.
FeatureVector featurize(std::span<const std::string> tokens, const Vocabulary& vocabulary,
                        std::size_t n_max = 2);

/// Anything that can estimate P(OnHold | comment body).
class Classifier {
public:
    virtual ~Classifier() = default;
    [[nodiscard]] virtual Prediction predict(std::string_view body_text) const = 0;
};

struct PlattCalibration {
    bool enabled = false;
    double a = 0.0;
    double b = 0.0;
};

struct ModelMetadata {
    std::uint8_t format_version = 1;
    std::string corpus_hash;
    std::int64_t created_at = 0; // ms since epoch
    std::uint64_t seed = 0;
    double l2 = 1.0;
    std::uint32_t epochs_run = 0;
};

double sigmoid(double z);

/// L2-regularized logistic regression over unigram+bigram counts.
class LinearModel final : public Classifier {
public:
    LinearModel() = default;
    LinearModel(Vocabulary vocabulary, std::vector<double> weights, double bias, std::size_t n_max,
                double threshold, PlattCalibration calibration, ModelMetadata metadata);

    [[nodiscard]] Prediction predict(std::string_view body_text) const override;
    /// Throws ModelError when `features` were built from another vocabulary.
    [[nodiscard]] Prediction predict(const FeatureVector& features) const;
    [[nodiscard]] double decision_value(const FeatureVector& features) const;
    [[nodiscard]] double probability(double decision_value) const;

    [[nodiscard]] const Vocabulary& vocabulary() const { return vocabulary_; }
    [[nodiscard]] const std::vector<double>& weights() const { return weights_; }
    [[nodiscard]] double bias() const { return bias_; }
    [[nodiscard]] std::size_t n_max() const { return n_max_; }
    [[nodiscard]] double threshold() const { return threshold_; }
    [[nodiscard]] const PlattCalibration& calibration() const { return calibration_; }
    [[nodiscard]] const ModelMetadata& metadata() const { return metadata_; }

    /// Binary container; byte 0 is the format version. Doubles are stored as
    /// raw IEEE-754 bits so a round trip is exact.
    [[nodiscard]] std::string serialize() const;
    static LinearModel deserialize(std::string_view bytes);

    void save(const std::filesystem::path& path) const;
    static LinearModel load(const std::filesystem::path& path);

private:
    Vocabulary vocabulary_;
    std::vector<double> weights_;
    double bias_ = 0.0;
    std::size_t n_max_ = 2;
    double threshold_ = 0.5;
    PlattCalibration calibration_;
    ModelMetadata metadata_;
};

} // namespace sentinel
