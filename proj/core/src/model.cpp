#include "sentinel/model.hpp"

#include "sentinel/errors.hpp"
#include "sentinel/hashing.hpp"
#include "sentinel/tokenizer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace sentinel {

std::string_view to_string(SatdLabel label) {
    return label == SatdLabel::OnHold ? "OnHold" : "CrossReference";
}

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
    std::sort(terms_.begin(), terms_.end());
    terms_.erase(std::unique(terms_.begin(), terms_.end()), terms_.end());
    std::uint64_t h = fnv1a64("vocab/v1");
    for (std::uint32_t i = 0; i < terms_.size(); ++i) {
        index_.emplace(terms_[i], i);
        h = fnv1a64(terms_[i], h);
        h = fnv1a64(std::string_view("\0", 1), h);
    }
    version_ = to_hex(h);
}

std::optional<std::uint32_t> Vocabulary::index_of(std::string_view term) const {
    const auto it = index_.find(std::string(term));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

FeatureVector featurize(std::span<const std::string> tokens, const Vocabulary& vocabulary,
                        std::size_t n_max) {
    std::map<std::uint32_t, double> counts;
    for (const auto& gram : ngrams(tokens, n_max)) {
        if (auto idx = vocabulary.index_of(gram)) counts[*idx] += 1.0;
    }
    FeatureVector fv;
    fv.vocab_version = vocabulary.version();
    fv.indices.reserve(counts.size());
    fv.values.reserve(counts.size());
    for (const auto& [idx, count] : counts) {
        fv.indices.push_back(idx);
        fv.values.push_back(count);
    }
    return fv;
}

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

LinearModel::LinearModel(Vocabulary vocabulary, std::vector<double> weights, double bias,
                         std::size_t n_max, double threshold, PlattCalibration calibration,
                         ModelMetadata metadata)
    : vocabulary_(std::move(vocabulary)),
      weights_(std::move(weights)),
      bias_(bias),
      n_max_(n_max),
      threshold_(threshold),
      calibration_(calibration),
      metadata_(std::move(metadata)) {
    if (weights_.size() != vocabulary_.size())
        throw ModelError("weight count " + std::to_string(weights_.size()) +
                         " does not match vocabulary size " + std::to_string(vocabulary_.size()));
}

double LinearModel::decision_value(const FeatureVector& features) const {
    if (features.vocab_version != vocabulary_.version())
        throw ModelError("feature vector built from vocabulary " + features.vocab_version +
                         " but model expects " + vocabulary_.version());
    double z = bias_;
    for (std::size_t k = 0; k < features.indices.size(); ++k)
        z += weights_.at(features.indices[k]) * features.values[k];
    return z;
}

double LinearModel::probability(double z) const {
    if (calibration_.enabled) return sigmoid(-(calibration_.a * z + calibration_.b));
    return sigmoid(z);
}

Prediction LinearModel::predict(const FeatureVector& features) const {
    const double p = probability(decision_value(features));
    return {p >= threshold_ ? SatdLabel::OnHold : SatdLabel::CrossReference, p};
}

Prediction LinearModel::predict(std::string_view body_text) const {
    const auto tokens = tokenize(body_text);
    return predict(featurize(tokens, vocabulary_, n_max_));
}

namespace {

constexpr std::string_view kMagic = "SATD";

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        out_.append(s);
    }
    void raw(std::string_view s) { out_.append(s); }
    std::string take() { return std::move(out_); }
    [[nodiscard]] const std::string& view() const { return out_; }

private:
    std::string out_;
};

class Reader {
public:
    explicit Reader(std::string_view in) : in_(in) {}
    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(in_[pos_++]);
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const auto n = u32();
        need(n);
        std::string s(in_.substr(pos_, n));
        pos_ += n;
        return s;
    }
    std::string_view raw(std::size_t n) {
        need(n);
        auto s = in_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    [[nodiscard]] std::size_t pos() const { return pos_; }
    [[nodiscard]] bool at_end() const { return pos_ == in_.size(); }

private:
    void need(std::size_t n) const {
        if (pos_ + n > in_.size()) throw ModelError("model file truncated");
    }
    std::string_view in_;
    std::size_t pos_ = 0;
};

} // namespace

std::string LinearModel::serialize() const {
    Writer w;
    w.u8(metadata_.format_version);
    w.raw(kMagic);
    w.u32(static_cast<std::uint32_t>(n_max_));
    w.f64(threshold_);
    w.str(metadata_.corpus_hash);
    w.u64(static_cast<std::uint64_t>(metadata_.created_at));
    w.u64(metadata_.seed);
    w.f64(metadata_.l2);
    w.u32(metadata_.epochs_run);
    w.u8(calibration_.enabled ? 1 : 0);
    w.f64(calibration_.a);
    w.f64(calibration_.b);
    w.f64(bias_);
    w.u32(static_cast<std::uint32_t>(vocabulary_.size()));
    for (std::size_t i = 0; i < vocabulary_.size(); ++i) {
        w.str(vocabulary_.terms()[i]);
        w.f64(weights_[i]);
    }
    w.u64(fnv1a64(w.view()));
    return w.take();
}

LinearModel LinearModel::deserialize(std::string_view bytes) {
    Reader r(bytes);
    ModelMetadata meta;
    meta.format_version = r.u8();
    if (meta.format_version != 1)
        throw ModelError("unsupported model format version " + std::to_string(meta.format_version));
    if (r.raw(kMagic.size()) != kMagic) throw ModelError("not a model file (bad magic)");
    const std::size_t n_max = r.u32();
    const double threshold = r.f64();
    meta.corpus_hash = r.str();
    meta.created_at = static_cast<std::int64_t>(r.u64());
    meta.seed = r.u64();
    meta.l2 = r.f64();
    meta.epochs_run = r.u32();
    PlattCalibration calib;
    calib.enabled = r.u8() != 0;
    calib.a = r.f64();
    calib.b = r.f64();
    const double bias = r.f64();
    const std::uint32_t n = r.u32();
    std::vector<std::string> terms;
    std::vector<double> weights;
    terms.reserve(n);
    weights.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        terms.push_back(r.str());
        weights.push_back(r.f64());
    }
    const std::size_t body_len = r.pos();
    const std::uint64_t checksum = r.u64();
    if (!r.at_end()) throw ModelError("trailing bytes after model checksum");
    if (checksum != fnv1a64(bytes.substr(0, body_len))) throw ModelError("model checksum mismatch");
    if (!std::is_sorted(terms.begin(), terms.end()) ||
        std::adjacent_find(terms.begin(), terms.end()) != terms.end())
        throw ModelError("model vocabulary is not sorted and unique");
    if (n_max == 0) throw ModelError("model n_max must be >= 1");
    return LinearModel(Vocabulary(std::move(terms)), std::move(weights), bias, n_max, threshold, calib,
                       std::move(meta));
}

void LinearModel::save(const std::filesystem::path& path) const {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ModelError("cannot write model file " + tmp);
        const auto bytes = serialize();
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw ModelError("short write to " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

LinearModel LinearModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelError("cannot open model file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str());
}

} // namespace sentinel
