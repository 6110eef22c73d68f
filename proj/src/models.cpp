#include "ntc/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace ntc {

void SymbolAlphabet::validate() const {
    if (v_max > 0xFFFFFFFFull) throw std::invalid_argument("alphabet: size exceeds 2^32");
}

double ValueTransform::forward(double v) const {
    switch (kind) {
        case Kind::identity:
            return v;
        case Kind::log1p_standardized:
            return (std::log1p(v) - mean) / std_dev;
    }
    throw std::logic_error("transform: bad kind");
}

uint64_t ValueTransform::inverse(double x) const {
    double v;
    switch (kind) {
        case Kind::identity:
            v = x;
            break;
        case Kind::log1p_standardized:
            v = std::expm1(x * std_dev + mean);
            break;
        default:
            throw std::logic_error("transform: bad kind");
    }
    if (v < 0.0) return 0;
    return static_cast<uint64_t>(std::llround(v));
}

ValueTransform ValueTransform::identity() { return ValueTransform{}; }

ValueTransform ValueTransform::log1p_standardized(double mean, double std_dev) {
    if (!(std_dev > 0.0)) throw std::invalid_argument("transform: std must be positive");
    return ValueTransform{Kind::log1p_standardized, mean, std_dev};
}

double laplace_nll(const DistParams& params, double x) {
    return std::log(2.0 * params.b) + std::fabs(x - params.mu) / params.b;
}

QuantizedDistribution QuantizedDistribution::uniform(SymbolAlphabet alphabet) {
    alphabet.validate();
    QuantizedDistribution d;
    d.family_ = Family::uniform;
    d.alphabet_ = alphabet;
    d.unit_ = kProbScale / alphabet.size();
    d.remainder_ = kProbScale % alphabet.size();
    return d;
}

QuantizedDistribution QuantizedDistribution::histogram(std::span<const uint64_t> values,
                                                       SymbolAlphabet alphabet) {
    if (values.empty()) throw std::invalid_argument("histogram: empty data");
    std::map<uint64_t, uint64_t> freq;
    for (uint64_t v : values) {
        if (v > alphabet.v_max) throw std::invalid_argument("histogram: value exceeds alphabet");
        ++freq[v];
    }
    std::vector<std::pair<uint64_t, uint64_t>> counts(freq.begin(), freq.end());
    return from_counts(std::move(counts), alphabet, true);
}

QuantizedDistribution QuantizedDistribution::from_counts(
    std::vector<std::pair<uint64_t, uint64_t>> counts, SymbolAlphabet alphabet,
    bool add_one_smoothing) {
    alphabet.validate();
    if (!std::is_sorted(counts.begin(), counts.end(),
                        [](const auto& a, const auto& b) { return a.first < b.first; }))
        throw std::invalid_argument("from_counts: values must be sorted");
    QuantizedDistribution d;
    d.family_ = Family::histogram;
    d.alphabet_ = alphabet;
    d.smoothed_ = add_one_smoothing;
    d.counts_ = std::move(counts);
    d.prefix_.resize(d.counts_.size() + 1, 0);
    uint64_t prev = 0;
    bool first = true;
    for (size_t i = 0; i < d.counts_.size(); ++i) {
        const auto& [v, c] = d.counts_[i];
        if (!first && v <= prev) throw std::invalid_argument("from_counts: duplicate value");
        if (v > alphabet.v_max) throw std::invalid_argument("from_counts: value exceeds alphabet");
        if (c == 0) throw std::invalid_argument("from_counts: zero count");
        prev = v;
        first = false;
        d.prefix_[i + 1] = d.prefix_[i] + c;
    }
    if (!add_one_smoothing && d.counts_.size() != alphabet.size())
        throw std::invalid_argument("from_counts: unsmoothed counts must cover the alphabet");
    d.total_count_ = d.prefix_.back() + (add_one_smoothing ? alphabet.size() : 0);
    if (d.total_count_ == 0) throw std::invalid_argument("from_counts: empty");
    // keeps every per-value cum increment >= 2 after the floor division
    if (d.total_count_ > (1ull << 46))
        throw std::invalid_argument("histogram: total count too large for fixed-point tiling");
    return d;
}

QuantizedDistribution QuantizedDistribution::laplace(DistParams params, SymbolAlphabet alphabet,
                                                     ValueTransform transform, double mix_eps) {
    alphabet.validate();
    if (!std::isfinite(params.mu) || !std::isfinite(params.b))
        throw std::invalid_argument("laplace: non-finite parameters");
    if (!(mix_eps > 0.0 && mix_eps < 1.0)) throw std::invalid_argument("laplace: bad mix_eps");
    params.b = std::max(params.b, kLaplaceScaleMin);
    QuantizedDistribution d;
    d.family_ = Family::laplace;
    d.alphabet_ = alphabet;
    d.params_ = params;
    d.transform_ = transform;
    d.mix_eps_ = mix_eps;
    return d;
}

uint64_t QuantizedDistribution::histogram_cum_count(uint64_t v) const {
    // observations strictly below v
    size_t lo = 0, hi = counts_.size();
    while (lo < hi) {
        size_t mid = (lo + hi) / 2;
        if (counts_[mid].first < v)
            lo = mid + 1;
        else
            hi = mid;
    }
    return prefix_[lo] + (smoothed_ ? v : 0);
}

uint64_t QuantizedDistribution::cum(uint64_t v) const {
    const uint64_t size = alphabet_.size();
    if (v > size) throw std::invalid_argument("cum: value out of range");
    if (v == 0) return 0;
    if (v == size) return kProbScale;
    switch (family_) {
        case Family::uniform:
            return v * unit_ + std::min(v, remainder_);
        case Family::histogram: {
            const auto cc = static_cast<unsigned __int128>(histogram_cum_count(v));
            return static_cast<uint64_t>(cc * kProbScale / total_count_);
        }
        case Family::laplace: {
            // bins are centered on the values: the boundary between v-1 and v
            // sits at T(v - 1/2), so a prediction mu = T(v) lands mid-bin.
            // long double keeps the boundary well inside one fixed-point unit
            const long double x =
                static_cast<long double>(transform_.forward(static_cast<double>(v) - 0.5));
            const long double mu = params_.mu;
            const long double b = params_.b;
            long double core;
            if (x < mu)
                core = 0.5L * std::exp((x - mu) / b);
            else
                core = 1.0L - 0.5L * std::exp(-(x - mu) / b);
            const long double eps = mix_eps_;
            const long double f = (1.0L - eps) * core +
                                  eps * (static_cast<long double>(v) / static_cast<long double>(size));
            long double scaled = f * static_cast<long double>(kProbScale);
            if (scaled < 0.0L) scaled = 0.0L;
            uint64_t c = static_cast<uint64_t>(scaled);
            if (c >= kProbScale) c = kProbScale - 1;
            return c;
        }
    }
    throw std::logic_error("cum: bad family");
}

uint64_t QuantizedDistribution::invert(uint64_t target) const {
    if (target >= kProbScale) throw std::invalid_argument("invert: target out of range");
    const uint64_t size = alphabet_.size();
    if (family_ == Family::uniform) {
        const uint64_t pivot = remainder_ * (unit_ + 1);
        if (target < pivot) return target / (unit_ + 1);
        return remainder_ + (target - pivot) / unit_;
    }
    // smallest boundary j in [1, size] with cum(j) > target; answer j-1
    uint64_t lo = 1, hi = size;
    while (lo < hi) {
        const uint64_t mid = lo + (hi - lo) / 2;
        if (cum(mid) > target)
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo - 1;
}

}  // namespace ntc
