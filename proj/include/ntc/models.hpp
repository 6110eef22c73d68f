#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ntc/coder.hpp"

namespace ntc {

// Floor mixed into every parametric model: p' = (1-eps) p + eps uniform.
// Caps the cost of a badly mispredicted symbol at ~40 bits.
inline constexpr double kUniformMixEps = 1.0 / 256.0;
// Lower bound on the Laplace scale in transformed space.
inline constexpr double kLaplaceScaleMin = 1e-4;

struct SymbolAlphabet {
    uint64_t v_max = 0;

    uint64_t size() const { return v_max + 1; }
    void validate() const;  // size must fit in 2^32
};

// Monotone map from integer traffic values to the predictor's input/output
// space. log1p + standardization; identity is for tests and tiny alphabets.
struct ValueTransform {
    enum class Kind : uint8_t { identity = 0, log1p_standardized = 1 };

    Kind kind = Kind::identity;
    double mean = 0.0;
    double std_dev = 1.0;

    double forward(double v) const;
    // exact on integers that came through forward()
    uint64_t inverse(double x) const;

    static ValueTransform identity();
    static ValueTransform log1p_standardized(double mean, double std_dev);

    friend bool operator==(const ValueTransform&, const ValueTransform&) = default;
};

// Location/scale of the predicted Laplace in transformed space.
struct DistParams {
    double mu = 0.0;
    double b = 1.0;  // std dev = b * sqrt(2)
};

double laplace_nll(const DistParams& params, double x);

// Distribution over {0..v_max} expressed as an exact tiling of [0, 2^48):
// cum(0) = 0, cum(size) = 2^48, strictly increasing, so every value has an
// interval of width >= 1 and inverse lookup is total.
class QuantizedDistribution {
public:
    enum class Family : uint8_t { uniform = 0, histogram = 1, laplace = 2 };

    static QuantizedDistribution uniform(SymbolAlphabet alphabet);
    // add-one smoothed empirical frequencies over the full alphabet
    static QuantizedDistribution histogram(std::span<const uint64_t> values,
                                           SymbolAlphabet alphabet);
    // sorted distinct (value, count) pairs; smoothing adds one to every
    // alphabet value. Without smoothing the counts must cover the alphabet.
    static QuantizedDistribution from_counts(std::vector<std::pair<uint64_t, uint64_t>> counts,
                                             SymbolAlphabet alphabet, bool add_one_smoothing);
    static QuantizedDistribution laplace(DistParams params, SymbolAlphabet alphabet,
                                         ValueTransform transform,
                                         double mix_eps = kUniformMixEps);

    uint64_t alphabet_size() const { return alphabet_.size(); }
    const SymbolAlphabet& alphabet() const { return alphabet_; }
    Family family() const { return family_; }

    // cumulative boundary, defined for v in [0, size]
    uint64_t cum(uint64_t v) const;
    FixedPointInterval interval(uint64_t v) const { return {cum(v), cum(v + 1)}; }
    // unique v with cum(v) <= target < cum(v+1)
    uint64_t invert(uint64_t target) const;

    const std::vector<std::pair<uint64_t, uint64_t>>& count_table() const { return counts_; }

private:
    QuantizedDistribution() = default;

    uint64_t histogram_cum_count(uint64_t v) const;  // smoothed cumulative count below v

    Family family_ = Family::uniform;
    SymbolAlphabet alphabet_;

    // uniform
    uint64_t unit_ = 0;       // 2^48 / size
    uint64_t remainder_ = 0;  // first `remainder_` values get one extra unit

    // histogram: sorted distinct values + prefix counts
    std::vector<std::pair<uint64_t, uint64_t>> counts_;
    std::vector<uint64_t> prefix_;  // prefix_[i] = sum of counts_[0..i)
    uint64_t total_count_ = 0;      // including smoothing
    bool smoothed_ = true;

    // laplace
    DistParams params_;
    ValueTransform transform_;
    double mix_eps_ = kUniformMixEps;
};

}  // namespace ntc
