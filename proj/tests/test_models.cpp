#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include "ntc/models.hpp"
#include "ntc/rng.hpp"

using namespace ntc;

namespace {

// closed-form oracle: mixed folded-Laplace pmf over value-centered bins,
// evaluated in long double
long double oracle_pmf(uint64_t v, const DistParams& p, uint64_t size,
                       const ValueTransform& tr, double eps) {
    auto cdf = [&](uint64_t boundary) -> long double {
        if (boundary == 0) return 0.0L;
        if (boundary >= size) return 1.0L;
        const long double x = tr.forward(static_cast<double>(boundary) - 0.5);
        const long double mu = p.mu, b = std::max(p.b, kLaplaceScaleMin);
        return x < mu ? 0.5L * std::exp((x - mu) / b) : 1.0L - 0.5L * std::exp(-(x - mu) / b);
    };
    const long double core = cdf(v + 1) - cdf(v);
    return (1.0L - static_cast<long double>(eps)) * core +
           static_cast<long double>(eps) / static_cast<long double>(size);
}

void check_tiling(const QuantizedDistribution& d) {
    const uint64_t size = d.alphabet_size();
    REQUIRE(d.cum(0) == 0);
    REQUIRE(d.cum(size) == kProbScale);
    uint64_t prev = 0;
    for (uint64_t v = 1; v <= size; ++v) {
        const uint64_t c = d.cum(v);
        REQUIRE(c > prev);  // strict: every width >= 1
        prev = c;
    }
}

}  // namespace

TEST_SUITE_BEGIN("models");

TEST_CASE("uniform over two symbols halves the range exactly") {
    auto d = QuantizedDistribution::uniform(SymbolAlphabet{1});
    CHECK(d.interval(0).cum_lo == 0);
    CHECK(d.interval(0).cum_hi == (1ull << 47));
    CHECK(d.interval(1).cum_lo == (1ull << 47));
    CHECK(d.interval(1).cum_hi == (1ull << 48));
    CHECK(d.invert(0) == 0);
    CHECK(d.invert(1ull << 47) == 1);
}

TEST_CASE("uniform over three symbols tiles exactly, extra unit goes low") {
    auto d = QuantizedDistribution::uniform(SymbolAlphabet{2});
    const uint64_t w0 = d.interval(0).width();
    const uint64_t w1 = d.interval(1).width();
    const uint64_t w2 = d.interval(2).width();
    CHECK(w0 + w1 + w2 == kProbScale);
    CHECK(w0 - w2 <= 1);  // 2^48 mod 3 == 1: value 0 gets the spare unit
    CHECK(w0 >= w1);
    CHECK(w1 == w2);
    check_tiling(d);
}

TEST_CASE("uniform over 256 symbols costs exactly 8 bits each") {
    auto d = QuantizedDistribution::uniform(SymbolAlphabet{255});
    for (uint64_t v = 0; v < 256; ++v) CHECK(d.interval(v).width() == (1ull << 40));
}

TEST_CASE("histogram add-one smoothing on [0,0,0,1]") {
    const std::vector<uint64_t> data{0, 0, 0, 1};
    auto d = QuantizedDistribution::histogram(data, SymbolAlphabet{1});
    // smoothed p = (4/6, 2/6)
    const double ideal0 = 4.0 / 6.0 * static_cast<double>(kProbScale);
    CHECK(std::fabs(static_cast<double>(d.interval(0).width()) - ideal0) <= 1.0);
    CHECK(d.interval(0).width() + d.interval(1).width() == kProbScale);
}

TEST_CASE("histogram of identical values keeps a floor everywhere") {
    const std::vector<uint64_t> data(50, 7);
    auto d = QuantizedDistribution::histogram(data, SymbolAlphabet{15});
    check_tiling(d);
    uint64_t max_w = 0;
    for (uint64_t v = 0; v < 16; ++v) max_w = std::max(max_w, d.interval(v).width());
    CHECK(d.interval(7).width() == max_w);
    for (uint64_t v = 0; v < 16; ++v) CHECK(d.interval(v).width() >= 1);
}

TEST_CASE("histogram depends only on the multiset") {
    std::vector<uint64_t> a{5, 1, 5, 2, 5, 9, 1};
    std::vector<uint64_t> b{9, 5, 5, 1, 1, 2, 5};
    auto da = QuantizedDistribution::histogram(a, SymbolAlphabet{9});
    auto db = QuantizedDistribution::histogram(b, SymbolAlphabet{9});
    for (uint64_t v = 0; v <= 10; ++v) CHECK(da.cum(v) == db.cum(v));
}

TEST_CASE("from_counts validation") {
    CHECK_THROWS_AS(QuantizedDistribution::from_counts({{0, 1}}, SymbolAlphabet{1}, false),
                    std::invalid_argument);  // unsmoothed must cover alphabet
    CHECK_THROWS_AS(QuantizedDistribution::from_counts({{0, 0}}, SymbolAlphabet{1}, true),
                    std::invalid_argument);  // zero count
    CHECK_THROWS_AS(QuantizedDistribution::histogram({}, SymbolAlphabet{1}),
                    std::invalid_argument);
}

TEST_CASE("quantized laplace matches the closed-form oracle within one unit") {
    // identity transform, mu=0, b=1, alphabet {0..7}
    auto tr = ValueTransform::identity();
    DistParams p{0.0, 1.0};
    auto d = QuantizedDistribution::laplace(p, SymbolAlphabet{7}, tr);
    check_tiling(d);
    for (uint64_t v = 0; v < 8; ++v) {
        const long double ideal =
            oracle_pmf(v, p, 8, tr, kUniformMixEps) * static_cast<long double>(kProbScale);
        const long double got = static_cast<long double>(d.interval(v).width());
        CHECK(std::fabs(static_cast<double>(got - ideal)) <= 1.001);
    }
}

TEST_CASE("laplace symmetry: mu between two integers balances them") {
    auto tr = ValueTransform::identity();
    for (double b : {0.3, 1.0, 4.0}) {
        auto d = QuantizedDistribution::laplace({4.5, b}, SymbolAlphabet{9}, tr);
        const int64_t w4 = static_cast<int64_t>(d.interval(4).width());
        const int64_t w5 = static_cast<int64_t>(d.interval(5).width());
        CHECK(std::llabs(w4 - w5) <= 1);
    }
}

TEST_CASE("laplace at minimum scale concentrates on the centered value") {
    auto tr = ValueTransform::identity();
    auto d = QuantizedDistribution::laplace({5.0, kLaplaceScaleMin}, SymbolAlphabet{15}, tr);
    check_tiling(d);
    const double p5 = static_cast<double>(d.interval(5).width()) / static_cast<double>(kProbScale);
    CHECK(p5 >= 1.0 - kUniformMixEps - 1e-6);
    for (uint64_t v = 0; v < 16; ++v)
        CHECK(static_cast<double>(d.interval(v).width()) >=
              kUniformMixEps / 16.0 * static_cast<double>(kProbScale) * 0.99);
}

TEST_CASE("laplace tail mass folds into the boundary values") {
    auto tr = ValueTransform::identity();
    auto d = QuantizedDistribution::laplace({-50.0, 1.0}, SymbolAlphabet{7}, tr);
    // nearly all mass lands on value 0
    CHECK(static_cast<double>(d.interval(0).width()) / static_cast<double>(kProbScale) >
          1.0 - kUniformMixEps - 1e-6);
    auto du = QuantizedDistribution::laplace({1e9, 1.0}, SymbolAlphabet{7}, tr);
    CHECK(static_cast<double>(du.interval(7).width()) / static_cast<double>(kProbScale) >
          1.0 - kUniformMixEps - 1e-6);
}

TEST_CASE("laplace rejects non-finite parameters and clamps tiny b") {
    auto tr = ValueTransform::identity();
    CHECK_THROWS_AS(QuantizedDistribution::laplace({std::nan(""), 1.0}, SymbolAlphabet{3}, tr),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        QuantizedDistribution::laplace({0.0, std::numeric_limits<double>::infinity()},
                                       SymbolAlphabet{3}, tr),
        std::invalid_argument);
    auto d = QuantizedDistribution::laplace({1.0, 1e-12}, SymbolAlphabet{3}, tr);
    check_tiling(d);  // b clamped to the minimum scale
}

TEST_CASE("laplace under the log1p transform stays a valid tiling") {
    auto tr = ValueTransform::log1p_standardized(2.0, 1.5);
    for (double mu : {-3.0, 0.0, 2.5}) {
        for (double b : {1e-4, 0.2, 50.0}) {
            auto d = QuantizedDistribution::laplace({mu, b}, SymbolAlphabet{999}, tr);
            CHECK(d.cum(0) == 0);
            CHECK(d.cum(1000) == kProbScale);
            Rng rng(17);
            uint64_t prev_checked = 0;
            for (int i = 0; i < 200; ++i) {
                const uint64_t v = rng.next_below(1000);
                CHECK(d.interval(v).width() >= 1);
                prev_checked += d.interval(v).width();
            }
            CHECK(prev_checked > 0);
        }
    }
}

TEST_CASE("invert is the left inverse of interval everywhere") {
    Rng rng(21);
    auto tr = ValueTransform::identity();
    auto check_inverse = [&](const QuantizedDistribution& d) {
        for (int i = 0; i < 500; ++i) {
            const uint64_t v = rng.next_below(d.alphabet_size());
            CHECK(d.invert(d.interval(v).cum_lo) == v);
        }
    };
    check_inverse(QuantizedDistribution::uniform(SymbolAlphabet{100000}));
    check_inverse(QuantizedDistribution::laplace({30.0, 2.0}, SymbolAlphabet{100000}, tr));
    std::vector<uint64_t> data;
    for (int i = 0; i < 400; ++i) data.push_back(rng.next_below(512));
    check_inverse(QuantizedDistribution::histogram(data, SymbolAlphabet{511}));
}

TEST_CASE("laplace invert agrees with a linear scan oracle") {
    Rng rng(31);
    auto tr = ValueTransform::identity();
    auto d = QuantizedDistribution::laplace({100.0, 12.0}, SymbolAlphabet{4095}, tr);
    for (int i = 0; i < 200; ++i) {
        const uint64_t target = rng.next_u64() >> 16;  // [0, 2^48)
        uint64_t expect = 0;
        while (d.cum(expect + 1) <= target) ++expect;  // linear scan
        CHECK(d.invert(target) == expect);
    }
}

TEST_CASE("coding data under its own histogram approaches the empirical entropy") {
    Rng rng(61);
    const uint64_t v_max = 63;
    std::vector<uint64_t> data(20000);
    for (auto& v : data) v = rng.next_below(8) * 8 + rng.next_below(3);  // skewed support
    auto dist = QuantizedDistribution::histogram(data, SymbolAlphabet{v_max});

    // oracle: cross-entropy of the data under the smoothed model
    std::vector<uint64_t> counts(v_max + 1, 0);
    for (uint64_t v : data) ++counts[v];
    const double total = static_cast<double>(data.size() + v_max + 1);
    double cross = 0.0, empirical = 0.0;
    for (uint64_t v = 0; v <= v_max; ++v) {
        const double q = static_cast<double>(counts[v] + 1) / total;
        if (counts[v] > 0) {
            const double p = static_cast<double>(counts[v]) / static_cast<double>(data.size());
            cross -= p * std::log2(q);
            empirical -= p * std::log2(p);
        }
    }

    RangeEncoder enc;
    for (uint64_t v : data) enc.encode(dist.interval(v));
    const double bits = 8.0 * static_cast<double>(enc.finish().bytes.size());
    const double n = static_cast<double>(data.size());
    CHECK(bits <= (cross + 0.01) * n + 64.0);
    CHECK(bits >= empirical * n);  // entropy is the floor
}

TEST_CASE("laplace_nll analytic values") {
    CHECK(laplace_nll({2.0, 1.0}, 2.0) == doctest::Approx(std::log(2.0)));
    CHECK(laplace_nll({2.0, 1.0}, 3.0) == doctest::Approx(std::log(2.0) + 1.0));
}

TEST_CASE("transform forward basics") {
    auto tr = ValueTransform::log1p_standardized(0.0, 1.0);
    CHECK(tr.forward(0.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(ValueTransform::log1p_standardized(0.0, 0.0), std::invalid_argument);
}

TEST_SUITE_END();
