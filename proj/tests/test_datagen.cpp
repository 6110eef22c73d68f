#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>

#include "ntc/datagen.hpp"
#include "ntc/rng.hpp"

using namespace ntc;

namespace {

// independent distance oracle: Floyd-Warshall over nodes
std::vector<uint32_t> fw_distances(const Topology& t) {
    const uint32_t n = t.num_nodes();
    const uint32_t inf = 1u << 20;
    std::vector<uint32_t> dist(static_cast<size_t>(n) * n, inf);
    for (uint32_t i = 0; i < n; ++i) dist[i * n + i] = 0;
    for (const Link& l : t.links()) dist[l.tail * n + l.head] = 1;
    for (uint32_t k = 0; k < n; ++k)
        for (uint32_t i = 0; i < n; ++i)
            for (uint32_t j = 0; j < n; ++j)
                dist[i * n + j] = std::min(dist[i * n + j], dist[i * n + k] + dist[k * n + j]);
    return dist;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v.empty() ? 0.0 : (v.size() % 2 ? v[v.size() / 2]
                                           : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]));
}

}  // namespace

TEST_SUITE_BEGIN("datagen");

TEST_CASE("shortest paths on a two-node pair") {
    Topology t(2, {{0, 1}, {1, 0}});
    auto paths = shortest_paths(t);
    CHECK(paths[0 * 2 + 1] == std::vector<uint32_t>{0});  // link (0,1)
    CHECK(paths[1 * 2 + 0] == std::vector<uint32_t>{1});  // link (1,0)
}

TEST_CASE("shortest paths around a directed triangle") {
    Topology t(3, {{0, 1}, {1, 2}, {2, 0}});
    auto paths = shortest_paths(t);
    // 0 -> 2 must take (0,1) then (1,2)
    CHECK(paths[0 * 3 + 2] == std::vector<uint32_t>{0, 1});
}

TEST_CASE("ties resolve to the lexicographically smallest node sequence") {
    // two equal-hop routes 0->1->3 and 0->2->3; (3,0) closes the cycle
    Topology t(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {3, 0}});
    auto paths = shortest_paths(t);
    const auto& path = paths[0 * 4 + 3];
    REQUIRE(path.size() == 2);
    CHECK(t.link(path[0]).head == 1);  // via node 1, not node 2
}

TEST_CASE("unreachable pairs are an error") {
    Topology t(2, {{0, 1}});
    CHECK_THROWS_AS(shortest_paths(t), std::runtime_error);
}

TEST_CASE("nsfnet hop counts match an independent oracle") {
    Topology t = Topology::nsfnet();
    auto paths = shortest_paths(t);
    auto dist = fw_distances(t);
    const uint32_t n = t.num_nodes();
    uint32_t max_hops = 0;
    for (uint32_t s = 0; s < n; ++s)
        for (uint32_t d = 0; d < n; ++d) {
            if (s == d) continue;
            CHECK(paths[s * n + d].size() == dist[s * n + d]);
            max_hops = std::max<uint32_t>(max_hops, dist[s * n + d]);
        }
    CHECK(max_hops >= 2);
    CHECK(max_hops <= 5);
}

TEST_CASE("generation is deterministic in the seed") {
    SynthConfig cfg;
    cfg.bins = 50;
    cfg.seed = 12;
    TrafficDataset a = gen_synthetic(cfg);
    TrafficDataset b = gen_synthetic(cfg);
    CHECK(a.values == b.values);
    cfg.seed = 13;
    CHECK(gen_synthetic(cfg).values != a.values);
}

TEST_CASE("fully correlated noiseless flows make all link pairs correlate") {
    SynthConfig cfg;
    cfg.bins = 120;
    cfg.spatial_pct = 100;
    cfg.temporal_pct = 100;
    cfg.noise_std = 0.0;
    cfg.seed = 5;
    TrafficDataset d = gen_synthetic(cfg);
    CorrelationReport rep = correlation_report(d);
    double min_defined = 1.0;
    for (uint32_t i = 0; i < rep.num_links; ++i)
        for (uint32_t j = i + 1; j < rep.num_links; ++j) {
            const double r = rep.pearson_at(i, j);
            if (!std::isnan(r)) min_defined = std::min(min_defined, std::fabs(r));
        }
    CHECK(min_defined >= 0.99);
}

TEST_CASE("spatial correlation shifts the pearson distribution") {
    SynthConfig lo, hi;
    lo.bins = hi.bins = 240;
    lo.seed = hi.seed = 7;
    lo.spatial_pct = 0;
    hi.spatial_pct = 100;
    const double med_lo = correlation_report(gen_synthetic(lo)).median_abs_pearson;
    const double med_hi = correlation_report(gen_synthetic(hi)).median_abs_pearson;
    CHECK(med_lo < med_hi);
}

TEST_CASE("median pearson is nondecreasing in spatial percent across seeds") {
    const uint32_t levels[] = {0, 30, 60, 100};
    double agg[4];
    for (int li = 0; li < 4; ++li) {
        std::vector<double> meds;
        for (uint64_t seed = 1; seed <= 5; ++seed) {
            SynthConfig cfg;
            cfg.bins = 200;
            cfg.seed = seed;
            cfg.spatial_pct = levels[li];
            meds.push_back(correlation_report(gen_synthetic(cfg)).median_abs_pearson);
        }
        agg[li] = median_of(meds);
    }
    int inversions = 0;
    for (int li = 0; li + 1 < 4; ++li)
        if (agg[li + 1] < agg[li]) ++inversions;
    CHECK(inversions <= 1);
    CHECK(agg[3] > agg[0]);
}

TEST_CASE("ar noise raises the drift statistic") {
    SynthConfig stationary, noisy;
    stationary.bins = noisy.bins = 600;
    stationary.seed = noisy.seed = 19;
    stationary.spatial_pct = noisy.spatial_pct = 60;
    stationary.temporal_pct = 100;
    noisy.temporal_pct = 0;
    const auto rep_st = correlation_report(gen_synthetic(stationary));
    const auto rep_no = correlation_report(gen_synthetic(noisy));
    CHECK(rep_no.median_mean_drift > rep_st.median_mean_drift);
}

TEST_CASE("link series are the rounded sums of their flows") {
    SynthConfig cfg;
    cfg.bins = 40;
    cfg.seed = 3;
    cfg.spatial_pct = 60;
    cfg.temporal_pct = 60;
    TrafficDataset d = gen_synthetic(cfg);
    FlowSet flows = gen_flows(cfg);
    const uint32_t L = d.num_links();
    std::vector<double> acc(d.values.size(), 0.0);
    for (size_t f = 0; f < flows.paths.size(); ++f)
        for (uint32_t link : flows.paths[f])
            for (uint64_t t = 0; t < cfg.bins; ++t) acc[t * L + link] += flows.signals[f][t];
    for (size_t i = 0; i < acc.size(); ++i)
        CHECK(d.values[i] == static_cast<uint64_t>(std::llround(std::max(0.0, acc[i]))));
}

TEST_CASE("correlation report on handmade data") {
    TrafficDataset d;
    d.topology = Topology(4, {{0, 1}, {1, 2}, {2, 3}});
    d.num_bins = 6;
    // link2 duplicates link0; link1 constant
    d.values = {
        5, 9, 5,  8, 9, 8,  2, 9, 2,  7, 9, 7,  1, 9, 1,  4, 9, 4,
    };
    d.set_v_max_from_values();
    CorrelationReport rep = correlation_report(d);
    CHECK(rep.undefined_links == 1);
    CHECK(rep.pearson_at(0, 2) == doctest::Approx(1.0));
    CHECK(rep.pearson_at(0, 0) == doctest::Approx(1.0));
    CHECK(std::isnan(rep.pearson_at(0, 1)));

    TrafficDataset tiny = d;
    tiny.num_bins = 3;
    tiny.values.resize(9);
    CHECK_THROWS_AS(correlation_report(tiny), std::invalid_argument);
}

TEST_CASE("config validation") {
    SynthConfig cfg;
    cfg.spatial_pct = 101;
    CHECK_THROWS_AS(gen_synthetic(cfg), std::invalid_argument);
}

TEST_SUITE_END();
