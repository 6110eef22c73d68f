#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ntc/core.hpp"

namespace ntc {

struct ArNoiseSpec {
    std::vector<double> coeffs{0.8};  // order = coeffs.size()
    double innovation_std = 10.0;
};

struct FlowSignalSpec {
    double amplitude = 40.0;  // sine scale; shifted by +amplitude to stay nonnegative
    double period_bins = 48.0;
    double phase_bins = 0.0;
    double noise_std = 3.0;
    std::optional<ArNoiseSpec> ar_noise;
};

struct SynthConfig {
    Topology topology;  // defaults to NSFNet when left empty
    uint64_t bins = 1004;
    uint32_t spatial_pct = 100;   // share of flows using the master signal spec
    uint32_t temporal_pct = 100;  // share of flows kept free of AR noise
    uint64_t seed = 1;
    double noise_std = 3.0;

    void validate() const;
    Topology effective_topology() const;
};

// Shortest path (hop count) for every ordered node pair; ties resolved by
// the lexicographically smallest node sequence. Indexed s * N + d, empty on
// the diagonal. Throws if some pair is unreachable.
std::vector<std::vector<uint32_t>> shortest_paths(const Topology& topology);

struct FlowSet {
    std::vector<std::pair<uint32_t, uint32_t>> pairs;  // (src, dst), lexicographic
    std::vector<std::vector<uint32_t>> paths;          // link ids per flow
    std::vector<FlowSignalSpec> specs;
    std::vector<std::vector<double>> signals;  // per flow, length bins, clamped >= 0
};

FlowSet gen_flows(const SynthConfig& config);
TrafficDataset gen_synthetic(const SynthConfig& config);

struct CorrelationReport {
    uint32_t num_links = 0;
    std::vector<double> pearson;  // L x L, NaN where undefined (constant link)
    std::vector<double> mean_drift;  // per link: |first-half mean - second-half mean| / std
    std::vector<double> var_drift;   // per link: half variance gap / variance
    double median_abs_pearson = 0.0;  // over defined off-diagonal pairs
    uint32_t undefined_links = 0;
    double median_mean_drift = 0.0;
    double median_var_drift = 0.0;

    double pearson_at(uint32_t i, uint32_t j) const { return pearson[i * num_links + j]; }
};

CorrelationReport correlation_report(const TrafficDataset& dataset);

}  // namespace ntc
