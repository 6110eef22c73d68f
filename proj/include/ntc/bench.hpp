#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ntc/core.hpp"
#include "ntc/neural.hpp"

namespace ntc {

// External DEFLATE tool; overridable through NTC_DEFLATE_TOOL.
inline constexpr const char* kDeflateToolEnv = "NTC_DEFLATE_TOOL";
inline constexpr const char* kDefaultDeflateTool = "gzip";

struct DeflateResult {
    bool ok = false;
    uint64_t bytes = 0;
};

// Compresses the payload through the external tool at its default level.
DeflateResult deflate_external(std::span<const uint8_t> payload);
std::string deflate_tool_description();  // "<tool> (<first version line>)"

struct BenchRow {
    std::string method;
    bool available = true;
    uint64_t bytes = 0;
    double cr = 0.0;
    std::optional<double> improvement_vs_deflate_pct;
    std::optional<double> mean_bin_latency_s;  // network methods only
    double total_s = 0.0;                      // wall clock, non-deterministic
    std::string note;
};

struct BenchReport {
    uint64_t uncompressed_bytes = 0;
    std::string deflate_tool;
    std::vector<BenchRow> rows;

    const BenchRow* find(const std::string& method) const;
};

struct BenchConfig {
    // subset of {uniform, static_ac, adaptive_ac, rnn, stgnn, deflate}
    std::vector<std::string> methods{"uniform", "static_ac", "adaptive_ac",
                                     "rnn",     "stgnn",     "deflate"};
    std::shared_ptr<const PredictorModel> rnn_model;
    std::shared_ptr<const PredictorModel> stgnn_model;
    uint32_t w_past = 4;  // baselines
    bool per_bin_deflate = false;
};

BenchReport bench_run(const TrafficDataset& dataset, const BenchConfig& config);

// schema: method,bytes,cr,improvement_vs_deflate_pct,mean_bin_latency_s,total_s
// (wall-clock columns are not deterministic; '#' lines carry metadata)
std::string bench_csv(const BenchReport& report);
std::string bench_table(const BenchReport& report);

}  // namespace ntc
