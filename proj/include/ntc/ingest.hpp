#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ntc/core.hpp"

namespace ntc {

// Dataset plus the time index from the CSV's t column; gaps in the index
// are what clean() repairs.
struct LoadedDataset {
    TrafficDataset data;
    std::vector<uint64_t> time_index;  // strictly increasing, one per bin
};

// CSV with header "t,link_0,...,link_{L-1}"; gzip input handled
// transparently. v_max is set to the observed maximum.
LoadedDataset load_csv(const std::string& path, const Topology& topology,
                       double bin_duration_s = 300.0);
// Same, with a chain topology fabricated from the header's link count; for
// diagnostics that need no real adjacency (stats).
LoadedDataset load_csv_with_placeholder_topology(const std::string& path,
                                                 double bin_duration_s = 300.0);
void save_csv(const TrafficDataset& dataset, const std::string& path,
              const std::vector<uint64_t>* time_index = nullptr);

enum class CleanPolicy : uint8_t { drop_bins_with_gaps = 0, fill_previous = 1 };

struct CleanReport {
    std::vector<uint64_t> missing_bins;  // t values absent from the index
    bool filled = false;
};

// drop: keep present rows (the default); fill: insert a copy of the previous
// row for every missing t. Idempotent under both policies.
std::pair<LoadedDataset, CleanReport> clean(const LoadedDataset& input, CleanPolicy policy);

struct ChronoSplit {
    uint64_t num_windows = 0;
    uint64_t train_count = 0;  // windows [0, train_count) train, rest eval

    uint64_t eval_count() const { return num_windows - train_count; }
};

// Contiguous prefix/suffix split over sliding windows; every eval label bin
// is strictly later than every train label bin.
ChronoSplit chronological_split(uint64_t num_bins, uint32_t w_past, double fraction);

}  // namespace ntc
