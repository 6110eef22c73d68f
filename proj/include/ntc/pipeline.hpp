#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ntc/coder.hpp"
#include "ntc/core.hpp"
#include "ntc/models.hpp"
#include "ntc/neural.hpp"

namespace ntc {

enum class Method : uint8_t {
    uniform = 0,
    static_ac = 1,
    adaptive_ac = 2,
    rnn = 3,
    stgnn = 4,
};

enum class Mode : uint8_t { single_link = 0, network_wide = 1 };

std::string method_name(Method m);
std::optional<Method> method_from_name(const std::string& name);

using CountTable = std::vector<std::pair<uint64_t, uint64_t>>;

struct MethodSpec {
    Method method = Method::adaptive_ac;
    Mode mode = Mode::network_wide;
    uint32_t w_past = 4;  // baselines; neural methods use the model's
    std::shared_ptr<const PredictorModel> model;
    // static_ac: one table (network) or one per link (single)
    std::vector<CountTable> tables;

    uint32_t effective_w_past() const { return model ? model->w_past : w_past; }
    void validate(uint32_t num_links) const;
};

// Fills static tables / binds the model as the method requires.
MethodSpec make_method_spec(Method method, Mode mode, const TrafficDataset* dataset,
                            std::shared_ptr<const PredictorModel> model, uint32_t w_past = 4);

// Among unknown links, the one with the smallest predicted scale;
// ties go to the lowest link id.
uint32_t select_next_link(std::span<const DistParams> predictions, const Mask& mask);

struct ContainerHeader {
    Method method = Method::uniform;
    Mode mode = Mode::network_wide;
    uint32_t num_links = 0;
    uint64_t num_bins = 0;
    uint64_t v_max = 0;
    uint32_t w_past = 0;
    double bin_duration_s = 0.0;
    uint64_t model_hash = 0;  // 0 for baselines
    Topology topology;
};

// Bin-at-a-time compressor. Bytes become available incrementally; close()
// finalizes the per-link streams and renders the container.
class StreamSession {
public:
    StreamSession(Topology topology, MethodSpec spec, uint64_t v_max,
                  double bin_duration_s = 300.0);
    ~StreamSession();
    StreamSession(StreamSession&&) noexcept;
    StreamSession& operator=(StreamSession&&) noexcept;

    // returns newly emitted byte counts per link
    std::vector<uint64_t> push_bin(std::span<const uint64_t> values);
    std::vector<uint8_t> close();

    uint64_t bins_pushed() const;
    uint64_t bytes_buffered() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

std::vector<uint8_t> compress(const TrafficDataset& dataset, const MethodSpec& spec);
TrafficDataset decompress(std::span<const uint8_t> container,
                          const PredictorModel* model = nullptr);
// header only, no stream decoding; verifies the whole-file checksum
ContainerHeader peek_container(std::span<const uint8_t> container);

// Size of the raw little-endian value matrix at the narrowest width that
// holds v_max; the uncompressed baseline for ratio accounting.
uint64_t raw_matrix_bytes(const TrafficDataset& dataset);
uint32_t value_byte_width(uint64_t v_max);
std::vector<uint8_t> raw_matrix_bytes_le(const TrafficDataset& dataset);

}  // namespace ntc
