#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ntc/core.hpp"
#include "ntc/models.hpp"
#include "ntc/tensor.hpp"

namespace ntc {

// Trainable predictor. Both kinds share the feature embedding, a GRU cell
// and the distribution readout; the network kind adds per-bin neighbor
// message passing over the link graph.
struct PredictorModel {
    enum class Kind : uint8_t { single_link_rnn = 1, network_stgnn = 2 };

    Kind kind = Kind::single_link_rnn;
    uint32_t hidden = 64;
    uint32_t w_past = 4;
    ValueTransform transform;

    Tensor embed_w, embed_b;  // 2 x H, 1 x H
    Tensor msg_w, msg_b;      // 2H x H, 1 x H (network kind only; input = state ++ embedding)
    Tensor gru_wx, gru_bx;    // D x 3H, 1 x 3H with D = 2H (network) or H
    Tensor gru_wh, gru_bh;    // H x 3H, 1 x 3H
    Tensor ro_w1, ro_b1;      // H x H, 1 x H
    Tensor ro_w2, ro_b2;      // H x 2, 1 x 2

    uint64_t content_hash = 0;  // of serialize() payload; set by save/load/finalize

    uint32_t gru_input_width() const {
        return kind == Kind::network_stgnn ? 2 * hidden : hidden;
    }
    std::vector<Tensor*> tensors();
    std::vector<const Tensor*> tensors() const;

    static PredictorModel init(Kind kind, uint32_t hidden, uint32_t w_past,
                               ValueTransform transform, uint64_t seed);

    std::vector<uint8_t> serialize() const;
    static PredictorModel deserialize(std::span<const uint8_t> bytes);
    void save(const std::string& path);  // updates content_hash
    static PredictorModel load(const std::string& path);
    uint64_t finalize_hash();  // recompute content_hash from current weights
};

struct TrainConfig {
    uint32_t epochs = 10;
    uint32_t batch_size = 32;
    double learning_rate = 1e-3;
    uint32_t masks_per_window = 8;   // network kind only
    double split_fraction = 0.7;     // chronological train prefix
    uint64_t seed = 1;
    uint32_t hidden_size = 64;
    uint32_t w_past = 4;
    // train on every stride-th window; consecutive windows overlap in all
    // but one bin, so striding trades little data for faster epochs
    uint32_t window_stride = 1;

    void validate() const;
};

struct TrainReport {
    std::vector<double> train_loss;  // per epoch
    std::vector<double> eval_loss;
    uint32_t best_epoch = 0;
};

// One GRU update on plain vectors; runs the same kernel the forwards use.
// Gates: z = sig(xWz + hUz + bz), r = sig(xWr + hUr + br),
//        n = tanh(xWn + r*(hUn + bhn) + bxn), h' = (1-z)*n + z*h.
std::vector<double> gru_step(const PredictorModel& model, std::span<const double> input,
                             std::span<const double> state);

// Per-link distribution parameters for the bin after the window.
// Deterministic: fixed link order, ascending neighbor summation.
std::vector<DistParams> stgnn_forward(const PredictorModel& model, const TrafficWindow& window,
                                      const LinkGraph& graph);

// Single-link recurrence over w_past known values.
DistParams rnn_forward(const PredictorModel& model, std::span<const uint64_t> past_values);
// All links at once (rows are independent; identical to per-link calls).
std::vector<DistParams> rnn_forward_all(const PredictorModel& model,
                                        std::span<const uint64_t> past, uint32_t num_links);

PredictorModel train(const TrafficDataset& dataset, const TrainConfig& config,
                     PredictorModel::Kind kind, TrainReport* report = nullptr);

struct GradCheckResult {
    double max_rel_error = 0.0;
    size_t coords_checked = 0;
};

// Central-difference check of the reverse-mode gradients on one window
// sample. checks at most max_coords weight coordinates (0 = all).
GradCheckResult gradient_check(const PredictorModel& model, const TrafficDataset& dataset,
                               uint64_t window_index, const Mask& mask, double epsilon,
                               size_t max_coords = 0, uint64_t seed = 1);

TrafficWindow make_window(const TrafficDataset& dataset, uint64_t first_bin, uint32_t w_past);
TrafficWindow make_window(const TrafficDataset& dataset, uint64_t first_bin, uint32_t w_past,
                          Mask mask);

// log1p mean/std over all dataset values; std clamped away from zero
ValueTransform fit_transform(const TrafficDataset& dataset);

}  // namespace ntc
