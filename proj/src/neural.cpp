#include "ntc/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ntc/ingest.hpp"
#include "ntc/rng.hpp"
#include "ntc/serial.hpp"

namespace ntc {

namespace {

constexpr double kLn2 = 0.6931471805599453;

void xavier_fill(Tensor& t, Rng& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(t.rows + t.cols));
    for (double& w : t.data) w = (rng.next_double() * 2.0 - 1.0) * a;
}

struct BoundModel {
    Graph::Id embed_w, embed_b;
    Graph::Id msg_w, msg_b;
    Graph::Id gru_wx, gru_bx, gru_wh, gru_bh;
    Graph::Id ro_w1, ro_b1, ro_w2, ro_b2;
};

BoundModel bind(Graph& g, const PredictorModel& m, bool needs_grad) {
    BoundModel b;
    b.embed_w = g.leaf(m.embed_w, needs_grad);
    b.embed_b = g.leaf(m.embed_b, needs_grad);
    if (m.kind == PredictorModel::Kind::network_stgnn) {
        b.msg_w = g.leaf(m.msg_w, needs_grad);
        b.msg_b = g.leaf(m.msg_b, needs_grad);
    } else {
        b.msg_w = b.msg_b = -1;
    }
    b.gru_wx = g.leaf(m.gru_wx, needs_grad);
    b.gru_bx = g.leaf(m.gru_bx, needs_grad);
    b.gru_wh = g.leaf(m.gru_wh, needs_grad);
    b.gru_bh = g.leaf(m.gru_bh, needs_grad);
    b.ro_w1 = g.leaf(m.ro_w1, needs_grad);
    b.ro_b1 = g.leaf(m.ro_b1, needs_grad);
    b.ro_w2 = g.leaf(m.ro_w2, needs_grad);
    b.ro_b2 = g.leaf(m.ro_b2, needs_grad);
    return b;
}

std::vector<Graph::Id> bound_ids(const BoundModel& b, PredictorModel::Kind kind) {
    std::vector<Graph::Id> ids{b.embed_w, b.embed_b};
    if (kind == PredictorModel::Kind::network_stgnn) {
        ids.push_back(b.msg_w);
        ids.push_back(b.msg_b);
    }
    ids.insert(ids.end(), {b.gru_wx, b.gru_bx, b.gru_wh, b.gru_bh, b.ro_w1, b.ro_b1, b.ro_w2,
                           b.ro_b2});
    return ids;
}

Graph::Id gru_update(Graph& g, const BoundModel& b, uint32_t hidden, Graph::Id x, Graph::Id h) {
    const size_t H = hidden;
    Graph::Id x3 = g.add_rowvec(g.matmul(x, b.gru_wx), b.gru_bx);
    Graph::Id h3 = g.add_rowvec(g.matmul(h, b.gru_wh), b.gru_bh);
    Graph::Id z = g.sigmoid(g.add(g.slice_cols(x3, 0, H), g.slice_cols(h3, 0, H)));
    Graph::Id r = g.sigmoid(g.add(g.slice_cols(x3, H, H), g.slice_cols(h3, H, H)));
    Graph::Id n = g.tanh_op(
        g.add(g.slice_cols(x3, 2 * H, H), g.mul(r, g.slice_cols(h3, 2 * H, H))));
    return g.add(g.mul(g.one_minus(z), n), g.mul(z, h));
}

Graph::Id embed_bin(Graph& g, const BoundModel& b, Graph::Id features) {
    return g.tanh_op(g.add_rowvec(g.matmul(features, b.embed_w), b.embed_b));
}

// features for one bin: [transformed value or 0, known flag]
Tensor bin_features(std::span<const uint64_t> values, const uint8_t* known, uint32_t num_links,
                    const ValueTransform& transform) {
    Tensor f(num_links, 2);
    for (uint32_t l = 0; l < num_links; ++l) {
        const bool k = known == nullptr || known[l] != 0;
        f.at(l, 0) = k ? transform.forward(static_cast<double>(values[l])) : 0.0;
        f.at(l, 1) = k ? 1.0 : 0.0;
    }
    return f;
}

// Unrolls the recurrence over the given per-bin feature tensors and returns
// the readout (L x 2: mu, raw scale).
Graph::Id forward_readout(Graph& g, const BoundModel& b, const PredictorModel& m,
                          const LinkGraph* graph, std::vector<Tensor> bins) {
    const uint32_t L = static_cast<uint32_t>(bins.front().rows);
    Graph::Id h = g.leaf(Tensor(L, m.hidden));
    for (Tensor& f : bins) {
        Graph::Id feat = g.leaf(std::move(f));
        Graph::Id e = embed_bin(g, b, feat);
        Graph::Id x = e;
        if (m.kind == PredictorModel::Kind::network_stgnn) {
            // messages carry the sender's recurrent state next to its current
            // features, so a receiver sees each neighbor's innovation, not
            // just its raw value
            Graph::Id msg_in = g.concat_cols(h, e);
            Graph::Id msg = g.tanh_op(g.add_rowvec(g.matmul(msg_in, b.msg_w), b.msg_b));
            Graph::Id agg = g.neighbor_sum(msg, *graph);
            x = g.concat_cols(e, agg);
        }
        h = gru_update(g, b, m.hidden, x, h);
    }
    Graph::Id r1 = g.tanh_op(g.add_rowvec(g.matmul(h, b.ro_w1), b.ro_b1));
    return g.add_rowvec(g.matmul(r1, b.ro_w2), b.ro_b2);
}

std::vector<Tensor> stgnn_bins(const PredictorModel& m, const TrafficWindow& w) {
    if (w.w_past != m.w_past) throw std::invalid_argument("forward: window length mismatch");
    std::vector<Tensor> bins;
    bins.reserve(w.w_past + 1);
    for (uint32_t t = 0; t < w.w_past; ++t)
        bins.push_back(bin_features({&w.past[t * w.num_links], w.num_links}, nullptr,
                                    w.num_links, m.transform));
    bins.push_back(bin_features(w.label_bin, w.mask.known.data(), w.num_links, m.transform));
    return bins;
}

std::vector<Tensor> rnn_bins(const PredictorModel& m, std::span<const uint64_t> past,
                             uint32_t num_links) {
    if (past.size() != static_cast<size_t>(m.w_past) * num_links)
        throw std::invalid_argument("forward: past length mismatch");
    std::vector<Tensor> bins;
    bins.reserve(m.w_past);
    for (uint32_t t = 0; t < m.w_past; ++t)
        bins.push_back(bin_features(past.subspan(static_cast<size_t>(t) * num_links, num_links),
                                    nullptr, num_links, m.transform));
    return bins;
}

std::vector<DistParams> readout_to_params(const Tensor& out) {
    std::vector<DistParams> params(out.rows);
    for (size_t l = 0; l < out.rows; ++l) {
        params[l].mu = out.at(l, 0);
        params[l].b = softplus_value(out.at(l, 1)) + kLaplaceScaleMin;
    }
    return params;
}

// loss = mean over selected links of the Laplace NLL in transformed space
Graph::Id nll_loss(Graph& g, Graph::Id readout, const Tensor& targets,
                   std::vector<uint8_t> selected) {
    Graph::Id mu = g.slice_cols(readout, 0, 1);
    Graph::Id braw = g.slice_cols(readout, 1, 1);
    Graph::Id b = g.add_const(g.softplus(braw), kLaplaceScaleMin);
    Graph::Id t = g.leaf(targets);
    Graph::Id diff = g.abs_op(g.sub(t, mu));
    Graph::Id nll = g.add(g.add_const(g.log_op(b), kLn2), g.mul(diff, g.reciprocal(b)));
    return g.masked_mean(nll, std::move(selected));
}

struct Adam {
    std::vector<Tensor> m, v;
    int64_t t = 0;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    void init(const std::vector<Tensor*>& params) {
        for (Tensor* p : params) {
            m.emplace_back(p->rows, p->cols);
            v.emplace_back(p->rows, p->cols);
        }
    }

    void step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads, double lr) {
        ++t;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (size_t i = 0; i < params.size(); ++i) {
            Tensor& p = *params[i];
            const Tensor& gr = grads[i];
            for (size_t j = 0; j < p.size(); ++j) {
                const double gj = gr.data[j];
                m[i].data[j] = beta1 * m[i].data[j] + (1.0 - beta1) * gj;
                v[i].data[j] = beta2 * v[i].data[j] + (1.0 - beta2) * gj * gj;
                p.data[j] -= lr * (m[i].data[j] / bc1) / (std::sqrt(v[i].data[j] / bc2) + eps);
            }
        }
    }
};

Tensor transformed_targets(const PredictorModel& m, std::span<const uint64_t> label,
                           uint32_t num_links) {
    Tensor t(num_links, 1);
    for (uint32_t l = 0; l < num_links; ++l)
        t.data[l] = m.transform.forward(static_cast<double>(label[l]));
    return t;
}

// one training/eval sample: loss node for a window (+ mask for the network kind)
Graph::Id sample_loss(Graph& g, const BoundModel& b, const PredictorModel& m,
                      const LinkGraph* graph, const TrafficDataset& data, uint64_t w_idx,
                      const Mask* mask) {
    const uint32_t L = data.num_links();
    if (m.kind == PredictorModel::Kind::network_stgnn) {
        TrafficWindow w = make_window(data, w_idx, m.w_past, *mask);
        Graph::Id ro = forward_readout(g, b, m, graph, stgnn_bins(m, w));
        std::vector<uint8_t> selected(L);
        for (uint32_t l = 0; l < L; ++l) selected[l] = mask->known[l] ? 0 : 1;
        return nll_loss(g, ro, transformed_targets(m, w.label_bin, L), std::move(selected));
    }
    TrafficWindow w = make_window(data, w_idx, m.w_past);
    Graph::Id ro = forward_readout(g, b, m, nullptr,
                                   rnn_bins(m, w.past, L));
    return nll_loss(g, ro, transformed_targets(m, w.label_bin, L),
                    std::vector<uint8_t>(L, 1));
}

Mask sample_mask(uint32_t num_links, uint64_t seed) {
    // Known-count drawn uniformly from {0..L-1}, then a uniform subset of
    // that size. Coding sweeps the mask from empty to almost-full within
    // every bin, so training has to cover the extremes, not just the
    // Bernoulli(0.5) bulk.
    Rng rng(seed);
    const uint32_t known_count = static_cast<uint32_t>(rng.next_below(num_links));
    std::vector<uint32_t> order(num_links);
    std::iota(order.begin(), order.end(), 0);
    for (size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.next_below(i)]);
    Mask mask(num_links);
    for (uint32_t i = 0; i < known_count; ++i) mask.known[order[i]] = 1;
    return mask;
}

uint64_t mask_seed(uint64_t train_seed, uint64_t window, uint32_t mask_idx) {
    return derive_seed(train_seed, (window << 8) | mask_idx);
}

}  // namespace

std::vector<Tensor*> PredictorModel::tensors() {
    std::vector<Tensor*> ts{&embed_w, &embed_b};
    if (kind == Kind::network_stgnn) {
        ts.push_back(&msg_w);
        ts.push_back(&msg_b);
    }
    ts.insert(ts.end(), {&gru_wx, &gru_bx, &gru_wh, &gru_bh, &ro_w1, &ro_b1, &ro_w2, &ro_b2});
    return ts;
}

std::vector<const Tensor*> PredictorModel::tensors() const {
    auto* self = const_cast<PredictorModel*>(this);
    auto ts = self->tensors();
    return {ts.begin(), ts.end()};
}

PredictorModel PredictorModel::init(Kind kind, uint32_t hidden, uint32_t w_past,
                                    ValueTransform transform, uint64_t seed) {
    if (hidden < 1) throw std::invalid_argument("model: hidden size must be >= 1");
    if (w_past < 1) throw std::invalid_argument("model: w_past must be >= 1");
    PredictorModel m;
    m.kind = kind;
    m.hidden = hidden;
    m.w_past = w_past;
    m.transform = transform;
    const uint32_t H = hidden;
    const uint32_t D = m.gru_input_width();
    m.embed_w = Tensor(2, H);
    m.embed_b = Tensor(1, H);
    if (kind == Kind::network_stgnn) {
        m.msg_w = Tensor(2 * H, H);  // input: sender state ++ sender embedding
        m.msg_b = Tensor(1, H);
    }
    m.gru_wx = Tensor(D, 3 * H);
    m.gru_bx = Tensor(1, 3 * H);
    m.gru_wh = Tensor(H, 3 * H);
    m.gru_bh = Tensor(1, 3 * H);
    m.ro_w1 = Tensor(H, H);
    m.ro_b1 = Tensor(1, H);
    m.ro_w2 = Tensor(H, 2);
    m.ro_b2 = Tensor(1, 2);
    Rng rng(seed);
    for (Tensor* t : m.tensors())
        if (t->rows > 1) xavier_fill(*t, rng);  // matrices only; biases start at zero
    m.finalize_hash();
    return m;
}

std::vector<uint8_t> PredictorModel::serialize() const {
    ByteWriter w;
    w.magic("NTCM");
    w.u32(1);  // version
    w.u8(static_cast<uint8_t>(kind));
    w.u32(hidden);
    w.u32(w_past);
    w.u8(static_cast<uint8_t>(transform.kind));
    w.f64(transform.mean);
    w.f64(transform.std_dev);
    auto ts = tensors();
    w.u32(static_cast<uint32_t>(ts.size()));
    for (const Tensor* t : ts) {
        w.u64(t->rows);
        w.u64(t->cols);
        for (double v : t->data) w.f64(v);
    }
    const uint64_t hash = fnv1a64(w.data());
    w.u64(hash);
    return w.take();
}

PredictorModel PredictorModel::deserialize(std::span<const uint8_t> bytes) {
    if (bytes.size() < 8) throw std::runtime_error("model: truncated");
    const uint64_t stored_hash = fnv1a64(bytes.first(bytes.size() - 8));
    ByteReader r(bytes);
    r.expect_magic("NTCM", "model");
    if (r.u32() != 1) throw std::runtime_error("model: unsupported version");
    PredictorModel m;
    m.kind = static_cast<Kind>(r.u8());
    if (m.kind != Kind::single_link_rnn && m.kind != Kind::network_stgnn)
        throw std::runtime_error("model: bad kind");
    m.hidden = r.u32();
    m.w_past = r.u32();
    const uint8_t tk = r.u8();
    if (tk > 1) throw std::runtime_error("model: bad transform kind");
    m.transform.kind = static_cast<ValueTransform::Kind>(tk);
    m.transform.mean = r.f64();
    m.transform.std_dev = r.f64();
    auto ts = m.tensors();
    if (r.u32() != ts.size()) throw std::runtime_error("model: tensor count mismatch");
    for (Tensor* t : ts) {
        const uint64_t rows = r.u64();
        const uint64_t cols = r.u64();
        *t = Tensor(rows, cols);
        for (double& v : t->data) v = r.f64();
        if (!t->all_finite()) throw std::runtime_error("model: non-finite weight");
    }
    if (r.u64() != stored_hash) throw std::runtime_error("model: content hash mismatch");
    m.content_hash = stored_hash;
    return m;
}

void PredictorModel::save(const std::string& path) {
    auto bytes = serialize();
    content_hash = fnv1a64(std::span(bytes).first(bytes.size() - 8));
    write_file(path, bytes);
}

PredictorModel PredictorModel::load(const std::string& path) {
    auto bytes = read_file(path);
    return deserialize(bytes);
}

uint64_t PredictorModel::finalize_hash() {
    auto bytes = serialize();
    content_hash = fnv1a64(std::span(bytes).first(bytes.size() - 8));
    return content_hash;
}

void TrainConfig::validate() const {
    if (!(split_fraction > 0.0 && split_fraction < 1.0))
        throw std::invalid_argument("train: split_fraction must be in (0, 1)");
    if (epochs < 1 || batch_size < 1) throw std::invalid_argument("train: bad epochs/batch");
    if (masks_per_window < 1 || masks_per_window > 255)
        throw std::invalid_argument("train: masks_per_window must be in [1, 255]");
    if (hidden_size < 1 || w_past < 1) throw std::invalid_argument("train: bad sizes");
    if (window_stride < 1) throw std::invalid_argument("train: bad stride");
}

std::vector<double> gru_step(const PredictorModel& model, std::span<const double> input,
                             std::span<const double> state) {
    if (input.size() != model.gru_input_width() || state.size() != model.hidden)
        throw std::invalid_argument("gru_step: shape mismatch");
    Graph g(false);
    BoundModel b = bind(g, model, false);
    Graph::Id x = g.leaf(Tensor(1, input.size(), {input.begin(), input.end()}));
    Graph::Id h = g.leaf(Tensor(1, state.size(), {state.begin(), state.end()}));
    Graph::Id out = gru_update(g, b, model.hidden, x, h);
    return g.value(out).data;
}

std::vector<DistParams> stgnn_forward(const PredictorModel& model, const TrafficWindow& window,
                                      const LinkGraph& graph) {
    if (model.kind != PredictorModel::Kind::network_stgnn)
        throw std::invalid_argument("stgnn_forward: wrong model kind");
    if (graph.num_links() != window.num_links)
        throw std::invalid_argument("stgnn_forward: graph/window mismatch");
    if (window.mask.size() != window.num_links)
        throw std::invalid_argument("stgnn_forward: mask size");
    Graph g(false);
    BoundModel b = bind(g, model, false);
    Graph::Id ro = forward_readout(g, b, model, &graph, stgnn_bins(model, window));
    return readout_to_params(g.value(ro));
}

std::vector<DistParams> rnn_forward_all(const PredictorModel& model,
                                        std::span<const uint64_t> past, uint32_t num_links) {
    if (model.kind != PredictorModel::Kind::single_link_rnn)
        throw std::invalid_argument("rnn_forward: wrong model kind");
    Graph g(false);
    BoundModel b = bind(g, model, false);
    Graph::Id ro = forward_readout(g, b, model, nullptr, rnn_bins(model, past, num_links));
    return readout_to_params(g.value(ro));
}

DistParams rnn_forward(const PredictorModel& model, std::span<const uint64_t> past_values) {
    return rnn_forward_all(model, past_values, 1).front();
}

TrafficWindow make_window(const TrafficDataset& dataset, uint64_t first_bin, uint32_t w_past) {
    return make_window(dataset, first_bin, w_past, Mask(dataset.num_links()));
}

TrafficWindow make_window(const TrafficDataset& dataset, uint64_t first_bin, uint32_t w_past,
                          Mask mask) {
    const uint32_t L = dataset.num_links();
    if (first_bin + w_past >= dataset.num_bins)
        throw std::invalid_argument("window: out of range");
    if (mask.size() != L) throw std::invalid_argument("window: mask size");
    TrafficWindow w;
    w.w_past = w_past;
    w.num_links = L;
    w.past.assign(dataset.values.begin() + static_cast<ptrdiff_t>(first_bin * L),
                  dataset.values.begin() + static_cast<ptrdiff_t>((first_bin + w_past) * L));
    w.label_bin.assign(
        dataset.values.begin() + static_cast<ptrdiff_t>((first_bin + w_past) * L),
        dataset.values.begin() + static_cast<ptrdiff_t>((first_bin + w_past + 1) * L));
    w.mask = std::move(mask);
    return w;
}

ValueTransform fit_transform(const TrafficDataset& dataset) {
    double mean = 0.0;
    for (uint64_t v : dataset.values) mean += std::log1p(static_cast<double>(v));
    mean /= static_cast<double>(dataset.values.size());
    double var = 0.0;
    for (uint64_t v : dataset.values) {
        const double d = std::log1p(static_cast<double>(v)) - mean;
        var += d * d;
    }
    var /= static_cast<double>(dataset.values.size());
    const double std_dev = std::max(std::sqrt(var), 1e-6);
    return ValueTransform::log1p_standardized(mean, std_dev);
}

PredictorModel train(const TrafficDataset& dataset, const TrainConfig& config,
                     PredictorModel::Kind kind, TrainReport* report) {
    config.validate();
    dataset.validate();
    const uint32_t L = dataset.num_links();
    const uint32_t w_past = config.w_past;
    if (dataset.num_bins < w_past + 2) throw std::invalid_argument("train: dataset too short");
    const ChronoSplit split =
        chronological_split(dataset.num_bins, w_past, config.split_fraction);

    PredictorModel model = PredictorModel::init(kind, config.hidden_size, w_past,
                                                fit_transform(dataset),
                                                derive_seed(config.seed, 0x1217));
    const LinkGraph graph = build_link_graph(dataset.topology);
    const bool network = kind == PredictorModel::Kind::network_stgnn;
    const uint32_t masks = network ? config.masks_per_window : 1;
    const uint32_t eval_masks = network ? std::min(config.masks_per_window, 4u) : 1;

    auto params = model.tensors();
    Adam adam;
    adam.init(params);
    std::vector<Tensor> grad_acc;
    for (Tensor* p : params) grad_acc.emplace_back(p->rows, p->cols);

    std::vector<uint64_t> train_windows;
    for (uint64_t w = 0; w < split.train_count; w += config.window_stride)
        train_windows.push_back(w);

    auto eval_model = [&](const PredictorModel& m) {
        double total = 0.0;
        uint64_t n = 0;
        for (uint64_t w = split.train_count; w < split.num_windows; ++w) {
            for (uint32_t k = 0; k < eval_masks; ++k) {
                Graph g(false);
                BoundModel b = bind(g, m, false);
                Mask mask = network ? sample_mask(L, mask_seed(config.seed ^ 0xE7A1, w, k))
                                    : Mask(L);
                Graph::Id loss =
                    sample_loss(g, b, m, network ? &graph : nullptr, dataset, w, &mask);
                total += g.value(loss).data[0];
                ++n;
            }
        }
        return total / static_cast<double>(n);
    };

    PredictorModel best = model;
    double best_eval = std::numeric_limits<double>::infinity();
    uint32_t best_epoch = 0;

    for (uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
        // step decay keeps late epochs from oscillating around the optimum
        double lr = config.learning_rate;
        if (epoch * 10 >= config.epochs * 8)
            lr *= 0.25;
        else if (epoch * 10 >= config.epochs * 5)
            lr *= 0.5;
        // deterministic shuffle of window order
        Rng order_rng(derive_seed(config.seed, 0xE000 + epoch));
        for (size_t i = train_windows.size(); i > 1; --i)
            std::swap(train_windows[i - 1], train_windows[order_rng.next_below(i)]);

        double epoch_loss = 0.0;
        uint64_t epoch_samples = 0;
        for (size_t batch_start = 0; batch_start < train_windows.size();
             batch_start += config.batch_size) {
            const size_t batch_end =
                std::min(batch_start + config.batch_size, train_windows.size());
            for (Tensor& gacc : grad_acc) std::fill(gacc.data.begin(), gacc.data.end(), 0.0);
            uint64_t batch_samples = 0;
            for (size_t i = batch_start; i < batch_end; ++i) {
                const uint64_t w = train_windows[i];
                for (uint32_t k = 0; k < masks; ++k) {
                    Graph g(true);
                    BoundModel b = bind(g, model, true);
                    Mask mask =
                        network ? sample_mask(L, mask_seed(config.seed, w, k)) : Mask(L);
                    Graph::Id loss =
                        sample_loss(g, b, model, network ? &graph : nullptr, dataset, w, &mask);
                    g.backward(loss);
                    epoch_loss += g.value(loss).data[0];
                    ++epoch_samples;
                    ++batch_samples;
                    auto ids = bound_ids(b, kind);
                    for (size_t p = 0; p < ids.size(); ++p) {
                        const Tensor& gr = g.gradient(ids[p]);
                        if (gr.size() == 0) continue;
                        for (size_t j = 0; j < grad_acc[p].size(); ++j)
                            grad_acc[p].data[j] += gr.data[j];
                    }
                }
            }
            const double inv = 1.0 / static_cast<double>(batch_samples);
            for (Tensor& gacc : grad_acc)
                for (double& v : gacc.data) v *= inv;
            adam.step(params, grad_acc, lr);
        }

        const double eval = eval_model(model);
        if (report != nullptr) {
            report->train_loss.push_back(epoch_loss / static_cast<double>(epoch_samples));
            report->eval_loss.push_back(eval);
        }
        if (eval < best_eval) {
            best_eval = eval;
            best = model;
            best_epoch = epoch;
        }
    }
    if (report != nullptr) report->best_epoch = best_epoch;
    best.finalize_hash();
    return best;
}

GradCheckResult gradient_check(const PredictorModel& model, const TrafficDataset& dataset,
                               uint64_t window_index, const Mask& mask, double epsilon,
                               size_t max_coords, uint64_t seed) {
    PredictorModel m = model;  // perturbed in place below
    const LinkGraph graph = build_link_graph(dataset.topology);
    const bool network = m.kind == PredictorModel::Kind::network_stgnn;

    auto loss_value = [&]() {
        Graph g(false);
        BoundModel b = bind(g, m, false);
        Graph::Id loss =
            sample_loss(g, b, m, network ? &graph : nullptr, dataset, window_index, &mask);
        return g.value(loss).data[0];
    };

    // reverse-mode gradients at the unperturbed point
    std::vector<Tensor> analytic;
    {
        Graph g(true);
        BoundModel b = bind(g, m, true);
        Graph::Id loss =
            sample_loss(g, b, m, network ? &graph : nullptr, dataset, window_index, &mask);
        g.backward(loss);
        for (Graph::Id id : bound_ids(b, m.kind)) {
            const Tensor& gr = g.gradient(id);
            analytic.push_back(gr.size() != 0 ? gr
                                              : Tensor(g.value(id).rows, g.value(id).cols));
        }
    }

    auto params = m.tensors();
    size_t total_coords = 0;
    for (Tensor* p : params) total_coords += p->size();
    std::vector<std::pair<size_t, size_t>> coords;  // (tensor, flat index)
    if (max_coords == 0 || max_coords >= total_coords) {
        for (size_t p = 0; p < params.size(); ++p)
            for (size_t j = 0; j < params[p]->size(); ++j) coords.emplace_back(p, j);
    } else {
        Rng rng(seed);
        for (size_t c = 0; c < max_coords; ++c) {
            size_t flat = rng.next_below(total_coords);
            for (size_t p = 0; p < params.size(); ++p) {
                if (flat < params[p]->size()) {
                    coords.emplace_back(p, flat);
                    break;
                }
                flat -= params[p]->size();
            }
        }
    }

    GradCheckResult result;
    result.coords_checked = coords.size();
    for (auto [p, j] : coords) {
        double& w = params[p]->data[j];
        const double saved = w;
        const double h = epsilon * std::max(1.0, std::fabs(saved));
        w = saved + h;
        const double up = loss_value();
        w = saved - h;
        const double down = loss_value();
        w = saved;
        const double fd = (up - down) / (2.0 * h);
        const double ad = analytic[p].data[j];
        const double rel = std::fabs(ad - fd) / std::max(std::fabs(ad) + std::fabs(fd), 1e-6);
        result.max_rel_error = std::max(result.max_rel_error, rel);
    }
    return result;
}

}  // namespace ntc
