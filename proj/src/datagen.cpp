#include "ntc/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ntc/rng.hpp"

namespace ntc {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// seed stream tags
constexpr uint64_t kTagSpatial = 0x51;
constexpr uint64_t kTagTemporal = 0x52;
constexpr uint64_t kTagMaster = 0x53;
constexpr uint64_t kTagFlowSpec = 0x1000;
constexpr uint64_t kTagFlowNoise = 0x2000000;

double rand_period(Rng& rng) { return static_cast<double>(24 + rng.next_below(73)); }  // 24..96

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<uint8_t> pick_subset(uint64_t seed, uint64_t tag, size_t total, size_t want) {
    std::vector<uint32_t> order(total);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, tag));
    for (size_t i = total; i > 1; --i) std::swap(order[i - 1], order[rng.next_below(i)]);
    std::vector<uint8_t> in(total, 0);
    for (size_t i = 0; i < want && i < total; ++i) in[order[i]] = 1;
    return in;
}

}  // namespace

void SynthConfig::validate() const {
    if (spatial_pct > 100 || temporal_pct > 100)
        throw std::invalid_argument("synth: percentages must be in [0, 100]");
    if (bins < 2) throw std::invalid_argument("synth: need at least 2 bins");
    if (noise_std < 0.0) throw std::invalid_argument("synth: negative noise std");
}

Topology SynthConfig::effective_topology() const {
    return topology.num_links() > 0 ? topology : Topology::nsfnet();
}

std::vector<std::vector<uint32_t>> shortest_paths(const Topology& topology) {
    const uint32_t n = topology.num_nodes();
    const uint32_t big = std::numeric_limits<uint32_t>::max();

    // out-neighbors sorted by node id, with the link taken
    std::vector<std::vector<std::pair<uint32_t, uint32_t>>> out(n);  // (next node, link id)
    std::vector<std::vector<uint32_t>> in(n);                        // predecessor nodes
    for (uint32_t id = 0; id < topology.num_links(); ++id) {
        const Link& l = topology.link(id);
        out[l.tail].push_back({l.head, id});
        in[l.head].push_back(l.tail);
    }
    for (auto& v : out) std::sort(v.begin(), v.end());

    std::vector<std::vector<uint32_t>> paths(static_cast<size_t>(n) * n);
    std::vector<uint32_t> dist(n);
    std::vector<uint32_t> queue;
    for (uint32_t d = 0; d < n; ++d) {
        // hop distance towards d over reversed links
        std::fill(dist.begin(), dist.end(), big);
        dist[d] = 0;
        queue.assign(1, d);
        for (size_t q = 0; q < queue.size(); ++q) {
            const uint32_t u = queue[q];
            for (uint32_t p : in[u])
                if (dist[p] == big) {
                    dist[p] = dist[u] + 1;
                    queue.push_back(p);
                }
        }
        for (uint32_t s = 0; s < n; ++s) {
            if (s == d) continue;
            if (dist[s] == big)
                throw std::runtime_error("shortest_paths: node " + std::to_string(d) +
                                         " unreachable from " + std::to_string(s));
            // greedy forward walk; smallest next node id at each step gives
            // the lexicographically smallest node sequence
            std::vector<uint32_t>& path = paths[static_cast<size_t>(s) * n + d];
            uint32_t cur = s;
            while (cur != d) {
                for (const auto& [next, link] : out[cur]) {
                    if (dist[next] + 1 == dist[cur]) {
                        path.push_back(link);
                        cur = next;
                        break;
                    }
                }
            }
        }
    }
    return paths;
}

FlowSet gen_flows(const SynthConfig& config) {
    config.validate();
    const Topology topo = config.effective_topology();
    const uint32_t n = topo.num_nodes();
    auto paths = shortest_paths(topo);

    FlowSet flows;
    for (uint32_t s = 0; s < n; ++s)
        for (uint32_t d = 0; d < n; ++d)
            if (s != d) {
                flows.pairs.push_back({s, d});
                flows.paths.push_back(paths[static_cast<size_t>(s) * n + d]);
            }
    const size_t count = flows.pairs.size();

    const size_t master_count =
        static_cast<size_t>(std::llround(static_cast<double>(count) * config.spatial_pct / 100.0));
    const size_t ar_count = static_cast<size_t>(
        std::llround(static_cast<double>(count) * (100.0 - config.temporal_pct) / 100.0));
    const auto is_master = pick_subset(config.seed, kTagSpatial, count, master_count);
    const auto has_ar = pick_subset(config.seed, kTagTemporal, count, ar_count);

    FlowSignalSpec master;
    {
        Rng rng(derive_seed(config.seed, kTagMaster));
        master.period_bins = rand_period(rng);
        master.phase_bins = rng.next_double() * master.period_bins;
        master.noise_std = config.noise_std;
    }

    flows.specs.resize(count);
    flows.signals.resize(count);
    for (size_t f = 0; f < count; ++f) {
        FlowSignalSpec spec = master;
        if (!is_master[f]) {
            Rng rng(derive_seed(config.seed, kTagFlowSpec + f));
            spec.period_bins = rand_period(rng);
            spec.phase_bins = rng.next_double() * spec.period_bins;
        }
        if (has_ar[f]) spec.ar_noise = ArNoiseSpec{};

        Rng noise(derive_seed(config.seed, kTagFlowNoise + f));
        std::vector<double>& sig = flows.signals[f];
        sig.resize(config.bins);
        std::vector<double> ar_state(spec.ar_noise ? spec.ar_noise->coeffs.size() : 0, 0.0);
        for (uint64_t t = 0; t < config.bins; ++t) {
            double v = spec.amplitude *
                           std::sin(kTwoPi * (static_cast<double>(t) + spec.phase_bins) /
                                    spec.period_bins) +
                       spec.amplitude;
            if (spec.noise_std > 0.0) v += noise.next_gaussian() * spec.noise_std;
            if (spec.ar_noise) {
                const ArNoiseSpec& ar = *spec.ar_noise;
                double x = noise.next_gaussian() * ar.innovation_std;
                for (size_t i = 0; i < ar.coeffs.size(); ++i) x += ar.coeffs[i] * ar_state[i];
                for (size_t i = ar_state.size(); i > 1; --i) ar_state[i - 1] = ar_state[i - 2];
                if (!ar_state.empty()) ar_state[0] = x;
                v += x;
            }
            sig[t] = std::max(0.0, v);
        }
        flows.specs[f] = std::move(spec);
    }
    return flows;
}

TrafficDataset gen_synthetic(const SynthConfig& config) {
    const Topology topo = config.effective_topology();
    FlowSet flows = gen_flows(config);

    TrafficDataset data;
    data.topology = topo;
    data.num_bins = config.bins;
    const uint32_t L = topo.num_links();
    std::vector<double> acc(config.bins * L, 0.0);
    for (size_t f = 0; f < flows.paths.size(); ++f)
        for (uint32_t link : flows.paths[f])
            for (uint64_t t = 0; t < config.bins; ++t)
                acc[t * L + link] += flows.signals[f][t];
    data.values.resize(acc.size());
    for (size_t i = 0; i < acc.size(); ++i)
        data.values[i] = static_cast<uint64_t>(std::llround(std::max(0.0, acc[i])));
    data.set_v_max_from_values();
    data.bin_duration_s = 300.0;
    return data;
}

CorrelationReport correlation_report(const TrafficDataset& dataset) {
    if (dataset.num_bins < 4) throw std::invalid_argument("correlation_report: need T >= 4");
    const uint32_t L = dataset.num_links();
    const uint64_t T = dataset.num_bins;
    CorrelationReport rep;
    rep.num_links = L;
    rep.pearson.assign(static_cast<size_t>(L) * L, std::numeric_limits<double>::quiet_NaN());

    std::vector<std::vector<double>> series(L, std::vector<double>(T));
    std::vector<uint8_t> constant(L, 0);
    for (uint32_t l = 0; l < L; ++l) {
        for (uint64_t t = 0; t < T; ++t) series[l][t] = static_cast<double>(dataset.at(t, l));
        constant[l] = std::all_of(series[l].begin(), series[l].end(),
                                  [&](double v) { return v == series[l][0]; });
        if (constant[l]) ++rep.undefined_links;
    }

    std::vector<double> abs_defined;
    for (uint32_t i = 0; i < L; ++i) {
        if (!constant[i]) rep.pearson[i * L + i] = 1.0;
        for (uint32_t j = i + 1; j < L; ++j) {
            if (constant[i] || constant[j]) continue;
            const double r = pearson(series[i], series[j]);
            rep.pearson[i * L + j] = r;
            rep.pearson[j * L + i] = r;
            abs_defined.push_back(std::fabs(r));
        }
    }
    rep.median_abs_pearson = median(abs_defined);

    rep.mean_drift.resize(L);
    rep.var_drift.resize(L);
    const uint64_t half = T / 2;
    std::vector<double> mean_drifts, var_drifts;
    for (uint32_t l = 0; l < L; ++l) {
        auto stats = [&](uint64_t from, uint64_t to) {
            double m = 0.0;
            for (uint64_t t = from; t < to; ++t) m += series[l][t];
            m /= static_cast<double>(to - from);
            double v = 0.0;
            for (uint64_t t = from; t < to; ++t) {
                const double d = series[l][t] - m;
                v += d * d;
            }
            v /= static_cast<double>(to - from);
            return std::pair{m, v};
        };
        const auto [m1, v1] = stats(0, half);
        const auto [m2, v2] = stats(half, T);
        const auto [mf, vf] = stats(0, T);
        rep.mean_drift[l] = std::fabs(m1 - m2) / (std::sqrt(vf) + 1e-9);
        rep.var_drift[l] = std::fabs(v1 - v2) / (vf + 1e-9);
        if (!constant[l]) {
            mean_drifts.push_back(rep.mean_drift[l]);
            var_drifts.push_back(rep.var_drift[l]);
        }
    }
    rep.median_mean_drift = median(mean_drifts);
    rep.median_var_drift = median(var_drifts);
    return rep;
}

}  // namespace ntc
