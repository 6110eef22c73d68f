#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "ntc/bench.hpp"
#include "ntc/datagen.hpp"
#include "ntc/ingest.hpp"
#include "ntc/neural.hpp"
#include "ntc/pipeline.hpp"
#include "ntc/serial.hpp"

namespace py = pybind11;
using namespace ntc;

namespace {

std::vector<std::vector<uint64_t>> values_matrix(const TrafficDataset& d) {
    std::vector<std::vector<uint64_t>> rows(d.num_bins);
    for (uint64_t t = 0; t < d.num_bins; ++t) {
        rows[t].resize(d.num_links());
        for (uint32_t l = 0; l < d.num_links(); ++l) rows[t][l] = d.at(t, l);
    }
    return rows;
}

TrafficDataset dataset_from_rows(const Topology& topo,
                                 const std::vector<std::vector<uint64_t>>& rows,
                                 double bin_duration_s) {
    TrafficDataset d;
    d.topology = topo;
    d.num_bins = rows.size();
    d.bin_duration_s = bin_duration_s;
    for (const auto& row : rows) {
        if (row.size() != topo.num_links())
            throw std::invalid_argument("row length does not match the link count");
        d.values.insert(d.values.end(), row.begin(), row.end());
    }
    d.set_v_max_from_values();
    d.validate();
    return d;
}

Method parse_method(const std::string& name) {
    auto m = method_from_name(name);
    if (!m) throw std::invalid_argument("unknown method: " + name);
    return *m;
}

py::bytes compress_py(const TrafficDataset& d, const std::string& method_name,
                      const PredictorModel* model, const std::string& mode_name,
                      uint32_t w_past) {
    const Method method = parse_method(method_name);
    Mode mode = method == Method::rnn ? Mode::single_link : Mode::network_wide;
    if (mode_name == "single") mode = Mode::single_link;
    if (mode_name == "network") mode = Mode::network_wide;
    std::shared_ptr<const PredictorModel> shared;
    if (model != nullptr) shared = std::make_shared<PredictorModel>(*model);
    auto bytes = compress(d, make_method_spec(method, mode, &d, shared, w_past));
    return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

TrafficDataset decompress_py(const py::bytes& blob, const PredictorModel* model) {
    std::string_view view = blob;
    std::span<const uint8_t> bytes(reinterpret_cast<const uint8_t*>(view.data()), view.size());
    return decompress(bytes, model);
}

}  // namespace

PYBIND11_MODULE(ntc, m) {
    m.doc() = "lossless compressor for multi-link network traffic time series";

    py::class_<Topology>(m, "Topology")
        .def(py::init([](uint32_t nodes, const std::vector<std::pair<uint32_t, uint32_t>>& links) {
                 std::vector<Link> ls;
                 for (auto [a, b] : links) ls.push_back({a, b});
                 return Topology(nodes, std::move(ls));
             }),
             py::arg("num_nodes"), py::arg("links"))
        .def_static("nsfnet", &Topology::nsfnet)
        .def_static("load", &Topology::load)
        .def("save", &Topology::save)
        .def_property_readonly("num_nodes", &Topology::num_nodes)
        .def_property_readonly("num_links", &Topology::num_links)
        .def("links",
             [](const Topology& t) {
                 std::vector<std::pair<uint32_t, uint32_t>> out;
                 for (const Link& l : t.links()) out.push_back({l.tail, l.head});
                 return out;
             })
        .def("__eq__", [](const Topology& a, const Topology& b) { return a == b; });

    py::class_<TrafficDataset>(m, "TrafficDataset")
        .def(py::init(&dataset_from_rows), py::arg("topology"), py::arg("rows"),
             py::arg("bin_duration_s") = 300.0)
        .def_property_readonly("num_bins", [](const TrafficDataset& d) { return d.num_bins; })
        .def_property_readonly("num_links", &TrafficDataset::num_links)
        .def_property_readonly("v_max", [](const TrafficDataset& d) { return d.v_max; })
        .def_property_readonly("topology", [](const TrafficDataset& d) { return d.topology; })
        .def("values", &values_matrix)
        .def("save_csv",
             [](const TrafficDataset& d, const std::string& path) { save_csv(d, path); })
        .def("__eq__", [](const TrafficDataset& a, const TrafficDataset& b) {
            return a.topology == b.topology && a.values == b.values && a.num_bins == b.num_bins;
        });

    py::class_<PredictorModel>(m, "PredictorModel")
        .def_static("load", &PredictorModel::load)
        .def("save", &PredictorModel::save)
        .def_property_readonly("kind",
                               [](const PredictorModel& m_) {
                                   return m_.kind == PredictorModel::Kind::network_stgnn
                                              ? "stgnn"
                                              : "rnn";
                               })
        .def_property_readonly("hidden", [](const PredictorModel& m_) { return m_.hidden; })
        .def_property_readonly("w_past", [](const PredictorModel& m_) { return m_.w_past; })
        .def_property_readonly("content_hash",
                               [](const PredictorModel& m_) { return m_.content_hash; });

    m.def(
        "load_csv",
        [](const std::string& path, const Topology& topo) { return load_csv(path, topo).data; },
        py::arg("path"), py::arg("topology"));

    m.def(
        "gen_synthetic",
        [](uint32_t spatial_pct, uint32_t temporal_pct, uint64_t bins, uint64_t seed,
           double noise_std, const Topology* topology) {
            SynthConfig cfg;
            if (topology != nullptr) cfg.topology = *topology;
            cfg.spatial_pct = spatial_pct;
            cfg.temporal_pct = temporal_pct;
            cfg.bins = bins;
            cfg.seed = seed;
            cfg.noise_std = noise_std;
            return gen_synthetic(cfg);
        },
        py::arg("spatial_pct") = 100, py::arg("temporal_pct") = 100, py::arg("bins") = 1004,
        py::arg("seed") = 1, py::arg("noise_std") = 3.0, py::arg("topology") = nullptr);

    m.def(
        "train",
        [](const TrafficDataset& data, const std::string& kind, uint32_t epochs, uint32_t hidden,
           uint32_t w_past, uint32_t masks_per_window, double learning_rate, uint32_t batch_size,
           double split_fraction, uint64_t seed) {
            TrainConfig cfg;
            cfg.epochs = epochs;
            cfg.hidden_size = hidden;
            cfg.w_past = w_past;
            cfg.masks_per_window = masks_per_window;
            cfg.learning_rate = learning_rate;
            cfg.batch_size = batch_size;
            cfg.split_fraction = split_fraction;
            cfg.seed = seed;
            const auto k = kind == "stgnn" ? PredictorModel::Kind::network_stgnn
                                           : PredictorModel::Kind::single_link_rnn;
            return train(data, cfg, k);
        },
        py::arg("dataset"), py::arg("kind") = "stgnn", py::arg("epochs") = 10,
        py::arg("hidden") = 64, py::arg("w_past") = 4, py::arg("masks_per_window") = 8,
        py::arg("learning_rate") = 1e-3, py::arg("batch_size") = 32,
        py::arg("split_fraction") = 0.7, py::arg("seed") = 1);

    m.def("compress", &compress_py, py::arg("dataset"), py::arg("method") = "stgnn",
          py::arg("model") = nullptr, py::arg("mode") = "", py::arg("w_past") = 4);
    m.def("decompress", &decompress_py, py::arg("container"), py::arg("model") = nullptr);

    m.def("compression_ratio", &compression_ratio);
    m.def("pearson", &pearson);

    m.def("correlation_report", [](const TrafficDataset& d) {
        CorrelationReport rep = correlation_report(d);
        py::dict out;
        out["median_abs_pearson"] = rep.median_abs_pearson;
        out["undefined_links"] = rep.undefined_links;
        out["median_mean_drift"] = rep.median_mean_drift;
        out["median_var_drift"] = rep.median_var_drift;
        return out;
    });

    m.def("raw_matrix_bytes", &raw_matrix_bytes);
}
