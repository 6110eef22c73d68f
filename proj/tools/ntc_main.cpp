// ntc: lossless compressor for multi-link traffic time series.
// Subcommands: gen | train | compress | decompress | bench | stats

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "ntc/bench.hpp"
#include "ntc/datagen.hpp"
#include "ntc/ingest.hpp"
#include "ntc/neural.hpp"
#include "ntc/pipeline.hpp"
#include "ntc/serial.hpp"

namespace {

using namespace ntc;

Topology topo_from_arg(const std::string& arg) {
    if (arg == "nsfnet" || arg.empty()) return Topology::nsfnet();
    return Topology::load(arg);
}

int cmd_gen(const std::string& out, const std::string& topo_arg, const std::string& topo_out,
            uint32_t spatial, uint32_t temporal, uint64_t bins, uint64_t seed,
            double noise_std) {
    SynthConfig cfg;
    cfg.topology = topo_from_arg(topo_arg);
    cfg.bins = bins;
    cfg.spatial_pct = spatial;
    cfg.temporal_pct = temporal;
    cfg.seed = seed;
    cfg.noise_std = noise_std;
    TrafficDataset data = gen_synthetic(cfg);
    save_csv(data, out);
    if (!topo_out.empty()) data.topology.save(topo_out);
    std::cout << "wrote " << out << ": " << data.num_bins << " bins x " << data.num_links()
              << " links, v_max=" << data.v_max << "\n";
    return 0;
}

int cmd_train(const std::string& data_path, const std::string& topo_arg,
              const std::string& kind_name, const std::string& out, TrainConfig cfg) {
    Topology topo = topo_from_arg(topo_arg);
    LoadedDataset loaded = load_csv(data_path, topo);
    const auto kind = kind_name == "stgnn" ? PredictorModel::Kind::network_stgnn
                                           : PredictorModel::Kind::single_link_rnn;
    TrainReport report;
    PredictorModel model = train(loaded.data, cfg, kind, &report);
    model.save(out);
    for (size_t e = 0; e < report.eval_loss.size(); ++e)
        std::cout << "epoch " << e << ": train_nll=" << report.train_loss[e]
                  << " eval_nll=" << report.eval_loss[e]
                  << (report.best_epoch == e ? "  *" : "") << "\n";
    std::cout << "wrote " << out << " (hash " << std::hex << model.content_hash << std::dec
              << ")\n";
    return 0;
}

int cmd_compress(const std::string& data_path, const std::string& topo_arg,
                 const std::string& method_name_arg, const std::string& mode_name,
                 const std::string& model_path, uint32_t window, const std::string& out) {
    Topology topo = topo_from_arg(topo_arg);
    LoadedDataset loaded = load_csv(data_path, topo);
    auto method = method_from_name(method_name_arg);
    if (!method) throw std::runtime_error("unknown method: " + method_name_arg);

    std::shared_ptr<const PredictorModel> model;
    if (*method == Method::rnn || *method == Method::stgnn) {
        if (model_path.empty())
            throw std::runtime_error("method " + method_name_arg + " requires --model");
        model = std::make_shared<PredictorModel>(PredictorModel::load(model_path));
    }
    Mode mode = *method == Method::rnn ? Mode::single_link : Mode::network_wide;
    if (mode_name == "single") mode = Mode::single_link;
    if (mode_name == "network") mode = Mode::network_wide;

    MethodSpec spec = make_method_spec(*method, mode, &loaded.data, std::move(model), window);
    auto container = compress(loaded.data, spec);
    write_file(out, container);
    const uint64_t raw = raw_matrix_bytes(loaded.data);
    std::cout << "wrote " << out << ": " << container.size() << " bytes, cr="
              << compression_ratio(raw, container.size()) << " (raw " << raw << " bytes)\n";
    return 0;
}

int cmd_decompress(const std::string& container_path, const std::string& model_path,
                   const std::string& out, const std::string& topo_out) {
    auto bytes = read_file(container_path);
    ContainerHeader header = peek_container(bytes);
    std::unique_ptr<PredictorModel> model;
    if (header.method == Method::rnn || header.method == Method::stgnn) {
        if (model_path.empty())
            throw std::runtime_error("container was coded with " + method_name(header.method) +
                                     "; pass the model via --model");
        model = std::make_unique<PredictorModel>(PredictorModel::load(model_path));
    }
    TrafficDataset data = decompress(bytes, model.get());
    save_csv(data, out);
    if (!topo_out.empty()) data.topology.save(topo_out);
    std::cout << "wrote " << out << ": " << data.num_bins << " bins x " << data.num_links()
              << " links\n";
    return 0;
}

int cmd_bench(const std::string& data_path, const std::string& topo_arg,
              const std::string& methods_csv, const std::string& rnn_path,
              const std::string& stgnn_path, uint32_t window, const std::string& out,
              bool per_bin_deflate) {
    Topology topo = topo_from_arg(topo_arg);
    LoadedDataset loaded = load_csv(data_path, topo);
    BenchConfig cfg;
    cfg.w_past = window;
    cfg.per_bin_deflate = per_bin_deflate;
    if (!methods_csv.empty()) {
        cfg.methods.clear();
        std::istringstream in(methods_csv);
        std::string m;
        while (std::getline(in, m, ',')) cfg.methods.push_back(m);
    }
    if (!rnn_path.empty())
        cfg.rnn_model = std::make_shared<PredictorModel>(PredictorModel::load(rnn_path));
    if (!stgnn_path.empty())
        cfg.stgnn_model = std::make_shared<PredictorModel>(PredictorModel::load(stgnn_path));
    BenchReport report = bench_run(loaded.data, cfg);
    std::cout << bench_table(report);
    if (!out.empty()) {
        std::ofstream f(out, std::ios::trunc);
        f << bench_csv(report);
        if (!f) throw std::runtime_error("cannot write report: " + out);
        std::cout << "wrote " << out << "\n";
    }
    return 0;
}

int cmd_stats(const std::string& data_path, const std::string& topo_arg,
              const std::string& matrix_out) {
    // stats needs no real topology; a placeholder with the right link count
    // works when none is given
    LoadedDataset loaded = [&] {
        if (!topo_arg.empty()) return load_csv(data_path, topo_from_arg(topo_arg));
        return load_csv_with_placeholder_topology(data_path);
    }();
    CorrelationReport rep = correlation_report(loaded.data);
    std::cout << "links: " << rep.num_links << ", bins: " << loaded.data.num_bins << "\n";
    std::cout << "median |pearson| (defined pairs): " << rep.median_abs_pearson << "\n";
    std::cout << "links with undefined correlation (constant): " << rep.undefined_links << "\n";
    std::cout << "median mean-drift: " << rep.median_mean_drift << "\n";
    std::cout << "median variance-drift: " << rep.median_var_drift << "\n";
    if (!matrix_out.empty()) {
        std::ofstream f(matrix_out, std::ios::trunc);
        for (uint32_t i = 0; i < rep.num_links; ++i) {
            for (uint32_t j = 0; j < rep.num_links; ++j) {
                if (j > 0) f << ",";
                const double r = rep.pearson_at(i, j);
                if (std::isnan(r))
                    f << "n/a";
                else
                    f << r;
            }
            f << "\n";
        }
        if (!f) throw std::runtime_error("cannot write matrix: " + matrix_out);
        std::cout << "wrote " << matrix_out << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lossless compressor for multi-link network traffic time series"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate synthetic correlated traffic");
    std::string gen_out, gen_topo = "nsfnet", gen_topo_out;
    uint32_t gen_spatial = 100, gen_temporal = 100;
    uint64_t gen_bins = 1004, gen_seed = 1;
    double gen_noise = 3.0;
    gen->add_option("-o,--output", gen_out, "output dataset CSV")->required();
    gen->add_option("--topology", gen_topo, "topology file or 'nsfnet'");
    gen->add_option("--topology-out", gen_topo_out, "write the topology file here");
    gen->add_option("--spatial", gen_spatial, "spatial correlation percent (0-100)");
    gen->add_option("--temporal", gen_temporal, "temporal correlation percent (0-100)");
    gen->add_option("--bins", gen_bins, "number of time bins");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--noise-std", gen_noise, "per-flow gaussian noise std");

    // train
    auto* tr = app.add_subcommand("train", "train a predictor model");
    std::string tr_data, tr_topo = "nsfnet", tr_kind = "stgnn", tr_out;
    TrainConfig tr_cfg;
    tr->add_option("--data", tr_data, "dataset CSV")->required();
    tr->add_option("--topology", tr_topo, "topology file or 'nsfnet'");
    tr->add_option("--kind", tr_kind, "rnn | stgnn")->check(CLI::IsMember({"rnn", "stgnn"}));
    tr->add_option("-o,--output", tr_out, "output model file")->required();
    tr->add_option("--epochs", tr_cfg.epochs, "training epochs");
    tr->add_option("--batch", tr_cfg.batch_size, "windows per optimizer step");
    tr->add_option("--lr", tr_cfg.learning_rate, "learning rate");
    tr->add_option("--masks", tr_cfg.masks_per_window, "random masks per window (stgnn)");
    tr->add_option("--split", tr_cfg.split_fraction, "chronological train fraction");
    tr->add_option("--seed", tr_cfg.seed, "training seed");
    tr->add_option("--hidden", tr_cfg.hidden_size, "hidden state size");
    tr->add_option("--window,-w", tr_cfg.w_past, "past bins per window");

    // compress
    auto* co = app.add_subcommand("compress", "compress a dataset CSV into a container");
    std::string co_data, co_topo = "nsfnet", co_method = "stgnn", co_mode, co_model, co_out;
    uint32_t co_window = 4;
    co->add_option("--data", co_data, "dataset CSV")->required();
    co->add_option("--topology", co_topo, "topology file or 'nsfnet'");
    co->add_option("--method", co_method, "uniform | static_ac | adaptive_ac | rnn | stgnn");
    co->add_option("--mode", co_mode, "single | network (baselines; neural methods fix it)")
        ->check(CLI::IsMember({"single", "network", ""}));
    co->add_option("--model", co_model, "model file for rnn/stgnn");
    co->add_option("--window,-w", co_window, "past bins per window (baselines)");
    co->add_option("-o,--output", co_out, "output container")->required();

    // decompress
    auto* de = app.add_subcommand("decompress", "restore the CSV from a container");
    std::string de_in, de_model, de_out, de_topo_out;
    de->add_option("-i,--input", de_in, "container file")->required();
    de->add_option("--model", de_model, "model file (required for rnn/stgnn containers)");
    de->add_option("-o,--output", de_out, "output CSV")->required();
    de->add_option("--topology-out", de_topo_out, "write the embedded topology here");

    // bench
    auto* be = app.add_subcommand("bench", "compare methods on one dataset");
    std::string be_data, be_topo = "nsfnet", be_methods, be_rnn, be_stgnn, be_out;
    uint32_t be_window = 4;
    bool be_per_bin = false;
    be->add_option("--data", be_data, "dataset CSV")->required();
    be->add_option("--topology", be_topo, "topology file or 'nsfnet'");
    be->add_option("--methods", be_methods,
                   "comma list from uniform,static_ac,adaptive_ac,rnn,stgnn,deflate");
    be->add_option("--rnn-model", be_rnn, "trained rnn model");
    be->add_option("--stgnn-model", be_stgnn, "trained stgnn model");
    be->add_option("--window,-w", be_window, "past bins per window (baselines)");
    be->add_option("-o,--output", be_out, "write the CSV report here");
    be->add_flag("--per-bin-deflate", be_per_bin, "add the per-bin deflate row");

    // stats
    auto* st = app.add_subcommand("stats", "correlation and drift diagnostics");
    std::string st_data, st_topo, st_matrix;
    st->add_option("data", st_data, "dataset CSV")->required();
    st->add_option("--topology", st_topo, "topology file or 'nsfnet' (optional)");
    st->add_option("--matrix-out", st_matrix, "write the full pearson matrix CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed())
            return cmd_gen(gen_out, gen_topo, gen_topo_out, gen_spatial, gen_temporal, gen_bins,
                           gen_seed, gen_noise);
        if (tr->parsed()) return cmd_train(tr_data, tr_topo, tr_kind, tr_out, tr_cfg);
        if (co->parsed())
            return cmd_compress(co_data, co_topo, co_method, co_mode, co_model, co_window,
                                co_out);
        if (de->parsed()) return cmd_decompress(de_in, de_model, de_out, de_topo_out);
        if (be->parsed())
            return cmd_bench(be_data, be_topo, be_methods, be_rnn, be_stgnn, be_window, be_out,
                             be_per_bin);
        if (st->parsed()) return cmd_stats(st_data, st_topo, st_matrix);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
