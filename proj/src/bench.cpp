#include "ntc/bench.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "ntc/pipeline.hpp"
#include "ntc/serial.hpp"

namespace ntc {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string deflate_tool() {
    const char* env = std::getenv(kDeflateToolEnv);
    return env != nullptr && env[0] != '\0' ? env : kDefaultDeflateTool;
}

fs::path scratch_file(const char* stem) {
    static std::atomic<uint64_t> counter{0};
    std::ostringstream name;
    name << "ntc_" << stem << "_" << ::getpid() << "_" << counter++;
    return fs::temp_directory_path() / name.str();
}

}  // namespace

DeflateResult deflate_external(std::span<const uint8_t> payload) {
    const fs::path in = scratch_file("in");
    const fs::path out = scratch_file("out");
    DeflateResult result;
    try {
        write_file(in.string(), payload);
        std::ostringstream cmd;
        cmd << "'" << deflate_tool() << "' -c < '" << in.string() << "' > '" << out.string()
            << "' 2>/dev/null";
        const int rc = std::system(cmd.str().c_str());
        if (rc == 0 && fs::exists(out)) {
            result.ok = true;
            result.bytes = fs::file_size(out);
        }
    } catch (const std::exception&) {
        result.ok = false;
    }
    std::error_code ec;
    fs::remove(in, ec);
    fs::remove(out, ec);
    return result;
}

std::string deflate_tool_description() {
    const std::string tool = deflate_tool();
    std::string version = "version unknown";
    const std::string cmd = "'" + tool + "' --version 2>/dev/null";
    if (FILE* pipe = popen(cmd.c_str(), "r")) {
        char line[256];
        if (fgets(line, sizeof line, pipe) != nullptr) {
            version.assign(line);
            while (!version.empty() && (version.back() == '\n' || version.back() == '\r'))
                version.pop_back();
        }
        pclose(pipe);
    }
    return tool + " (" + version + ")";
}

const BenchRow* BenchReport::find(const std::string& method) const {
    for (const BenchRow& r : rows)
        if (r.method == method) return &r;
    return nullptr;
}

namespace {

BenchRow run_pipeline_method(const TrafficDataset& dataset, Method method,
                             const BenchConfig& config, uint64_t raw_bytes) {
    BenchRow row;
    row.method = method_name(method);
    const bool neural = method == Method::rnn || method == Method::stgnn;
    std::shared_ptr<const PredictorModel> model;
    if (method == Method::rnn) model = config.rnn_model;
    if (method == Method::stgnn) model = config.stgnn_model;
    if (neural && !model) {
        row.available = false;
        row.note = "no model provided";
        return row;
    }
    const Mode mode = method == Method::rnn ? Mode::single_link : Mode::network_wide;
    MethodSpec spec = make_method_spec(method, mode, &dataset, std::move(model), config.w_past);

    const auto start = Clock::now();
    StreamSession session(dataset.topology, std::move(spec), dataset.v_max,
                          dataset.bin_duration_s);
    const uint32_t L = dataset.num_links();
    const uint32_t w_past = config.w_past;
    double coded_bin_seconds = 0.0;
    uint64_t coded_bins = 0;
    const uint32_t effective_w = neural ? (method == Method::rnn
                                               ? config.rnn_model->w_past
                                               : config.stgnn_model->w_past)
                                        : w_past;
    for (uint64_t t = 0; t < dataset.num_bins; ++t) {
        const auto bin_start = Clock::now();
        session.push_bin({&dataset.values[t * L], L});
        if (t >= effective_w) {
            coded_bin_seconds += seconds_since(bin_start);
            ++coded_bins;
        }
    }
    auto container = session.close();
    row.total_s = seconds_since(start);
    row.bytes = container.size();
    row.cr = compression_ratio(raw_bytes, row.bytes);
    if (neural && coded_bins > 0)
        row.mean_bin_latency_s = coded_bin_seconds / static_cast<double>(coded_bins);
    return row;
}

}  // namespace

BenchReport bench_run(const TrafficDataset& dataset, const BenchConfig& config) {
    dataset.validate();
    BenchReport report;
    report.uncompressed_bytes = raw_matrix_bytes(dataset);
    report.deflate_tool = deflate_tool_description();

    for (const std::string& name : config.methods) {
        if (name == "deflate") {
            BenchRow row;
            row.method = "deflate";
            const auto start = Clock::now();
            DeflateResult res = deflate_external(raw_matrix_bytes_le(dataset));
            row.total_s = seconds_since(start);
            if (!res.ok) {
                row.available = false;
                row.note = "external tool unavailable";
            } else {
                row.bytes = res.bytes;
                row.cr = compression_ratio(report.uncompressed_bytes, row.bytes);
            }
            report.rows.push_back(std::move(row));
            continue;
        }
        auto method = method_from_name(name);
        if (!method) throw std::invalid_argument("bench: unknown method '" + name + "'");
        report.rows.push_back(
            run_pipeline_method(dataset, *method, config, report.uncompressed_bytes));
    }

    if (config.per_bin_deflate) {
        BenchRow row;
        row.method = "deflate_per_bin";
        const uint32_t L = dataset.num_links();
        const uint32_t width = value_byte_width(dataset.v_max);
        const auto start = Clock::now();
        uint64_t total = 0;
        bool ok = true;
        for (uint64_t t = 0; t < dataset.num_bins && ok; ++t) {
            std::vector<uint8_t> bin;
            bin.reserve(static_cast<size_t>(L) * width);
            for (uint32_t l = 0; l < L; ++l) {
                const uint64_t v = dataset.at(t, l);
                for (uint32_t i = 0; i < width; ++i)
                    bin.push_back(static_cast<uint8_t>(v >> (8 * i)));
            }
            DeflateResult res = deflate_external(bin);
            ok = res.ok;
            total += res.bytes;
        }
        row.total_s = seconds_since(start);
        if (!ok) {
            row.available = false;
            row.note = "external tool unavailable";
        } else {
            row.bytes = total;
            row.cr = compression_ratio(report.uncompressed_bytes, total);
        }
        report.rows.push_back(std::move(row));
    }

    const BenchRow* deflate = report.find("deflate");
    if (deflate != nullptr && deflate->available) {
        for (BenchRow& row : report.rows)
            if (row.available && row.method != "deflate")
                row.improvement_vs_deflate_pct = (row.cr / deflate->cr - 1.0) * 100.0;
    }
    return report;
}

namespace {

std::string fmt(double v, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

}  // namespace

std::string bench_csv(const BenchReport& report) {
    std::ostringstream out;
    out << "# uncompressed_bytes=" << report.uncompressed_bytes << "\n";
    out << "# deflate_tool=" << report.deflate_tool << "\n";
    out << "# wall-clock columns (mean_bin_latency_s,total_s) are non-deterministic\n";
    out << "method,bytes,cr,improvement_vs_deflate_pct,mean_bin_latency_s,total_s\n";
    for (const BenchRow& r : report.rows) {
        out << r.method << ",";
        if (r.available) {
            out << r.bytes << "," << fmt(r.cr, 4) << ",";
            out << (r.improvement_vs_deflate_pct ? fmt(*r.improvement_vs_deflate_pct, 2) : "")
                << ",";
            out << (r.mean_bin_latency_s ? fmt(*r.mean_bin_latency_s, 6) : "") << ",";
            out << fmt(r.total_s, 3);
        } else {
            out << ",,,,";
        }
        out << "\n";
    }
    return out.str();
}

std::string bench_table(const BenchReport& report) {
    std::ostringstream out;
    out << "uncompressed: " << report.uncompressed_bytes << " bytes   deflate tool: "
        << report.deflate_tool << "\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-16s %12s %8s %10s %14s %10s\n", "method", "bytes", "cr",
                  "vs_deflate", "bin_latency_s", "total_s");
    out << line;
    for (const BenchRow& r : report.rows) {
        if (!r.available) {
            std::snprintf(line, sizeof line, "%-16s %12s %8s %10s %14s %10s  (%s)\n",
                          r.method.c_str(), "-", "-", "-", "-", "-", r.note.c_str());
            out << line;
            continue;
        }
        std::snprintf(line, sizeof line, "%-16s %12llu %8.3f %10s %14s %10.3f\n",
                      r.method.c_str(), static_cast<unsigned long long>(r.bytes), r.cr,
                      r.improvement_vs_deflate_pct
                          ? (fmt(*r.improvement_vs_deflate_pct, 1) + "%").c_str()
                          : "-",
                      r.mean_bin_latency_s ? fmt(*r.mean_bin_latency_s, 4).c_str() : "-",
                      r.total_s);
        out << line;
    }
    return out.str();
}

}  // namespace ntc
