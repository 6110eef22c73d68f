#include <doctest.h>

#include <stdexcept>

#include <sstream>

#include "ntc/bench.hpp"
#include "ntc/pipeline.hpp"
#include "ntc/rng.hpp"

using namespace ntc;

namespace {

TrafficDataset random_dataset(uint64_t bins, uint64_t v_max, uint64_t seed) {
    TrafficDataset d;
    d.topology = Topology(3, {{0, 1}, {1, 2}, {2, 0}});
    d.num_bins = bins;
    Rng rng(seed);
    d.values.resize(bins * 3);
    for (auto& v : d.values) v = rng.next_below(v_max + 1);
    d.set_v_max_from_values();
    return d;
}

}  // namespace

TEST_SUITE_BEGIN("bench");

TEST_CASE("external deflate compresses a compressible payload") {
    std::vector<uint8_t> zeros(4096, 0);
    DeflateResult r = deflate_external(zeros);
    REQUIRE_MESSAGE(r.ok, "external deflate tool unavailable: " << deflate_tool_description());
    CHECK(r.bytes > 0);
    CHECK(r.bytes < zeros.size() / 4);
}

TEST_CASE("bench report rows, ratios and csv schema") {
    TrafficDataset d = random_dataset(30, 120, 3);
    BenchConfig cfg;
    cfg.methods = {"uniform", "adaptive_ac", "rnn", "stgnn", "deflate"};
    cfg.w_past = 3;
    cfg.stgnn_model = std::make_shared<PredictorModel>(PredictorModel::init(
        PredictorModel::Kind::network_stgnn, 3, 3, ValueTransform::log1p_standardized(2.0, 1.0),
        5));
    BenchReport rep = bench_run(d, cfg);
    REQUIRE(rep.rows.size() == 5);

    // network method rows carry the per-bin latency column
    const BenchRow* stgnn = rep.find("stgnn");
    REQUIRE(stgnn != nullptr);
    CHECK(stgnn->available);
    REQUIRE(stgnn->mean_bin_latency_s.has_value());
    CHECK(*stgnn->mean_bin_latency_s >= 0.0);
    CHECK(*stgnn->mean_bin_latency_s < 10.0);

    const BenchRow* uniform = rep.find("uniform");
    REQUIRE(uniform != nullptr);
    CHECK(uniform->available);
    CHECK(uniform->cr ==
          doctest::Approx(static_cast<double>(rep.uncompressed_bytes) / uniform->bytes));

    // rnn without a model is reported as unavailable, not an error
    const BenchRow* rnn = rep.find("rnn");
    REQUIRE(rnn != nullptr);
    CHECK(!rnn->available);

    const BenchRow* deflate = rep.find("deflate");
    REQUIRE(deflate != nullptr);
    if (deflate->available) {
        CHECK(uniform->improvement_vs_deflate_pct.has_value());
    }

    std::istringstream csv(bench_csv(rep));
    std::string line;
    bool saw_header = false;
    size_t data_rows = 0;
    while (std::getline(csv, line)) {
        if (line.rfind('#', 0) == 0) continue;
        if (!saw_header) {
            CHECK(line == "method,bytes,cr,improvement_vs_deflate_pct,mean_bin_latency_s,total_s");
            saw_header = true;
            continue;
        }
        ++data_rows;
    }
    CHECK(data_rows == rep.rows.size());
}

TEST_CASE("per-bin deflate expands random data and never beats whole-file deflate") {
    TrafficDataset d = random_dataset(40, 60000, 9);  // near-incompressible 2-byte values
    BenchConfig cfg;
    cfg.methods = {"deflate"};
    cfg.per_bin_deflate = true;
    BenchReport rep = bench_run(d, cfg);
    const BenchRow* whole = rep.find("deflate");
    const BenchRow* per_bin = rep.find("deflate_per_bin");
    REQUIRE(whole != nullptr);
    REQUIRE(per_bin != nullptr);
    if (whole->available && per_bin->available) {
        CHECK(per_bin->cr < 1.0);
        CHECK(per_bin->cr <= whole->cr);
    }
}

TEST_CASE("adaptive beats static on a slowly varying series") {
    TrafficDataset d;
    d.topology = Topology(2, {{0, 1}, {1, 0}});
    d.num_bins = 400;
    d.values.resize(800);
    Rng rng(17);
    for (uint64_t t = 0; t < 400; ++t)
        for (uint64_t l = 0; l < 2; ++l)
            d.values[t * 2 + l] = t * 3 + rng.next_below(3);  // ramp with jitter
    d.set_v_max_from_values();

    auto bytes_for = [&](Method m) {
        MethodSpec spec = make_method_spec(m, Mode::network_wide, &d, nullptr, 4);
        return compress(d, spec).size();
    };
    CHECK(bytes_for(Method::adaptive_ac) < bytes_for(Method::static_ac));
}

TEST_CASE("compressed sizes in a report are reproducible") {
    TrafficDataset d = random_dataset(25, 500, 21);
    BenchConfig cfg;
    cfg.methods = {"uniform", "static_ac", "adaptive_ac"};
    cfg.w_past = 2;
    BenchReport a = bench_run(d, cfg);
    BenchReport b = bench_run(d, cfg);
    for (size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].bytes == b.rows[i].bytes);
        CHECK(a.rows[i].cr == b.rows[i].cr);
    }
}

TEST_CASE("unknown bench method is rejected") {
    TrafficDataset d = random_dataset(10, 10, 1);
    BenchConfig cfg;
    cfg.methods = {"zstd"};
    CHECK_THROWS_AS(bench_run(d, cfg), std::invalid_argument);
}

TEST_CASE("a missing external tool marks the deflate row unavailable") {
    setenv(kDeflateToolEnv, "/nonexistent/deflate-tool", 1);
    TrafficDataset d = random_dataset(8, 50, 2);
    BenchConfig cfg;
    cfg.methods = {"uniform", "deflate"};
    cfg.w_past = 2;
    BenchReport rep = bench_run(d, cfg);
    unsetenv(kDeflateToolEnv);

    const BenchRow* deflate = rep.find("deflate");
    REQUIRE(deflate != nullptr);
    CHECK(!deflate->available);
    const BenchRow* uniform = rep.find("uniform");
    REQUIRE(uniform != nullptr);
    CHECK(uniform->available);  // the run continues
    CHECK(!uniform->improvement_vs_deflate_pct.has_value());
}

TEST_SUITE_END();
