#include <doctest.h>

#include <stdexcept>

#include <zlib.h>

#include <filesystem>
#include <fstream>

#include "ntc/ingest.hpp"
#include "ntc/serial.hpp"

using namespace ntc;

namespace {

namespace fs = std::filesystem;

struct TempFile {
    fs::path path;
    explicit TempFile(const std::string& name) : path(fs::temp_directory_path() / name) {}
    ~TempFile() {
        std::error_code ec;
        fs::remove(path, ec);
    }
    void write(const std::string& text) {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        f << text;
    }
    std::string str() const { return path.string(); }
};

void write_gzip(const fs::path& path, const std::string& text) {
    gzFile f = gzopen(path.string().c_str(), "wb");
    REQUIRE(f != nullptr);
    REQUIRE(gzwrite(f, text.data(), static_cast<unsigned>(text.size())) ==
            static_cast<int>(text.size()));
    gzclose(f);
}

const Topology kTwoLinks(2, {{0, 1}, {1, 0}});

}  // namespace

TEST_SUITE_BEGIN("ingest");

TEST_CASE("well-formed csv loads into the right shape") {
    TempFile f("ntc_ok.csv");
    f.write("t,link_0,link_1\n0,10,20\n1,11,21\n2,12,22\n");
    LoadedDataset d = load_csv(f.str(), kTwoLinks);
    CHECK(d.data.num_bins == 3);
    CHECK(d.data.num_links() == 2);
    CHECK(d.data.at(2, 1) == 22);
    CHECK(d.data.v_max == 22);
    CHECK(d.time_index == std::vector<uint64_t>{0, 1, 2});
}

TEST_CASE("malformed rows are rejected with positions") {
    TempFile f("ntc_bad.csv");
    f.write("t,link_0,link_1\n0,10,-4\n");
    CHECK_THROWS_WITH_AS(load_csv(f.str(), kTwoLinks), doctest::Contains("line 2"),
                         std::runtime_error);
    f.write("t,link_0,link_1\n0,10,x\n");
    CHECK_THROWS_WITH_AS(load_csv(f.str(), kTwoLinks), doctest::Contains("non-integer"),
                         std::runtime_error);
    f.write("t,link_0,link_1\n0,10\n");
    CHECK_THROWS_WITH_AS(load_csv(f.str(), kTwoLinks), doctest::Contains("column count"),
                         std::runtime_error);
    f.write("t,link_0\n0,10\n");
    CHECK_THROWS_AS(load_csv(f.str(), kTwoLinks), std::runtime_error);  // header mismatch
    f.write("t,link_0,link_1\n1,1,1\n1,2,2\n");
    CHECK_THROWS_WITH_AS(load_csv(f.str(), kTwoLinks), doctest::Contains("non-increasing"),
                         std::runtime_error);
}

TEST_CASE("load-save-load is a byte-identical fixpoint") {
    TempFile f("ntc_fix.csv");
    f.write("t,link_0,link_1\n0,1,2\n1,3,4\n5,5,6\n");
    LoadedDataset d = load_csv(f.str(), kTwoLinks);
    TempFile g("ntc_fix2.csv");
    save_csv(d.data, g.str(), &d.time_index);
    const auto bytes_a = read_file(f.str());
    const auto bytes_b = read_file(g.str());
    CHECK(bytes_a == bytes_b);
}

TEST_CASE("gzip input loads transparently") {
    TempFile f("ntc_gz.csv.gz");
    write_gzip(f.path, "t,link_0,link_1\n0,7,8\n1,9,10\n");
    LoadedDataset d = load_csv(f.str(), kTwoLinks);
    CHECK(d.data.num_bins == 2);
    CHECK(d.data.at(1, 0) == 9);
}

TEST_CASE("clean: gapless data is untouched") {
    TempFile f("ntc_clean0.csv");
    f.write("t,link_0,link_1\n0,1,1\n1,2,2\n2,3,3\n");
    LoadedDataset d = load_csv(f.str(), kTwoLinks);
    auto [dropped, report] = clean(d, CleanPolicy::drop_bins_with_gaps);
    CHECK(report.missing_bins.empty());
    CHECK(dropped.data.values == d.data.values);
    auto [filled, report2] = clean(d, CleanPolicy::fill_previous);
    CHECK(report2.missing_bins.empty());
    CHECK(filled.data.values == d.data.values);
}

TEST_CASE("clean: drop keeps present rows, fill copies the previous row") {
    TempFile f("ntc_clean1.csv");
    f.write("t,link_0,link_1\n0,1,10\n1,2,20\n3,4,40\n");  // t=2 missing
    LoadedDataset d = load_csv(f.str(), kTwoLinks);

    auto [dropped, rep_d] = clean(d, CleanPolicy::drop_bins_with_gaps);
    CHECK(rep_d.missing_bins == std::vector<uint64_t>{2});
    CHECK(dropped.data.num_bins == 3);  // span 4, one bin missing

    auto [filled, rep_f] = clean(d, CleanPolicy::fill_previous);
    CHECK(rep_f.missing_bins == std::vector<uint64_t>{2});
    CHECK(filled.data.num_bins == 4);
    CHECK(filled.data.at(2, 0) == 2);  // copy of t=1
    CHECK(filled.data.at(2, 1) == 20);
    CHECK(filled.time_index == std::vector<uint64_t>{0, 1, 2, 3});

    // idempotence
    auto [filled2, rep_f2] = clean(filled, CleanPolicy::fill_previous);
    CHECK(rep_f2.missing_bins.empty());
    CHECK(filled2.data.values == filled.data.values);
}

TEST_CASE("chronological split arithmetic") {
    ChronoSplit s = chronological_split(10, 4, 0.7);
    CHECK(s.num_windows == 6);
    CHECK(s.train_count == 4);
    CHECK(s.eval_count() == 2);
    // label of last train window < label of first eval window by construction
    const uint64_t last_train_label = (s.train_count - 1) + 4;
    const uint64_t first_eval_label = s.train_count + 4;
    CHECK(last_train_label < first_eval_label);

    CHECK_THROWS_AS(chronological_split(5, 4, 0.7), std::invalid_argument);
    CHECK_THROWS_AS(chronological_split(10, 4, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(chronological_split(10, 4, 1.0), std::invalid_argument);
}

TEST_CASE("placeholder topology loader infers the link count") {
    TempFile f("ntc_anon.csv");
    f.write("t,link_0,link_1,link_2\n0,1,2,3\n1,4,5,6\n");
    LoadedDataset d = load_csv_with_placeholder_topology(f.str());
    CHECK(d.data.num_links() == 3);
    CHECK(d.data.at(1, 2) == 6);
}

TEST_SUITE_END();
