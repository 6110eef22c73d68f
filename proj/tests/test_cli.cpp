#include <doctest.h>

#include <cstdlib>
#include <unistd.h>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ntc/serial.hpp"

namespace {

namespace fs = std::filesystem;

std::string cli_path() {
    const char* p = std::getenv("NTC_CLI_PATH");
    return p != nullptr ? p : "";
}

int run(const std::string& args) {
    const std::string cmd = "'" + cli_path() + "' " + args;
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("ntc_cli_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("gen, compress, decompress round-trips through the binary") {
    if (cli_path().empty()) {
        MESSAGE("NTC_CLI_PATH not set; skipping");
        return;
    }
    TempDir dir;
    const std::string d = dir.file("d.csv");
    const std::string t = dir.file("t.txt");
    const std::string c = dir.file("d.ntcc");
    const std::string back = dir.file("back.csv");

    REQUIRE(run("gen --spatial 100 --temporal 100 --seed 7 --bins 80 -o '" + d +
                "' --topology-out '" + t + "' >/dev/null") == 0);
    REQUIRE(run("compress --data '" + d + "' --topology '" + t +
                "' --method adaptive_ac -o '" + c + "' >/dev/null") == 0);
    REQUIRE(run("decompress -i '" + c + "' -o '" + back + "' >/dev/null") == 0);
    CHECK(ntc::read_file(d) == ntc::read_file(back));
}

TEST_CASE("stats reports a near-one median on fully correlated data") {
    if (cli_path().empty()) return;
    TempDir dir;
    const std::string d = dir.file("d.csv");
    const std::string out = dir.file("stats.txt");
    REQUIRE(run("gen --spatial 100 --temporal 100 --seed 7 --bins 120 -o '" + d +
                "' >/dev/null") == 0);
    REQUIRE(run("stats '" + d + "' > '" + out + "'") == 0);
    std::ifstream f(out);
    std::stringstream ss;
    ss << f.rdbuf();
    const std::string text = ss.str();
    const auto pos = text.find("median |pearson| (defined pairs): ");
    REQUIRE(pos != std::string::npos);
    const double median = std::stod(text.substr(pos + 34));
    CHECK(median >= 0.99);
}

TEST_CASE("bench writes the csv report schema") {
    if (cli_path().empty()) return;
    TempDir dir;
    const std::string d = dir.file("d.csv");
    const std::string rep = dir.file("report.csv");
    REQUIRE(run("gen --seed 3 --bins 40 -o '" + d + "' >/dev/null") == 0);
    REQUIRE(run("bench --data '" + d +
                "' --methods uniform,adaptive_ac,deflate -o '" + rep + "' >/dev/null") == 0);
    std::ifstream f(rep);
    std::string line, header;
    while (std::getline(f, line))
        if (line.rfind('#', 0) != 0) {
            header = line;
            break;
        }
    CHECK(header == "method,bytes,cr,improvement_vs_deflate_pct,mean_bin_latency_s,total_s");
}

TEST_CASE("bad flags exit with code 2, runtime failures with 1") {
    if (cli_path().empty()) return;
    CHECK(run("compress --no-such-flag 2>/dev/null") == 2);
    CHECK(run("gen 2>/dev/null") == 2);  // missing required -o
    TempDir dir;
    CHECK(run("stats '" + dir.file("missing.csv") + "' 2>/dev/null") == 1);
}

TEST_SUITE_END();
