#include "ntc/ingest.hpp"

#include <zlib.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ntc/serial.hpp"

namespace ntc {

namespace {

std::string gunzip(const std::vector<uint8_t>& raw) {
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 32) != Z_OK)  // accept gzip or zlib wrapper
        throw std::runtime_error("load_csv: inflateInit failed");
    std::string out;
    std::vector<char> chunk(1 << 16);
    zs.next_in = const_cast<Bytef*>(raw.data());
    zs.avail_in = static_cast<uInt>(raw.size());
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = reinterpret_cast<Bytef*>(chunk.data());
        zs.avail_out = static_cast<uInt>(chunk.size());
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw std::runtime_error("load_csv: corrupt gzip stream");
        }
        out.append(chunk.data(), chunk.size() - zs.avail_out);
    }
    inflateEnd(&zs);
    return out;
}

uint64_t parse_cell(const std::string& cell, uint64_t line_no, size_t col) {
    const char* first = cell.data();
    const char* last = first + cell.size();
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    while (last > first && (*(last - 1) == ' ' || *(last - 1) == '\t' || *(last - 1) == '\r'))
        --last;
    if (first < last && *first == '-')
        throw std::runtime_error("load_csv: negative value at line " + std::to_string(line_no) +
                                 ", column " + std::to_string(col));
    uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw std::runtime_error("load_csv: non-integer cell at line " + std::to_string(line_no) +
                                 ", column " + std::to_string(col));
    return v;
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> cells;
    size_t start = 0;
    for (;;) {
        size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(line.substr(start));
            return cells;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::string read_csv_text(const std::string& path) {
    std::vector<uint8_t> raw = read_file(path);
    if (raw.size() >= 2 && raw[0] == 0x1f && raw[1] == 0x8b) return gunzip(raw);
    return {raw.begin(), raw.end()};
}

LoadedDataset parse_csv_text(const std::string& text, const Topology& topology,
                             double bin_duration_s) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const uint32_t L = topology.num_links();
    {
        std::ostringstream expected;
        expected << "t";
        for (uint32_t l = 0; l < L; ++l) expected << ",link_" << l;
        if (line != expected.str())
            throw std::runtime_error("load_csv: header does not match topology (" +
                                     std::to_string(L) + " links expected)");
    }

    LoadedDataset out;
    out.data.topology = topology;
    out.data.bin_duration_s = bin_duration_s;
    uint64_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_commas(line);
        if (cells.size() != static_cast<size_t>(L) + 1)
            throw std::runtime_error("load_csv: column count mismatch at line " +
                                     std::to_string(line_no));
        const uint64_t t = parse_cell(cells[0], line_no, 0);
        if (!out.time_index.empty() && t <= out.time_index.back())
            throw std::runtime_error("load_csv: non-increasing time index at line " +
                                     std::to_string(line_no));
        out.time_index.push_back(t);
        for (uint32_t l = 0; l < L; ++l)
            out.data.values.push_back(parse_cell(cells[l + 1], line_no, l + 1));
    }
    if (out.time_index.empty()) throw std::runtime_error("load_csv: no data rows");
    out.data.num_bins = out.time_index.size();
    out.data.set_v_max_from_values();
    return out;
}

}  // namespace

LoadedDataset load_csv(const std::string& path, const Topology& topology,
                       double bin_duration_s) {
    return parse_csv_text(read_csv_text(path), topology, bin_duration_s);
}

LoadedDataset load_csv_with_placeholder_topology(const std::string& path,
                                                 double bin_duration_s) {
    const std::string text = read_csv_text(path);
    std::istringstream in(text);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("load_csv: empty file");
    if (!header.empty() && header.back() == '\r') header.pop_back();
    const size_t cells = split_commas(header).size();
    if (cells < 2) throw std::runtime_error("load_csv: malformed header");
    const uint32_t L = static_cast<uint32_t>(cells - 1);
    std::vector<Link> links;
    for (uint32_t i = 0; i < L; ++i) links.push_back({i, i + 1});  // chain
    return parse_csv_text(text, Topology(L + 1, std::move(links)), bin_duration_s);
}

void save_csv(const TrafficDataset& dataset, const std::string& path,
              const std::vector<uint64_t>* time_index) {
    if (time_index != nullptr && time_index->size() != dataset.num_bins)
        throw std::invalid_argument("save_csv: time index length mismatch");
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write csv: " + path);
    const uint32_t L = dataset.num_links();
    f << "t";
    for (uint32_t l = 0; l < L; ++l) f << ",link_" << l;
    f << "\n";
    for (uint64_t t = 0; t < dataset.num_bins; ++t) {
        f << (time_index != nullptr ? (*time_index)[t] : t);
        for (uint32_t l = 0; l < L; ++l) f << "," << dataset.at(t, l);
        f << "\n";
    }
    if (!f) throw std::runtime_error("write error: " + path);
}

std::pair<LoadedDataset, CleanReport> clean(const LoadedDataset& input, CleanPolicy policy) {
    CleanReport report;
    const auto& t = input.time_index;
    for (size_t i = 1; i < t.size(); ++i)
        for (uint64_t missing = t[i - 1] + 1; missing < t[i]; ++missing)
            report.missing_bins.push_back(missing);

    if (policy == CleanPolicy::drop_bins_with_gaps || report.missing_bins.empty())
        return {input, report};

    report.filled = true;
    const uint32_t L = input.data.num_links();
    LoadedDataset out;
    out.data.topology = input.data.topology;
    out.data.bin_duration_s = input.data.bin_duration_s;
    for (size_t i = 0; i < t.size(); ++i) {
        if (i > 0) {
            for (uint64_t missing = t[i - 1] + 1; missing < t[i]; ++missing) {
                out.time_index.push_back(missing);
                const size_t prev = out.data.values.size() - L;
                for (uint32_t l = 0; l < L; ++l)
                    out.data.values.push_back(out.data.values[prev + l]);
            }
        }
        out.time_index.push_back(t[i]);
        for (uint32_t l = 0; l < L; ++l) out.data.values.push_back(input.data.at(i, l));
    }
    out.data.num_bins = out.time_index.size();
    out.data.set_v_max_from_values();
    return {out, report};
}

ChronoSplit chronological_split(uint64_t num_bins, uint32_t w_past, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("split: fraction must be in (0, 1)");
    if (num_bins < w_past + 2ull)
        throw std::invalid_argument("split: dataset shorter than one window");
    ChronoSplit s;
    s.num_windows = num_bins - w_past;
    if (s.num_windows < 2) throw std::invalid_argument("split: fewer than 2 windows");
    s.train_count = static_cast<uint64_t>(std::floor(static_cast<double>(s.num_windows) * fraction));
    s.train_count = std::clamp<uint64_t>(s.train_count, 1, s.num_windows - 1);
    return s;
}

}  // namespace ntc
