#include "ntc/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ntc {

Topology::Topology(uint32_t num_nodes, std::vector<Link> links)
    : num_nodes_(num_nodes), links_(std::move(links)) {
    std::sort(links_.begin(), links_.end());
    std::set<Link> seen;
    for (const Link& l : links_) {
        if (l.tail == l.head)
            throw std::invalid_argument("topology: self-loop on node " + std::to_string(l.tail));
        if (l.tail >= num_nodes_ || l.head >= num_nodes_)
            throw std::invalid_argument("topology: node id out of range");
        if (!seen.insert(l).second)
            throw std::invalid_argument("topology: duplicate link");
    }
}

Topology Topology::parse(const std::string& text) {
    std::istringstream in(text);
    std::string word;
    if (!(in >> word) || word != "nodes")
        throw std::invalid_argument("topology: expected 'nodes N' header");
    uint32_t n = 0;
    if (!(in >> n)) throw std::invalid_argument("topology: bad node count");
    std::vector<Link> links;
    int64_t tail, head;
    while (in >> tail >> head) {
        if (tail < 0 || head < 0) throw std::invalid_argument("topology: negative node id");
        links.push_back({static_cast<uint32_t>(tail), static_cast<uint32_t>(head)});
    }
    if (!in.eof()) {
        in.clear();
        if (in >> word) throw std::invalid_argument("topology: trailing garbage '" + word + "'");
    }
    return Topology(n, std::move(links));
}

Topology Topology::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open topology file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

std::string Topology::to_text() const {
    std::ostringstream out;
    out << "nodes " << num_nodes_ << "\n";
    for (const Link& l : links_) out << l.tail << " " << l.head << "\n";
    return out.str();
}

void Topology::save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write topology file: " + path);
    f << to_text();
}

Topology Topology::nsfnet() {
    // 14-node NSFNET backbone, 21 undirected trunks, two directed links each.
    static const std::pair<uint32_t, uint32_t> trunks[] = {
        {0, 1}, {0, 2}, {0, 7}, {1, 2}, {1, 3}, {2, 5}, {3, 4},
        {3, 10}, {4, 5}, {4, 6}, {5, 9}, {5, 12}, {6, 7}, {7, 8},
        {8, 9}, {8, 11}, {9, 13}, {10, 11}, {10, 13}, {11, 12}, {12, 13},
    };
    std::vector<Link> links;
    for (auto [a, b] : trunks) {
        links.push_back({a, b});
        links.push_back({b, a});
    }
    return Topology(14, std::move(links));
}

void TrafficDataset::validate() const {
    const uint64_t l = num_links();
    if (num_bins < 1) throw std::invalid_argument("dataset: need at least one bin");
    if (values.size() != num_bins * l) throw std::invalid_argument("dataset: value count mismatch");
    for (uint64_t t = 0; t < num_bins; ++t)
        for (uint64_t j = 0; j < l; ++j)
            if (values[t * l + j] > v_max)
                throw std::invalid_argument("dataset: value exceeds v_max at bin " +
                                            std::to_string(t) + ", link " + std::to_string(j));
}

void TrafficDataset::set_v_max_from_values() {
    uint64_t m = 0;
    for (uint64_t v : values) m = std::max(m, v);
    v_max = m;
}

bool Mask::all_known() const {
    for (uint8_t k : known)
        if (!k) return false;
    return true;
}

uint32_t Mask::count_known() const {
    uint32_t n = 0;
    for (uint8_t k : known) n += k;
    return n;
}

LinkGraph build_link_graph(const Topology& topology) {
    const uint32_t l = topology.num_links();
    LinkGraph g;
    g.pred_.resize(l);
    g.succ_.resize(l);
    g.nbr_.resize(l);
    // canonical order is sorted, so scans below produce sorted lists
    for (uint32_t a = 0; a < l; ++a) {
        const Link& la = topology.link(a);
        for (uint32_t b = 0; b < l; ++b) {
            if (a == b) continue;
            const Link& lb = topology.link(b);
            if (lb.head == la.tail) g.pred_[a].push_back(b);
            if (lb.tail == la.head) g.succ_[a].push_back(b);
        }
        std::set_union(g.pred_[a].begin(), g.pred_[a].end(), g.succ_[a].begin(),
                       g.succ_[a].end(), std::back_inserter(g.nbr_[a]));
    }
    return g;
}

double compression_ratio(uint64_t uncompressed_bytes, uint64_t compressed_bytes) {
    if (compressed_bytes == 0) throw std::invalid_argument("compression_ratio: zero compressed size");
    return static_cast<double>(uncompressed_bytes) / static_cast<double>(compressed_bytes);
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
    const size_t n = x.size();
    if (n < 2) throw std::invalid_argument("pearson: need at least 2 samples");
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw std::domain_error("pearson: constant input vector");
    double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

}  // namespace ntc
