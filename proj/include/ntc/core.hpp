#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ntc {

struct Link {
    uint32_t tail = 0;
    uint32_t head = 0;

    friend bool operator==(const Link&, const Link&) = default;
    friend auto operator<=>(const Link&, const Link&) = default;
};

// Directed topology. Link ids are dense 0..L-1 in canonical order
// (sorted by (tail, head)); that order indexes dataset columns, the link
// graph and predictor outputs everywhere.
class Topology {
public:
    Topology() = default;
    Topology(uint32_t num_nodes, std::vector<Link> links);

    uint32_t num_nodes() const { return num_nodes_; }
    uint32_t num_links() const { return static_cast<uint32_t>(links_.size()); }
    const std::vector<Link>& links() const { return links_; }
    const Link& link(uint32_t id) const { return links_[id]; }

    friend bool operator==(const Topology&, const Topology&) = default;

    static Topology parse(const std::string& text);
    static Topology load(const std::string& path);
    std::string to_text() const;
    void save(const std::string& path) const;

    // 14 nodes, 42 directed links; the default benchmark topology.
    static Topology nsfnet();

private:
    uint32_t num_nodes_ = 0;
    std::vector<Link> links_;  // canonical order
};

struct TrafficDataset {
    Topology topology;
    std::vector<uint64_t> values;  // row-major, T x L
    uint64_t num_bins = 0;
    uint64_t v_max = 0;
    double bin_duration_s = 300.0;

    uint32_t num_links() const { return topology.num_links(); }
    uint64_t at(uint64_t bin, uint32_t link) const { return values[bin * num_links() + link]; }
    uint64_t& at(uint64_t bin, uint32_t link) { return values[bin * num_links() + link]; }

    void validate() const;  // throws on inconsistent dims / values > v_max
    void set_v_max_from_values();
};

// Per-link known/unknown indicator for the bin being coded.
struct Mask {
    std::vector<uint8_t> known;

    explicit Mask(uint32_t num_links = 0, bool all_known = false)
        : known(num_links, all_known ? 1 : 0) {}

    uint32_t size() const { return static_cast<uint32_t>(known.size()); }
    bool all_known() const;
    uint32_t count_known() const;
};

struct TrafficWindow {
    std::vector<uint64_t> past;       // w_past x L, all known
    std::vector<uint64_t> label_bin;  // L; masked entries ignored by predictors
    Mask mask;
    uint32_t w_past = 0;
    uint32_t num_links = 0;

    uint64_t past_at(uint32_t bin, uint32_t link) const { return past[bin * num_links + link]; }
};

// Directed line-graph adjacency over links: predecessors feed a link's tail
// node, successors leave its head node. Lists are sorted ascending.
class LinkGraph {
public:
    const std::vector<uint32_t>& predecessors(uint32_t link) const { return pred_[link]; }
    const std::vector<uint32_t>& successors(uint32_t link) const { return succ_[link]; }
    // union of both sets, the aggregation neighborhood
    const std::vector<uint32_t>& neighbors(uint32_t link) const { return nbr_[link]; }
    uint32_t num_links() const { return static_cast<uint32_t>(pred_.size()); }

    friend bool operator==(const LinkGraph&, const LinkGraph&) = default;
    friend LinkGraph build_link_graph(const Topology& topology);

private:
    std::vector<std::vector<uint32_t>> pred_, succ_, nbr_;
};

LinkGraph build_link_graph(const Topology& topology);

// uncompressed / compressed; throws std::invalid_argument on zero divisor
double compression_ratio(uint64_t uncompressed_bytes, uint64_t compressed_bytes);

// Sample Pearson correlation, clamped to [-1, 1].
// Throws std::domain_error when either vector is constant.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace ntc
