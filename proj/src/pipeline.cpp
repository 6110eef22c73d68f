#include "ntc/pipeline.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "ntc/serial.hpp"

namespace ntc {

namespace {

const char kContainerMagic[4] = {'N', 'T', 'C', 'C'};
constexpr uint32_t kContainerVersion = 1;

CountTable count_values(std::span<const uint64_t> values) {
    std::map<uint64_t, uint64_t> freq;
    for (uint64_t v : values) ++freq[v];
    return {freq.begin(), freq.end()};
}

}  // namespace

std::string method_name(Method m) {
    switch (m) {
        case Method::uniform: return "uniform";
        case Method::static_ac: return "static_ac";
        case Method::adaptive_ac: return "adaptive_ac";
        case Method::rnn: return "rnn";
        case Method::stgnn: return "stgnn";
    }
    return "?";
}

std::optional<Method> method_from_name(const std::string& name) {
    for (Method m : {Method::uniform, Method::static_ac, Method::adaptive_ac, Method::rnn,
                     Method::stgnn})
        if (method_name(m) == name) return m;
    return std::nullopt;
}

void MethodSpec::validate(uint32_t num_links) const {
    switch (method) {
        case Method::rnn:
            if (mode != Mode::single_link)
                throw std::invalid_argument("rnn method is single-link only");
            break;
        case Method::stgnn:
            if (mode != Mode::network_wide)
                throw std::invalid_argument("stgnn method is network-wide only");
            break;
        default:
            break;
    }
    if (method == Method::rnn || method == Method::stgnn) {
        if (!model) throw std::invalid_argument("neural method requires a model");
        const bool want_rnn = method == Method::rnn;
        const bool is_rnn = model->kind == PredictorModel::Kind::single_link_rnn;
        if (want_rnn != is_rnn) throw std::invalid_argument("model kind does not match method");
    }
    if (method == Method::static_ac) {
        const size_t want = mode == Mode::network_wide ? 1 : num_links;
        if (tables.size() != want)
            throw std::invalid_argument("static method: wrong table count");
    }
    if (effective_w_past() < 1) throw std::invalid_argument("w_past must be >= 1");
}

MethodSpec make_method_spec(Method method, Mode mode, const TrafficDataset* dataset,
                            std::shared_ptr<const PredictorModel> model, uint32_t w_past) {
    MethodSpec spec;
    spec.method = method;
    spec.mode = mode;
    spec.w_past = w_past;
    spec.model = std::move(model);
    if (method == Method::static_ac) {
        if (dataset == nullptr)
            throw std::invalid_argument("static method: dataset required to build tables");
        if (mode == Mode::network_wide) {
            spec.tables.push_back(count_values(dataset->values));
        } else {
            const uint32_t L = dataset->num_links();
            spec.tables.resize(L);
            for (uint32_t l = 0; l < L; ++l) {
                std::vector<uint64_t> column(dataset->num_bins);
                for (uint64_t t = 0; t < dataset->num_bins; ++t) column[t] = dataset->at(t, l);
                spec.tables[l] = count_values(column);
            }
        }
    }
    return spec;
}

uint32_t select_next_link(std::span<const DistParams> predictions, const Mask& mask) {
    if (predictions.size() != mask.size())
        throw std::invalid_argument("select_next_link: size mismatch");
    int64_t best = -1;
    for (uint32_t l = 0; l < mask.size(); ++l) {
        if (mask.known[l]) continue;
        if (best < 0 || predictions[l].b < predictions[best].b) best = l;
    }
    if (best < 0) throw std::logic_error("select_next_link: all links known");
    return static_cast<uint32_t>(best);
}

namespace {

// Per-bin coding drive shared by the encoder session and the decoder: the
// mask/order bookkeeping must be identical on both sides, so it lives once.
class Engine {
public:
    Engine(const Topology& topology, const MethodSpec& spec, uint64_t v_max)
        : spec_(spec),
          num_links_(topology.num_links()),
          alphabet_{v_max},
          uniform_(QuantizedDistribution::uniform(alphabet_)) {
        alphabet_.validate();
        spec_.validate(num_links_);
        w_past_ = spec_.effective_w_past();
        if (spec_.method == Method::static_ac)
            for (const CountTable& t : spec_.tables)
                statics_.push_back(QuantizedDistribution::from_counts(t, alphabet_, true));
        if (spec_.method == Method::stgnn) graph_ = build_link_graph(topology);
        window_.reserve(static_cast<size_t>(w_past_) * num_links_);
    }

    uint32_t num_links() const { return num_links_; }
    uint32_t w_past() const { return w_past_; }
    const MethodSpec& spec() const { return spec_; }
    const SymbolAlphabet& alphabet() const { return alphabet_; }

    // Sink abstracts the coding direction: returns the value coded for
    // (link, dist), either consuming bin values (encode) or producing them
    // (decode).
    struct Sink {
        virtual uint64_t code(uint32_t link, const QuantizedDistribution& dist) = 0;
        virtual ~Sink() = default;
    };

    // bin: encode side passes the true values; decode side receives them.
    void run_bin(std::span<uint64_t> bin, Sink& sink) {
        const uint64_t t = bins_done_;
        if (t < w_past_ || spec_.method == Method::uniform) {
            for (uint32_t l = 0; l < num_links_; ++l) bin[l] = sink.code(l, uniform_);
        } else {
            switch (spec_.method) {
                case Method::static_ac: {
                    if (spec_.mode == Mode::network_wide) {
                        for (uint32_t l = 0; l < num_links_; ++l)
                            bin[l] = sink.code(l, statics_[0]);
                    } else {
                        for (uint32_t l = 0; l < num_links_; ++l)
                            bin[l] = sink.code(l, statics_[l]);
                    }
                    break;
                }
                case Method::adaptive_ac: {
                    if (spec_.mode == Mode::network_wide) {
                        auto dist = QuantizedDistribution::histogram(window_, alphabet_);
                        for (uint32_t l = 0; l < num_links_; ++l) bin[l] = sink.code(l, dist);
                    } else {
                        std::vector<uint64_t> column(w_past_);
                        for (uint32_t l = 0; l < num_links_; ++l) {
                            for (uint32_t p = 0; p < w_past_; ++p)
                                column[p] = window_[static_cast<size_t>(p) * num_links_ + l];
                            auto dist = QuantizedDistribution::histogram(column, alphabet_);
                            bin[l] = sink.code(l, dist);
                        }
                    }
                    break;
                }
                case Method::rnn: {
                    auto params = rnn_forward_all(*spec_.model, window_, num_links_);
                    for (uint32_t l = 0; l < num_links_; ++l) {
                        auto dist = QuantizedDistribution::laplace(params[l], alphabet_,
                                                                   spec_.model->transform);
                        bin[l] = sink.code(l, dist);
                    }
                    break;
                }
                case Method::stgnn: {
                    TrafficWindow w;
                    w.w_past = w_past_;
                    w.num_links = num_links_;
                    w.past = window_;
                    w.label_bin.assign(num_links_, 0);
                    w.mask = Mask(num_links_);
                    // re-predict after each coded link so every prediction
                    // conditions on everything already coded in this bin
                    for (uint32_t step = 0; step < num_links_; ++step) {
                        auto params = stgnn_forward(*spec_.model, w, graph_);
                        const uint32_t j = select_next_link(params, w.mask);
                        auto dist = QuantizedDistribution::laplace(params[j], alphabet_,
                                                                   spec_.model->transform);
                        bin[j] = sink.code(j, dist);
                        w.label_bin[j] = bin[j];
                        w.mask.known[j] = 1;
                    }
                    break;
                }
                default:
                    throw std::logic_error("engine: bad method");
            }
        }
        push_window(bin);
        ++bins_done_;
    }

private:
    void push_window(std::span<const uint64_t> bin) {
        if (window_.size() < static_cast<size_t>(w_past_) * num_links_) {
            window_.insert(window_.end(), bin.begin(), bin.end());
        } else if (w_past_ > 0) {
            std::copy(window_.begin() + num_links_, window_.end(), window_.begin());
            std::copy(bin.begin(), bin.end(), window_.end() - num_links_);
        }
    }

    MethodSpec spec_;
    uint32_t num_links_;
    uint32_t w_past_ = 0;
    SymbolAlphabet alphabet_;
    QuantizedDistribution uniform_;
    std::vector<QuantizedDistribution> statics_;
    LinkGraph graph_;
    std::vector<uint64_t> window_;  // last w_past bins, oldest first
    uint64_t bins_done_ = 0;
};

void write_tables(ByteWriter& w, const std::vector<CountTable>& tables) {
    w.u32(static_cast<uint32_t>(tables.size()));
    for (const CountTable& t : tables) {
        w.u64(t.size());
        for (const auto& [v, c] : t) {
            w.u64(v);
            w.u64(c);
        }
    }
}

std::vector<CountTable> read_tables(ByteReader& r) {
    std::vector<CountTable> tables(r.u32());
    for (CountTable& t : tables) {
        t.resize(r.u64());
        for (auto& [v, c] : t) {
            v = r.u64();
            c = r.u64();
        }
    }
    return tables;
}

}  // namespace

struct StreamSession::Impl {
    Topology topology;
    Engine engine;
    std::vector<RangeEncoder> encoders;
    std::vector<uint64_t> bin_scratch;
    uint64_t v_max;
    double bin_duration_s;
    uint64_t bins = 0;
    bool closed = false;

    Impl(Topology topo, MethodSpec spec, uint64_t vmax, double dur)
        : topology(std::move(topo)),
          engine(topology, spec, vmax),
          encoders(topology.num_links()),
          bin_scratch(topology.num_links()),
          v_max(vmax),
          bin_duration_s(dur) {}
};

StreamSession::StreamSession(Topology topology, MethodSpec spec, uint64_t v_max,
                             double bin_duration_s)
    : impl_(std::make_unique<Impl>(std::move(topology), std::move(spec), v_max,
                                   bin_duration_s)) {}

StreamSession::~StreamSession() = default;
StreamSession::StreamSession(StreamSession&&) noexcept = default;
StreamSession& StreamSession::operator=(StreamSession&&) noexcept = default;

uint64_t StreamSession::bins_pushed() const { return impl_->bins; }

uint64_t StreamSession::bytes_buffered() const {
    uint64_t total = 0;
    for (const RangeEncoder& e : impl_->encoders) total += e.bytes_emitted();
    return total;
}

std::vector<uint64_t> StreamSession::push_bin(std::span<const uint64_t> values) {
    Impl& im = *impl_;
    if (im.closed) throw std::logic_error("session: push after close");
    const uint32_t L = im.engine.num_links();
    if (values.size() != L)
        throw std::invalid_argument("session: expected " + std::to_string(L) + " values, got " +
                                    std::to_string(values.size()));
    for (uint32_t l = 0; l < L; ++l)
        if (values[l] > im.v_max)
            throw std::invalid_argument("value exceeds v_max at bin " + std::to_string(im.bins) +
                                        ", link " + std::to_string(l));

    std::vector<uint64_t> before(L);
    for (uint32_t l = 0; l < L; ++l) before[l] = im.encoders[l].bytes_emitted();

    struct EncodeSink : Engine::Sink {
        std::vector<RangeEncoder>* encoders;
        std::span<const uint64_t> values;
        uint64_t code(uint32_t link, const QuantizedDistribution& dist) override {
            (*encoders)[link].encode(dist.interval(values[link]));
            return values[link];
        }
    } sink;
    sink.encoders = &im.encoders;
    sink.values = values;

    std::copy(values.begin(), values.end(), im.bin_scratch.begin());
    im.engine.run_bin(im.bin_scratch, sink);
    ++im.bins;

    std::vector<uint64_t> emitted(L);
    for (uint32_t l = 0; l < L; ++l) emitted[l] = im.encoders[l].bytes_emitted() - before[l];
    return emitted;
}

std::vector<uint8_t> StreamSession::close() {
    Impl& im = *impl_;
    if (im.closed) throw std::logic_error("session: close called twice");
    im.closed = true;
    const uint32_t L = im.engine.num_links();

    ByteWriter w;
    w.magic(kContainerMagic);
    w.u32(kContainerVersion);
    w.u8(static_cast<uint8_t>(im.engine.spec().method));
    w.u8(static_cast<uint8_t>(im.engine.spec().mode));
    w.u32(L);
    w.u64(im.bins);
    w.u64(im.v_max);
    w.u32(im.engine.w_past());
    w.f64(im.bin_duration_s);
    w.u64(im.engine.spec().model ? im.engine.spec().model->content_hash : 0);
    w.u32(im.topology.num_nodes());
    for (const Link& l : im.topology.links()) {
        w.u32(l.tail);
        w.u32(l.head);
    }
    if (im.engine.spec().method == Method::static_ac) write_tables(w, im.engine.spec().tables);
    for (uint32_t l = 0; l < L; ++l) {
        CodedStream s = im.encoders[l].finish();
        w.u64(s.symbol_count);
        w.u64(s.bytes.size());
        w.bytes(s.bytes);
    }
    w.u64(fnv1a64(w.data()));
    return w.take();
}

std::vector<uint8_t> compress(const TrafficDataset& dataset, const MethodSpec& spec) {
    dataset.validate();
    StreamSession session(dataset.topology, spec, dataset.v_max, dataset.bin_duration_s);
    const uint32_t L = dataset.num_links();
    for (uint64_t t = 0; t < dataset.num_bins; ++t)
        session.push_bin({&dataset.values[t * L], L});
    return session.close();
}

namespace {

struct ParsedContainer {
    ContainerHeader header;
    std::vector<CountTable> tables;
    std::vector<CodedStream> streams;
};

ParsedContainer parse_container(std::span<const uint8_t> bytes) {
    if (bytes.size() < 8) throw std::runtime_error("container: truncated");
    const uint64_t checksum = fnv1a64(bytes.first(bytes.size() - 8));
    ByteReader tail(bytes.subspan(bytes.size() - 8));
    if (tail.u64() != checksum)
        throw std::runtime_error("container: checksum mismatch (corrupted file)");

    ByteReader r(bytes.first(bytes.size() - 8));
    r.expect_magic(kContainerMagic, "container");
    if (r.u32() != kContainerVersion) throw std::runtime_error("container: unsupported version");
    ParsedContainer out;
    ContainerHeader& h = out.header;
    const uint8_t method = r.u8();
    if (method > static_cast<uint8_t>(Method::stgnn))
        throw std::runtime_error("container: bad method");
    h.method = static_cast<Method>(method);
    const uint8_t mode = r.u8();
    if (mode > 1) throw std::runtime_error("container: bad mode");
    h.mode = static_cast<Mode>(mode);
    h.num_links = r.u32();
    h.num_bins = r.u64();
    h.v_max = r.u64();
    h.w_past = r.u32();
    h.bin_duration_s = r.f64();
    h.model_hash = r.u64();
    const uint32_t nodes = r.u32();
    std::vector<Link> links(h.num_links);
    for (Link& l : links) {
        l.tail = r.u32();
        l.head = r.u32();
    }
    h.topology = Topology(nodes, std::move(links));
    if (h.method == Method::static_ac) out.tables = read_tables(r);
    out.streams.resize(h.num_links);
    for (CodedStream& s : out.streams) {
        s.symbol_count = r.u64();
        const uint64_t n = r.u64();
        auto b = r.bytes(n);
        s.bytes.assign(b.begin(), b.end());
        if (s.symbol_count != h.num_bins)
            throw std::runtime_error("container: stream symbol count mismatch");
    }
    if (r.remaining() != 0) throw std::runtime_error("container: trailing bytes");
    return out;
}

}  // namespace

ContainerHeader peek_container(std::span<const uint8_t> container) {
    return parse_container(container).header;
}

TrafficDataset decompress(std::span<const uint8_t> container, const PredictorModel* model) {
    ParsedContainer parsed = parse_container(container);
    const ContainerHeader& h = parsed.header;

    MethodSpec spec;
    spec.method = h.method;
    spec.mode = h.mode;
    spec.w_past = h.w_past;
    spec.tables = std::move(parsed.tables);
    if (h.method == Method::rnn || h.method == Method::stgnn) {
        if (model == nullptr)
            throw std::runtime_error("decompress: method " + method_name(h.method) +
                                     " requires the model file");
        if (model->content_hash != h.model_hash)
            throw std::runtime_error("decompress: model content hash mismatch");
        spec.model = std::make_shared<PredictorModel>(*model);
    }

    Engine engine(h.topology, spec, h.v_max);
    const uint32_t L = h.num_links;
    std::vector<RangeDecoder> decoders;
    decoders.reserve(L);
    for (const CodedStream& s : parsed.streams) decoders.emplace_back(s);

    struct DecodeSink : Engine::Sink {
        std::vector<RangeDecoder>* decoders;
        uint64_t code(uint32_t link, const QuantizedDistribution& dist) override {
            RangeDecoder& dec = (*decoders)[link];
            const uint64_t v = dist.invert(dec.target());
            dec.consume(dist.interval(v));
            return v;
        }
    } sink;
    sink.decoders = &decoders;

    TrafficDataset out;
    out.topology = h.topology;
    out.num_bins = h.num_bins;
    out.v_max = h.v_max;
    out.bin_duration_s = h.bin_duration_s;
    out.values.resize(h.num_bins * L);
    for (uint64_t t = 0; t < h.num_bins; ++t)
        engine.run_bin({&out.values[t * L], L}, sink);
    out.validate();
    return out;
}

uint32_t value_byte_width(uint64_t v_max) {
    if (v_max <= 0xFFull) return 1;
    if (v_max <= 0xFFFFull) return 2;
    if (v_max <= 0xFFFFFFFFull) return 4;
    return 8;
}

uint64_t raw_matrix_bytes(const TrafficDataset& dataset) {
    return dataset.num_bins * dataset.num_links() *
           static_cast<uint64_t>(value_byte_width(dataset.v_max));
}

std::vector<uint8_t> raw_matrix_bytes_le(const TrafficDataset& dataset) {
    const uint32_t width = value_byte_width(dataset.v_max);
    std::vector<uint8_t> out;
    out.reserve(raw_matrix_bytes(dataset));
    for (uint64_t v : dataset.values)
        for (uint32_t i = 0; i < width; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
    return out;
}

}  // namespace ntc
