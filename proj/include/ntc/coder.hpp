#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ntc {

// Probability resolution of the coder/model boundary: cumulative intervals
// live on a 2^48 fixed-point grid.
inline constexpr int kProbBits = 48;
inline constexpr uint64_t kProbScale = 1ull << kProbBits;

// Half-open cumulative interval [cum_lo, cum_hi) in units of 2^-48.
struct FixedPointInterval {
    uint64_t cum_lo = 0;
    uint64_t cum_hi = 0;

    uint64_t width() const { return cum_hi - cum_lo; }
};

struct CodedStream {
    std::vector<uint8_t> bytes;
    uint64_t symbol_count = 0;
};

// 64-bit range coder, byte-wise renormalization, deferred-carry (0xFF run)
// output. Integer arithmetic only; byte streams are platform-independent.
class RangeEncoder {
public:
    void encode(FixedPointInterval iv);
    CodedStream finish();

    uint64_t symbol_count() const { return symbols_; }
    size_t bytes_emitted() const { return out_.size(); }

private:
    void shift_low();
    void propagate_carry();

    uint64_t low_ = 0;
    uint64_t range_ = ~0ull;
    std::vector<uint8_t> out_;
    uint64_t pending_ff_ = 0;
    int cache_ = -1;  // last shifted byte not yet emitted, -1 = none
    uint64_t symbols_ = 0;
    bool finished_ = false;
};

class RangeDecoder {
public:
    explicit RangeDecoder(const CodedStream& stream);
    RangeDecoder(std::span<const uint8_t> bytes, uint64_t symbol_count);

    // Current code point in [0, 2^48); the model maps it to a symbol.
    uint64_t target();
    void consume(FixedPointInterval iv);

    uint64_t symbols_remaining() const { return remaining_; }

private:
    uint8_t next_byte() { return pos_ < bytes_.size() ? bytes_[pos_++] : 0; }

    std::vector<uint8_t> bytes_;
    size_t pos_ = 0;
    uint64_t low_ = 0;
    uint64_t range_ = ~0ull;
    uint64_t code_ = 0;
    uint64_t remaining_ = 0;
};

}  // namespace ntc
