#include "ntc/coder.hpp"

#include <stdexcept>

namespace ntc {

namespace {
constexpr uint64_t kRenormBound = 1ull << 56;  // range stays >= 2^56 between symbols
}

void RangeEncoder::propagate_carry() {
    // The deferred tail is `cache` followed by pending_ff 0xFF bytes; adding
    // one turns it into (cache+1) followed by zeros, which is final output.
    // A carry with no cached byte would overflow the whole stream, which the
    // coding invariant low + range <= 1 rules out.
    if (cache_ < 0) throw std::logic_error("range coder: carry with empty cache");
    out_.push_back(static_cast<uint8_t>(cache_ + 1));
    for (; pending_ff_ > 0; --pending_ff_) out_.push_back(0x00);
    cache_ = -1;
}

void RangeEncoder::shift_low() {
    const uint8_t b = static_cast<uint8_t>(low_ >> 56);
    if (b == 0xFF) {
        ++pending_ff_;
    } else {
        if (cache_ >= 0) out_.push_back(static_cast<uint8_t>(cache_));
        for (; pending_ff_ > 0; --pending_ff_) out_.push_back(0xFF);
        cache_ = b;
    }
    low_ <<= 8;
}

void RangeEncoder::encode(FixedPointInterval iv) {
    if (finished_) throw std::logic_error("range coder: encode after finish");
    if (iv.cum_lo >= iv.cum_hi || iv.cum_hi > kProbScale)
        throw std::logic_error("range coder: invalid interval");
    const uint64_t r = range_ >> kProbBits;
    const uint64_t add = r * iv.cum_lo;
    const uint64_t new_low = low_ + add;
    if (new_low < low_) propagate_carry();
    low_ = new_low;
    range_ = r * iv.width();
    while (range_ < kRenormBound) {
        shift_low();
        range_ <<= 8;
    }
    ++symbols_;
}

CodedStream RangeEncoder::finish() {
    if (finished_) throw std::logic_error("range coder: finish called twice");
    finished_ = true;
    // Pick the multiple of 2^56 inside [low, low+range); range >= 2^56
    // guarantees one exists. Its trailing bytes are all zero, which matches
    // the decoder's zero padding, so a single byte of it disambiguates.
    uint64_t v = (low_ + (kRenormBound - 1)) & ~(kRenormBound - 1);
    if (v < low_) propagate_carry();  // rounding wrapped past 2^64
    low_ = v;
    shift_low();
    if (cache_ >= 0) out_.push_back(static_cast<uint8_t>(cache_));
    for (; pending_ff_ > 0; --pending_ff_) out_.push_back(0xFF);
    cache_ = -1;
    return CodedStream{std::move(out_), symbols_};
}

RangeDecoder::RangeDecoder(const CodedStream& stream)
    : RangeDecoder(stream.bytes, stream.symbol_count) {}

RangeDecoder::RangeDecoder(std::span<const uint8_t> bytes, uint64_t symbol_count)
    : bytes_(bytes.begin(), bytes.end()), remaining_(symbol_count) {
    for (int i = 0; i < 8; ++i) code_ = (code_ << 8) | next_byte();
}

uint64_t RangeDecoder::target() {
    if (remaining_ == 0) throw std::runtime_error("range coder: stream exhausted");
    const uint64_t r = range_ >> kProbBits;
    uint64_t t = (code_ - low_) / r;
    if (t >= kProbScale) t = kProbScale - 1;  // corrupted input lands on the last symbol
    return t;
}

void RangeDecoder::consume(FixedPointInterval iv) {
    if (remaining_ == 0) throw std::runtime_error("range coder: stream exhausted");
    if (iv.cum_lo >= iv.cum_hi || iv.cum_hi > kProbScale)
        throw std::logic_error("range coder: invalid interval");
    const uint64_t r = range_ >> kProbBits;
    low_ += r * iv.cum_lo;  // mirrors the encoder, including wrap-around
    range_ = r * iv.width();
    while (range_ < kRenormBound) {
        low_ <<= 8;
        code_ = (code_ << 8) | next_byte();
        range_ <<= 8;
    }
    --remaining_;
}

}  // namespace ntc
