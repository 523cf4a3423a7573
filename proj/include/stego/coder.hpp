#pragma once

#include <cstdint>

#include "stego/bits.hpp"
#include "stego/distribution.hpp"

namespace stego::ac {

inline constexpr int kRegisterBits = 62;
inline constexpr uint64_t kFull = uint64_t{1} << kRegisterBits;
inline constexpr uint64_t kHalf = kFull >> 1;
inline constexpr uint64_t kQuarter = kFull >> 2;

// Payload as a half-open dyadic interval: [0.bits, 0.bits + 2^-n) in
// binary. The steering point used during embedding is the interval
// midpoint 0.bits1, which lies strictly inside.
class MessageWindow {
public:
  explicit MessageWindow(BitString bits);  // throws EmptyMessage
  static MessageWindow from_bits(std::string_view text);

  const BitString& bits() const { return bits_; }
  size_t bit_count() const { return bits_.size(); }

  // Exact numerator of the low endpoint over 2^bit_count(). Only for
  // windows narrow enough to fit the register (bit_count <= 62).
  uint64_t lo_numerator() const;
  // Endpoints as doubles; exact while bit_count() <= 52.
  double lo() const;
  double hi() const;

private:
  BitString bits_;
};

// Integer coder registers. The half-open token interval is
// [low, high) / kFull; width stays above kQuarter after renormalization,
// so any quantized total up to kQuarter partitions it injectively.
struct CoderState {
  uint64_t low = 0;
  uint64_t high = kFull;
  uint64_t pending_follow = 0;  // straddle bits awaiting resolution
  uint64_t bits_emitted = 0;    // payload bits fully determined so far
  uint64_t tokens = 0;
};

// Embedding direction: selects, for each quantized distribution, the token
// whose subinterval contains the payload midpoint, and narrows the
// registers to it. complete() turns true exactly when the token interval
// has converged inside the payload window, i.e. when a replaying extractor
// will have produced every payload bit.
class Embedder {
public:
  explicit Embedder(MessageWindow msg);

  // One token choice; returns the selected vocab index.
  uint32_t step(const prob::QuantizedDistribution& dist);
  bool complete() const { return st_.bits_emitted >= msg_.bit_count(); }

  const CoderState& state() const { return st_; }
  const MessageWindow& message() const { return msg_; }

private:
  int tape_bit(uint64_t pos) const;  // payload bits, then 1, then zeros
  void renormalize();

  MessageWindow msg_;
  CoderState st_;
  uint64_t value_ = 0;     // next 62 midpoint bits at the current scale
  uint64_t tape_pos_ = 0;
};

// Extraction direction: replays token choices against the identical
// distribution sequence and emits every bit the narrowing determines.
// Bits are append-only; an embed run's payload is a prefix of them.
class Extractor {
public:
  Extractor() = default;

  // Returns the bits newly determined by this token.
  BitString step(uint32_t vocab_index, const prob::QuantizedDistribution& dist);

  const BitString& bits() const { return out_; }
  const CoderState& state() const { return st_; }

private:
  void emit(int bit);
  void renormalize();

  CoderState st_;
  BitString out_;
};

}  // namespace stego::ac
