#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace stego::prob {

struct TokenProb {
  uint32_t vocab_index;
  double prob;
};

// Normalized next-token distribution over the nonzero-probability part of
// the vocabulary. Entries are sorted by descending probability, ties by
// ascending vocab index, so the slot order is a deterministic total order
// shared by encoder and decoder.
//
// Construction strips zeros, renormalizes by the actual sum, and drops
// probabilities below 2^-60 (they cannot survive quantization). Inputs
// already summing to 1 within 1e-9 are kept bit-identical, which makes
// build() idempotent.
class TokenDistribution {
public:
  // Empty shell; only build() produces a usable distribution.
  TokenDistribution() = default;

  // build_distribution: raw (vocab_index, prob) pairs in any order.
  // vocab_size is the full-vocabulary size N when the caller knows it;
  // 0 infers it from the largest index seen. Throws EmptySupport when no
  // probability is strictly positive, std::invalid_argument on
  // negative/non-finite input or duplicate index.
  static TokenDistribution build(std::vector<TokenProb> raw, uint32_t vocab_size = 0);

  // Convenience: probabilities assigned vocab indices 0..n-1.
  static TokenDistribution from_probs(const std::vector<double>& probs);

  const std::vector<TokenProb>& entries() const { return entries_; }
  size_t support_size() const { return entries_.size(); }
  uint32_t vocab_size() const { return vocab_size_; }

  uint32_t index(size_t slot) const { return entries_[slot].vocab_index; }
  double prob(size_t slot) const { return entries_[slot].prob; }

private:
  std::vector<TokenProb> entries_;
  uint32_t vocab_size_ = 0;
};

// -sum p log2 p, in [0, log2 N].
double entropy_bits(const TokenDistribution& p);

// sum q log2(q/p) over q's support, matched by vocab index.
// Throws SupportMismatch when q has mass where p has none.
double kl_bits(const TokenDistribution& q, const TokenDistribution& p);

struct TruncationResult {
  TokenDistribution dist;
  double removed_mass = 0.0;   // actual mass dropped, <= epsilon
  double retained_mass = 1.0;  // exact renormalization denominator
};

// Keeps the smallest slot-order prefix whose mass reaches 1-epsilon and
// renormalizes by the actual retained mass (not by 1-epsilon), so the
// truncation KL equals -log2(retained_mass) exactly. epsilon = 0, or a
// prefix covering the whole support, returns p unchanged.
TruncationResult truncate_tail(const TokenDistribution& p, double epsilon);

// KL of an exact-mass cutoff against its original: -log2(retained_mass).
double truncation_kl_bits(double retained_mass);

// Integer form consumed by the coder: cumulative counts over a power-of-two
// total. Both parties must derive bit-identical intervals from it.
class QuantizedDistribution {
public:
  const std::vector<uint64_t>& cum_counts() const { return cum_; }
  uint64_t total() const { return total_; }
  size_t slots() const { return cum_.size(); }
  uint32_t vocab_of(size_t slot) const { return index_map_[slot]; }
  uint64_t count(size_t slot) const {
    return cum_[slot] - (slot ? cum_[slot - 1] : 0);
  }
  std::optional<size_t> slot_of(uint32_t vocab_index) const;

private:
  friend QuantizedDistribution quantize(const TokenDistribution&, int);
  std::vector<uint64_t> cum_;
  std::vector<uint32_t> index_map_;
  std::vector<std::pair<uint32_t, size_t>> lookup_;  // sorted by vocab index
  uint64_t total_ = 0;
};

// Deterministic apportionment of 2^precision_bits counts: every slot gets
// one count up front, the rest go by floor + largest remainder (ties by
// ascending vocab index). Throws PrecisionTooLow when 2^k < support size.
QuantizedDistribution quantize(const TokenDistribution& q, int precision_bits);

}  // namespace stego::prob
