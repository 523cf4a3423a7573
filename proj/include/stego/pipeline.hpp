#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stego/bits.hpp"
#include "stego/model.hpp"
#include "stego/solver.hpp"
#include "stego/tokenizer.hpp"

namespace stego::pipeline {

// Session configuration block emitted beside every stego text. Decoding
// refuses to run when the local setup does not reproduce it.
struct SessionMeta {
  std::string model_id;
  std::string version;
  std::string tokenizer_id;
  double budget_scale = 0.0;
  double entropy_floor = 0.0;
  double cutoff_eps = 0.0;
  int quant_bits = 0;
  uint64_t payload_len = 0;  // |B| + |S| in bits
  int prefix_len = 0;        // |B|

  std::string to_json() const;
  static SessionMeta from_json(const std::string& text);  // throws ParseError
  bool operator==(const SessionMeta&) const = default;
};

SessionMeta make_meta(const lm::TokenModel& model, const lm::Tokenizer& tk,
                      const opt::EmbedPolicy& policy, uint64_t payload_len);

// Throws MetadataMismatch naming the first differing field.
void verify_metadata(const SessionMeta& local, const SessionMeta& sidecar);

struct PerTokenMetrics {
  double entropy_full = 0.0;     // H of the full pre-truncation distribution
  double delta_i = 0.0;          // adaptive budget granted this token
  double cutoff_cost = 0.0;      // truncation KL, bits
  double optimization_kl = 0.0;  // tilt KL against the truncated dist
  double total_kl = 0.0;         // cutoff_cost + optimization_kl
  double quant_deviation = 0.0;  // max |count/total - q| this token
  uint32_t bits_resolved = 0;    // payload bits determined by this token
  bool budget_clamped = false;
};

struct StegoResult {
  lm::TokenSeq tokens;
  std::string text;
  std::vector<PerTokenMetrics> metrics;
  BitString prefix_used;  // the retry prefix B that verified
  uint32_t attempts = 0;
  SessionMeta meta;
};

// Raw embedding loop without retry or verification; the sweep harness and
// the retry driver both sit on top of it.
struct SessionOutcome {
  lm::TokenSeq tokens;
  std::vector<PerTokenMetrics> metrics;
  bool completed = false;
  uint64_t bits_resolved = 0;
};
SessionOutcome run_embed_session(const lm::TokenSeq& prompt_tokens,
                                 const BitString& payload,
                                 const opt::EmbedPolicy& policy,
                                 const lm::TokenModel& model,
                                 size_t max_tokens,
                                 bool stop_when_complete = true);

// Embeds secret bits into generated tokens. Iterates the 2^prefix_bits
// retry prefixes in ascending order; each candidate is verified by decoding
// the detokenized-then-retokenized text (the receiver's exact view) and the
// first verified result is returned. Throws UnembeddableMessage when every
// candidate fails.
StegoResult encode(const std::string& prompt_text, const BitString& secret,
                   const opt::EmbedPolicy& policy, const lm::TokenModel& model,
                   const lm::Tokenizer& tk);

// Recovers the secret from stego text: retokenizes, replays the per-token
// distribution construction, extracts payload_len bits and strips the
// prefix_bits retry prefix. Throws DesyncError when the replay diverges.
BitString decode(const std::string& prompt_text, const std::string& stego_text,
                 uint64_t payload_len, const opt::EmbedPolicy& policy,
                 const lm::TokenModel& model, const lm::Tokenizer& tk);

// Smallest retry-prefix length |B| >= 1 such that 2^|B| independent
// attempts reach overall success probability 1 - 1e-8 when a payload of
// n bits fails with probability n * per_bit_error_rate per attempt.
// Throws TargetUnreachable when per_bit_error_rate * secret_len >= 1.
int choose_prefix_length(uint64_t secret_len_bits, double per_bit_error_rate);

// Serialized metrics report: session meta, per-token rows, summary.
std::string metrics_to_json(const StegoResult& result);

// Empirical retokenization-failure measurement: runs single-candidate
// sessions (no retry) over seeded random prompts and secrets and counts
// round-trip failures.
struct MismatchCalibration {
  uint64_t sessions = 0;
  uint64_t failures = 0;
  uint64_t stalls = 0;
  double per_run_rate = 0.0;
  double per_bit_rate = 0.0;
};
MismatchCalibration measure_mismatch_rate(const lm::TokenModel& model,
                                          const lm::Tokenizer& tk,
                                          const opt::EmbedPolicy& policy,
                                          size_t secret_bits, size_t sessions,
                                          uint64_t seed);

// Deterministic per-run seed derivation shared by sweep and calibration.
uint64_t mix_seed(uint64_t master, uint64_t run);

}  // namespace stego::pipeline
