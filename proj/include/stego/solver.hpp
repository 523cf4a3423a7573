#pragma once

#include "stego/distribution.hpp"

namespace stego::opt {

// Session-level embedding knobs. The per-token KL budget is
// budget_scale * H(P) when H(P) >= entropy_floor, else 0; cutoff_eps
// truncates the vocabulary tail before optimization; quant_bits fixes the
// coder count total at 2^quant_bits.
struct EmbedPolicy {
  double budget_scale = 0.05;   // C, valid range [0, 0.2)
  double entropy_floor = 0.5;   // alpha, bits, valid range [0, 2]
  double cutoff_eps = 0.01;     // epsilon, valid range [0, 0.05]
  int quant_bits = 30;          // k
  double bisect_tol = 1e-9;     // bits
  int bisect_max_iter = 200;
  int prefix_bits = 4;          // |B| retry prefix length
  int max_tokens = 4096;        // per-attempt stall guard

  void validate() const;  // throws std::invalid_argument
};

enum class TiltBranch { tilted, uniform, unchanged };

struct TiltResult {
  prob::TokenDistribution dist;
  double u = 0.0;            // exponent parameter; +inf when unchanged
  double achieved_kl = 0.0;  // bits, against the solver's input
  TiltBranch branch = TiltBranch::unchanged;
};

// Largest KL the tilt family can spend: KL(uniform || p). Zero iff p is
// uniform; budgets at or above it make the entropy-optimal choice uniform.
double max_kl_bits(const prob::TokenDistribution& p);

// Power tilt q_j proportional to p_j^(u/(1+u)). u = 0 gives uniform,
// u = +inf returns p unchanged. Computed in log2 space with a max-shifted
// normalizer so probabilities near 2^-60 survive.
prob::TokenDistribution tilt(const prob::TokenDistribution& p, double u);

// Finds the tilt whose KL against p equals budget_bits, by bisection on
// t = u/(1+u) in (0, 1). Requires 0 < budget_bits < max_kl_bits(p).
// Throws ConvergenceFailure (with bracket and residual) past max_iter.
TiltResult solve_tilt(const prob::TokenDistribution& p, double budget_bits,
                      double tol_bits = 1e-9, int max_iter = 200);

// Entropy-maximal distribution within a KL budget of p: returns p itself
// at budget 0, uniform at or beyond max_kl_bits(p), the solved tilt
// otherwise.
TiltResult maximize_entropy(const prob::TokenDistribution& p, double budget_bits,
                            double tol_bits = 1e-9, int max_iter = 200);

// Per-token budget rule: budget_scale * entropy when the entropy clears
// the floor, else zero.
double adaptive_budget(double entropy_bits, const EmbedPolicy& policy);

struct TwoStageResult {
  TiltResult opt;  // optimization stage, measured against the truncated dist
  prob::QuantizedDistribution quantized;
  double cutoff_kl = 0.0;      // bits spent by truncation: -log2(retained)
  double retained_mass = 1.0;
  bool budget_clamped = false; // truncation alone exceeded the total budget
};

// Truncate-then-optimize split of one total KL budget. The optimization
// stage gets max(0, total - cutoff_kl); the two stages' divergences add
// up to the divergence against the original distribution.
TwoStageResult two_stage_optimize(const prob::TokenDistribution& p,
                                  double total_budget_bits, double epsilon,
                                  int quant_bits, double tol_bits = 1e-9,
                                  int max_iter = 200);

}  // namespace stego::opt
