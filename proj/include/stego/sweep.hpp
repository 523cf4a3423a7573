#pragma once

#include <string>
#include <vector>

#include "stego/model.hpp"
#include "stego/pipeline.hpp"
#include "stego/solver.hpp"

namespace stego::bench {

// Parameter grid for the bits-vs-KL tradeoff harness. Every (C, alpha,
// epsilon) grid point runs runs_per_point fixed-budget sessions;
// baseline_eps adds truncation-only rows (C = 0, alpha = 0) for the same
// budget. Run r draws the same prompt and payload at every grid point.
struct SweepSpec {
  std::vector<double> c_grid{0.0, 0.025, 0.05, 0.075};
  std::vector<double> alpha_grid{0.5};
  std::vector<double> eps_grid{0.01};
  std::vector<double> baseline_eps{0.005, 0.01, 0.02, 0.05};
  int token_budget = 25;
  int runs_per_point = 100;
  uint64_t seed = 1;
  int payload_bits = 4096;  // deliberately more than the budget can carry

  static SweepSpec from_json(const std::string& text);       // throws ParseError
  static SweepSpec from_json_file(const std::string& path);  // throws ParseError
  void validate(const opt::EmbedPolicy& base) const;
};

struct SweepRow {
  double c = 0.0;
  double alpha = 0.0;
  double eps = 0.0;
  int runs = 0;
  double mean_bytes = 0.0;
  double mean_kl_bits = 0.0;
  double mean_bits_per_token = 0.0;
  double stderr_bytes = 0.0;
};

// Deterministic for a fixed spec: grid rows in C x alpha x epsilon order,
// then the baseline rows.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const lm::TokenModel& model,
                                const opt::EmbedPolicy& base_policy);

// Header: C,alpha,epsilon,runs,mean_bytes,mean_kl_bits,mean_bits_per_token,stderr_bytes
std::string to_csv(const std::vector<SweepRow>& rows);

// Renders a metrics JSON document as a per-token table with totals.
// Re-checks the additive KL split row by row. Throws ParseError.
std::string analyze_metrics(const std::string& metrics_json);

}  // namespace stego::bench
