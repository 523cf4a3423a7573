#include "stego/solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "stego/errors.hpp"

namespace stego::opt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// KL(tilt_t(p) || p) in bits for t = u/(1+u), evaluated in log2 space.
// With l_j = log2 p_j, w_j = 2^(t*l_j - M), M = t*l_0 (entries sorted
// descending so l_0 is the max):
//   KL(t) = (t-1) * (sum w*l / sum w) - M - log2(sum w)
double tilt_kl(const prob::TokenDistribution& p, double t) {
  const auto& e = p.entries();
  const double shift = t * std::log2(e[0].prob);
  double s0 = 0.0, s1 = 0.0;
  for (const auto& tp : e) {
    const double l = std::log2(tp.prob);
    const double w = std::exp2(t * l - shift);
    s0 += w;
    s1 += w * l;
  }
  return (t - 1.0) * (s1 / s0) - shift - std::log2(s0);
}

prob::TokenDistribution tilt_build(const prob::TokenDistribution& p, double t) {
  const auto& e = p.entries();
  const double shift = t * std::log2(e[0].prob);
  double s0 = 0.0;
  std::vector<double> w(e.size());
  for (size_t j = 0; j < e.size(); ++j) {
    w[j] = std::exp2(t * std::log2(e[j].prob) - shift);
    s0 += w[j];
  }
  const double log_z = shift + std::log2(s0);
  std::vector<prob::TokenProb> raw(e.size());
  for (size_t j = 0; j < e.size(); ++j) {
    raw[j] = {e[j].vocab_index,
              std::exp2(t * std::log2(e[j].prob) - log_z)};
  }
  return prob::TokenDistribution::build(std::move(raw));
}

prob::TokenDistribution uniform_over(const prob::TokenDistribution& p) {
  const double q = 1.0 / static_cast<double>(p.support_size());
  std::vector<prob::TokenProb> raw(p.support_size());
  for (size_t j = 0; j < p.support_size(); ++j) raw[j] = {p.index(j), q};
  return prob::TokenDistribution::build(std::move(raw));
}

}  // namespace

void EmbedPolicy::validate() const {
  if (!(budget_scale >= 0.0) || budget_scale >= 0.2) {
    throw std::invalid_argument("budget scale C must lie in [0, 0.2)");
  }
  if (!(entropy_floor >= 0.0) || entropy_floor > 2.0) {
    throw std::invalid_argument("entropy floor alpha must lie in [0, 2]");
  }
  if (!(cutoff_eps >= 0.0) || cutoff_eps > 0.05) {
    throw std::invalid_argument("cutoff epsilon must lie in [0, 0.05]");
  }
  if (quant_bits < 2 || quant_bits > 60) {
    throw std::invalid_argument("precision k must lie in [2, 60]");
  }
  if (!(bisect_tol > 0.0)) {
    throw std::invalid_argument("bisection tolerance must be positive");
  }
  if (bisect_max_iter < 1) {
    throw std::invalid_argument("bisection iteration cap must be >= 1");
  }
  if (prefix_bits < 0 || prefix_bits > 20) {
    throw std::invalid_argument("prefix bits must lie in [0, 20]");
  }
  if (max_tokens < 1) {
    throw std::invalid_argument("max tokens must be >= 1");
  }
}

double max_kl_bits(const prob::TokenDistribution& p) {
  const double n = static_cast<double>(p.support_size());
  double acc = 0.0;
  for (const auto& e : p.entries()) acc += std::log2(1.0 / (n * e.prob));
  return acc / n;
}

prob::TokenDistribution tilt(const prob::TokenDistribution& p, double u) {
  if (!(u >= 0.0)) throw std::invalid_argument("tilt exponent u must be >= 0");
  if (std::isinf(u)) return p;
  if (u == 0.0) return uniform_over(p);
  return tilt_build(p, u / (1.0 + u));
}

TiltResult solve_tilt(const prob::TokenDistribution& p, double budget_bits,
                      double tol_bits, int max_iter) {
  // Bisect on t = u/(1+u): KL is max_kl_bits at t->0 and 0 at t->1,
  // strictly decreasing in between. Stop at half the external tolerance so
  // the reported kl_bits of the built distribution stays within tol.
  const double tol = tol_bits * 0.5;
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < max_iter; ++i) {
    const double t = 0.5 * (lo + hi);
    const double kl = tilt_kl(p, t);
    if (std::fabs(kl - budget_bits) <= tol) {
      TiltResult res;
      res.dist = tilt_build(p, t);
      res.u = t / (1.0 - t);
      res.achieved_kl = prob::kl_bits(res.dist, p);
      res.branch = TiltBranch::tilted;
      return res;
    }
    if (kl > budget_bits) {
      lo = t;
    } else {
      hi = t;
    }
  }
  std::ostringstream msg;
  msg << "tilt bisection did not reach tol " << tol_bits << " bits in "
      << max_iter << " steps; bracket t=[" << lo << ", " << hi
      << "], residual " << (tilt_kl(p, 0.5 * (lo + hi)) - budget_bits);
  throw ConvergenceFailure(msg.str());
}

TiltResult maximize_entropy(const prob::TokenDistribution& p, double budget_bits,
                            double tol_bits, int max_iter) {
  if (!(budget_bits >= 0.0)) {
    throw std::invalid_argument("KL budget must be >= 0");
  }
  if (budget_bits == 0.0) {
    return {p, kInf, 0.0, TiltBranch::unchanged};
  }
  if (budget_bits >= max_kl_bits(p)) {
    auto uni = uniform_over(p);
    const double kl = prob::kl_bits(uni, p);
    return {std::move(uni), 0.0, kl, TiltBranch::uniform};
  }
  return solve_tilt(p, budget_bits, tol_bits, max_iter);
}

double adaptive_budget(double entropy_bits, const EmbedPolicy& policy) {
  if (!(entropy_bits >= 0.0)) {
    throw std::invalid_argument("entropy must be >= 0");
  }
  return entropy_bits >= policy.entropy_floor ? policy.budget_scale * entropy_bits
                                              : 0.0;
}

TwoStageResult two_stage_optimize(const prob::TokenDistribution& p,
                                  double total_budget_bits, double epsilon,
                                  int quant_bits, double tol_bits, int max_iter) {
  if (!(total_budget_bits >= 0.0)) {
    throw std::invalid_argument("KL budget must be >= 0");
  }
  auto trunc = prob::truncate_tail(p, epsilon);
  const double cutoff =
      trunc.removed_mass == 0.0 ? 0.0 : prob::truncation_kl_bits(trunc.retained_mass);

  double remaining = total_budget_bits - cutoff;
  const bool clamped = remaining < 0.0;
  if (clamped) remaining = 0.0;

  TwoStageResult out;
  out.opt = maximize_entropy(trunc.dist, remaining, tol_bits, max_iter);
  out.quantized = prob::quantize(out.opt.dist, quant_bits);
  out.cutoff_kl = cutoff;
  out.retained_mass = trunc.retained_mass;
  out.budget_clamped = clamped;
  return out;
}

}  // namespace stego::opt
