#pragma once

// Brute-force entropy maximization under a KL ball, independent of the
// closed-form production path. Dense simplex grid seeds a pairwise
// mass-exchange hill climb; the problem is concave over a convex set, so
// the climb converges to the optimum from any feasible start.

#include <cmath>
#include <vector>

#include "stego/distribution.hpp"

namespace testutil {

namespace detail {

inline double entropy_of(const std::vector<double>& q) {
  double h = 0.0;
  for (double v : q) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return h;
}

inline double kl_of(const std::vector<double>& q, const std::vector<double>& p) {
  double kl = 0.0;
  for (size_t i = 0; i < q.size(); ++i) {
    if (q[i] > 0.0) kl += q[i] * std::log2(q[i] / p[i]);
  }
  return kl;
}

}  // namespace detail

inline double brute_force_entropy(const stego::prob::TokenDistribution& p,
                                  double delta, double grid_step = 0.02) {
  const size_t n = p.support_size();
  std::vector<double> pv(n);
  for (size_t i = 0; i < n; ++i) pv[i] = p.prob(i);

  std::vector<double> best = pv;  // p itself is always feasible (KL = 0)
  double best_h = detail::entropy_of(pv);

  auto consider = [&](const std::vector<double>& q) {
    if (detail::kl_of(q, pv) > delta) return;
    const double h = detail::entropy_of(q);
    if (h > best_h) {
      best_h = h;
      best = q;
    }
  };

  // Coarse simplex grid, n <= 4 only.
  const int steps = static_cast<int>(1.0 / grid_step);
  if (n == 2) {
    for (int a = 1; a < steps; ++a) {
      consider({a * grid_step, 1.0 - a * grid_step});
    }
  } else if (n == 3) {
    for (int a = 1; a < steps; ++a)
      for (int b = 1; a + b < steps; ++b)
        consider({a * grid_step, b * grid_step, 1.0 - (a + b) * grid_step});
  } else if (n == 4) {
    for (int a = 1; a < steps; ++a)
      for (int b = 1; a + b < steps; ++b)
        for (int c = 1; a + b + c < steps; ++c)
          consider({a * grid_step, b * grid_step, c * grid_step,
                    1.0 - (a + b + c) * grid_step});
  }

  // Pairwise exchange refinement with shrinking step.
  for (double h_step = grid_step; h_step > 1e-10; h_step *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (size_t a = 0; a < n; ++a) {
        for (size_t b = 0; b < n; ++b) {
          if (a == b || best[b] <= h_step) continue;
          std::vector<double> q = best;
          q[a] += h_step;
          q[b] -= h_step;
          if (detail::kl_of(q, pv) > delta) continue;
          const double h = detail::entropy_of(q);
          if (h > best_h + 1e-15) {
            best_h = h;
            best = q;
            improved = true;
          }
        }
      }
    }
  }
  return best_h;
}

}  // namespace testutil
