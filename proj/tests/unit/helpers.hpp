#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "stego/distribution.hpp"

namespace testutil {

// Lognormal-ish random distribution; skew > 1 makes it peakier and mixes
// in near-floor tail probabilities.
inline stego::prob::TokenDistribution random_dist(std::mt19937_64& rng, size_t n,
                                                  double skew = 1.0) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<stego::prob::TokenProb> raw(n);
  for (size_t i = 0; i < n; ++i) {
    double u = uni(rng);
    if (u <= 0.0) u = 0.5;
    raw[i] = {static_cast<uint32_t>(i), std::pow(u, skew) + 1e-12};
  }
  return stego::prob::TokenDistribution::build(std::move(raw));
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string corpus_text() {
  return read_file(std::string(STEGO_DATA_DIR) + "/corpus.txt");
}

}  // namespace testutil
