#include "stego/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "stego/errors.hpp"

namespace stego::prob {

namespace {

constexpr double kMinProb = 0x1p-60;  // stripped after normalization

bool slot_order(const TokenProb& a, const TokenProb& b) {
  if (a.prob != b.prob) return a.prob > b.prob;
  return a.vocab_index < b.vocab_index;
}

}  // namespace

TokenDistribution TokenDistribution::build(std::vector<TokenProb> raw, uint32_t vocab_size) {
  std::vector<TokenProb> kept;
  kept.reserve(raw.size());
  uint32_t max_index = 0;
  double sum = 0.0;
  for (const TokenProb& e : raw) {
    if (!std::isfinite(e.prob) || e.prob < 0.0) {
      throw std::invalid_argument("probabilities must be finite and >= 0");
    }
    max_index = std::max(max_index, e.vocab_index);
    if (e.prob > 0.0) {
      kept.push_back(e);
      sum += e.prob;
    }
  }
  if (kept.empty() || sum <= 0.0) {
    throw EmptySupport("distribution has no positive-probability token");
  }

  if (std::fabs(sum - 1.0) > 1e-9) {
    for (TokenProb& e : kept) e.prob /= sum;
  }
  std::erase_if(kept, [](const TokenProb& e) { return e.prob < kMinProb; });
  if (kept.empty()) {
    throw EmptySupport("all probabilities below representable floor");
  }

  std::sort(kept.begin(), kept.end(), slot_order);
  for (size_t i = 1; i < kept.size(); ++i) {
    if (kept[i].vocab_index == kept[i - 1].vocab_index) {
      throw std::invalid_argument("duplicate vocab index in distribution");
    }
  }

  TokenDistribution out;
  out.entries_ = std::move(kept);
  out.vocab_size_ = vocab_size ? vocab_size : max_index + 1;
  if (out.vocab_size_ <= max_index) {
    throw std::invalid_argument("vocab_size below the largest vocab index");
  }
  return out;
}

TokenDistribution TokenDistribution::from_probs(const std::vector<double>& probs) {
  std::vector<TokenProb> raw;
  raw.reserve(probs.size());
  for (size_t i = 0; i < probs.size(); ++i) {
    raw.push_back({static_cast<uint32_t>(i), probs[i]});
  }
  return build(std::move(raw));
}

double entropy_bits(const TokenDistribution& p) {
  double h = 0.0;
  for (const TokenProb& e : p.entries()) {
    h -= e.prob * std::log2(e.prob);
  }
  return h;
}

double kl_bits(const TokenDistribution& q, const TokenDistribution& p) {
  std::unordered_map<uint32_t, double> pmap;
  pmap.reserve(p.support_size());
  for (const TokenProb& e : p.entries()) pmap.emplace(e.vocab_index, e.prob);

  double kl = 0.0;
  for (const TokenProb& e : q.entries()) {
    auto it = pmap.find(e.vocab_index);
    if (it == pmap.end()) {
      throw SupportMismatch("Q has mass outside P's support");
    }
    kl += e.prob * std::log2(e.prob / it->second);
  }
  return kl;
}

TruncationResult truncate_tail(const TokenDistribution& p, double epsilon) {
  if (epsilon < 0.0 || epsilon >= 1.0) {
    throw std::invalid_argument("epsilon must be in [0, 1)");
  }
  const auto& entries = p.entries();
  if (epsilon == 0.0) {
    return {p, 0.0, 1.0};
  }

  const double target = 1.0 - epsilon;
  double running = 0.0;
  size_t keep = entries.size();
  for (size_t i = 0; i < entries.size(); ++i) {
    running += entries[i].prob;
    if (running >= target) {
      keep = i + 1;
      break;
    }
  }
  if (keep == entries.size()) {
    return {p, 0.0, 1.0};
  }

  double retained = 0.0, removed = 0.0;
  std::vector<TokenProb> raw(entries.begin(), entries.begin() + static_cast<ptrdiff_t>(keep));
  for (const TokenProb& e : raw) retained += e.prob;
  for (size_t i = keep; i < entries.size(); ++i) removed += entries[i].prob;

  return {TokenDistribution::build(std::move(raw)), removed, retained};
}

double truncation_kl_bits(double retained_mass) {
  if (!(retained_mass > 0.0) || retained_mass > 1.0) {
    throw std::invalid_argument("retained mass must be in (0, 1]");
  }
  return -std::log2(retained_mass);
}

std::optional<size_t> QuantizedDistribution::slot_of(uint32_t vocab_index) const {
  auto it = std::lower_bound(lookup_.begin(), lookup_.end(),
                             std::make_pair(vocab_index, size_t{0}),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
  if (it == lookup_.end() || it->first != vocab_index) return std::nullopt;
  return it->second;
}

QuantizedDistribution quantize(const TokenDistribution& q, int precision_bits) {
  if (precision_bits < 1 || precision_bits > 60) {
    throw std::invalid_argument("precision_bits must be in [1, 60]");
  }
  const uint64_t total = uint64_t{1} << precision_bits;
  const size_t n = q.support_size();
  if (total < n) {
    throw PrecisionTooLow("2^k below support size, a retained token would quantize to zero");
  }

  // One count per slot keeps truncation survivors alive; the remaining
  // total-n counts are apportioned by floor + largest remainder.
  const double spread = static_cast<double>(total - n);
  std::vector<uint64_t> counts(n, 1);
  std::vector<std::pair<double, size_t>> rema(n);
  uint64_t assigned = 0;
  for (size_t i = 0; i < n; ++i) {
    const double ideal = q.prob(i) * spread;
    const auto base = static_cast<uint64_t>(ideal);
    counts[i] += base;
    assigned += base;
    rema[i] = {ideal - static_cast<double>(base), i};
  }
  std::sort(rema.begin(), rema.end(), [&q](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return q.index(a.second) < q.index(b.second);
  });
  if (assigned <= total - n) {
    uint64_t leftover = (total - n) - assigned;
    for (size_t i = 0; leftover > 0 && i < n; ++i, --leftover) {
      counts[rema[i].second] += 1;
    }
  } else {
    // Accumulated rounding in the ideals overshot the budget; take the
    // excess back from the smallest remainders, keeping every count >= 1.
    uint64_t excess = assigned - (total - n);
    for (size_t i = n; excess > 0 && i > 0; --i) {
      size_t slot = rema[i - 1].second;
      if (counts[slot] >= 2) {
        counts[slot] -= 1;
        --excess;
      }
    }
  }

  QuantizedDistribution out;
  out.total_ = total;
  out.cum_.resize(n);
  out.index_map_.resize(n);
  uint64_t cum = 0;
  for (size_t i = 0; i < n; ++i) {
    cum += counts[i];
    out.cum_[i] = cum;
    out.index_map_[i] = q.index(i);
    out.lookup_.emplace_back(q.index(i), i);
  }
  std::sort(out.lookup_.begin(), out.lookup_.end());
  return out;
}

}  // namespace stego::prob
