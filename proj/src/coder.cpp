#include "stego/coder.hpp"

#include <algorithm>
#include <stdexcept>

#include "stego/errors.hpp"

namespace stego::ac {

namespace {

// Subinterval boundary for cumulative count c: low + floor(range*c/total).
// c = 0 maps to low and c = total to high, so slots tile [low, high).
uint64_t boundary(uint64_t low, uint64_t high, uint64_t c, uint64_t total) {
  const auto range = static_cast<unsigned __int128>(high - low);
  return low + static_cast<uint64_t>(range * c / total);
}

void check_register_health(const CoderState& st, const prob::QuantizedDistribution& dist) {
  if (dist.total() > kQuarter) {
    throw PrecisionTooLow("quantized total exceeds the coder register headroom");
  }
  if (st.high - st.low < dist.total()) {
    throw std::logic_error("coder interval narrower than the quantized total");
  }
}

}  // namespace

MessageWindow::MessageWindow(BitString bits) : bits_(std::move(bits)) {
  if (bits_.empty()) throw EmptyMessage("payload bit string is empty");
}

MessageWindow MessageWindow::from_bits(std::string_view text) {
  return MessageWindow(BitString::parse(text));
}

uint64_t MessageWindow::lo_numerator() const {
  if (bit_count() > 62) {
    throw std::logic_error("window too wide for an integer numerator");
  }
  uint64_t v = 0;
  for (size_t i = 0; i < bits_.size(); ++i) v = (v << 1) | static_cast<uint64_t>(bits_[i]);
  return v;
}

double MessageWindow::lo() const {
  double v = 0.0, w = 0.5;
  for (size_t i = 0; i < bits_.size(); ++i, w *= 0.5) {
    if (bits_[i]) v += w;
  }
  return v;
}

double MessageWindow::hi() const {
  double w = 1.0;
  for (size_t i = 0; i < bits_.size(); ++i) w *= 0.5;
  return lo() + w;
}

Embedder::Embedder(MessageWindow msg) : msg_(std::move(msg)) {
  for (int i = 0; i < kRegisterBits; ++i) {
    value_ = (value_ << 1) | static_cast<uint64_t>(tape_bit(tape_pos_++));
  }
}

int Embedder::tape_bit(uint64_t pos) const {
  if (pos < msg_.bit_count()) return msg_.bits()[pos];
  return pos == msg_.bit_count() ? 1 : 0;
}

uint32_t Embedder::step(const prob::QuantizedDistribution& dist) {
  check_register_health(st_, dist);
  const auto& cum = dist.cum_counts();
  const uint64_t total = dist.total();
  const auto range = static_cast<unsigned __int128>(st_.high - st_.low);

  // Largest cumulative count whose boundary is <= value, i.e. the slot
  // whose subinterval holds the payload midpoint.
  const auto scaled = static_cast<unsigned __int128>(value_ - st_.low) + 1;
  const auto freq = static_cast<uint64_t>((scaled * total - 1) / range);
  const size_t slot =
      static_cast<size_t>(std::upper_bound(cum.begin(), cum.end(), freq) - cum.begin());

  const uint64_t c_lo = slot ? cum[slot - 1] : 0;
  const uint64_t low0 = st_.low, high0 = st_.high;
  st_.low = boundary(low0, high0, c_lo, total);
  st_.high = boundary(low0, high0, cum[slot], total);
  st_.tokens += 1;
  renormalize();
  return dist.vocab_of(slot);
}

void Embedder::renormalize() {
  for (;;) {
    if (st_.high <= kHalf) {
      st_.bits_emitted += 1 + st_.pending_follow;
      st_.pending_follow = 0;
    } else if (st_.low >= kHalf) {
      st_.bits_emitted += 1 + st_.pending_follow;
      st_.pending_follow = 0;
      st_.low -= kHalf;
      st_.high -= kHalf;
      value_ -= kHalf;
    } else if (st_.low >= kQuarter && st_.high <= kHalf + kQuarter) {
      st_.pending_follow += 1;
      st_.low -= kQuarter;
      st_.high -= kQuarter;
      value_ -= kQuarter;
    } else {
      break;
    }
    st_.low <<= 1;
    st_.high <<= 1;
    value_ = (value_ << 1) | static_cast<uint64_t>(tape_bit(tape_pos_++));
  }
}

BitString Extractor::step(uint32_t vocab_index, const prob::QuantizedDistribution& dist) {
  check_register_health(st_, dist);
  const auto slot = dist.slot_of(vocab_index);
  if (!slot) {
    throw TokenNotInDistribution("token absent from the replayed distribution");
  }
  const auto& cum = dist.cum_counts();
  const uint64_t c_lo = *slot ? cum[*slot - 1] : 0;
  const size_t before = out_.size();

  const uint64_t low0 = st_.low, high0 = st_.high;
  st_.low = boundary(low0, high0, c_lo, dist.total());
  st_.high = boundary(low0, high0, cum[*slot], dist.total());
  st_.tokens += 1;
  renormalize();
  return out_.without_prefix(before);
}

void Extractor::emit(int bit) {
  out_.push_back(bit);
  for (; st_.pending_follow > 0; --st_.pending_follow) out_.push_back(1 - bit);
  st_.bits_emitted = out_.size();
}

void Extractor::renormalize() {
  for (;;) {
    if (st_.high <= kHalf) {
      emit(0);
    } else if (st_.low >= kHalf) {
      emit(1);
      st_.low -= kHalf;
      st_.high -= kHalf;
    } else if (st_.low >= kQuarter && st_.high <= kHalf + kQuarter) {
      st_.pending_follow += 1;
      st_.low -= kQuarter;
      st_.high -= kQuarter;
    } else {
      break;
    }
    st_.low <<= 1;
    st_.high <<= 1;
  }
}

}  // namespace stego::ac
