#include "stego/bits.hpp"

#include <stdexcept>

namespace stego {

BitString BitString::parse(std::string_view text) {
  BitString out;
  out.bits_.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') {
      throw std::invalid_argument("bit string may contain only '0' and '1'");
    }
    out.bits_.push_back(static_cast<uint8_t>(c - '0'));
  }
  return out;
}

BitString BitString::from_bytes(const std::vector<uint8_t>& bytes, size_t nbits) {
  if (nbits > bytes.size() * 8) {
    throw std::invalid_argument("nbits exceeds available bytes");
  }
  BitString out;
  out.bits_.reserve(nbits);
  for (size_t i = 0; i < nbits; ++i) {
    out.bits_.push_back((bytes[i / 8] >> (7 - i % 8)) & 1u);
  }
  return out;
}

BitString BitString::from_uint(uint64_t value, int width) {
  if (width < 0 || width > 64) throw std::invalid_argument("width out of range");
  BitString out;
  out.bits_.reserve(static_cast<size_t>(width));
  for (int i = width - 1; i >= 0; --i) {
    out.bits_.push_back(static_cast<uint8_t>((value >> i) & 1u));
  }
  return out;
}

std::vector<uint8_t> BitString::to_bytes() const {
  std::vector<uint8_t> out((bits_.size() + 7) / 8, 0);
  for (size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) out[i / 8] |= static_cast<uint8_t>(1u << (7 - i % 8));
  }
  return out;
}

void BitString::push_back(int bit) {
  bits_.push_back(static_cast<uint8_t>(bit ? 1 : 0));
}

void BitString::append(const BitString& other) {
  bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end());
}

BitString BitString::prefix(size_t n) const {
  BitString out;
  if (n > bits_.size()) n = bits_.size();
  out.bits_.assign(bits_.begin(), bits_.begin() + static_cast<ptrdiff_t>(n));
  return out;
}

BitString BitString::without_prefix(size_t n) const {
  BitString out;
  if (n > bits_.size()) n = bits_.size();
  out.bits_.assign(bits_.begin() + static_cast<ptrdiff_t>(n), bits_.end());
  return out;
}

std::string BitString::str() const {
  std::string s;
  s.reserve(bits_.size());
  for (uint8_t b : bits_) s.push_back(b ? '1' : '0');
  return s;
}

}  // namespace stego
