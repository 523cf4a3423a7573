#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace stego {

// Bit sequence, most significant bit first. Each element is 0 or 1.
class BitString {
public:
  BitString() = default;

  // Parses a string of '0'/'1' characters.
  static BitString parse(std::string_view text);

  // Takes the first nbits of the byte sequence, MSB of bytes[0] first.
  static BitString from_bytes(const std::vector<uint8_t>& bytes, size_t nbits);

  // Low `width` bits of value, most significant first.
  static BitString from_uint(uint64_t value, int width);

  // Packs MSB-first into bytes; a partial trailing byte is zero-padded.
  std::vector<uint8_t> to_bytes() const;

  void push_back(int bit);
  void append(const BitString& other);
  BitString prefix(size_t n) const;
  // Drops the first n bits.
  BitString without_prefix(size_t n) const;

  size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  int operator[](size_t i) const { return bits_[i]; }

  std::string str() const;

  bool operator==(const BitString&) const = default;

private:
  std::vector<uint8_t> bits_;
};

}  // namespace stego
