#pragma once

// Fixed-to-fixed mapping between k uniform bits and N shaped amplitudes.
//
// Bit placement is depth-first: the top LUT reads the first k_L bits, then
// each emitted virtual amplitude, left to right, expands its subtree fully
// before its right sibling. Within a LUT the k_l bits are a big-endian rank.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hidm/error.hpp"
#include "hidm/structure.hpp"

namespace hidm {

using BitBlock = std::vector<std::uint8_t>;        // one 0/1 value per entry
using AmplitudeBlock = std::vector<std::uint8_t>;  // amplitude values, e.g. 1 or 3

namespace detail {

inline std::uint64_t read_rank(std::span<const std::uint8_t> bits, std::uint64_t offset, std::size_t width) {
  std::uint64_t r = 0;
  for (std::size_t i = 0; i < width; ++i) r = (r << 1) | (bits[offset + i] & 1u);
  return r;
}

inline void write_rank(std::span<std::uint8_t> bits, std::uint64_t offset, std::size_t width, std::uint64_t rank) {
  for (std::size_t i = 0; i < width; ++i) bits[offset + i] = static_cast<std::uint8_t>((rank >> (width - 1 - i)) & 1u);
}

}  // namespace detail

inline AmplitudeBlock encode(const HidmStructure& s, std::span<const std::uint8_t> bits) {
  const auto& v = s.vectors();
  if (bits.size() != v.total_bits)
    throw SizeError("bit block has " + std::to_string(bits.size()) + " bits, structure expects " +
                    std::to_string(v.total_bits));
  const std::size_t L = s.layer_count();

  const Lut& top = s.lut(L - 1, 0);
  const auto top_seq = top.sequence(detail::read_rank(bits, 0, v.k[L - 1]));
  std::vector<std::uint16_t> current(top_seq.begin(), top_seq.end());
  std::vector<std::uint16_t> next;

  for (std::size_t l = L - 1; l-- > 0;) {
    const Layer& layer = s.layer(l);
    const auto& offsets = s.bit_offsets(l);
    next.resize(current.size() * layer.block);
    for (std::size_t j = 0; j < current.size(); ++j) {
      const auto seq = layer.luts[current[j]].sequence(detail::read_rank(bits, offsets[j], layer.bits));
      std::copy(seq.begin(), seq.end(), next.begin() + static_cast<std::ptrdiff_t>(j * layer.block));
    }
    current.swap(next);
  }

  AmplitudeBlock out(current.size());
  for (std::size_t i = 0; i < current.size(); ++i)
    out[i] = static_cast<std::uint8_t>(s.alphabet()[current[i]]);
  return out;
}

inline BitBlock decode(const HidmStructure& s, std::span<const std::uint8_t> word) {
  const auto& v = s.vectors();
  if (word.size() != v.block_length)
    throw SizeError("amplitude block has " + std::to_string(word.size()) + " amplitudes, structure expects " +
                    std::to_string(v.block_length));
  const auto& levels = s.alphabet().levels();

  std::vector<std::uint16_t> current(word.size());
  for (std::size_t i = 0; i < word.size(); ++i) {
    const auto it = std::find(levels.begin(), levels.end(), static_cast<int>(word[i]));
    if (it == levels.end())
      throw NonCodewordError(0, i / v.n[0],
                             "amplitude " + std::to_string(word[i]) + " at position " + std::to_string(i) +
                                 " is not in the alphabet");
    current[i] = static_cast<std::uint16_t>(it - levels.begin());
  }

  BitBlock bits(v.total_bits);
  std::vector<std::uint16_t> up;
  for (std::size_t l = 0; l < s.layer_count(); ++l) {
    const Layer& layer = s.layer(l);
    const auto& offsets = s.bit_offsets(l);
    const std::size_t uses = current.size() / layer.block;
    const std::uint64_t mask = (std::uint64_t{1} << layer.bits) - 1;
    up.resize(uses);
    for (std::size_t j = 0; j < uses; ++j) {
      std::uint64_t code = 0;
      for (std::size_t i = 0; i < layer.block; ++i) code = code * layer.alphabet + current[j * layer.block + i];
      const std::int32_t entry = layer.inverse[code];
      if (entry < 0)
        throw NonCodewordError(l, j,
                               "block " + std::to_string(j) + " of layer " + std::to_string(l + 1) +
                                   " is not stored in any LUT");
      detail::write_rank(bits, offsets[j], layer.bits, static_cast<std::uint64_t>(entry) & mask);
      up[j] = static_cast<std::uint16_t>(static_cast<std::uint64_t>(entry) >> layer.bits);
    }
    current.swap(up);
  }
  return bits;
}

// Stream formats: bits are packed most significant bit first within each
// byte; amplitudes are one unsigned byte each.

inline std::vector<std::uint8_t> unpack_bits(std::span<const std::uint8_t> bytes) {
  std::vector<std::uint8_t> bits(bytes.size() * 8);
  for (std::size_t i = 0; i < bytes.size(); ++i)
    for (int b = 0; b < 8; ++b) bits[i * 8 + static_cast<std::size_t>(b)] = (bytes[i] >> (7 - b)) & 1u;
  return bits;
}

inline std::vector<std::uint8_t> pack_bits(std::span<const std::uint8_t> bits) {
  if (bits.size() % 8 != 0) throw SizeError("bit stream length " + std::to_string(bits.size()) + " is not a whole number of bytes");
  std::vector<std::uint8_t> bytes(bits.size() / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i] & 1u) bytes[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  return bytes;
}

/// Encodes a packed bit stream block by block; a trailing partial block is rejected.
inline std::vector<std::uint8_t> encode_stream(const HidmStructure& s, std::span<const std::uint8_t> packed) {
  const auto bits = unpack_bits(packed);
  const std::uint64_t k = s.vectors().total_bits;
  if (bits.size() % k != 0)
    throw SizeError("bit stream of " + std::to_string(bits.size()) + " bits is not a multiple of k = " + std::to_string(k));
  std::vector<std::uint8_t> amps;
  amps.reserve(bits.size() / k * s.vectors().block_length);
  for (std::size_t off = 0; off < bits.size(); off += k) {
    const auto block = encode(s, std::span<const std::uint8_t>(bits).subspan(off, k));
    amps.insert(amps.end(), block.begin(), block.end());
  }
  return amps;
}

struct StreamNonCodeword : NonCodewordError {
  StreamNonCodeword(std::size_t word, const NonCodewordError& e)
      : NonCodewordError(e.layer(), e.block(), "word " + std::to_string(word) + ": " + e.what()), word_(word) {}
  std::size_t word() const noexcept { return word_; }

 private:
  std::size_t word_;
};

/// Decodes an amplitude stream into packed bits. Throws StreamNonCodeword
/// carrying the offending word index.
inline std::vector<std::uint8_t> decode_stream(const HidmStructure& s, std::span<const std::uint8_t> amps) {
  const std::uint64_t n = s.vectors().block_length;
  if (amps.size() % n != 0)
    throw SizeError("amplitude stream of " + std::to_string(amps.size()) + " symbols is not a multiple of N = " +
                    std::to_string(n));
  std::vector<std::uint8_t> bits;
  bits.reserve(amps.size() / n * s.vectors().total_bits);
  for (std::size_t off = 0, word = 0; off < amps.size(); off += n, ++word) {
    try {
      const auto block = decode(s, amps.subspan(off, n));
      bits.insert(bits.end(), block.begin(), block.end());
    } catch (const NonCodewordError& e) {
      throw StreamNonCodeword(word, e);
    }
  }
  return pack_bits(bits);
}

}  // namespace hidm
