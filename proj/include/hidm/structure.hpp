#pragma once

// Characterization vectors, design constraints and construction of the
// layered LUT tables of a hierarchical distribution matcher.
//
// Layers are 0-based in this API: layer 0 emits amplitudes, layer L-1 holds
// the single top LUT. Symbols are 0-based indices into the layer alphabet
// (amplitude index at layer 0, lower-layer LUT index above).

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hidm/dyadic.hpp"
#include "hidm/error.hpp"
#include "hidm/shaping_math.hpp"

namespace hidm {

/// Largest per-layer sequence space M^N that build() will enumerate.
inline constexpr std::uint64_t kMaxSequenceSpace = std::uint64_t{1} << 24;

namespace detail {

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("integer overflow in structure dimensions");
  return r;
}

inline std::uint64_t checked_add_u(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("integer overflow in structure dimensions");
  return r;
}

inline unsigned log2_exact(std::uint64_t v) { return static_cast<unsigned>(std::countr_zero(v)); }

}  // namespace detail

struct CharacterizationVectors {
  std::vector<std::uint32_t> m;  // alphabet size per layer
  std::vector<std::uint32_t> n;  // block length per layer
  std::vector<std::uint32_t> k;  // input bits per LUT per layer

  std::vector<std::uint64_t> t;  // uses of each layer, prod of N above it
  std::vector<std::uint64_t> u;  // LUT count per layer, M of the layer above, 1 on top
  std::uint64_t total_bits = 0;
  std::uint64_t block_length = 0;

  std::size_t layers() const noexcept { return m.size(); }
  double rate() const noexcept { return static_cast<double>(total_bits) / static_cast<double>(block_length); }
  unsigned log2_m(std::size_t l) const { return detail::log2_exact(m.at(l)); }
  unsigned log2_u(std::size_t l) const { return detail::log2_exact(u.at(l)); }
  /// Virtual alphabet sizes, defined from the second layer on.
  std::uint32_t virtual_alphabet(std::size_t l) const {
    if (l == 0) throw DomainError("layer 0 has a real amplitude alphabet");
    return m.at(l);
  }

  friend bool operator==(const CharacterizationVectors& a, const CharacterizationVectors& b) {
    return a.m == b.m && a.n == b.n && a.k == b.k;
  }
};

/// Populates T, U, k, N from raw (M, N, k) lists.
inline CharacterizationVectors derive(std::vector<std::uint32_t> m, std::vector<std::uint32_t> n,
                                      std::vector<std::uint32_t> k) {
  if (m.size() != n.size() || m.size() != k.size())
    throw ValidationError("M, N and k must have the same length");
  if (m.size() < 2) throw ValidationError("a hierarchical structure needs at least two layers");
  for (std::size_t l = 0; l < m.size(); ++l) {
    if (m[l] < 2 || !std::has_single_bit(m[l]))
      throw ValidationError("alphabet size M[" + std::to_string(l) + "] = " + std::to_string(m[l]) +
                            " is not a power of two >= 2");
    if (n[l] == 0) throw ValidationError("block length N[" + std::to_string(l) + "] must be positive");
    if (k[l] == 0) throw ValidationError("input bits k[" + std::to_string(l) + "] must be positive");
  }

  CharacterizationVectors v;
  const std::size_t layers = m.size();
  v.t.assign(layers, 1);
  v.u.assign(layers, 1);
  for (std::size_t l = layers - 1; l-- > 0;) {
    v.t[l] = detail::checked_mul(v.t[l + 1], n[l + 1]);
    v.u[l] = m[l + 1];
  }
  v.block_length = detail::checked_mul(v.t[0], n[0]);
  for (std::size_t l = 0; l < layers; ++l)
    v.total_bits = detail::checked_add_u(v.total_bits, detail::checked_mul(k[l], v.t[l]));
  v.m = std::move(m);
  v.n = std::move(n);
  v.k = std::move(k);
  return v;
}

/// Maximum LUT input/output width and the template alphabet it implies.
struct BitBudget {
  unsigned n_b = 12;
  unsigned n = 2;       // upper-layer block length the template assumes
  unsigned theta = 6;   // floor(n_b / n)
  std::uint64_t m_bar = 64;

  static BitBudget make(unsigned n_b, unsigned n = 2) {
    if (n == 0) throw DomainError("template block length must be positive");
    if (n_b / n == 0 || n_b / n > 31) throw DomainError("bit budget gives an unusable template alphabet");
    BitBudget b;
    b.n_b = n_b;
    b.n = n;
    b.theta = n_b / n;
    b.m_bar = std::uint64_t{1} << b.theta;
    return b;
  }

  /// Same budget with the upper alphabet forced to 2^theta.
  BitBudget with_theta(unsigned theta) const {
    BitBudget b = *this;
    b.theta = theta;
    b.m_bar = std::uint64_t{1} << theta;
    return b;
  }
};

/// max over layers of max(N_i log2 M_i, k_i + log2 U_i).
inline unsigned max_lut_bits(const CharacterizationVectors& v) {
  std::uint64_t widest = 0;
  for (std::size_t l = 0; l < v.layers(); ++l) {
    widest = std::max<std::uint64_t>(widest, std::uint64_t{v.n[l]} * v.log2_m(l));
    widest = std::max<std::uint64_t>(widest, std::uint64_t{v.k[l]} + v.log2_u(l));
  }
  return static_cast<unsigned>(widest);
}

struct Violation {
  enum class Kind { TemplateAlphabet, TemplateBlockLength, InsufficientSequences, OutputBits, BitBudget };
  Kind kind;
  std::size_t layer;
  std::string message;
};

struct ValidationOptions {
  bool template_shape = true;  // toggles constraints (i) and (ii)
};

/// Lists every violated constraint; empty means the vectors are admissible.
inline std::vector<Violation> validate(const CharacterizationVectors& v, const BitBudget& budget,
                                       ValidationOptions opts = {}) {
  std::vector<Violation> out;
  auto add = [&](Violation::Kind kind, std::size_t l, const std::string& msg) {
    out.push_back(Violation{kind, l, "layer " + std::to_string(l + 1) + ": " + msg});
  };

  for (std::size_t l = 0; l < v.layers(); ++l) {
    const std::uint64_t out_bits = std::uint64_t{v.n[l]} * v.log2_m(l);
    const std::uint64_t in_bits = std::uint64_t{v.k[l]} + v.log2_u(l);

    if (opts.template_shape && l >= 1) {
      if (v.m[l] != budget.m_bar)
        add(Violation::Kind::TemplateAlphabet, l,
            "(i) M = " + std::to_string(v.m[l]) + " differs from M_bar = " + std::to_string(budget.m_bar));
      if (v.n[l] != budget.n)
        add(Violation::Kind::TemplateBlockLength, l,
            "(ii) N = " + std::to_string(v.n[l]) + " differs from n = " + std::to_string(budget.n));
    }
    if (opts.template_shape && l == 0 && v.n[0] <= 2)
      add(Violation::Kind::TemplateBlockLength, l, "(ii) N_1 must exceed 2");

    if (out_bits < in_bits)
      add(Violation::Kind::InsufficientSequences, l,
          "(iii) M^N = 2^" + std::to_string(out_bits) + " < U 2^k = 2^" + std::to_string(in_bits));
    if (out_bits < v.k[l])
      add(Violation::Kind::OutputBits, l,
          "(iv) N log2 M = " + std::to_string(out_bits) + " < k = " + std::to_string(v.k[l]));
    const std::uint64_t width = std::max(out_bits, in_bits);
    if (width > budget.n_b)
      add(Violation::Kind::BitBudget, l,
          "LUT width " + std::to_string(width) + " bits exceeds N_b = " + std::to_string(budget.n_b));
  }
  return out;
}

/// One LUT D_y: 2^k distinct sequences of `block` symbols, sorted by
/// (resolved energy, lexicographic symbol order).
struct Lut {
  std::size_t layer = 0;
  std::size_t index = 0;
  std::size_t block = 0;
  std::vector<std::uint16_t> symbols;  // size() * block, row-major
  std::vector<Dyadic> energies;        // resolved total energy per sequence
  Dyadic mean_energy;

  std::size_t size() const noexcept { return energies.size(); }
  std::span<const std::uint16_t> sequence(std::size_t rank) const {
    return std::span<const std::uint16_t>(symbols).subspan(rank * block, block);
  }
};

struct Layer {
  std::size_t alphabet = 0;
  std::size_t block = 0;
  std::size_t bits = 0;
  std::vector<Dyadic> symbol_energy;  // x^2 at layer 0, mean LUT energies of the layer below otherwise
  std::vector<Lut> luts;
  /// Direct-indexed inverse: packed sequence -> lut * 2^bits + rank, or -1.
  std::vector<std::int32_t> inverse;
};

namespace detail {

inline std::uint64_t sequence_space(std::size_t alphabet, std::size_t block) {
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < block; ++i) {
    count = checked_mul(count, alphabet);
    if (count > kMaxSequenceSpace)
      throw ConstructionError("sequence space " + std::to_string(alphabet) + "^" + std::to_string(block) +
                              " is too large to enumerate");
  }
  return count;
}

/// Generates, sorts and partitions the sequences of one layer.
inline Layer build_layer(std::size_t layer_index, std::size_t alphabet, std::size_t block, std::size_t bits,
                         std::size_t lut_count, std::vector<Dyadic> symbol_energy, bool with_inverse) {
  if (symbol_energy.size() != alphabet) throw std::logic_error("symbol energy table size mismatch");
  if (bits >= 31) throw ConstructionError("LUT input width too large");
  const std::uint64_t count = sequence_space(alphabet, block);
  const std::uint64_t per_lut = std::uint64_t{1} << bits;
  const std::uint64_t needed = checked_mul(per_lut, lut_count);
  if (needed > count)
    throw ConstructionError("layer " + std::to_string(layer_index + 1) + " needs " + std::to_string(needed) +
                            " sequences but only " + std::to_string(count) + " exist");

  int shift = 0;
  for (const auto& e : symbol_energy) shift = std::max(shift, e.shift());
  std::vector<std::int64_t> sym_num(alphabet);
  for (std::size_t i = 0; i < alphabet; ++i) sym_num[i] = symbol_energy[i].scaled_to(shift);

  // Energy of every sequence, indexed by its base-M value with the first
  // symbol most significant, so index order is lexicographic order.
  std::vector<std::int64_t> energy(count);
  std::copy(sym_num.begin(), sym_num.end(), energy.begin());
  std::uint64_t filled = alphabet;
  for (std::size_t len = 1; len < block; ++len) {
    for (std::uint64_t i = filled; i-- > 0;)
      for (std::size_t d = alphabet; d-- > 0;)
        energy[i * alphabet + d] = Dyadic::checked_add(energy[i], sym_num[d]);
    filled *= alphabet;
  }

  std::vector<std::uint32_t> order(count);
  std::iota(order.begin(), order.end(), std::uint32_t{0});
  auto less = [&](std::uint32_t a, std::uint32_t b) {
    return energy[a] != energy[b] ? energy[a] < energy[b] : a < b;
  };
  if (needed < count) {
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(needed), order.end(), less);
  }
  std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(needed), less);

  Layer layer;
  layer.alphabet = alphabet;
  layer.block = block;
  layer.bits = bits;
  layer.symbol_energy = std::move(symbol_energy);
  layer.luts.resize(lut_count);
  if (with_inverse) layer.inverse.assign(count, -1);

  for (std::size_t y = 0; y < lut_count; ++y) {
    Lut& lut = layer.luts[y];
    lut.layer = layer_index;
    lut.index = y;
    lut.block = block;
    lut.symbols.resize(per_lut * block);
    lut.energies.resize(per_lut);
    std::int64_t sum = 0;
    for (std::uint64_t r = 0; r < per_lut; ++r) {
      const std::uint32_t code = order[y * per_lut + r];
      std::uint32_t rest = code;
      for (std::size_t j = block; j-- > 0;) {
        lut.symbols[r * block + j] = static_cast<std::uint16_t>(rest % alphabet);
        rest /= static_cast<std::uint32_t>(alphabet);
      }
      lut.energies[r] = Dyadic(energy[code], shift);
      sum = Dyadic::checked_add(sum, energy[code]);
      if (with_inverse) layer.inverse[code] = static_cast<std::int32_t>(y * per_lut + r);
    }
    lut.mean_energy = Dyadic(sum, shift).halved(static_cast<int>(bits));
  }
  return layer;
}

inline std::vector<Dyadic> lut_mean_energies(const Layer& layer) {
  std::vector<Dyadic> out;
  out.reserve(layer.luts.size());
  for (const auto& lut : layer.luts) out.push_back(lut.mean_energy);
  return out;
}

inline std::vector<Dyadic> amplitude_energies(const AmplitudeAlphabet& a) {
  std::vector<Dyadic> e;
  for (int x : a.levels()) e.emplace_back(std::int64_t{x} * x);
  return e;
}

}  // namespace detail

/// Fully built, immutable layered LUT structure.
class HidmStructure {
 public:
  const CharacterizationVectors& vectors() const noexcept { return vectors_; }
  const AmplitudeAlphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t layer_count() const noexcept { return layers_.size(); }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  const Layer& layer(std::size_t l) const { return layers_.at(l); }
  const Lut& lut(std::size_t l, std::size_t y) const { return layers_.at(l).luts.at(y); }

  /// Energy of virtual amplitude y at layer l >= 1, the mean energy of LUT y
  /// one layer down.
  const Dyadic& virtual_energy(std::size_t l, std::size_t y) const {
    if (l == 0 || l >= layers_.size()) throw DomainError("virtual energies exist for layers 2..L only");
    const auto& table = layers_[l].symbol_energy;
    if (y >= table.size()) throw DomainError("virtual amplitude index out of range");
    return table[y];
  }

  /// Input-bit position of each use of layer l, in depth-first order.
  const std::vector<std::uint64_t>& bit_offsets(std::size_t l) const { return offsets_.at(l); }

  friend HidmStructure build(const CharacterizationVectors& v);
  friend HidmStructure build(const CharacterizationVectors& v, const AmplitudeAlphabet& alphabet);
  friend HidmStructure assemble(CharacterizationVectors v, AmplitudeAlphabet alphabet, std::vector<Layer> layers);

 private:
  HidmStructure(CharacterizationVectors v, AmplitudeAlphabet a, std::vector<Layer> layers)
      : vectors_(std::move(v)), alphabet_(std::move(a)), layers_(std::move(layers)) {
    compute_offsets();
  }

  void compute_offsets() {
    const std::size_t L = layers_.size();
    std::vector<std::uint64_t> subtree(L);
    for (std::size_t l = 0; l < L; ++l)
      subtree[l] = vectors_.k[l] + (l == 0 ? 0 : std::uint64_t{vectors_.n[l]} * subtree[l - 1]);
    offsets_.assign(L, {});
    offsets_[L - 1] = {0};
    for (std::size_t l = L - 1; l-- > 0;) {
      const std::uint64_t fan = vectors_.n[l + 1];
      auto& cur = offsets_[l];
      cur.resize(vectors_.t[l]);
      for (std::uint64_t j = 0; j < cur.size(); ++j)
        cur[j] = offsets_[l + 1][j / fan] + vectors_.k[l + 1] + (j % fan) * subtree[l];
    }
  }

  CharacterizationVectors vectors_;
  AmplitudeAlphabet alphabet_;
  std::vector<Layer> layers_;
  std::vector<std::vector<std::uint64_t>> offsets_;
};

/// Bottom-up construction: lowest-energy prefix of each layer's sequence
/// space, cut into consecutive blocks of 2^k.
inline HidmStructure build(const CharacterizationVectors& v, const AmplitudeAlphabet& alphabet) {
  if (alphabet.size() != v.m.at(0)) throw ValidationError("amplitude alphabet size differs from M_1");
  std::vector<Layer> layers;
  layers.reserve(v.layers());
  std::vector<Dyadic> energies = detail::amplitude_energies(alphabet);
  for (std::size_t l = 0; l < v.layers(); ++l) {
    layers.push_back(detail::build_layer(l, v.m[l], v.n[l], v.k[l], v.u[l], std::move(energies), true));
    energies = detail::lut_mean_energies(layers.back());
  }
  return HidmStructure(v, alphabet, std::move(layers));
}

inline HidmStructure build(const CharacterizationVectors& v) {
  return build(v, AmplitudeAlphabet::odd(v.m.at(0)));
}

/// Wraps externally supplied tables (e.g. parsed from JSON) after checking
/// sizes, symbol ranges, disjointness and energy consistency.
inline HidmStructure assemble(CharacterizationVectors v, AmplitudeAlphabet alphabet, std::vector<Layer> layers) {
  if (layers.size() != v.layers()) throw ValidationError("layer count differs from characterization vectors");
  if (alphabet.size() != v.m[0]) throw ValidationError("amplitude alphabet size differs from M_1");
  std::vector<Dyadic> expected = detail::amplitude_energies(alphabet);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Layer& layer = layers[l];
    const std::string where = "layer " + std::to_string(l + 1);
    if (layer.luts.size() != v.u[l]) throw ValidationError(where + ": wrong LUT count");
    if (layer.symbol_energy != expected) throw ValidationError(where + ": symbol energies inconsistent with tables");
    layer.alphabet = v.m[l];
    layer.block = v.n[l];
    layer.bits = v.k[l];
    const std::uint64_t count = detail::sequence_space(layer.alphabet, layer.block);
    layer.inverse.assign(count, -1);
    const std::size_t per_lut = std::size_t{1} << layer.bits;
    for (std::size_t y = 0; y < layer.luts.size(); ++y) {
      Lut& lut = layer.luts[y];
      lut.layer = l;
      lut.index = y;
      lut.block = layer.block;
      if (lut.symbols.size() != per_lut * layer.block) throw ValidationError(where + ": wrong LUT size");
      lut.energies.resize(per_lut);
      Dyadic sum;
      for (std::size_t r = 0; r < per_lut; ++r) {
        std::uint64_t code = 0;
        Dyadic e;
        for (std::size_t j = 0; j < layer.block; ++j) {
          const std::uint16_t s = lut.symbols[r * layer.block + j];
          if (s >= layer.alphabet) throw ValidationError(where + ": symbol out of range");
          code = code * layer.alphabet + s;
          e = e + layer.symbol_energy[s];
        }
        if (layer.inverse[code] >= 0) throw ValidationError(where + ": sequence stored twice");
        layer.inverse[code] = static_cast<std::int32_t>(y * per_lut + r);
        lut.energies[r] = e;
        sum = sum + e;
      }
      const Dyadic mean = sum.halved(static_cast<int>(layer.bits));
      if (!(lut.mean_energy == mean)) throw ValidationError(where + ": stored LUT energy inconsistent");
    }
    expected = detail::lut_mean_energies(layer);
  }
  return HidmStructure(std::move(v), std::move(alphabet), std::move(layers));
}

}  // namespace hidm
