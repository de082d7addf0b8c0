#pragma once

// Output-distribution recursion, loss metrics, memory accounting and the
// exhaustive-encode oracle.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "hidm/codec.hpp"
#include "hidm/error.hpp"
#include "hidm/parallel.hpp"
#include "hidm/shaping_math.hpp"
#include "hidm/structure.hpp"

namespace hidm {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Symbol counts of each LUT in one layer: counts[y * alphabet + x].
struct CountMatrix {
  std::size_t alphabet = 0;
  std::size_t lut_count = 0;
  std::uint64_t slots_per_lut = 0;  // N_l 2^k_l
  std::vector<std::uint64_t> counts;

  std::uint64_t operator()(std::size_t y, std::size_t x) const { return counts[y * alphabet + x]; }
};

inline CountMatrix count_matrix(const Layer& layer) {
  CountMatrix c;
  c.alphabet = layer.alphabet;
  c.lut_count = layer.luts.size();
  c.slots_per_lut = static_cast<std::uint64_t>(layer.block) << layer.bits;
  c.counts.assign(c.alphabet * c.lut_count, 0);
  for (std::size_t y = 0; y < c.lut_count; ++y)
    for (std::uint16_t s : layer.luts[y].symbols) ++c.counts[y * c.alphabet + s];
  return c;
}

/// Probability of each symbol of a layer alphabet as numerators over a
/// common denominator.
struct LayerDistribution {
  std::size_t layer = 0;
  std::vector<BigInt> numerators;
  BigInt denominator = 1;

  Rational prob(std::size_t x) const { return Rational(numerators.at(x), denominator); }
  Rational sum() const {
    BigInt s = 0;
    for (const auto& n : numerators) s += n;
    return Rational(s, denominator);
  }
  std::vector<double> to_doubles() const {
    std::vector<double> out;
    for (std::size_t x = 0; x < numerators.size(); ++x) out.push_back(prob(x).convert_to<double>());
    return out;
  }
};

/// p_{l|l+1}(x | y): occurrences of x in LUT y over N_l 2^k_l.
inline Rational conditional_prob(const HidmStructure& s, std::size_t l, std::size_t x, std::size_t y) {
  if (l >= s.layer_count()) throw DomainError("layer index out of range");
  const Layer& layer = s.layer(l);
  if (x >= layer.alphabet) throw DomainError("symbol index out of range");
  if (y >= layer.luts.size()) throw DomainError("LUT index out of range");
  std::uint64_t hits = 0;
  for (std::uint16_t sym : layer.luts[y].symbols) hits += (sym == x);
  return Rational(BigInt(hits), BigInt(static_cast<std::uint64_t>(layer.block) << layer.bits));
}

namespace detail {

inline void reduce(LayerDistribution& d) {
  BigInt g = d.denominator;
  for (const auto& n : d.numerators) g = boost::multiprecision::gcd(g, n);
  if (g > 1) {
    for (auto& n : d.numerators) n /= g;
    d.denominator /= g;
  }
}

/// Top-down law of total probability over per-layer count matrices
/// (index 0 = amplitude layer). Returns one distribution per layer.
inline std::vector<LayerDistribution> propagate(const std::vector<CountMatrix>& layers) {
  const std::size_t L = layers.size();
  std::vector<LayerDistribution> out(L);
  // The top LUT is chosen with probability one.
  std::vector<BigInt> prior{1};
  BigInt prior_den = 1;
  for (std::size_t l = L; l-- > 0;) {
    const CountMatrix& c = layers[l];
    LayerDistribution d;
    d.layer = l;
    d.numerators.assign(c.alphabet, 0);
    for (std::size_t y = 0; y < c.lut_count; ++y) {
      if (prior[y] == 0) continue;
      for (std::size_t x = 0; x < c.alphabet; ++x)
        if (const auto n = c(y, x)) d.numerators[x] += prior[y] * n;
    }
    d.denominator = prior_den * c.slots_per_lut;
    reduce(d);
    prior = d.numerators;
    prior_den = d.denominator;
    out[l] = std::move(d);
  }
  return out;
}

}  // namespace detail

/// Distribution of every layer's (virtual) alphabet, index 0 = amplitudes.
inline std::vector<LayerDistribution> layer_distributions(const HidmStructure& s) {
  std::vector<CountMatrix> counts;
  for (const auto& layer : s.layers()) counts.push_back(count_matrix(layer));
  return detail::propagate(counts);
}

inline LayerDistribution output_distribution(const HidmStructure& s) { return layer_distributions(s).front(); }

/// Amplitude frequencies measured by running the encoder.
struct EmpiricalDistribution {
  AmplitudeAlphabet alphabet;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  Rational frequency(std::size_t x) const { return Rational(BigInt(counts.at(x)), BigInt(total)); }
  AmplitudeDistribution to_distribution() const {
    std::vector<double> p;
    for (auto c : counts) p.push_back(static_cast<double>(c) / static_cast<double>(total));
    return AmplitudeDistribution(alphabet, std::move(p));
  }
};

struct Exhaustive {};
struct Sampled {
  std::uint64_t blocks = 0;
  std::uint64_t seed = 0;
};

inline constexpr std::uint64_t kMaxExhaustiveBits = 24;

inline EmpiricalDistribution empirical_distribution(const HidmStructure& s, std::variant<Exhaustive, Sampled> mode,
                                                    Execution exec = {}) {
  const auto& v = s.vectors();
  const std::size_t M = s.alphabet().size();
  const auto& levels = s.alphabet().levels();
  std::vector<std::size_t> index_of(static_cast<std::size_t>(levels.back()) + 1, 0);
  for (std::size_t i = 0; i < M; ++i) index_of[static_cast<std::size_t>(levels[i])] = i;

  const bool exhaustive = std::holds_alternative<Exhaustive>(mode);
  if (exhaustive && v.total_bits > kMaxExhaustiveBits)
    throw DomainError("exhaustive enumeration needs k <= " + std::to_string(kMaxExhaustiveBits) + ", got " +
                      std::to_string(v.total_bits));
  const std::uint64_t blocks = exhaustive ? (std::uint64_t{1} << v.total_bits) : std::get<Sampled>(mode).blocks;
  const std::uint64_t seed = exhaustive ? 0 : std::get<Sampled>(mode).seed;

  constexpr std::uint64_t kChunk = 4096;
  const std::size_t chunks = static_cast<std::size_t>((blocks + kChunk - 1) / kChunk);
  std::vector<std::vector<std::uint64_t>> partial(chunks, std::vector<std::uint64_t>(M, 0));

  parallel_tasks(chunks, exec, [&](std::size_t c) {
    std::mt19937_64 rng(mix_seed(seed, c));
    BitBlock bits(v.total_bits);
    const std::uint64_t begin = c * kChunk;
    const std::uint64_t end = std::min(blocks, begin + kChunk);
    for (std::uint64_t b = begin; b < end; ++b) {
      if (exhaustive) {
        for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = (b >> (bits.size() - 1 - i)) & 1u;
      } else {
        for (std::size_t i = 0; i < bits.size(); i += 64) {
          const std::uint64_t word = rng();
          for (std::size_t j = 0; j < 64 && i + j < bits.size(); ++j) bits[i + j] = (word >> j) & 1u;
        }
      }
      for (std::uint8_t a : encode(s, bits)) ++partial[c][index_of[a]];
    }
  });

  EmpiricalDistribution out{s.alphabet(), std::vector<std::uint64_t>(M, 0), 0};
  for (const auto& p : partial)
    for (std::size_t x = 0; x < M; ++x) out.counts[x] += p[x];
  out.total = blocks * v.block_length;
  return out;
}

struct StructureMetrics {
  AmplitudeDistribution p;
  double entropy_h = 0.0;
  double r_dm = 0.0;
  double r_loss = 0.0;
  double e_dm = 0.0;
  double e_mb = 0.0;
  double e_loss_db = 0.0;
  /// Set when p(lowest amplitude) < 0.5, where E_DM >= E_MB is not guaranteed.
  bool low_probability_flag = false;
};

inline StructureMetrics metrics_from(const CharacterizationVectors& v, const AmplitudeAlphabet& alphabet,
                                     const LayerDistribution& amplitude_layer) {
  AmplitudeDistribution p(alphabet, amplitude_layer.to_doubles());
  StructureMetrics m{p};
  m.entropy_h = entropy_bits(p);
  m.r_dm = v.rate();
  m.r_loss = rate_loss(m.entropy_h, m.r_dm);
  m.e_dm = mean_energy(p);
  m.e_mb = solve_mb(alphabet, m.r_dm).mean_energy;
  m.e_loss_db = energy_loss_db(m.e_dm, m.e_mb);
  m.low_probability_flag = p[0] < 0.5;
  return m;
}

inline StructureMetrics metrics(const HidmStructure& s) {
  return metrics_from(s.vectors(), s.alphabet(), output_distribution(s));
}

// Memory accounting. All sizes are in bits and assume direct-indexed tables
// with every layer instantiated T_l times.

namespace detail {
inline std::uint64_t pow2(std::uint64_t e) {
  if (e >= 64) throw std::overflow_error("memory size overflows 64 bits");
  return std::uint64_t{1} << e;
}
}  // namespace detail

struct LayerMemory {
  std::uint64_t enc_bits = 0;
  std::uint64_t dec_bits = 0;
};

struct MemoryReport {
  std::uint64_t mem_enc = 0;
  std::uint64_t mem_dec = 0;
  std::uint64_t mem_total = 0;
  std::vector<LayerMemory> per_layer;
};

/// sum_l T_l U_l 2^k_l N_l log2 M_l
inline std::uint64_t encoding_memory(const CharacterizationVectors& v) {
  using detail::checked_mul;
  std::uint64_t total = 0;
  for (std::size_t l = 0; l < v.layers(); ++l) {
    const std::uint64_t lut = checked_mul(detail::pow2(v.k[l]), std::uint64_t{v.n[l]} * v.log2_m(l));
    total = detail::checked_add_u(total, checked_mul(checked_mul(v.t[l], v.u[l]), lut));
  }
  return total;
}

/// Closed-form decoder memory for template vectors:
///   T_1 2^(N_1 log2 M_1) (theta + k_1) + sum_{l=2}^{L-1} T_l Mbar^n (theta + k_l) + Mbar^n k_L
/// with T_l = n^(L-l).
inline std::uint64_t decoding_memory(const CharacterizationVectors& v, unsigned theta) {
  using detail::checked_mul;
  const std::size_t L = v.layers();
  const std::uint32_t n = v.n[1];
  for (std::size_t l = 1; l < L; ++l)
    if (v.n[l] != n || v.m[l] != (std::uint64_t{1} << theta))
      throw DomainError("decoding_memory needs template vectors (N_l = n and M_l = 2^theta for l >= 2)");

  const std::uint64_t upper_table = detail::pow2(std::uint64_t{n} * theta);
  std::uint64_t tl = 1;  // n^(L-l), built from the top
  std::uint64_t total = checked_mul(upper_table, v.k[L - 1]);
  for (std::size_t l = L - 1; l-- > 1;) {
    tl = checked_mul(tl, n);
    total = detail::checked_add_u(total, checked_mul(checked_mul(tl, upper_table), theta + v.k[l]));
  }
  tl = checked_mul(tl, n);
  const std::uint64_t first = detail::pow2(std::uint64_t{v.n[0]} * v.log2_m(0));
  return detail::checked_add_u(total, checked_mul(checked_mul(tl, first), theta + v.k[0]));
}

/// Decoder memory of a hypothetical L-layer template structure whose first
/// four k values come from the 4-layer optimum and every later k is 1.
inline std::uint64_t estimate_decoding_memory(const std::vector<std::uint32_t>& four_layer_k, std::size_t layers,
                                              std::uint32_t n1, unsigned theta, std::uint32_t n = 2) {
  if (four_layer_k.size() != 4) throw DomainError("estimate needs the four k values of a 4-layer optimum");
  if (layers < 5) throw DomainError("estimate applies to L >= 5");
  std::vector<std::uint32_t> m(layers, 1u << theta), ns(layers, n), k(layers, 1);
  m[0] = 2;
  ns[0] = n1;
  std::copy(four_layer_k.begin(), four_layer_k.end(), k.begin());
  return decoding_memory(derive(m, ns, k), theta);
}

/// Table accounting for arbitrary vectors: the decoder LUT of layer l is
/// indexed by N_l log2 M_l bits and returns log2 U_l + k_l bits.
inline MemoryReport memory_report(const CharacterizationVectors& v) {
  using detail::checked_mul;
  MemoryReport r;
  for (std::size_t l = 0; l < v.layers(); ++l) {
    LayerMemory lm;
    lm.enc_bits = checked_mul(checked_mul(v.t[l], v.u[l]),
                              checked_mul(detail::pow2(v.k[l]), std::uint64_t{v.n[l]} * v.log2_m(l)));
    lm.dec_bits = checked_mul(checked_mul(v.t[l], detail::pow2(std::uint64_t{v.n[l]} * v.log2_m(l))),
                              std::uint64_t{v.log2_u(l)} + v.k[l]);
    r.mem_enc = detail::checked_add_u(r.mem_enc, lm.enc_bits);
    r.mem_dec = detail::checked_add_u(r.mem_dec, lm.dec_bits);
    r.per_layer.push_back(lm);
  }
  r.mem_total = detail::checked_add_u(r.mem_enc, r.mem_dec);
  return r;
}

}  // namespace hidm
