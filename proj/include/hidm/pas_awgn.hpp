#pragma once

// PAS-16QAM over AWGN: constellation assembly, bit-metric posteriors,
// Monte-Carlo GMI/NGMI, OSNR sweeps and net-rate accounting.
//
// Labels are Gray per dimension, (sign bit, amplitude bit), ordered
// (s_I, a_I, s_Q, a_Q) from the most significant bit: +1 -> 00, +3 -> 01,
// -1 -> 10, -3 -> 11.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hidm/codec.hpp"
#include "hidm/error.hpp"
#include "hidm/parallel.hpp"
#include "hidm/shaping_math.hpp"
#include "hidm/structure.hpp"

namespace hidm {

inline constexpr std::size_t kQamPoints = 16;
inline constexpr std::size_t kBitsPerSymbol = 4;

struct PasConstellation {
  std::array<std::complex<double>, kQamPoints> points{};
  std::array<double, kQamPoints> point_probs{};
  std::array<std::uint8_t, kQamPoints> bit_labels{};  // 4-bit label of point i
  AmplitudeDistribution amplitude;
  double symbol_entropy = 0.0;  // H(P) in bits per QAM symbol

  /// E|X|^2 under point_probs.
  double mean_energy() const {
    double e = 0.0;
    for (std::size_t i = 0; i < kQamPoints; ++i) e += point_probs[i] * std::norm(points[i]);
    return e;
  }
  /// Bit i of point x's label, i = 0 being s_I.
  int bit(std::size_t x, std::size_t i) const { return (bit_labels[x] >> (kBitsPerSymbol - 1 - i)) & 1; }
};

/// Point i carries label i, so sign/amplitude bits decode directly from the index.
inline PasConstellation build_constellation(const AmplitudeDistribution& amp) {
  const auto& a = amp.alphabet();
  if (a.size() != 2) throw DomainError("PAS-16QAM needs a two-level amplitude distribution");
  PasConstellation c;
  c.amplitude = amp;
  for (std::size_t label = 0; label < kQamPoints; ++label) {
    const std::size_t s_i = (label >> 3) & 1u, a_i = (label >> 2) & 1u, s_q = (label >> 1) & 1u, a_q = label & 1u;
    const double re = (s_i ? -1.0 : 1.0) * a[a_i];
    const double im = (s_q ? -1.0 : 1.0) * a[a_q];
    c.points[label] = {re, im};
    c.point_probs[label] = amp[a_i] * amp[a_q] / 4.0;
    c.bit_labels[label] = static_cast<std::uint8_t>(label);
  }
  c.symbol_entropy = 2.0 * entropy_bits(amp) + 2.0;
  return c;
}

/// Constellation for the per-dimension distribution (p1, 1 - p1) over {1, 3}.
inline PasConstellation build_constellation(double p1) {
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw DomainError("p1 must lie in [0, 1]");
  return build_constellation(AmplitudeDistribution(AmplitudeAlphabet(), {p1, 1.0 - p1}));
}

struct LinkConfig {
  double baud = 37e9;
  double b_ref = 12.5e9;
  double r_fec = 0.8;
  bool dual_pol = true;
  std::uint64_t n_symbols = 1'000'000;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(baud > 0.0)) throw DomainError("baud rate must be positive");
    if (!(b_ref > 0.0)) throw DomainError("reference bandwidth must be positive");
    if (!(r_fec > 0.0 && r_fec <= 1.0)) throw DomainError("FEC code rate must lie in (0, 1]");
  }
};

inline double osnr_to_snr(double osnr_db, const LinkConfig& cfg) {
  cfg.validate();
  const double pol = cfg.dual_pol ? 2.0 : 1.0;
  return osnr_db - 10.0 * std::log10(cfg.baud / (pol * cfg.b_ref));
}

/// R = H(P) - 4 (1 - r_fec) with H(P) = 2 h + 2, in bits per QAM symbol.
inline double info_rate(double h_amp, double r_fec) {
  if (!(r_fec > 0.0 && r_fec <= 1.0)) throw DomainError("FEC code rate must lie in (0, 1]");
  return (2.0 * h_amp + 2.0) - static_cast<double>(kBitsPerSymbol) * (1.0 - r_fec);
}

/// P(b_i = 0 | y) and P(b_i = 1 | y) for each label bit; sigma2 is the total
/// complex noise variance.
struct BitPosteriors {
  std::array<std::array<double, 2>, kBitsPerSymbol> p{};
  /// -log2 P(b_i = b_i(x) | y) summed over the four bits of x.
  double bit_metric_cost = 0.0;
};

namespace detail {

inline double log_sum_exp(const double* v, std::size_t n) {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) top = std::max(top, v[i]);
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - top);
  return top + std::log(s);
}

}  // namespace detail

inline BitPosteriors bit_posteriors(const PasConstellation& c, std::complex<double> y, double sigma2,
                                    std::optional<std::size_t> sent = std::nullopt) {
  std::array<double, kQamPoints> metric;
  for (std::size_t x = 0; x < kQamPoints; ++x)
    metric[x] = c.point_probs[x] > 0.0 ? std::log(c.point_probs[x]) - std::norm(y - c.points[x]) / sigma2
                                       : -std::numeric_limits<double>::infinity();

  BitPosteriors out;
  std::array<double, kQamPoints / 2> half;
  for (std::size_t i = 0; i < kBitsPerSymbol; ++i) {
    std::array<double, 2> lse{};
    for (int b = 0; b < 2; ++b) {
      std::size_t n = 0;
      for (std::size_t x = 0; x < kQamPoints; ++x)
        if (c.bit(x, i) == b) half[n++] = metric[x];
      lse[static_cast<std::size_t>(b)] = detail::log_sum_exp(half.data(), n);
    }
    const double all = detail::log_sum_exp(lse.data(), 2);
    out.p[i][0] = std::exp(lse[0] - all);
    out.p[i][1] = std::exp(lse[1] - all);
    if (sent) out.bit_metric_cost += (all - lse[static_cast<std::size_t>(c.bit(*sent, i))]) / std::log(2.0);
  }
  return out;
}

struct GmiEstimate {
  double gmi = 0.0;   // bits per QAM symbol
  double ngmi = 0.0;
  std::uint64_t n_symbols = 0;
};

inline constexpr std::uint64_t kSimBatch = std::uint64_t{1} << 15;

/// Monte-Carlo GMI at the given SNR. Symbols are i.i.d. from point_probs, or,
/// with `encoder`, amplitudes come from encoding uniform random bits through
/// that structure with uniform signs. Batches draw from independent seeded
/// streams and are summed in batch order, so the result does not depend on
/// the thread count.
inline GmiEstimate simulate(const PasConstellation& c, double snr_db, std::uint64_t n_symbols, std::uint64_t seed,
                            Execution exec = {}, const HidmStructure* encoder = nullptr) {
  const double snr = std::pow(10.0, snr_db / 10.0);
  if (!(snr > 0.0) || !std::isfinite(snr)) throw DomainError("SNR must be positive and finite");
  if (n_symbols == 0) throw DomainError("simulation needs at least one symbol");
  if (encoder && encoder->alphabet().size() != 2) throw DomainError("encoder must emit a two-level alphabet");

  const double sigma2 = c.mean_energy() / snr;
  const double sd = std::sqrt(sigma2 / 2.0);
  std::array<double, kQamPoints> cdf{};
  double acc = 0.0;
  for (std::size_t x = 0; x < kQamPoints; ++x) cdf[x] = acc += c.point_probs[x];

  const std::size_t batches = static_cast<std::size_t>((n_symbols + kSimBatch - 1) / kSimBatch);
  std::vector<double> cost(batches, 0.0);

  parallel_tasks(batches, exec, [&](std::size_t b) {
    std::mt19937_64 rng(mix_seed(seed, b));
    std::normal_distribution<double> noise(0.0, sd);
    const std::uint64_t begin = b * kSimBatch;
    const std::uint64_t count = std::min(kSimBatch, n_symbols - begin);

    std::vector<std::uint8_t> amps;  // amplitude indices from the encoder, two per symbol
    std::size_t next_amp = 0;
    BitBlock bits;
    const auto& levels = c.amplitude.alphabet().levels();
    auto refill = [&] {
      bits.resize(encoder->vectors().total_bits);
      for (auto& bit : bits) bit = static_cast<std::uint8_t>(rng() >> 63);
      amps.clear();
      for (std::uint8_t a : encode(*encoder, bits)) amps.push_back(a == levels[0] ? 0 : 1);
      next_amp = 0;
    };
    auto next_amplitude = [&]() -> std::size_t {
      if (next_amp == amps.size()) refill();
      return amps[next_amp++];
    };

    double sum = 0.0;
    for (std::uint64_t s = 0; s < count; ++s) {
      std::size_t x;
      if (encoder) {
        const std::size_t a_i = next_amplitude(), a_q = next_amplitude();
        const std::uint64_t signs = rng();
        x = ((signs & 1u) << 3) | (a_i << 2) | (((signs >> 1) & 1u) << 1) | a_q;
      } else {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * acc;
        x = 0;
        while (x + 1 < kQamPoints && (u >= cdf[x] || c.point_probs[x] == 0.0)) ++x;
      }
      const double n_re = noise(rng);
      const double n_im = noise(rng);
      const std::complex<double> y = c.points[x] + std::complex<double>(n_re, n_im);
      sum += bit_posteriors(c, y, sigma2, x).bit_metric_cost;
    }
    cost[b] = sum;
  });

  double total = 0.0;
  for (double v : cost) total += v;
  GmiEstimate e;
  e.n_symbols = n_symbols;
  e.gmi = c.symbol_entropy - total / static_cast<double>(n_symbols);
  e.ngmi = 1.0 - (c.symbol_entropy - e.gmi) / static_cast<double>(kBitsPerSymbol);
  return e;
}

struct SimPoint {
  double osnr_db = 0.0;
  double snr_db = 0.0;
  double gmi = 0.0;
  double ngmi = 0.0;
};

/// Grid start, start + step, ..., up to stop inclusive.
inline std::vector<double> osnr_grid(double start, double stop, double step) {
  if (!(step > 0.0)) throw DomainError("OSNR step must be positive");
  if (stop < start) throw DomainError("empty OSNR grid");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = start + static_cast<double>(i) * step;
  return g;
}

/// Every grid point reuses cfg.seed, so neighbouring points share noise draws.
inline std::vector<SimPoint> sweep(const PasConstellation& c, const LinkConfig& cfg, double start, double stop,
                                   double step, Execution exec = {}, const HidmStructure* encoder = nullptr) {
  cfg.validate();
  std::vector<SimPoint> out;
  for (double osnr : osnr_grid(start, stop, step)) {
    const double snr = osnr_to_snr(osnr, cfg);
    const auto e = simulate(c, snr, cfg.n_symbols, cfg.seed, exec, encoder);
    out.push_back(SimPoint{osnr, snr, e.gmi, e.ngmi});
  }
  return out;
}

/// OSNR where NGMI first reaches `threshold`, by linear interpolation between
/// grid points; nullopt when the crossing is not bracketed by the sweep.
inline std::optional<double> threshold_osnr(const std::vector<SimPoint>& s, double threshold) {
  if (s.empty() || s.front().ngmi > threshold) return std::nullopt;
  if (s.front().ngmi == threshold) return s.front().osnr_db;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i].ngmi >= threshold) {
      const double f = (threshold - s[i - 1].ngmi) / (s[i].ngmi - s[i - 1].ngmi);
      return s[i - 1].osnr_db + f * (s[i].osnr_db - s[i - 1].osnr_db);
    }
  }
  return std::nullopt;
}

/// OSNR the reference needs minus what the shaped system needs at the threshold.
inline std::optional<double> osnr_gain_at_threshold(const std::vector<SimPoint>& shaped,
                                                    const std::vector<SimPoint>& reference, double threshold) {
  const auto a = threshold_osnr(shaped, threshold);
  const auto b = threshold_osnr(reference, threshold);
  if (!a || !b) return std::nullopt;
  return *b - *a;
}

}  // namespace hidm
