#pragma once

// Alphabet-level probability, entropy and energy helpers plus the
// Maxwell-Boltzmann reference used by every loss metric.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "hidm/error.hpp"

namespace hidm {

/// Odd positive amplitude levels, strictly increasing, e.g. {1, 3} per
/// dimension of 16-QAM.
class AmplitudeAlphabet {
 public:
  /// The 16-QAM per-dimension alphabet {1, 3}.
  AmplitudeAlphabet() : levels_{1, 3} {}
  explicit AmplitudeAlphabet(std::vector<int> levels) : levels_(std::move(levels)) {
    if (levels_.empty()) throw ValidationError("amplitude alphabet is empty");
    for (std::size_t i = 0; i < levels_.size(); ++i) {
      if (levels_[i] < 1 || levels_[i] % 2 == 0)
        throw ValidationError("amplitude levels must be odd and >= 1");
      if (i > 0 && levels_[i] <= levels_[i - 1])
        throw ValidationError("amplitude levels must be strictly increasing");
    }
  }

  /// The PAM-style alphabet {1, 3, ..., 2m-1}.
  static AmplitudeAlphabet odd(std::size_t size) {
    std::vector<int> levels(size);
    for (std::size_t i = 0; i < size; ++i) levels[i] = static_cast<int>(2 * i + 1);
    return AmplitudeAlphabet(std::move(levels));
  }

  std::size_t size() const noexcept { return levels_.size(); }
  int operator[](std::size_t i) const { return levels_.at(i); }
  const std::vector<int>& levels() const noexcept { return levels_; }

  friend bool operator==(const AmplitudeAlphabet&, const AmplitudeAlphabet&) = default;

 private:
  std::vector<int> levels_;
};

class AmplitudeDistribution {
 public:
  static constexpr double kSumTolerance = 1e-12;

  /// Uniform over {1, 3}.
  AmplitudeDistribution() : probs_{0.5, 0.5} {}

  AmplitudeDistribution(AmplitudeAlphabet alphabet, std::vector<double> probs)
      : alphabet_(std::move(alphabet)), probs_(std::move(probs)) {
    if (probs_.size() != alphabet_.size())
      throw ValidationError("distribution length differs from alphabet size");
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("probability outside [0, 1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "probabilities sum to " << sum << ", expected 1";
      throw ValidationError(os.str());
    }
  }

  const AmplitudeAlphabet& alphabet() const noexcept { return alphabet_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  double operator[](std::size_t i) const { return probs_.at(i); }

 private:
  AmplitudeAlphabet alphabet_;
  std::vector<double> probs_;
};

/// Bits per amplitude, with 0 log 0 = 0.
inline double entropy_bits(const AmplitudeDistribution& dist) {
  double h = 0.0;
  for (double p : dist.probs())
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

/// Sum of p(x) x^2 in amplitude^2 units.
inline double mean_energy(const AmplitudeDistribution& dist) {
  double e = 0.0;
  const auto& a = dist.alphabet();
  for (std::size_t i = 0; i < a.size(); ++i) e += dist[i] * a[i] * a[i];
  return e;
}

struct MbReference {
  double rate_parameter = 0.0;  // nu in p(x) ~ exp(-nu x^2)
  AmplitudeDistribution distribution;
  double mean_energy = 0.0;
  double entropy = 0.0;
};

namespace detail {

inline std::vector<double> mb_weights(const AmplitudeAlphabet& alphabet, double nu) {
  // Shifted by the lowest energy so large nu does not underflow the first term.
  const double base = static_cast<double>(alphabet[0]) * alphabet[0];
  std::vector<double> w(alphabet.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double x2 = static_cast<double>(alphabet[i]) * alphabet[i];
    w[i] = std::exp(-nu * (x2 - base));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

inline double mb_entropy(const AmplitudeAlphabet& alphabet, double nu) {
  double h = 0.0;
  for (double p : mb_weights(alphabet, nu))
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

}  // namespace detail

/// Maxwell-Boltzmann distribution over `alphabet` whose entropy equals
/// `target_entropy`. Entropy is strictly decreasing in nu, so nu is found by
/// bisection after doubling an upper bracket.
inline MbReference solve_mb(const AmplitudeAlphabet& alphabet, double target_entropy) {
  const double h_max = std::log2(static_cast<double>(alphabet.size()));
  if (!(target_entropy > 0.0) || target_entropy > h_max + 1e-12) {
    std::ostringstream os;
    os << "target entropy " << target_entropy << " outside (0, " << h_max << "]";
    throw DomainError(os.str());
  }

  double nu = 0.0;
  if (target_entropy < h_max - 1e-15) {
    double lo = 0.0;
    double hi = 1.0;
    while (detail::mb_entropy(alphabet, hi) >= target_entropy) {
      lo = hi;
      hi *= 2.0;
      if (!std::isfinite(hi)) throw DomainError("Maxwell-Boltzmann bracket diverged");
    }
    for (int it = 0; it < 2000; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (detail::mb_entropy(alphabet, mid) > target_entropy)
        lo = mid;
      else
        hi = mid;
      if (hi - lo <= 1e-12 * std::max(1.0, hi) &&
          std::abs(detail::mb_entropy(alphabet, mid) - target_entropy) <= 1e-12)
        break;
    }
    nu = 0.5 * (lo + hi);
  }

  AmplitudeDistribution dist(alphabet, detail::mb_weights(alphabet, nu));
  const double e = mean_energy(dist);
  const double h = entropy_bits(dist);
  return MbReference{nu, std::move(dist), e, h};
}

/// 10 log10(e_dm / e_mb). Negative results are arithmetically valid; callers
/// flag them.
inline double energy_loss_db(double e_dm, double e_mb) {
  if (!(e_dm > 0.0) || !(e_mb > 0.0)) throw DomainError("energy_loss_db requires positive energies");
  return 10.0 * std::log10(e_dm / e_mb);
}

inline double rate_loss(double h, double r_dm) { return h - r_dm; }

}  // namespace hidm
