#pragma once

// Constraint-pruned exhaustive search over k vectors, the semi-analytical
// layer-count model and the end-to-end design procedure.
//
// Template structures: M = (m1, Mbar, ..., Mbar), N = (N1, n, ..., n) with
// Mbar = 2^theta and theta = floor(N_b / n).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hidm/analysis.hpp"
#include "hidm/error.hpp"
#include "hidm/parallel.hpp"
#include "hidm/shaping_math.hpp"
#include "hidm/structure.hpp"

namespace hidm {

inline constexpr std::size_t kMaxLayers = 32;
inline constexpr std::uint64_t kMaxBlockLength = std::uint64_t{1} << 25;

enum class Objective { Energy, Rate };

/// How the E_DM^(2) / (4 N^(3)) correction of the energy model is scaled.
enum class EnergyNormalization {
  PerAmplitude,  // E_DM^(2) as mean energy per amplitude
  PerWord,       // E_DM^(2) times the 2-layer DM word length
};

inline const char* to_string(Objective o) { return o == Objective::Energy ? "energy" : "rate"; }
inline const char* to_string(EnergyNormalization e) {
  return e == EnergyNormalization::PerAmplitude ? "per_amplitude" : "per_word";
}

struct SearchTemplate {
  double r_dm = 0.5;
  BitBudget budget = BitBudget::make(12, 2);
  std::uint32_t m1 = 2;

  CharacterizationVectors instantiate(std::size_t layers, std::uint32_t n1, const std::vector<std::uint32_t>& k) const {
    std::vector<std::uint32_t> m(layers, static_cast<std::uint32_t>(budget.m_bar)), n(layers, budget.n);
    m[0] = m1;
    n[0] = n1;
    return derive(std::move(m), std::move(n), k);
  }

  /// r_dm * N when it is an integer, nullopt otherwise.
  std::optional<std::uint64_t> target_bits(std::size_t layers, std::uint32_t n1) const {
    double block = n1;
    for (std::size_t l = 1; l < layers; ++l) block *= budget.n;
    const double bits = r_dm * block;
    const double rounded = std::round(bits);
    if (std::abs(bits - rounded) > 1e-9 * std::max(1.0, bits)) return std::nullopt;
    return static_cast<std::uint64_t>(rounded);
  }
};

/// All admissible k vectors for the template at (L, N1), ascending
/// lexicographic. Empty when a layer cannot satisfy the constraints.
inline std::vector<std::vector<std::uint32_t>> enumerate_k(const SearchTemplate& tpl, std::size_t layers,
                                                           std::uint32_t n1) {
  if (layers < 2 || layers > kMaxLayers) throw DomainError("layer count outside [2, 32]");
  const auto target = tpl.target_bits(layers, n1);
  if (!target)
    throw InfeasibleError("rate " + std::to_string(tpl.r_dm) + " does not give an integer bit count for N_1 = " +
                          std::to_string(n1) + ", L = " + std::to_string(layers));

  const auto shape = tpl.instantiate(layers, n1, std::vector<std::uint32_t>(layers, 1));
  std::vector<std::uint32_t> hi(layers, 0);
  for (std::size_t l = 0; l < layers; ++l) {
    const std::int64_t out_bits = std::int64_t{shape.n[l]} * shape.log2_m(l);
    if (out_bits > tpl.budget.n_b) return {};
    const std::int64_t cap = std::min<std::int64_t>(out_bits - shape.log2_u(l),
                                                    std::int64_t{tpl.budget.n_b} - shape.log2_u(l));
    if (cap < 1) return {};
    hi[l] = static_cast<std::uint32_t>(cap);
  }

  // Suffix bounds on the bits the remaining layers can still contribute.
  std::vector<std::uint64_t> rest_min(layers + 1, 0), rest_max(layers + 1, 0);
  for (std::size_t l = layers; l-- > 0;) {
    rest_min[l] = rest_min[l + 1] + shape.t[l];
    rest_max[l] = rest_max[l + 1] + hi[l] * shape.t[l];
  }

  std::vector<std::vector<std::uint32_t>> out;
  std::vector<std::uint32_t> k(layers, 0);
  std::function<void(std::size_t, std::uint64_t)> descend = [&](std::size_t l, std::uint64_t remaining) {
    if (l == layers) {
      if (remaining == 0) out.push_back(k);
      return;
    }
    for (std::uint32_t v = 1; v <= hi[l]; ++v) {
      const std::uint64_t used = std::uint64_t{v} * shape.t[l];
      if (used > remaining) break;
      const std::uint64_t left = remaining - used;
      if (left < rest_min[l + 1]) break;
      if (left > rest_max[l + 1]) continue;
      k[l] = v;
      descend(l + 1, left);
    }
  };
  descend(0, *target);
  return out;
}

struct TraceRow {
  std::size_t layers = 0;
  std::uint32_t n1 = 0;
  std::vector<std::uint32_t> k;
  double r_loss = 0.0;
  double e_loss_db = 0.0;
};

using TraceSink = std::function<void(const TraceRow&)>;

struct SearchResult {
  CharacterizationVectors vectors;
  StructureMetrics metrics;
  std::size_t candidates = 0;
  std::size_t evaluated = 0;
};

namespace detail {

struct Evaluation {
  double r_loss = 0.0;
  double e_dm = 0.0;
  StructureMetrics metrics;
};

inline bool better(const Evaluation& a, const std::vector<std::uint32_t>& ka, const Evaluation& b,
                   const std::vector<std::uint32_t>& kb) {
  if (a.r_loss != b.r_loss) return a.r_loss < b.r_loss;
  if (a.e_dm != b.e_dm) return a.e_dm < b.e_dm;
  return ka < kb;
}

}  // namespace detail

/// Builds and scores every candidate from enumerate_k; minimum R_loss wins,
/// ties go to lower E_DM, then to the smaller k vector. Candidates are split
/// into contiguous slices; within a slice layers shared with the previous
/// candidate's k prefix are reused.
inline SearchResult search_k(const SearchTemplate& tpl, std::size_t layers, std::uint32_t n1, Execution exec = {},
                             const TraceSink& trace = {}) {
  const auto candidates = enumerate_k(tpl, layers, n1);
  if (candidates.empty())
    throw InfeasibleError("no admissible k vector for L = " + std::to_string(layers) + ", N_1 = " + std::to_string(n1));

  const AmplitudeAlphabet alphabet = AmplitudeAlphabet::odd(tpl.m1);
  const double e_mb = solve_mb(alphabet, tpl.r_dm).mean_energy;
  const auto shape = tpl.instantiate(layers, n1, candidates.front());
  if (shape.block_length > kMaxBlockLength) throw DomainError("DM word exceeds the 2^25 block-length cap");

  std::vector<detail::Evaluation> evals(candidates.size());
  const std::size_t slices = std::min<std::size_t>(candidates.size(), std::size_t{4} * exec.resolved());

  parallel_tasks(slices, exec, [&](std::size_t s) {
    const std::size_t begin = candidates.size() * s / slices;
    const std::size_t end = candidates.size() * (s + 1) / slices;
    std::vector<Layer> built;
    std::vector<CountMatrix> counts;
    std::vector<std::uint32_t> prefix;
    for (std::size_t c = begin; c < end; ++c) {
      const auto& k = candidates[c];
      std::size_t keep = 0;
      while (keep < prefix.size() && prefix[keep] == k[keep]) ++keep;
      built.resize(keep);
      counts.resize(keep);
      prefix.assign(k.begin(), k.end());
      for (std::size_t l = keep; l < layers; ++l) {
        auto energies = l == 0 ? detail::amplitude_energies(alphabet) : detail::lut_mean_energies(built.back());
        built.push_back(detail::build_layer(l, shape.m[l], shape.n[l], k[l], shape.u[l], std::move(energies), false));
        counts.push_back(count_matrix(built.back()));
      }
      const auto dist = detail::propagate(counts).front();
      const auto v = tpl.instantiate(layers, n1, k);
      AmplitudeDistribution p(alphabet, dist.to_doubles());
      StructureMetrics m{p};
      m.entropy_h = entropy_bits(p);
      m.r_dm = v.rate();
      m.r_loss = rate_loss(m.entropy_h, m.r_dm);
      m.e_dm = mean_energy(p);
      m.e_mb = e_mb;
      m.e_loss_db = energy_loss_db(m.e_dm, e_mb);
      m.low_probability_flag = p[0] < 0.5;
      evals[c] = detail::Evaluation{m.r_loss, m.e_dm, m};
    }
  });

  std::size_t best = 0;
  for (std::size_t c = 1; c < candidates.size(); ++c)
    if (detail::better(evals[c], candidates[c], evals[best], candidates[best])) best = c;

  if (trace)
    for (std::size_t c = 0; c < candidates.size(); ++c)
      trace(TraceRow{layers, n1, candidates[c], evals[c].r_loss, evals[c].metrics.e_loss_db});

  return SearchResult{tpl.instantiate(layers, n1, candidates[best]), evals[best].metrics, candidates.size(),
                      candidates.size()};
}

struct N1Step {
  std::uint32_t n1 = 0;
  std::optional<double> best_r_loss;  // empty when N1 admits no candidate
};

struct N1Selection {
  std::uint32_t n1 = 0;
  SearchResult result;
  std::vector<N1Step> history;
};

/// Walks N1 = N_b, N_b - 1, ... while the best R_loss keeps improving and
/// returns the last improving value. Values of N1 with no admissible k are
/// skipped. With full_scan every N1 > 2 is searched and the global best wins.
inline N1Selection select_n1(const SearchTemplate& tpl, std::size_t layers, Execution exec = {},
                             bool full_scan = false, const TraceSink& trace = {}) {
  const unsigned first_bits = detail::log2_exact(tpl.m1);
  const std::uint32_t start = tpl.budget.n_b / first_bits;
  std::optional<N1Selection> best;
  std::vector<N1Step> history;

  for (std::uint32_t n1 = start; n1 > 2; --n1) {
    std::optional<SearchResult> result;
    if (tpl.target_bits(layers, n1) && !enumerate_k(tpl, layers, n1).empty())
      result = search_k(tpl, layers, n1, exec, trace);
    history.push_back(N1Step{n1, result ? std::optional<double>(result->metrics.r_loss) : std::nullopt});
    if (!result) continue;

    if (!best) {
      best = N1Selection{n1, *result, {}};
      continue;
    }
    const bool improved = result->metrics.r_loss < best->result.metrics.r_loss;
    if (improved) {
      best = N1Selection{n1, *result, {}};
    } else if (!full_scan) {
      break;
    }
  }
  if (!best)
    throw InfeasibleError("no feasible N_1 for L = " + std::to_string(layers) + " at R_DM = " +
                          std::to_string(tpl.r_dm));
  best->history = std::move(history);
  return *best;
}

/// Finesse offset of the energy model.
inline double alpha_for(double r_dm) {
  if (r_dm <= 0.35) return 0.007;
  if (r_dm <= 0.70) return 0.014;
  return 0.028;
}

struct LossModelParams {
  double r_dm = 0.0;
  double e_dm_4 = 0.0;
  double e_dm_2 = 0.0;
  double r_loss_4 = 0.0;
  double r_loss_2 = 0.0;
  std::uint64_t n_3 = 0;  // DM word of the 3-layer optimum
  std::uint64_t n_2 = 0;  // DM word of the 2-layer optimum, used by PerWord scaling
  double alpha = 0.0;
};

struct Calibration {
  LossModelParams params;
  N1Selection two;
  N1Selection three;
  N1Selection four;
};

/// Exhaustive 2-, 3- and 4-layer optima at the template's rate and budget.
inline Calibration calibrate(const SearchTemplate& tpl, Execution exec = {}, bool full_scan = false,
                             const TraceSink& trace = {}) {
  auto four = select_n1(tpl, 4, exec, full_scan, trace);
  auto three = select_n1(tpl, 3, exec, full_scan, trace);
  auto two = select_n1(tpl, 2, exec, full_scan, trace);
  LossModelParams p;
  p.r_dm = tpl.r_dm;
  p.e_dm_4 = four.result.metrics.e_dm;
  p.e_dm_2 = two.result.metrics.e_dm;
  p.r_loss_4 = four.result.metrics.r_loss;
  p.r_loss_2 = two.result.metrics.r_loss;
  p.n_3 = three.result.vectors.block_length;
  p.n_2 = two.result.vectors.block_length;
  p.alpha = alpha_for(tpl.r_dm);
  return Calibration{p, std::move(two), std::move(three), std::move(four)};
}

struct EnergyPrediction {
  double e_dm = 0.0;
  double e_loss_db = 0.0;
};

inline EnergyPrediction predict_energy_loss(std::size_t layers, const LossModelParams& p, double e_mb,
                                            EnergyNormalization norm = EnergyNormalization::PerAmplitude) {
  if (layers < 5) throw DomainError("the layer model applies to L >= 5; use exhaustive values below");
  const double e2 = norm == EnergyNormalization::PerAmplitude ? p.e_dm_2 : p.e_dm_2 * static_cast<double>(p.n_2);
  const double e_dm = p.e_dm_4 + e2 / (4.0 * static_cast<double>(p.n_3)) *
                                     (std::ldexp(1.0, 5 - static_cast<int>(layers)) - 1.0) -
                      p.alpha;
  return EnergyPrediction{e_dm, energy_loss_db(e_dm, e_mb)};
}

inline double predict_rate_loss(std::size_t layers, const LossModelParams& p) {
  if (layers < 5) throw DomainError("the layer model applies to L >= 5; use exhaustive values below");
  return p.r_loss_4 +
         p.r_loss_2 / (4.0 * static_cast<double>(p.n_3)) * (std::ldexp(1.0, 8 - static_cast<int>(layers)) - 1.0) -
         0.008;
}

/// Energy limit of the model as L grows without bound.
inline double energy_limit(const LossModelParams& p, EnergyNormalization norm = EnergyNormalization::PerAmplitude) {
  const double e2 = norm == EnergyNormalization::PerAmplitude ? p.e_dm_2 : p.e_dm_2 * static_cast<double>(p.n_2);
  return p.e_dm_4 - e2 / (4.0 * static_cast<double>(p.n_3)) - p.alpha;
}

inline double rate_limit(const LossModelParams& p) {
  return p.r_loss_4 - p.r_loss_2 / (4.0 * static_cast<double>(p.n_3)) - 0.008;
}

struct SaturationThresholds {
  double energy_db = 5e-3;
  double rate = 5e-4;
};

/// Smallest L >= 5 whose step to L + 1 improves the objective by less than
/// its threshold, capped at kMaxLayers.
inline std::size_t select_layers(const LossModelParams& p, double e_mb, SaturationThresholds th = {},
                                 Objective objective = Objective::Energy,
                                 EnergyNormalization norm = EnergyNormalization::PerAmplitude) {
  for (std::size_t L = 5; L < kMaxLayers; ++L) {
    const double gain = objective == Objective::Energy
                            ? predict_energy_loss(L, p, e_mb, norm).e_loss_db -
                                  predict_energy_loss(L + 1, p, e_mb, norm).e_loss_db
                            : predict_rate_loss(L, p) - predict_rate_loss(L + 1, p);
    if (gain < (objective == Objective::Energy ? th.energy_db : th.rate)) return L;
  }
  return kMaxLayers;
}

/// Picks the normalization whose L-layer prediction lands closest to a
/// published reference value.
inline EnergyNormalization select_energy_normalization(const LossModelParams& p, double e_mb, std::size_t layers,
                                                       double reference_db) {
  auto miss = [&](EnergyNormalization n) {
    const double e_dm = p.e_dm_4 +
                        (n == EnergyNormalization::PerAmplitude ? p.e_dm_2 : p.e_dm_2 * static_cast<double>(p.n_2)) /
                            (4.0 * static_cast<double>(p.n_3)) *
                            (std::ldexp(1.0, 5 - static_cast<int>(layers)) - 1.0) -
                        p.alpha;
    if (!(e_dm > 0.0)) return HUGE_VAL;
    return std::abs(energy_loss_db(e_dm, e_mb) - reference_db);
  };
  return miss(EnergyNormalization::PerAmplitude) <= miss(EnergyNormalization::PerWord)
             ? EnergyNormalization::PerAmplitude
             : EnergyNormalization::PerWord;
}

struct DesignRequest {
  double r_dm = 0.75;
  unsigned n_b = 12;
  std::uint64_t mem_limit_bits = 64'000'000;
  Objective objective = Objective::Energy;
  EnergyNormalization normalization = EnergyNormalization::PerAmplitude;
  SaturationThresholds thresholds{};
  unsigned n = 2;
  std::uint32_t m1 = 2;
  bool full_scan = false;
};

struct DesignAttempt {
  unsigned theta = 0;
  std::size_t layers = 0;
  std::uint64_t mem_dec_bits = 0;       // estimate for L >= 5, table size otherwise
  std::uint64_t hardware_bits = 0;      // 2 mem_dec
  bool estimated = true;
  bool accepted = false;
};

struct DesignReport {
  DesignRequest request;
  unsigned theta = 0;
  std::uint64_t m_bar = 0;
  double e_mb = 0.0;
  LossModelParams params;
  std::vector<std::uint32_t> k_4, k_3, k_2;
  std::uint32_t n1_4 = 0, n1_3 = 0, n1_2 = 0;
  std::size_t chosen_layers = 0;
  double predicted_e_dm = 0.0;
  double predicted_e_loss_db = 0.0;
  double predicted_r_loss = 0.0;
  std::uint64_t mem_dec_estimate = 0;
  std::uint64_t hardware_estimate = 0;
  CharacterizationVectors vectors;
  StructureMetrics achieved;
  MemoryReport memory;
  std::size_t candidates_enumerated = 0;
  std::size_t candidates_evaluated = 0;
  std::vector<DesignAttempt> attempts;
};

/// Thrown when no configuration fits the memory limit.
class InfeasibleDesign : public InfeasibleError {
 public:
  InfeasibleDesign(const std::string& what, std::vector<DesignAttempt> attempts)
      : InfeasibleError(what), attempts_(std::move(attempts)) {}
  const std::vector<DesignAttempt>& attempts() const noexcept { return attempts_; }
  /// Attempt with the smallest hardware estimate.
  std::optional<DesignAttempt> tightest() const {
    if (attempts_.empty()) return std::nullopt;
    return *std::min_element(attempts_.begin(), attempts_.end(),
                             [](const auto& a, const auto& b) { return a.hardware_bits < b.hardware_bits; });
  }

 private:
  std::vector<DesignAttempt> attempts_;
};

/// Calibrate at L = 2, 3, 4, predict the saturating layer count, check the
/// estimated decoder memory against the limit (dropping layers, then halving
/// Mbar), then run the final exhaustive k search.
inline DesignReport design(const DesignRequest& req, Execution exec = {}, const TraceSink& trace = {}) {
  if (!(req.r_dm > 0.0) || !(req.r_dm < std::log2(static_cast<double>(req.m1))))
    throw DomainError("R_DM must lie in (0, log2 M_1)");
  if (req.n_b < 4) throw DomainError("N_b must be at least 4");

  const BitBudget base = BitBudget::make(req.n_b, req.n);
  const AmplitudeAlphabet alphabet = AmplitudeAlphabet::odd(req.m1);
  const double e_mb = solve_mb(alphabet, req.r_dm).mean_energy;
  std::vector<DesignAttempt> attempts;
  std::size_t enumerated = 0;

  auto finish = [&](const SearchTemplate& tpl, const Calibration& cal, std::size_t layers, const SearchResult& final,
                    double pe_dm, double pe_db, double pr, std::uint64_t est) {
    DesignReport r;
    r.request = req;
    r.theta = tpl.budget.theta;
    r.m_bar = tpl.budget.m_bar;
    r.e_mb = e_mb;
    r.params = cal.params;
    r.k_4 = cal.four.result.vectors.k;
    r.k_3 = cal.three.result.vectors.k;
    r.k_2 = cal.two.result.vectors.k;
    r.n1_4 = cal.four.n1;
    r.n1_3 = cal.three.n1;
    r.n1_2 = cal.two.n1;
    r.chosen_layers = layers;
    r.predicted_e_dm = pe_dm;
    r.predicted_e_loss_db = pe_db;
    r.predicted_r_loss = pr;
    r.mem_dec_estimate = est;
    r.hardware_estimate = 2 * est;
    r.vectors = final.vectors;
    r.achieved = final.metrics;
    r.memory = memory_report(final.vectors);
    r.candidates_enumerated = enumerated;
    r.candidates_evaluated = enumerated;
    r.attempts = attempts;
    return r;
  };

  struct Fallback {
    SearchTemplate tpl;
    Calibration cal;
  };
  std::vector<Fallback> calibrated;

  for (unsigned theta = base.theta; theta >= 1; --theta) {
    SearchTemplate tpl{req.r_dm, base.with_theta(theta), req.m1};
    std::optional<Calibration> cal;
    try {
      cal = calibrate(tpl, exec, req.full_scan, trace);
    } catch (const InfeasibleError&) {
      continue;
    }
    for (const auto* sel : {&cal->four, &cal->three, &cal->two}) {
      for (const auto& h : sel->history)
        if (h.best_r_loss) enumerated += enumerate_k(tpl, sel->result.vectors.layers(), h.n1).size();
    }

    const std::size_t ls = select_layers(cal->params, e_mb, req.thresholds, req.objective, req.normalization);
    for (std::size_t layers = ls; layers >= 5; --layers) {
      const std::uint64_t est =
          estimate_decoding_memory(cal->four.result.vectors.k, layers, cal->four.n1, theta, req.n);
      DesignAttempt at{theta, layers, est, 2 * est, true, false};
      if (at.hardware_bits > req.mem_limit_bits || layers > kMaxLayers) {
        attempts.push_back(at);
        continue;
      }
      SearchResult final = search_k(tpl, layers, cal->four.n1, exec, trace);
      enumerated += final.candidates;
      const auto actual = memory_report(final.vectors);
      if (2 * actual.mem_dec > req.mem_limit_bits) {
        attempts.push_back(DesignAttempt{theta, layers, actual.mem_dec, 2 * actual.mem_dec, false, false});
        continue;
      }
      at.accepted = true;
      attempts.push_back(at);
      const auto pe = predict_energy_loss(layers, cal->params, e_mb, req.normalization);
      return finish(tpl, *cal, layers, final, pe.e_dm, pe.e_loss_db, predict_rate_loss(layers, cal->params), est);
    }
    calibrated.push_back(Fallback{tpl, std::move(*cal)});
    if (theta == 1) break;
  }

  // No L >= 5 design fits; fall back to the exhaustive small structures.
  for (auto& fb : calibrated) {
    for (const auto* sel : {&fb.cal.four, &fb.cal.three, &fb.cal.two}) {
      const auto mem = memory_report(sel->result.vectors);
      DesignAttempt at{fb.tpl.budget.theta, sel->result.vectors.layers(), mem.mem_dec, 2 * mem.mem_dec, false, false};
      if (at.hardware_bits <= req.mem_limit_bits) {
        at.accepted = true;
        attempts.push_back(at);
        const auto& m = sel->result.metrics;
        return finish(fb.tpl, fb.cal, at.layers, sel->result, m.e_dm, m.e_loss_db, m.r_loss, mem.mem_dec);
      }
      attempts.push_back(at);
    }
  }
  throw InfeasibleDesign("no HiDM design meets the memory limit of " + std::to_string(req.mem_limit_bits) + " bits",
                         std::move(attempts));
}

/// Size of the unconstrained 4-layer search space: M = (m1, M2, M3, M4) with
/// upper alphabets from `upper`, any N_i and k_i meeting (iii), (iv), the
/// N_b bound and the exact rate.
inline std::uint64_t count_unconstrained_candidates(double r_dm, unsigned n_b, std::uint32_t m1 = 2,
                                                    const std::vector<std::uint32_t>& upper = {16, 32, 64}) {
  constexpr std::size_t L = 4;
  std::uint64_t total = 0;
  std::vector<std::uint32_t> m(L), n(L), k(L);
  m[0] = m1;
  std::function<void(std::size_t)> pick_m, pick_n;
  std::function<void(std::size_t, const CharacterizationVectors&, std::uint64_t)> pick_k;

  pick_k = [&](std::size_t l, const CharacterizationVectors& shape, std::uint64_t remaining) {
    if (l == L) {
      total += remaining == 0;
      return;
    }
    const std::int64_t out_bits = std::int64_t{shape.n[l]} * shape.log2_m(l);
    const std::int64_t cap = std::min<std::int64_t>(out_bits, n_b) - shape.log2_u(l);
    for (std::int64_t v = 1; v <= cap; ++v) {
      const std::uint64_t used = static_cast<std::uint64_t>(v) * shape.t[l];
      if (used > remaining) break;
      pick_k(l + 1, shape, remaining - used);
    }
  };
  pick_n = [&](std::size_t l) {
    if (l == L) {
      const auto shape = derive(m, n, std::vector<std::uint32_t>(L, 1));
      const double bits = r_dm * static_cast<double>(shape.block_length);
      if (std::abs(bits - std::round(bits)) > 1e-9) return;
      pick_k(0, shape, static_cast<std::uint64_t>(std::round(bits)));
      return;
    }
    const unsigned width = detail::log2_exact(m[l]);
    for (std::uint32_t v = 1; v * width <= n_b; ++v) {
      n[l] = v;
      pick_n(l + 1);
    }
  };
  pick_m = [&](std::size_t l) {
    if (l == L) {
      pick_n(0);
      return;
    }
    for (std::uint32_t a : upper) {
      m[l] = a;
      pick_m(l + 1);
    }
  };
  pick_m(1);
  return total;
}

}  // namespace hidm
