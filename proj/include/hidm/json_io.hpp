#pragma once

// JSON documents: structures, build configs, metrics and design reports.
// Objects use sorted keys and no whitespace, so equal content gives equal bytes.
//
// Structure symbols are amplitude values at the first layer and 1-based LUT
// indices above it. Energies are [numerator, denominator] pairs.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hidm/analysis.hpp"
#include "hidm/design.hpp"
#include "hidm/error.hpp"
#include "hidm/pas_awgn.hpp"
#include "hidm/structure.hpp"

namespace hidm {

using Json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

namespace detail {

inline Json dyadic_json(const Dyadic& d) { return Json::array({d.numerator(), d.denominator()}); }

inline Dyadic dyadic_from(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    throw ValidationError(where + ": energy must be [numerator, denominator]");
  const auto num = j[0].get<std::int64_t>();
  const auto den = j[1].get<std::int64_t>();
  if (den <= 0 || !std::has_single_bit(static_cast<std::uint64_t>(den)))
    throw ValidationError(where + ": energy denominator must be a power of two");
  return Dyadic(num, std::countr_zero(static_cast<std::uint64_t>(den)));
}

inline void require_keys(const Json& j, const std::set<std::string>& allowed, const std::set<std::string>& required,
                         const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ValidationError(where + ": unknown field '" + key + "'");
  for (const auto& key : required)
    if (!j.contains(key)) throw ValidationError(where + ": missing field '" + key + "'");
}

inline std::vector<std::uint32_t> u32_list(const Json& j, const std::string& name) {
  if (!j.is_array()) throw ValidationError("'" + name + "' must be an array");
  std::vector<std::uint32_t> out;
  for (const auto& v : j) {
    if (!v.is_number_unsigned()) throw ValidationError("'" + name + "' must hold non-negative integers");
    const auto x = v.get<std::uint64_t>();
    if (x > 0xffffffffu) throw ValidationError("'" + name + "' entry too large");
    out.push_back(static_cast<std::uint32_t>(x));
  }
  return out;
}

inline void check_version(const Json& j) {
  if (!j.at("version").is_number_integer() || j.at("version").get<int>() != kFormatVersion)
    throw ValidationError("unsupported version, expected " + std::to_string(kFormatVersion));
}

inline Json parse_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace detail

inline Json structure_json(const HidmStructure& s) {
  const auto& v = s.vectors();
  Json layers = Json::array();
  for (std::size_t l = 0; l < s.layer_count(); ++l) {
    const Layer& layer = s.layer(l);
    Json luts = Json::array();
    for (const Lut& lut : layer.luts) {
      Json seqs = Json::array();
      Json energies = Json::array();
      for (std::size_t r = 0; r < lut.size(); ++r) {
        Json seq = Json::array();
        for (std::uint16_t sym : lut.sequence(r))
          seq.push_back(l == 0 ? s.alphabet()[sym] : static_cast<int>(sym) + 1);
        seqs.push_back(std::move(seq));
        energies.push_back(detail::dyadic_json(lut.energies[r]));
      }
      luts.push_back(
          Json{{"energies", std::move(energies)}, {"mean_energy", detail::dyadic_json(lut.mean_energy)},
               {"sequences", std::move(seqs)}});
    }
    Json symbol_energy = Json::array();
    for (const auto& e : layer.symbol_energy) symbol_energy.push_back(detail::dyadic_json(e));
    layers.push_back(Json{{"luts", std::move(luts)}, {"symbol_energies", std::move(symbol_energy)}});
  }
  return Json{{"M", v.m},           {"N", v.n},
              {"alphabet", s.alphabet().levels()},
              {"k", v.k},           {"layers", std::move(layers)},
              {"version", kFormatVersion}};
}

inline std::string serialize(const HidmStructure& s) { return structure_json(s).dump(); }

inline HidmStructure structure_from_json(const Json& j) {
  detail::require_keys(j, {"M", "N", "alphabet", "k", "layers", "version"}, {"M", "N", "k", "layers", "version"},
                       "structure");
  detail::check_version(j);
  auto v = derive(detail::u32_list(j["M"], "M"), detail::u32_list(j["N"], "N"), detail::u32_list(j["k"], "k"));
  AmplitudeAlphabet alphabet = AmplitudeAlphabet::odd(v.m[0]);
  if (j.contains("alphabet")) {
    std::vector<int> levels;
    for (const auto& x : j["alphabet"]) {
      if (!x.is_number_integer()) throw ValidationError("alphabet entries must be integers");
      levels.push_back(x.get<int>());
    }
    alphabet = AmplitudeAlphabet(std::move(levels));
  }
  const Json& jl = j["layers"];
  if (!jl.is_array() || jl.size() != v.layers()) throw ValidationError("'layers' must hold one entry per layer");

  std::vector<Layer> layers(v.layers());
  std::vector<std::vector<std::vector<Dyadic>>> stored(v.layers());
  for (std::size_t l = 0; l < v.layers(); ++l) {
    const std::string where = "layer " + std::to_string(l + 1);
    detail::require_keys(jl[l], {"luts", "symbol_energies"}, {"luts", "symbol_energies"}, where);
    Layer& layer = layers[l];
    for (const auto& e : jl[l]["symbol_energies"]) layer.symbol_energy.push_back(detail::dyadic_from(e, where));
    const Json& luts = jl[l]["luts"];
    if (!luts.is_array()) throw ValidationError(where + ": 'luts' must be an array");
    layer.luts.resize(luts.size());
    stored[l].resize(luts.size());
    for (std::size_t y = 0; y < luts.size(); ++y) {
      const std::string lw = where + " LUT " + std::to_string(y + 1);
      detail::require_keys(luts[y], {"energies", "mean_energy", "sequences"}, {"energies", "mean_energy", "sequences"},
                           lw);
      Lut& lut = layer.luts[y];
      lut.mean_energy = detail::dyadic_from(luts[y]["mean_energy"], lw);
      for (const auto& e : luts[y]["energies"]) stored[l][y].push_back(detail::dyadic_from(e, lw));
      for (const auto& seq : luts[y]["sequences"]) {
        if (!seq.is_array() || seq.size() != v.n[l]) throw ValidationError(lw + ": sequence length differs from N");
        for (const auto& sym : seq) {
          if (!sym.is_number_integer()) throw ValidationError(lw + ": symbols must be integers");
          const int value = sym.get<int>();
          int index = -1;
          if (l == 0) {
            const auto& lv = alphabet.levels();
            const auto it = std::find(lv.begin(), lv.end(), value);
            if (it != lv.end()) index = static_cast<int>(it - lv.begin());
          } else if (value >= 1 && static_cast<std::uint32_t>(value) <= v.m[l]) {
            index = value - 1;
          }
          if (index < 0) throw ValidationError(lw + ": symbol " + std::to_string(value) + " out of range");
          lut.symbols.push_back(static_cast<std::uint16_t>(index));
        }
      }
    }
  }

  HidmStructure s = assemble(v, alphabet, std::move(layers));
  for (std::size_t l = 0; l < s.layer_count(); ++l)
    for (std::size_t y = 0; y < stored[l].size(); ++y)
      if (stored[l][y] != s.lut(l, y).energies)
        throw ValidationError("layer " + std::to_string(l + 1) + " LUT " + std::to_string(y + 1) +
                              ": stored sequence energies inconsistent");
  return s;
}

inline HidmStructure parse_structure(const std::string& text) {
  return structure_from_json(detail::parse_text(text));
}

/// Input of the build command.
struct BuildConfig {
  CharacterizationVectors vectors;
  std::optional<unsigned> n_b;
  std::optional<bool> template_shape;  // defaults to whether n_b is given
};

inline BuildConfig parse_build_config(const std::string& text) {
  const Json j = detail::parse_text(text);
  detail::require_keys(j, {"M", "N", "k", "n_b", "template", "version"}, {"M", "N", "k", "version"}, "config");
  detail::check_version(j);
  BuildConfig c;
  c.vectors = derive(detail::u32_list(j["M"], "M"), detail::u32_list(j["N"], "N"), detail::u32_list(j["k"], "k"));
  if (j.contains("n_b")) {
    if (!j["n_b"].is_number_unsigned()) throw ValidationError("'n_b' must be a positive integer");
    c.n_b = j["n_b"].get<unsigned>();
  }
  if (j.contains("template")) {
    if (!j["template"].is_boolean()) throw ValidationError("'template' must be a boolean");
    c.template_shape = j["template"].get<bool>();
  }
  return c;
}

inline Json metrics_json(const StructureMetrics& m, const MemoryReport& mem) {
  return Json{{"p", m.p.probs()},
              {"p1", m.p[0]},
              {"entropy_bits_per_amp", m.entropy_h},
              {"r_dm", m.r_dm},
              {"r_loss", m.r_loss},
              {"e_dm", m.e_dm},
              {"e_mb", m.e_mb},
              {"e_loss_db", m.e_loss_db},
              {"low_probability_flag", m.low_probability_flag},
              {"mem_enc_bits", mem.mem_enc},
              {"mem_dec_bits", mem.mem_dec},
              {"mem_total_bits", mem.mem_total}};
}

inline Json vectors_json(const CharacterizationVectors& v) { return Json{{"M", v.m}, {"N", v.n}, {"k", v.k}}; }

inline Json attempt_json(const DesignAttempt& a) {
  return Json{{"theta", a.theta},
              {"layers", a.layers},
              {"mem_dec_bits", a.mem_dec_bits},
              {"hardware_bits", a.hardware_bits},
              {"estimated", a.estimated},
              {"accepted", a.accepted}};
}

inline Json design_json(const DesignReport& r) {
  Json attempts = Json::array();
  for (const auto& a : r.attempts) attempts.push_back(attempt_json(a));
  const auto& p = r.params;
  return Json{
      {"request",
       {{"r_dm", r.request.r_dm},
        {"n_b", r.request.n_b},
        {"mem_limit_bits", r.request.mem_limit_bits},
        {"objective", to_string(r.request.objective)},
        {"full_scan", r.request.full_scan}}},
      {"energy_normalization", to_string(r.request.normalization)},
      {"theta", r.theta},
      {"m_bar", r.m_bar},
      {"calibration",
       {{"e_dm_4", p.e_dm_4},
        {"e_dm_2", p.e_dm_2},
        {"r_loss_4", p.r_loss_4},
        {"r_loss_2", p.r_loss_2},
        {"e_loss_4_db", energy_loss_db(p.e_dm_4, r.e_mb)},
        {"e_loss_2_db", energy_loss_db(p.e_dm_2, r.e_mb)},
        {"n_3", p.n_3},
        {"n_2", p.n_2},
        {"alpha", p.alpha},
        {"k_4", r.k_4},
        {"k_3", r.k_3},
        {"k_2", r.k_2},
        {"n1_4", r.n1_4},
        {"n1_3", r.n1_3},
        {"n1_2", r.n1_2}}},
      {"e_mb", r.e_mb},
      {"chosen_layers", r.chosen_layers},
      {"predicted", {{"e_dm", r.predicted_e_dm}, {"e_loss_db", r.predicted_e_loss_db}, {"r_loss", r.predicted_r_loss}}},
      {"mem_dec_estimate_bits", r.mem_dec_estimate},
      {"hardware_estimate_bits", r.hardware_estimate},
      {"vectors", vectors_json(r.vectors)},
      {"achieved", metrics_json(r.achieved, r.memory)},
      {"candidates_enumerated", r.candidates_enumerated},
      {"candidates_evaluated", r.candidates_evaluated},
      {"attempts", std::move(attempts)},
      {"version", kFormatVersion}};
}

inline Json infeasible_json(const InfeasibleDesign& e) {
  Json attempts = Json::array();
  for (const auto& a : e.attempts()) attempts.push_back(attempt_json(a));
  Json out{{"error", e.what()}, {"attempts", std::move(attempts)}};
  if (const auto t = e.tightest()) out["tightest"] = attempt_json(*t);
  return out;
}

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) { return Json(v).dump(); }

inline std::string sweep_csv(const std::vector<SimPoint>& points) {
  std::string out = "osnr_db,snr_db,gmi_bits_per_sym,ngmi\n";
  for (const auto& p : points)
    out += format_double(p.osnr_db) + "," + format_double(p.snr_db) + "," + format_double(p.gmi) + "," +
           format_double(p.ngmi) + "\n";
  return out;
}

}  // namespace hidm
