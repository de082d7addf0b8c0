#pragma once

// Command-line front end. run_cli is separate from main so tests can drive it
// in-process with captured streams.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hidm/hidm.hpp"

namespace hidm::cli {

enum ExitCode : int { kOk = 0, kInput = 2, kInfeasible = 3, kNonCodeword = 4 };

inline constexpr std::uint64_t kMinRecommendedSymbols = 10'000;

/// "8000000", "8M", "8MB", "64Mi", "512k": decimal suffixes k/M/G, binary
/// suffixes Ki/Mi/Gi; an optional trailing B is ignored. The unit is bits.
inline std::uint64_t parse_bits(const std::string& text) {
  std::size_t pos = 0;
  while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos == 0) throw ValidationError("memory limit '" + text + "' must start with a number");
  const std::uint64_t value = std::stoull(text.substr(0, pos));
  std::string unit = text.substr(pos);
  if (!unit.empty() && (unit.back() == 'B' || unit.back() == 'b')) unit.pop_back();
  std::uint64_t scale = 1;
  if (unit.empty()) scale = 1;
  else if (unit == "k" || unit == "K") scale = 1'000;
  else if (unit == "M") scale = 1'000'000;
  else if (unit == "G") scale = 1'000'000'000;
  else if (unit == "Ki") scale = std::uint64_t{1} << 10;
  else if (unit == "Mi") scale = std::uint64_t{1} << 20;
  else if (unit == "Gi") scale = std::uint64_t{1} << 30;
  else throw ValidationError("unknown memory unit in '" + text + "'");
  std::uint64_t bits;
  if (__builtin_mul_overflow(value, scale, &bits)) throw ValidationError("memory limit overflows");
  return bits;
}

/// "a:b:c" as start:stop:step, or a single value.
inline std::vector<double> parse_range(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("bad OSNR range '" + text + "'");
    }
  }
  if (parts.size() == 1) return osnr_grid(parts[0], parts[0], 1.0);
  if (parts.size() != 3) throw ValidationError("OSNR range must be start:stop:step");
  return osnr_grid(parts[0], parts[1], parts[2]);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, const std::string& data) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write '" + path + "'");
  f << data;
  if (!f) throw ValidationError("write to '" + path + "' failed");
}

struct Globals {
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out;
  std::string format;  // empty: the subcommand default
};

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(int argc, const char* const* argv) {
    CLI::App app{"Hierarchical distribution matcher design, coding and evaluation"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--seed", g_.seed, "Seed for every stochastic path");
    app.add_option("--threads", g_.threads, "Worker threads, 0 = all cores");
    app.add_option("--out", g_.out, "Output file, standard output when omitted");
    app.add_option("--format", g_.format, "Report format")->check(CLI::IsMember({"json", "csv"}));

    std::function<int()> action;
    add_build(app, action);
    add_analyze(app, action);
    add_design(app, action);
    add_predict(app, action);
    add_codec(app, action);
    add_simulate(app, action);

    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      out_ << app.help();
      return kOk;
    } catch (const CLI::CallForAllHelp& e) {
      out_ << app.help("", CLI::AppFormatMode::All);
      return kOk;
    } catch (const CLI::ParseError& e) {
      err_ << "error: " << e.what() << "\n";
      return kInput;
    }

    try {
      return action();
    } catch (const InfeasibleDesign& e) {
      err_ << "infeasible: " << e.what() << "\n" << infeasible_json(e).dump() << "\n";
      return kInfeasible;
    } catch (const InfeasibleError& e) {
      err_ << "infeasible: " << e.what() << "\n";
      return kInfeasible;
    } catch (const StreamNonCodeword& e) {
      err_ << "non-codeword: word " << e.word() << ", layer " << e.layer() + 1 << ", block " << e.block() << ": "
           << e.what() << "\n";
      return kNonCodeword;
    } catch (const NonCodewordError& e) {
      err_ << "non-codeword: layer " << e.layer() + 1 << ", block " << e.block() << ": " << e.what() << "\n";
      return kNonCodeword;
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << "\n";
      return kInput;
    }
  }

 private:
  Execution exec() const { return Execution{g_.threads}; }
  std::string format(const char* fallback) const { return g_.format.empty() ? fallback : g_.format; }

  void emit(const std::string& data) {
    if (g_.out.empty())
      out_ << data;
    else
      write_file(g_.out, data);
  }

  /// Summaries go to stdout when the payload goes to a file, else to stderr.
  std::ostream& summary() { return g_.out.empty() ? err_ : out_; }

  void print_summary(const StructureMetrics& m, const MemoryReport& mem) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(4);
    s << "p1 = " << m.p[0] << ", H = " << m.entropy_h << " bits/amp, R_DM = " << m.r_dm << ", R_loss = " << m.r_loss
      << ", E_loss = " << m.e_loss_db << " dB\n";
    s << "mem_enc = " << mem.mem_enc << " bits, mem_dec = " << mem.mem_dec << " bits, total = " << mem.mem_total
      << " bits\n";
    if (m.low_probability_flag) s << "note: p1 < 0.5, energy loss may be negative\n";
    summary() << s.str();
  }

  void add_build(CLI::App& app, std::function<int()>& action) {
    auto* sub = app.add_subcommand("build", "Build a structure from a JSON config");
    sub->add_option("config", build_config_, "Config file with version, M, N, k, optional n_b and template")
        ->required();
    sub->callback([this, &action] {
      action = [this] {
        const BuildConfig cfg = parse_build_config(read_file(build_config_));
        const auto& v = cfg.vectors;
        const bool template_shape = cfg.template_shape.value_or(cfg.n_b.has_value());
        const unsigned n_b = cfg.n_b.value_or(max_lut_bits(v));
        const auto violations = validate(v, BitBudget::make(n_b, v.n[1]),
                                         ValidationOptions{template_shape});
        if (!violations.empty()) {
          err_ << "invalid characterization vectors:\n";
          for (const auto& x : violations) err_ << "  " << x.message << "\n";
          return int{kInput};
        }
        const HidmStructure s = build(v);
        emit(serialize(s));
        print_summary(metrics(s), memory_report(v));
        return int{kOk};
      };
    });
  }

  void add_analyze(CLI::App& app, std::function<int()>& action) {
    auto* sub = app.add_subcommand("analyze", "Output distribution, losses and memory of a structure");
    sub->add_option("--structure", structure_path_, "Structure JSON")->required();
    sub->add_flag("--empirical", empirical_, "Also count amplitudes by encoding every input word");
    sub->callback([this, &action] {
      action = [this] {
        const HidmStructure s = parse_structure(read_file(structure_path_));
        Json j = metrics_json(metrics(s), memory_report(s.vectors()));
        if (empirical_) {
          const auto emp = empirical_distribution(s, Exhaustive{}, exec());
          j["empirical_counts"] = emp.counts;
          j["empirical_total"] = emp.total;
          const auto exact = output_distribution(s);
          bool equal = true;
          for (std::size_t x = 0; x < emp.counts.size(); ++x) equal = equal && emp.frequency(x) == exact.prob(x);
          j["empirical_matches"] = equal;
        }
        emit(j.dump() + "\n");
        return int{kOk};
      };
    });
  }

  void add_design_flags(CLI::App* sub) {
    sub->add_option("--rdm", req_.r_dm, "DM rate in bits per amplitude")->required();
    sub->add_option("--nb", req_.n_b, "LUT bit budget N_b")->required()->check(CLI::Range(4u, 62u));
    sub->add_option("--normalization", normalization_, "Energy model scaling")
        ->check(CLI::IsMember({"per_amplitude", "per_word"}));
    sub->add_flag("--full-scan", req_.full_scan, "Search every N_1 instead of stopping at the first worsening");
  }

  void apply_normalization() {
    req_.normalization =
        normalization_ == "per_word" ? EnergyNormalization::PerWord : EnergyNormalization::PerAmplitude;
  }

  void add_design(CLI::App& app, std::function<int()>& action) {
    auto* sub = app.add_subcommand("design", "Run the full design procedure");
    add_design_flags(sub);
    sub->add_option("--mem-limit", mem_limit_, "Hardware memory limit in bits (k, M, G, Ki, Mi, Gi suffixes)")
        ->required();
    sub->add_option("--objective", objective_, "Saturation objective")->check(CLI::IsMember({"energy", "rate"}));
    sub->add_option("--trace", trace_path_, "CSV of every evaluated candidate");
    sub->callback([this, &action] {
      action = [this] {
        apply_normalization();
        req_.mem_limit_bits = parse_bits(mem_limit_);
        req_.objective = objective_ == "rate" ? Objective::Rate : Objective::Energy;
        std::string trace = "layers,n1,k,r_loss,e_loss_db\n";
        TraceSink sink;
        if (!trace_path_.empty()) {
          sink = [&trace](const TraceRow& r) {
            std::string k;
            for (std::size_t i = 0; i < r.k.size(); ++i) k += (i ? ";" : "") + std::to_string(r.k[i]);
            trace += std::to_string(r.layers) + "," + std::to_string(r.n1) + "," + k + "," +
                     format_double(r.r_loss) + "," + format_double(r.e_loss_db) + "\n";
          };
        }
        std::optional<DesignReport> report;
        try {
          report = design(req_, exec(), sink);
        } catch (...) {
          if (!trace_path_.empty()) write_file(trace_path_, trace);
          throw;
        }
        if (!trace_path_.empty()) write_file(trace_path_, trace);
        emit(design_json(*report).dump() + "\n");
        std::ostringstream s;
        s.setf(std::ios::fixed);
        s.precision(4);
        s << "L_s = " << report->chosen_layers << ", predicted E_loss = " << report->predicted_e_loss_db
          << " dB, R_loss = " << report->predicted_r_loss << "; achieved E_loss = " << report->achieved.e_loss_db
          << " dB, R_loss = " << report->achieved.r_loss << "; 2 mem_dec estimate = " << report->hardware_estimate
          << " bits\n";
        summary() << s.str();
        return int{kOk};
      };
    });
  }

  void add_predict(CLI::App& app, std::function<int()>& action) {
    auto* sub = app.add_subcommand("predict", "Calibrate and tabulate predicted losses for L = 5..lmax");
    add_design_flags(sub);
    sub->add_option("--lmax", lmax_, "Largest layer count")->required()->check(CLI::Range(5, 32));
    sub->callback([this, &action] {
      action = [this] {
        apply_normalization();
        const SearchTemplate tpl{req_.r_dm, BitBudget::make(req_.n_b, req_.n), req_.m1};
        const auto cal = calibrate(tpl, exec(), req_.full_scan);
        const double e_mb = solve_mb(AmplitudeAlphabet::odd(req_.m1), req_.r_dm).mean_energy;
        if (format("csv") == "csv") {
          std::string csv = "layers,e_dm,e_loss_db,r_loss,block_length\n";
          for (std::size_t L = 5; L <= lmax_; ++L) {
            const auto e = predict_energy_loss(L, cal.params, e_mb, req_.normalization);
            csv += std::to_string(L) + "," + format_double(e.e_dm) + "," + format_double(e.e_loss_db) + "," +
                   format_double(predict_rate_loss(L, cal.params)) + "," +
                   std::to_string(std::uint64_t{cal.four.n1} << (L - 1)) + "\n";
          }
          emit(csv);
        } else {
          Json rows = Json::array();
          for (std::size_t L = 5; L <= lmax_; ++L) {
            const auto e = predict_energy_loss(L, cal.params, e_mb, req_.normalization);
            rows.push_back(Json{{"layers", L},
                                {"e_dm", e.e_dm},
                                {"e_loss_db", e.e_loss_db},
                                {"r_loss", predict_rate_loss(L, cal.params)},
                                {"block_length", std::uint64_t{cal.four.n1} << (L - 1)}});
          }
          emit(Json{{"rows", rows}, {"e_mb", e_mb}}.dump() + "\n");
        }
        return int{kOk};
      };
    });
  }

  void add_codec(CLI::App& app, std::function<int()>& action) {
    for (const bool is_encode : {true, false}) {
      auto* sub = app.add_subcommand(is_encode ? "encode" : "decode",
                                     is_encode ? "Bits (packed, MSB first) to amplitude bytes"
                                               : "Amplitude bytes to packed bits");
      sub->add_option("--structure", structure_path_, "Structure JSON")->required();
      sub->add_option("--in", in_path_, "Input file")->required();
      sub->callback([this, &action, is_encode] {
        action = [this, is_encode] {
          const HidmStructure s = parse_structure(read_file(structure_path_));
          const std::string data = read_file(in_path_);
          const std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(data.data()), data.size());
          const auto result = is_encode ? encode_stream(s, bytes) : decode_stream(s, bytes);
          emit(std::string(result.begin(), result.end()));
          return int{kOk};
        };
      });
    }
  }

  void add_simulate(CLI::App& app, std::function<int()>& action) {
    auto* sub = app.add_subcommand("simulate", "NGMI versus OSNR of PAS-16QAM over AWGN");
    auto* src = sub->add_option_group("source");
    src->add_option("--structure", structure_path_, "Structure JSON; its amplitude marginal is used");
    src->add_option("--p1", p1_, "Probability of amplitude 1");
    src->require_option(1);
    sub->add_option("--osnr", osnr_, "OSNR grid start:stop:step in dB")->required();
    sub->add_option("--baud", link_.baud, "Symbol rate of the shaped system");
    sub->add_option("--rfec", link_.r_fec, "FEC code rate, also the NGMI threshold");
    sub->add_option("--symbols", link_.n_symbols, "Monte-Carlo symbols per OSNR point");
    sub->add_flag("--from-encoder", from_encoder_, "Feed encoded blocks of --structure instead of i.i.d. draws");
    sub->add_flag("--compare-uniform", compare_uniform_, "Also sweep uniform 16-QAM and report the OSNR gain");
    sub->add_option("--uniform-baud", uniform_baud_, "Symbol rate of the uniform reference");
    sub->add_option("--uniform-out", uniform_out_, "CSV for the uniform series");
    sub->callback([this, &action] {
      action = [this] {
        link_.seed = g_.seed;
        link_.validate();
        if (link_.n_symbols < kMinRecommendedSymbols)
          err_ << "warning: " << link_.n_symbols << " symbols per point gives a large Monte-Carlo error; use at least "
               << kMinRecommendedSymbols << "\n";
        std::optional<HidmStructure> s;
        PasConstellation c;
        if (!structure_path_.empty()) {
          s = parse_structure(read_file(structure_path_));
          c = build_constellation(metrics(*s).p);
        } else {
          if (from_encoder_) throw ValidationError("--from-encoder needs --structure");
          c = build_constellation(p1_);
        }
        const auto grid = parse_range(osnr_);
        const double step = grid.size() > 1 ? grid[1] - grid[0] : 1.0;
        const auto shaped =
            sweep(c, link_, grid.front(), grid.back(), step, exec(), from_encoder_ ? &*s : nullptr);
        emit(render(shaped));

        if (compare_uniform_) {
          LinkConfig uni = link_;
          uni.baud = uniform_baud_;
          const auto reference = sweep(build_constellation(0.5), uni, grid.front(), grid.back(), step, exec());
          if (!uniform_out_.empty())
            write_file(uniform_out_, render(reference));
          else
            summary() << render(reference);
          const auto gain = osnr_gain_at_threshold(shaped, reference, link_.r_fec);
          std::ostringstream os;
          os.precision(17);
          if (gain)
            os << "osnr_gain_db," << *gain << "\n";
          else
            os << "osnr_gain_db,nan\n";
          summary() << os.str();
        }
        return int{kOk};
      };
    });
  }

  std::string render(const std::vector<SimPoint>& pts) const {
    if (format("csv") == "csv") return sweep_csv(pts);
    Json rows = Json::array();
    for (const auto& p : pts)
      rows.push_back(Json{{"osnr_db", p.osnr_db}, {"snr_db", p.snr_db}, {"gmi_bits_per_sym", p.gmi}, {"ngmi", p.ngmi}});
    return rows.dump() + "\n";
  }

  std::ostream& out_;
  std::ostream& err_;
  Globals g_;

  std::string build_config_;
  std::string structure_path_;
  std::string in_path_;
  bool empirical_ = false;

  DesignRequest req_;
  std::string normalization_ = "per_amplitude";
  std::string mem_limit_;
  std::string objective_ = "energy";
  std::string trace_path_;
  std::size_t lmax_ = 10;

  LinkConfig link_;
  double p1_ = 0.5;
  std::string osnr_;
  bool from_encoder_ = false;
  bool compare_uniform_ = false;
  double uniform_baud_ = 31.25e9;
  std::string uniform_out_;
};

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return Runner(out, err).run(argc, argv);
}

}  // namespace hidm::cli
