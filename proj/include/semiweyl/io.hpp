#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semiweyl/asymptotics.hpp"
#include "semiweyl/errors.hpp"
#include "semiweyl/seminorms.hpp"

namespace semiweyl {

using json = nlohmann::json;

inline constexpr const char* kSweepHeader = "alpha,n2d,n_tilde,n_m,n2d_over_alpha,converged";

namespace detail {

inline std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace detail

/// Sweep series as CSV; 2D columns are left empty for 1D-only sweeps.
inline void write_sweep_csv(std::ostream& os, const SweepResult& s) {
  os << kSweepHeader << '\n';
  for (std::size_t i = 0; i < s.size(); ++i) {
    os << detail::fmt(s.alphas[i]) << ',';
    if (s.has_2d()) {
      os << s.n2d[i] << ',' << s.n_tilde[i] << ',' << s.n_m[i] << ','
         << detail::fmt(static_cast<double>(s.n2d[i]) / s.alphas[i]);
    } else {
      os << ",," << s.n_m[i] << ',';
    }
    os << ',' << (s.converged[i] ? 1 : 0) << '\n';
  }
}

/// Reads the CSV written by write_sweep_csv; weyl and bound_B come from the manifest.
inline SweepResult read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSweepHeader) throw ConfigError("sweep CSV: unexpected header");
  SweepResult s;
  bool two_d = true;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 6) throw ConfigError("sweep CSV row " + std::to_string(row) + ": expected 6 fields");
    try {
      s.alphas.push_back(std::stod(f[0]));
      if (f[1].empty()) {
        two_d = false;
      } else {
        s.n2d.push_back(std::stoul(f[1]));
        s.n_tilde.push_back(std::stoul(f[2]));
      }
      s.n_m.push_back(std::stoul(f[3]));
      s.converged.push_back(f[5] == "1");
    } catch (const std::exception&) {
      throw ConfigError("sweep CSV row " + std::to_string(row) + ": malformed number");
    }
  }
  if (s.alphas.empty()) throw ConfigError("sweep CSV has no rows");
  if (!two_d) {
    s.n2d.clear();
    s.n_tilde.clear();
  } else if (s.n2d.size() != s.alphas.size()) {
    throw ConfigError("sweep CSV mixes 1D and 2D rows");
  }
  s.m_max_used.assign(s.alphas.size(), 0);
  return s;
}

inline json to_json(const ZhatSequence& z) {
  return json{{"zeta", z.zeta}, {"errors", z.errors}, {"J", z.truncation}};
}

inline json to_json(const EpsWindow& w) { return json::array({w.lo, w.hi}); }

inline json to_json(const SeminormReport& r) {
  return json{{"zeta", r.zeta.zeta},
              {"quasinorm", r.weak.quasinorm},
              {"delta_upper", r.weak.delta_upper},
              {"delta_lower", r.weak.delta_lower},
              {"epsilon_window", to_json(r.weak.window)},
              {"truncation_caveat", r.weak.truncation_caveat},
              {"l1lp", r.l1lp},
              {"p", r.p},
              {"weyl_coeff", r.weyl_coeff},
              {"bound_B", r.bound_B}};
}

inline json to_json(const LimitEstimate& e) {
  return json{{"upper", e.upper}, {"lower", e.lower}, {"q", e.q}, {"window_fraction", e.window_fraction},
              {"points", e.points}};
}

inline json to_json(const As2Report& r) {
  json j{{"weyl", r.weyl},
         {"two_d", to_json(r.two_d)},
         {"one_d", to_json(r.one_d)},
         {"upper_discrepancy", r.upper_discrepancy},
         {"lower_discrepancy", r.lower_discrepancy},
         {"margin_lower", r.margin_lower},
         {"estimates_only", true}};
  j["margin_discrepancy"] = r.margin_discrepancy ? json(*r.margin_discrepancy) : json(nullptr);
  return j;
}

inline json to_json(const EstimReport& r) {
  json j{{"bound_B", r.bound_B},
         {"top_decade_min", r.decade_min},
         {"top_decade_max", r.decade_max},
         {"top_decade_variation", r.variation},
         {"top_decade_points", r.decade_points},
         {"vacuous", r.vacuous},
         {"hypothesis_violation", r.hypothesis_violation}};
  j["empirical_C"] = r.empirical_C ? json(*r.empirical_C) : json(nullptr);
  return j;
}

inline json to_json(const PropAddReport& r) {
  json j{{"q", r.q},
         {"quasinorm_q", r.quasinorm_q},
         {"one_d", to_json(r.one_d)},
         {"one_d_q1", to_json(r.one_d_q1)},
         {"growth_exponent", r.growth_exponent},
         {"super_semiclassical", r.super_semiclassical}};
  j["two_d"] = r.two_d ? to_json(*r.two_d) : json(nullptr);
  return j;
}

/// Gnuplot-ready two-column files: N/alpha for each series present.
inline std::vector<std::filesystem::path> write_plot_files(const std::filesystem::path& dir, const SweepResult& s) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> out;
  auto emit = [&](const std::string& name, const std::vector<std::size_t>& counts) {
    const auto path = dir / (name + ".dat");
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path.string());
    f << "# alpha " << name << "/alpha\n";
    for (std::size_t i = 0; i < s.size(); ++i)
      f << detail::fmt(s.alphas[i]) << ' ' << detail::fmt(static_cast<double>(counts[i]) / s.alphas[i]) << '\n';
    out.push_back(path);
  };
  if (s.has_2d()) {
    emit("n2d", s.n2d);
    emit("n_tilde", s.n_tilde);
  }
  emit("n_m", s.n_m);
  return out;
}

}  // namespace semiweyl
