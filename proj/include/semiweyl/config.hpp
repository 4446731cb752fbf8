#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semiweyl/errors.hpp"
#include "semiweyl/potential.hpp"
#include "semiweyl/seminorms.hpp"
#include "semiweyl/spectra1d.hpp"
#include "semiweyl/spectra2d.hpp"

namespace semiweyl {

using json = nlohmann::json;

namespace cfg {

// Every object is checked against its allowed keys before it is read.
inline void allow_only(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!ok.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

inline double number(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + "." + key + ": must be finite");
  return x;
}

inline double number_or(const json& j, const std::string& where, const char* key, double def) {
  return j.contains(key) ? number(j, where, key) : def;
}

inline double positive(const json& j, const std::string& where, const char* key) {
  const double x = number(j, where, key);
  if (!(x > 0.0)) throw ConfigError(where + "." + key + ": must be positive");
  return x;
}

inline double non_negative(const json& j, const std::string& where, const char* key) {
  const double x = number(j, where, key);
  if (x < 0.0) throw ConfigError(where + "." + key + ": must be non-negative");
  return x;
}

inline int integer(const json& j, const std::string& where, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return v.get<int>();
}

inline const json& params_of(const json& j, const std::string&) {
  static const json empty = json::object();
  return j.contains("params") ? j.at("params") : empty;
}

inline RadialProfile radial_profile(const json& j, const std::string& where);

}  // namespace cfg

/**
 * Radial profile documents: {"family": name, "params": {...}} with
 * constant(value), disk(depth, radius), annulus(depth, r_lo, r_hi), gaussian(amplitude, width),
 * power_exp(amplitude, power, rate), exponential(amplitude, rate), log_power(c, beta).
 */
inline RadialProfile cfg::radial_profile(const json& j, const std::string& where) {
  allow_only(j, where, {"family", "params"});
  if (!j.contains("family") || !j.at("family").is_string()) throw ConfigError(where + ": missing 'family'");
  const std::string fam = j.at("family").get<std::string>();
  const json& p = params_of(j, where);
  const std::string w = where + ".params";
  if (fam == "constant") {
    allow_only(p, w, {"value"});
    return RadialProfile::constant(non_negative(p, w, "value"));
  }
  if (fam == "disk") {
    allow_only(p, w, {"depth", "radius"});
    return RadialProfile::disk(non_negative(p, w, "depth"), positive(p, w, "radius"));
  }
  if (fam == "annulus") {
    allow_only(p, w, {"depth", "r_lo", "r_hi"});
    const double lo = positive(p, w, "r_lo");
    const double hi = positive(p, w, "r_hi");
    if (!(hi > lo)) throw ConfigError(w + ": r_hi must exceed r_lo");
    return RadialProfile::annulus(non_negative(p, w, "depth"), lo, hi);
  }
  if (fam == "gaussian") {
    allow_only(p, w, {"amplitude", "width"});
    return RadialProfile::gaussian(non_negative(p, w, "amplitude"), positive(p, w, "width"));
  }
  if (fam == "power_exp") {
    allow_only(p, w, {"amplitude", "power", "rate"});
    const double power = number(p, w, "power");
    if (power <= -2.0) throw ConfigError(w + ".power: r^power is not integrable against r dr at 0");
    return RadialProfile::power_exp(non_negative(p, w, "amplitude"), power, positive(p, w, "rate"));
  }
  if (fam == "exponential") {
    allow_only(p, w, {"amplitude", "rate"});
    return RadialProfile::exponential(non_negative(p, w, "amplitude"), positive(p, w, "rate"));
  }
  if (fam == "log_power") {
    allow_only(p, w, {"c", "beta"});
    return RadialProfile::log_power(non_negative(p, w, "c"), non_negative(p, w, "beta"));
  }
  throw ConfigError(where + ": unknown radial family '" + fam + "'");
}

/// Reads "r,theta,value" rows (a header line is allowed) into a tabulated potential.
inline TabulatedVariant read_tabulated_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open tabulated potential '" + file.string() + "'");
  std::map<double, std::map<double, double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double r, th, v;
    if (!(ss >> r >> th >> v)) {
      if (lineno == 1) continue;  // header
      throw ConfigError(file.string() + ":" + std::to_string(lineno) + ": expected r,theta,value");
    }
    rows[r][th] = v;
  }
  if (rows.empty()) throw ConfigError(file.string() + ": no samples");
  TabulatedVariant tab;
  for (const auto& [th, v] : rows.begin()->second) {
    (void)v;
    tab.theta_grid.push_back(th);
  }
  for (const auto& [r, row] : rows) {
    if (row.size() != tab.theta_grid.size())
      throw ConfigError(file.string() + ": every radius needs the same theta nodes");
    tab.r_grid.push_back(r);
    std::size_t k = 0;
    for (const auto& [th, v] : row) {
      if (th != tab.theta_grid[k++]) throw ConfigError(file.string() + ": theta nodes differ between radii");
      tab.values.push_back(v);
    }
  }
  return tab;
}

/**
 * @brief Builds a potential from {"family": ..., "params": {...}, "support": [r_lo, r_hi]}.
 *
 * Families: disk_well(depth, radius), gaussian(amplitude, width), fourier_sum(modes),
 * log_borderline(c), log_power(c, beta), annulus_tabulated(file), radial(profile),
 * product(radial, angular). Relative file paths resolve against @p base_dir. The result
 * is validated for non-negativity on a diagnostic grid.
 */
inline PotentialSpec parse_potential(const json& j, const std::filesystem::path& base_dir = {},
                                     int validate_nodes = 64) {
  using namespace cfg;
  const std::string where = "potential";
  allow_only(j, where, {"family", "params", "support"});
  if (!j.contains("family") || !j.at("family").is_string()) throw ConfigError("potential: missing 'family'");
  const std::string fam = j.at("family").get<std::string>();
  const json& p = params_of(j, where);
  const std::string w = where + ".params";

  std::optional<Support> support;
  if (j.contains("support")) {
    const json& s = j.at("support");
    if (!s.is_array() || s.size() != 2 || !s[0].is_number() || !s[1].is_number())
      throw ConfigError("potential.support: expected [r_lo, r_hi]");
    support = Support{s[0].get<double>(), s[1].get<double>()};
    if (!(support->r_lo >= 0.0) || !(support->r_hi > support->r_lo))
      throw ConfigError("potential.support: need 0 <= r_lo < r_hi");
  }

  std::optional<PotentialSpec> spec;
  if (fam == "disk_well") {
    allow_only(p, w, {"depth", "radius"});
    spec = PotentialSpec(RadialVariant{RadialProfile::disk(non_negative(p, w, "depth"), positive(p, w, "radius"))},
                         support, fam);
  } else if (fam == "gaussian") {
    allow_only(p, w, {"amplitude", "width"});
    spec = PotentialSpec(
        RadialVariant{RadialProfile::gaussian(non_negative(p, w, "amplitude"), positive(p, w, "width"))}, support,
        fam);
  } else if (fam == "log_borderline") {
    allow_only(p, w, {"c"});
    spec = PotentialSpec(RadialVariant{RadialProfile::log_power(non_negative(p, w, "c"), 1.0)}, support, fam);
  } else if (fam == "log_power") {
    allow_only(p, w, {"c", "beta"});
    spec = PotentialSpec(
        RadialVariant{RadialProfile::log_power(non_negative(p, w, "c"), non_negative(p, w, "beta"))}, support, fam);
  } else if (fam == "radial") {
    allow_only(p, w, {"profile"});
    if (!p.contains("profile")) throw ConfigError(w + ": missing 'profile'");
    spec = PotentialSpec(RadialVariant{radial_profile(p.at("profile"), w + ".profile")}, support, fam);
  } else if (fam == "fourier_sum") {
    allow_only(p, w, {"modes"});
    if (!p.contains("modes") || !p.at("modes").is_array() || p.at("modes").empty())
      throw ConfigError(w + ".modes: expected a non-empty array");
    FourierSumVariant fs;
    std::size_t i = 0;
    for (const json& m : p.at("modes")) {
      const std::string mw = w + ".modes[" + std::to_string(i++) + "]";
      allow_only(m, mw, {"m", "kind", "profile"});
      FourierTerm term;
      term.m = integer(m, mw, "m");
      const std::string kind = m.value("kind", std::string("cos"));
      if (kind == "cos") {
        term.kind = Harmonic::Cos;
      } else if (kind == "sin") {
        term.kind = Harmonic::Sin;
      } else {
        throw ConfigError(mw + ".kind: expected 'cos' or 'sin'");
      }
      if (!m.contains("profile")) throw ConfigError(mw + ": missing 'profile'");
      term.coeff = radial_profile(m.at("profile"), mw + ".profile");
      fs.terms.push_back(std::move(term));
    }
    spec = PotentialSpec(std::move(fs), support, fam);
  } else if (fam == "product") {
    allow_only(p, w, {"radial", "angular"});
    if (!p.contains("radial") || !p.contains("angular")) throw ConfigError(w + ": needs 'radial' and 'angular'");
    const json& a = p.at("angular");
    if (!a.is_array() || a.empty()) throw ConfigError(w + ".angular: expected a non-empty array of samples");
    ProductVariant pv{radial_profile(p.at("radial"), w + ".radial"), {}};
    for (const json& x : a) {
      if (!x.is_number()) throw ConfigError(w + ".angular: samples must be numbers");
      pv.angular.push_back(x.get<double>());
    }
    spec = PotentialSpec(std::move(pv), support, fam);
  } else if (fam == "annulus_tabulated") {
    allow_only(p, w, {"file"});
    if (!p.contains("file") || !p.at("file").is_string()) throw ConfigError(w + ": missing 'file'");
    std::filesystem::path f = p.at("file").get<std::string>();
    if (f.is_relative() && !base_dir.empty()) f = base_dir / f;
    TabulatedVariant tab = read_tabulated_csv(f);
    // an annulus table is zero off its radial range unless a support says otherwise
    if (!support) support = Support{tab.r_grid.front(), tab.r_grid.back()};
    spec = PotentialSpec(std::move(tab), support, fam);
  } else {
    throw ConfigError("potential: unknown family '" + fam + "'");
  }
  spec->validate_nonnegative(validate_nodes, validate_nodes);
  return *spec;
}

/// Everything a CLI run reads from its configuration document.
struct RunConfig {
  json potential_doc;
  std::filesystem::path base_dir;
  double p = 2.0;
  Convention convention = Convention::Substitution;
  GridPolicy grid;
  ChannelPolicy channels;
  int J = kDefaultTruncation;
  int angular_nodes = kDefaultAngularNodes;
  int validate_nodes = 64;
  std::size_t max_dimension = kDefaultMaxDimension;
  std::size_t dense_limit = kDefaultDenseLimit;
  struct Sweep {
    double alpha_min = 10.0;
    double alpha_max = 100.0;
    std::optional<int> points;
    int per_decade = 16;
  } sweep;
  std::uint64_t seed = 20240601;
  std::optional<std::string> output_dir;

  PotentialSpec potential() const { return parse_potential(potential_doc, base_dir, validate_nodes); }
};

inline RunConfig parse_run_config(const json& j, const std::filesystem::path& base_dir = {}) {
  using namespace cfg;
  allow_only(j, "config",
             {"potential", "p", "convention", "grid", "channels", "J", "angular_nodes", "validate_nodes",
              "max_dimension", "dense_limit", "sweep", "seeds", "output"});
  RunConfig c;
  c.base_dir = base_dir;
  if (!j.contains("potential")) throw ConfigError("config: missing 'potential'");
  c.potential_doc = j.at("potential");
  c.p = number_or(j, "config", "p", 2.0);
  if (!(c.p > 1.0)) throw ConfigError("config.p: must exceed 1");
  if (j.contains("convention")) {
    const std::string s = j.at("convention").get<std::string>();
    if (s == "substitution") {
      c.convention = Convention::Substitution;
    } else if (s == "literal-abs") {
      c.convention = Convention::LiteralAbs;
    } else {
      throw ConfigError("config.convention: expected 'substitution' or 'literal-abs'");
    }
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    allow_only(g, "grid", {"mode", "t_min", "t_max", "n", "kappa", "extent_threshold", "certify"});
    if (g.contains("mode")) {
      const std::string m = g.at("mode").get<std::string>();
      if (m == "auto") {
        c.grid.mode = GridPolicy::Mode::Auto;
      } else if (m == "uniform") {
        c.grid.mode = GridPolicy::Mode::Uniform;
      } else if (m == "graded") {
        c.grid.mode = GridPolicy::Mode::Graded;
      } else {
        throw ConfigError("grid.mode: expected auto, uniform or graded");
      }
    }
    c.grid.t_min = number_or(g, "grid", "t_min", c.grid.t_min);
    c.grid.t_max = number_or(g, "grid", "t_max", c.grid.t_max);
    if (!(c.grid.t_min < 0.0 && c.grid.t_max > 0.0)) throw ConfigError("grid: window must contain t = 0");
    if (g.contains("n")) c.grid.n = integer(g, "grid", "n");
    if (c.grid.n < 5) throw ConfigError("grid.n: need at least 5 nodes");
    c.grid.kappa = number_or(g, "grid", "kappa", c.grid.kappa);
    if (!(c.grid.kappa > 0.0)) throw ConfigError("grid.kappa: must be positive");
    c.grid.extent_threshold = number_or(g, "grid", "extent_threshold", c.grid.extent_threshold);
    if (g.contains("certify")) c.grid.certify = g.at("certify").get<bool>();
  }
  if (j.contains("channels")) {
    const json& ch = j.at("channels");
    allow_only(ch, "channels", {"m_max", "guard"});
    if (ch.contains("m_max") && !ch.at("m_max").is_null()) {
      c.channels.m_max = integer(ch, "channels", "m_max");
      if (*c.channels.m_max < 0) throw ConfigError("channels.m_max: must be non-negative");
    }
    if (ch.contains("guard")) c.channels.guard = integer(ch, "channels", "guard");
  }
  if (j.contains("J")) c.J = integer(j, "config", "J");
  if (c.J < 1) throw ConfigError("config.J: must be at least 1");
  if (j.contains("angular_nodes")) c.angular_nodes = integer(j, "config", "angular_nodes");
  if (c.angular_nodes < 8) throw ConfigError("config.angular_nodes: need at least 8");
  if (j.contains("validate_nodes")) c.validate_nodes = integer(j, "config", "validate_nodes");
  if (j.contains("max_dimension")) c.max_dimension = j.at("max_dimension").get<std::size_t>();
  if (j.contains("dense_limit")) c.dense_limit = j.at("dense_limit").get<std::size_t>();
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    allow_only(s, "sweep", {"alpha_min", "alpha_max", "points", "per_decade"});
    c.sweep.alpha_min = number_or(s, "sweep", "alpha_min", c.sweep.alpha_min);
    c.sweep.alpha_max = number_or(s, "sweep", "alpha_max", c.sweep.alpha_max);
    if (s.contains("points")) c.sweep.points = integer(s, "sweep", "points");
    if (s.contains("per_decade")) c.sweep.per_decade = integer(s, "sweep", "per_decade");
  }
  if (j.contains("seeds")) {
    const json& s = j.at("seeds");
    allow_only(s, "seeds", {"test_functions"});
    if (s.contains("test_functions")) c.seed = s.at("test_functions").get<std::uint64_t>();
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    allow_only(o, "output", {"dir"});
    if (o.contains("dir")) c.output_dir = o.at("dir").get<std::string>();
  }
  // build once so potential errors surface before any computation
  (void)c.potential();
  return c;
}

inline json read_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config '" + file.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + file.string() + "' is not valid JSON: " + e.what());
  }
}

inline RunConfig load_run_config(const std::filesystem::path& file) {
  try {
    return parse_run_config(read_json_file(file), file.parent_path());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

}  // namespace semiweyl
