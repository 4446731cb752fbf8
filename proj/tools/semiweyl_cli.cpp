// semiweyl: command-line driver over JSON run configurations.
//
// Exit codes: 0 success, 1 computation error, 2 configuration error, 3 verification failure.

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "semiweyl/asymptotics.hpp"
#include "semiweyl/config.hpp"
#include "semiweyl/io.hpp"
#include "semiweyl/seminorms.hpp"
#include "semiweyl/spectra1d.hpp"
#include "semiweyl/spectra2d.hpp"
#include "semiweyl/suites.hpp"

namespace fs = std::filesystem;
using namespace semiweyl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCompute = 1;
constexpr int kExitConfig = 2;
constexpr int kExitVerify = 3;

constexpr const char* kToolVersion = "semiweyl 1.0";

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw NumericError("SHA-256 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + file.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// A loaded run configuration together with what the manifest records about it.
struct Loaded {
  RunConfig cfg;
  json doc;
  std::string sha;
};

Loaded load(const fs::path& file) {
  const std::string bytes = slurp(file);
  Loaded l;
  l.sha = sha256_hex(bytes);
  try {
    l.doc = json::parse(bytes);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + file.string() + "' is not valid JSON: " + e.what());
  }
  try {
    l.cfg = parse_run_config(l.doc, file.parent_path());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return l;
}

struct Globals {
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;
};

json manifest_base(const Loaded& l, const Globals& g) {
  json m{{"tool", kToolVersion},
         {"config_sha256", l.sha},
         {"config", l.doc},
         {"base_dir", l.cfg.base_dir.string()},
         {"seed", g.seed.value_or(l.cfg.seed)}};
  return m;
}

void write_json_file(const fs::path& file, const json& j) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write '" + file.string() + "'");
  out << j.dump(2) << '\n';
}

void emit(const json& j, const std::string& out_file) {
  if (out_file.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json_file(out_file, j);
  }
}

fs::path manifest_path(const fs::path& output) { return fs::path(output.string() + ".manifest.json"); }

SweepOptions sweep_options(const RunConfig& c, const Globals& g) {
  SweepOptions o;
  o.grid = c.grid;
  o.channels = c.channels;
  o.convention = c.convention;
  o.p = c.p;
  o.J = c.J;
  o.angular_nodes = c.angular_nodes;
  o.max_dimension = c.max_dimension;
  o.threads = std::max(1u, g.threads);
  return o;
}

Grid1D parse_grid_triple(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw ConfigError("");
    } catch (const std::exception&) {
      throw ConfigError("--grid: '" + cell + "' is not a number");
    }
  }
  if (v.size() != 3) throw ConfigError("--grid expects tmin,tmax,n");
  if (v[2] != std::floor(v[2])) throw ConfigError("--grid: n must be an integer");
  return Grid1D::uniform(v[0], v[1], static_cast<int>(v[2]));
}

// --- subcommands -----------------------------------------------------------

int cmd_decompose(const std::string& config, std::vector<double> radii, const std::string& out, const Globals& g) {
  const Loaded l = load(config);
  const PotentialSpec spec = l.cfg.potential();
  const int nodes = l.cfg.angular_nodes;
  const Decomposition dec = decompose(spec, nodes);
  const EffectivePotential G = effective_potential(dec, l.cfg.convention);
  if (radii.empty()) {
    for (int k = -20; k <= 20; ++k) radii.push_back(std::pow(10.0, k / 10.0));
  }
  json rows = json::array();
  double worst_recompose = 0.0;
  double worst_mean = 0.0;
  for (double r : radii) {
    if (!(r > 0.0)) throw ConfigError("decompose: radii must be positive");
    const double vr = dec.v_rad(r);
    double mean = 0.0;
    double recompose = 0.0;
    for (int j = 0; j < nodes; ++j) {
      const double th = quad::kTwoPi * j / nodes;
      const double vn = dec.v_nrad(r, th);
      mean += vn;
      recompose = std::max(recompose, std::abs(vr + vn - spec(r, th)));
    }
    mean /= nodes;
    worst_recompose = std::max(worst_recompose, recompose);
    worst_mean = std::max(worst_mean, std::abs(mean));
    const double t = std::log(r);
    rows.push_back(json{{"r", r}, {"t", t}, {"v_rad", vr}, {"G", G(t)}, {"nrad_mean", mean}});
  }
  json j{{"family", spec.family()},
         {"radial", spec.is_radial()},
         {"angular_nodes", nodes},
         {"convention", l.cfg.convention == Convention::Substitution ? "substitution" : "literal-abs"},
         {"samples", rows},
         {"max_recompose_error", worst_recompose},
         {"max_nrad_mean", worst_mean},
         {"manifest", manifest_base(l, g)}};
  emit(j, out);
  return kExitOk;
}

int cmd_norms(const std::string& config, const std::string& out, const Globals& g) {
  const Loaded l = load(config);
  const SeminormReport r =
      seminorm_report(l.cfg.potential(), l.cfg.p, l.cfg.J, l.cfg.angular_nodes, l.cfg.convention);
  json j = to_json(r);
  j["manifest"] = manifest_base(l, g);
  emit(j, out);
  return kExitOk;
}

int cmd_count1d(const std::string& config, double alpha, std::optional<int> m, const std::string& grid_arg,
                const std::string& out, const Globals& g) {
  const Loaded l = load(config);
  if (!(alpha >= 0.0)) throw ConfigError("--alpha must be non-negative");
  if (m && *m < 0) throw ConfigError("--m must be non-negative");
  const EffectivePotential G = effective_potential(l.cfg.potential(), l.cfg.convention, l.cfg.angular_nodes);
  Grid1D grid;
  bool capped = false;
  if (!grid_arg.empty()) {
    grid = parse_grid_triple(grid_arg);
  } else {
    const GridChoice gc = choose_grid(G, alpha, l.cfg.grid);
    grid = gc.grid;
    capped = gc.capped;
  }
  auto counter = [&](const Grid1D& gr) { return m ? count_channel(G, alpha, *m, gr) : count_M(G, alpha, gr); };
  const CertifiedCount c = certify(counter, grid, capped, l.cfg.grid.certify);
  json j{{"count", c.count},
         {"operator", m ? "channel m=" + std::to_string(*m) : std::string("M (Dirichlet at t = 0)")},
         {"alpha", alpha},
         {"grid", detail::describe(grid)},
         {"converged", c.converged}};
  j["refined_count"] = c.refined ? json(*c.refined) : json(nullptr);
  json man = manifest_base(l, g);
  man["grid"] = j["grid"];
  man["converged"] = c.converged;
  j["manifest"] = man;
  emit(j, out);
  return kExitOk;
}

int cmd_count2d(const std::string& config, double alpha, bool tilde, std::optional<int> channels,
                const std::string& out, const Globals& g) {
  const Loaded l = load(config);
  if (!(alpha >= 0.0)) throw ConfigError("--alpha must be non-negative");
  if (channels && *channels < 0) throw ConfigError("--channels must be non-negative");
  const PotentialSpec spec = l.cfg.potential();
  const int nodes = l.cfg.angular_nodes;
  std::size_t count = 0;
  int m_max = 0;
  std::size_t dim = 0;
  bool converged = false;
  std::string grid_desc;
  std::string method;
  if (spec.is_radial() && !channels) {
    const EffectivePotential G = effective_potential(spec, l.cfg.convention, nodes);
    const GridChoice gc = choose_grid(G, alpha, l.cfg.grid);
    const RadialCount rc = count_radial_2d(G, alpha, gc.grid, tilde);
    count = rc.count;
    m_max = rc.m_max;
    dim = (gc.grid.size() - 2) * static_cast<std::size_t>(2 * m_max + 1) - (tilde ? 1 : 0);
    grid_desc = detail::describe(gc.grid);
    method = "channel sum";
    if (l.cfg.grid.certify)
      converged = !gc.capped && detail::modes_agree(rc, count_radial_2d(G, alpha, refine_grid(gc.grid), tilde));
  } else {
    if (l.cfg.convention != Convention::Substitution)
      throw ConfigError("the coupled 2D system is defined for the substitution convention only");
    const Grid1D grid = choose_grid_2d(spec, alpha, l.cfg.grid);
    ChannelPolicy cp = l.cfg.channels;
    if (channels) cp.m_max = *channels;
    const ChannelSet ch = auto_channels(spec, alpha, grid, cp);
    const BlockSystem2D sys = assemble_full_2d(spec, alpha, grid, ch, tilde, nodes);
    count = count_full_2d(sys, l.cfg.max_dimension).negatives;
    m_max = ch.m_max;
    dim = sys.dimension();
    grid_desc = detail::describe(grid);
    method = "coupled block system";
    if (l.cfg.grid.certify) {
      const std::size_t more =
          count_full_2d(assemble_full_2d(spec, alpha, grid, ChannelSet{ch.m_max + 4}, tilde, nodes),
                        l.cfg.max_dimension)
              .negatives;
      const std::size_t finer =
          count_full_2d(assemble_full_2d(spec, alpha, refine_grid(grid), ch, tilde, nodes), l.cfg.max_dimension)
              .negatives;
      converged = detail::within(count, more, 2) && detail::within(count, finer, 2);
    }
  }
  json j{{"count", count},
         {"operator", tilde ? "H~ (channel-0 constraint)" : "H"},
         {"method", method},
         {"alpha", alpha},
         {"m_max_used", m_max},
         {"dim", dim},
         {"grid", grid_desc},
         {"converged", converged}};
  json man = manifest_base(l, g);
  man["grid"] = grid_desc;
  man["converged"] = converged;
  j["manifest"] = man;
  emit(j, out);
  return kExitOk;
}

struct SweepArgs {
  std::string config;
  std::optional<double> alpha_min;
  std::optional<double> alpha_max;
  std::optional<int> points;
  std::string out;
  std::string plots;
  bool one_d = false;
};

int cmd_sweep(const SweepArgs& a, const Globals& g) {
  const Loaded l = load(a.config);
  const RunConfig& c = l.cfg;
  const double lo = a.alpha_min.value_or(c.sweep.alpha_min);
  const double hi = a.alpha_max.value_or(c.sweep.alpha_max);
  if (!(lo > 0.0 && hi > lo)) throw ConfigError("sweep needs 0 < alpha_min < alpha_max");
  const int points = a.points ? *a.points : c.sweep.points.value_or(points_per_decade(lo, hi, c.sweep.per_decade));
  if (points < 2) throw ConfigError("sweep needs at least 2 points");
  fs::path out = a.out;
  if (out.empty()) {
    if (!c.output_dir) throw ConfigError("sweep: give --out or output.dir in the config");
    out = fs::path(*c.output_dir) / "sweep.csv";
    if (out.is_relative()) out = c.base_dir / out;
  }
  const PotentialSpec spec = c.potential();
  SweepOptions opt = sweep_options(c, g);
  opt.two_d = !a.one_d;
  if (opt.two_d && !spec.is_radial() && c.convention != Convention::Substitution)
    throw ConfigError("the coupled 2D system is defined for the substitution convention only");
  const SweepResult s = sweep(spec, geometric_alphas(lo, hi, points), opt);

  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  {
    std::ofstream f(out);
    if (!f) throw ConfigError("cannot write '" + out.string() + "'");
    write_sweep_csv(f, s);
  }
  std::size_t unconverged = 0;
  for (bool ok : s.converged) unconverged += ok ? 0 : 1;
  json man = manifest_base(l, g);
  man["output"] = out.filename().string();
  man["kind"] = opt.two_d ? "sweep-2d" : "sweep-1d";
  man["alpha_min"] = lo;
  man["alpha_max"] = hi;
  man["points"] = points;
  man["weyl"] = s.weyl;
  man["bound_B"] = s.bound_B;
  man["grid"] = s.grid_description;
  man["certified"] = c.grid.certify;
  man["all_converged"] = unconverged == 0;
  man["unconverged_points"] = unconverged;
  write_json_file(manifest_path(out), man);
  if (!a.plots.empty()) {
    for (const auto& p : write_plot_files(a.plots, s)) write_json_file(manifest_path(p), man);
  }
  std::cerr << "wrote " << out.string() << " (" << s.size() << " points, " << unconverged << " unconverged)\n";
  return kExitOk;
}

int cmd_verify(const std::string& suite, const std::string& out, const Globals& g) {
  const std::uint64_t seed = g.seed.value_or(20240601);
  SuiteResult r;
  if (suite == "hardy") {
    r = suite_hardy(seed);
  } else if (suite == "bs") {
    r = suite_bs(seed);
  } else if (suite == "sandwich") {
    r = suite_sandwich(seed);
  } else if (suite == "radial-consistency") {
    r = suite_radial_consistency(seed);
  } else {
    throw ConfigError("unknown suite '" + suite + "'");
  }
  json cases = json::array();
  for (const auto& c : r.cases) cases.push_back(json{{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  json j{{"suite", r.suite},
         {"passed", r.passed()},
         {"failures", r.failures()},
         {"cases", cases},
         {"notes", r.notes},
         {"manifest", json{{"tool", kToolVersion}, {"seed", seed}}}};
  emit(j, out);
  for (const auto& c : r.cases)
    if (!c.pass) std::cerr << "FAIL " << c.name << ": " << c.detail << '\n';
  return r.passed() ? kExitOk : kExitVerify;
}

int cmd_report(const std::string& in, const std::string& check, const std::string& out, double q,
               const Globals&) {
  std::ifstream f(in);
  if (!f) throw ConfigError("cannot open '" + in + "'");
  SweepResult s = read_sweep_csv(f);
  const fs::path mpath = manifest_path(in);
  if (!fs::exists(mpath)) throw ConfigError("missing manifest '" + mpath.string() + "'");
  json man = read_json_file(mpath);
  if (!man.contains("weyl") || !man.contains("bound_B") || !man.contains("config"))
    throw ConfigError("manifest '" + mpath.string() + "' lacks sweep metadata");
  s.weyl = man.at("weyl").get<double>();
  s.bound_B = man.at("bound_B").get<double>();
  s.grid_description = man.value("grid", std::string());

  json j;
  if (check == "as2") {
    j = to_json(check_as2(s));
  } else if (check == "estim") {
    j = to_json(check_estim(s));
  } else if (check == "prop-add") {
    const RunConfig c = parse_run_config(man.at("config"), man.value("base_dir", std::string()));
    const EffectivePotential G = effective_potential(c.potential(), c.convention, c.angular_nodes);
    j = to_json(check_prop_add(G, q, s, c.J));
  } else {
    throw ConfigError("unknown check '" + check + "'");
  }
  j["check"] = check;
  j["source"] = fs::path(in).filename().string();
  j["manifest"] = man;
  emit(j, out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bound-state counts and Weyl-type asymptotics for 2D Schrodinger operators"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed_value = 0;
  app.add_option("--threads", g.threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed_value, "Seed for all pseudo-randomness");

  std::string config, out, grid_arg, suite, in, check = "as2";
  double alpha = 0.0, q = 2.0;
  std::optional<int> m, channels;
  bool tilde = false;
  std::vector<double> radii;
  SweepArgs sw;

  auto* dec = app.add_subcommand("decompose", "Radial/non-radial split and effective potential samples");
  dec->add_option("--config", config, "Run configuration (JSON)")->required();
  dec->add_option("--r", radii, "Radii to sample");
  dec->add_option("--json", out, "Write JSON here instead of stdout");

  auto* norms = app.add_subcommand("norms", "zhat sequence, weak quasinorm, L1Lp norm, Weyl coefficient");
  norms->add_option("--config", config, "Run configuration (JSON)")->required();
  norms->add_option("--json", out, "Write JSON here instead of stdout");

  auto* c1 = app.add_subcommand("count1d", "Bound states of the 1D operator M or one angular channel");
  c1->add_option("--config", config, "Run configuration (JSON)")->required();
  c1->add_option("--alpha", alpha, "Coupling constant")->required();
  c1->add_option("--m", m, "Angular channel (default: M with the Dirichlet condition at t = 0)");
  c1->add_option("--grid", grid_arg, "Uniform grid tmin,tmax,n");
  c1->add_option("--json", out, "Write JSON here instead of stdout");

  auto* c2 = app.add_subcommand("count2d", "Bound states of H or H~ in two dimensions");
  c2->add_option("--config", config, "Run configuration (JSON)")->required();
  c2->add_option("--alpha", alpha, "Coupling constant")->required();
  c2->add_flag("--tilde", tilde, "Count H~ (channel-0 constraint at r = 1)");
  c2->add_option("--channels", channels, "Fixed angular cutoff m_max");
  c2->add_option("--json", out, "Write JSON here instead of stdout");

  auto* swc = app.add_subcommand("sweep", "Counts along a geometric alpha grid, written as CSV");
  swc->add_option("--config", sw.config, "Run configuration (JSON)")->required();
  swc->add_option("--alpha-min", sw.alpha_min, "Smallest coupling");
  swc->add_option("--alpha-max", sw.alpha_max, "Largest coupling");
  swc->add_option("--points", sw.points, "Number of couplings");
  swc->add_option("--out", sw.out, "CSV output");
  swc->add_option("--plots", sw.plots, "Directory for two-column plot data");
  swc->add_flag("--one-d", sw.one_d, "Only the 1D family M");

  auto* ver = app.add_subcommand("verify", "Run an invariant suite");
  ver->add_option("--suite", suite, "hardy, bs, sandwich or radial-consistency")
      ->required()
      ->check(CLI::IsMember({"hardy", "bs", "sandwich", "radial-consistency"}));
  ver->add_option("--json", out, "Write JSON here instead of stdout");

  auto* rep = app.add_subcommand("report", "Asymptotic checks on a sweep CSV");
  rep->add_option("--in", in, "Sweep CSV (its manifest must sit beside it)")->required();
  rep->add_option("--check", check, "as2, estim or prop-add")->check(CLI::IsMember({"as2", "estim", "prop-add"}));
  rep->add_option("--json", out, "Write JSON here instead of stdout");
  rep->add_option("--q", q, "Exponent for prop-add");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  if (*seed_opt) g.seed = seed_value;

  try {
    if (*dec) return cmd_decompose(config, radii, out, g);
    if (*norms) return cmd_norms(config, out, g);
    if (*c1) return cmd_count1d(config, alpha, m, grid_arg, out, g);
    if (*c2) return cmd_count2d(config, alpha, tilde, channels, out, g);
    if (*swc) return cmd_sweep(sw, g);
    if (*ver) return cmd_verify(suite, out, g);
    if (*rep) return cmd_report(in, check, out, q, g);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCompute;
  }
  return kExitConfig;
}
