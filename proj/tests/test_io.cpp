#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "semiweyl/config.hpp"
#include "semiweyl/io.hpp"

using namespace semiweyl;
namespace fs = std::filesystem;

namespace {

SweepResult sample_sweep(bool two_d) {
  SweepResult s;
  s.alphas = {1.0, 2.5, 1.0 / 3.0 + 7.0};
  s.n_m = {0, 1, 2};
  s.converged = {true, false, true};
  s.m_max_used = {0, 0, 0};
  if (two_d) {
    s.n2d = {1, 3, 9};
    s.n_tilde = {0, 3, 8};
  }
  return s;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("semiweyl_test_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json gaussian_doc() {
  return json::parse(R"({"potential": {"family": "gaussian", "params": {"amplitude": 1.0, "width": 1.0}}})");
}

}  // namespace

TEST(SweepCsv, RoundTrip2D) {
  const SweepResult s = sample_sweep(true);
  std::stringstream ss;
  write_sweep_csv(ss, s);
  const SweepResult r = read_sweep_csv(ss);
  EXPECT_EQ(r.alphas, s.alphas);
  EXPECT_EQ(r.n2d, s.n2d);
  EXPECT_EQ(r.n_tilde, s.n_tilde);
  EXPECT_EQ(r.n_m, s.n_m);
  EXPECT_EQ(r.converged, s.converged);
}

TEST(SweepCsv, RoundTrip1D) {
  const SweepResult s = sample_sweep(false);
  std::stringstream ss;
  write_sweep_csv(ss, s);
  const SweepResult r = read_sweep_csv(ss);
  EXPECT_FALSE(r.has_2d());
  EXPECT_EQ(r.n_m, s.n_m);
}

TEST(SweepCsv, Errors) {
  std::stringstream bad_header("a,b,c\n1,2,3\n");
  EXPECT_THROW(read_sweep_csv(bad_header), ConfigError);
  std::stringstream empty(std::string(kSweepHeader) + "\n");
  EXPECT_THROW(read_sweep_csv(empty), ConfigError);
  std::stringstream short_row(std::string(kSweepHeader) + "\n1,2,3\n");
  EXPECT_THROW(read_sweep_csv(short_row), ConfigError);
  std::stringstream junk(std::string(kSweepHeader) + "\nx,1,1,1,1,1\n");
  EXPECT_THROW(read_sweep_csv(junk), ConfigError);
}

TEST(JsonReports, SeminormKeys) {
  const auto rep = seminorm_report(PotentialSpec::radial(RadialProfile::gaussian(1.0, 1.0)));
  const json j = to_json(rep);
  for (const char* k : {"zeta", "quasinorm", "delta_upper", "delta_lower", "epsilon_window", "l1lp", "p",
                        "weyl_coeff", "bound_B", "truncation_caveat"})
    EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_NEAR(j["weyl_coeff"].get<double>(), 0.25, 1e-9);
}

TEST(JsonReports, OptionalFieldsAreNull) {
  EstimReport e;
  e.vacuous = true;
  EXPECT_TRUE(to_json(e)["empirical_C"].is_null());
  As2Report a;
  EXPECT_TRUE(to_json(a)["margin_discrepancy"].is_null());
  EXPECT_TRUE(to_json(a)["estimates_only"].get<bool>());
}

TEST(PlotFiles, OneFilePerSeries) {
  const fs::path dir = scratch("plots");
  const auto files = write_plot_files(dir, sample_sweep(true));
  ASSERT_EQ(files.size(), 3u);
  std::ifstream in(dir / "n2d.dat");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header.front(), '#');
  EXPECT_EQ(row, "1 1");
  EXPECT_EQ(write_plot_files(scratch("plots1d"), sample_sweep(false)).size(), 1u);
}

TEST(Config, Defaults) {
  const RunConfig c = parse_run_config(gaussian_doc());
  EXPECT_EQ(c.p, 2.0);
  EXPECT_EQ(c.J, kDefaultTruncation);
  EXPECT_EQ(c.convention, Convention::Substitution);
  EXPECT_EQ(c.potential().family(), "gaussian");
}

TEST(Config, UnknownKeysAreRejected) {
  json j = gaussian_doc();
  j["colour"] = "blue";
  EXPECT_THROW(parse_run_config(j), ConfigError);
  json k = gaussian_doc();
  k["potential"]["params"]["sigma"] = 2.0;
  EXPECT_THROW(parse_run_config(k), ConfigError);
  json g = gaussian_doc();
  g["grid"] = {{"spacing", 0.1}};
  EXPECT_THROW(parse_run_config(g), ConfigError);
}

TEST(Config, BadValues) {
  json fam = gaussian_doc();
  fam["potential"]["family"] = "square";
  EXPECT_THROW(parse_run_config(fam), ConfigError);
  json width = gaussian_doc();
  width["potential"]["params"]["width"] = -1.0;
  EXPECT_THROW(parse_run_config(width), ConfigError);
  json p = gaussian_doc();
  p["p"] = 1.0;
  EXPECT_THROW(parse_run_config(p), ConfigError);
  json win = gaussian_doc();
  win["grid"] = {{"t_min", 1.0}};
  EXPECT_THROW(parse_run_config(win), ConfigError);
  json sup = gaussian_doc();
  sup["potential"]["support"] = {2.0, 1.0};
  EXPECT_THROW(parse_run_config(sup), ConfigError);
  json conv = gaussian_doc();
  conv["convention"] = "sideways";
  EXPECT_THROW(parse_run_config(conv), ConfigError);
}

TEST(Config, NegativePotentialIsRejected) {
  const json j = json::parse(R"({"potential": {"family": "product",
      "params": {"radial": {"family": "gaussian", "params": {"amplitude": 1, "width": 1}}, "angular": [1, -0.5]}}})");
  EXPECT_THROW(parse_run_config(j), ConfigError);
}

TEST(Config, SupportRestrictsPotential) {
  json j = gaussian_doc();
  j["potential"]["support"] = {0.5, 1.5};
  const PotentialSpec spec = parse_run_config(j).potential();
  EXPECT_EQ(spec(2.0, 0.0), 0.0);
  EXPECT_NEAR(spec(1.0, 0.0), std::exp(-1.0), 1e-15);
}

TEST(Config, FourierSumFromJson) {
  const json j = json::parse(R"({"potential": {"family": "fourier_sum", "params": {"modes": [
      {"m": 0, "profile": {"family": "constant", "params": {"value": 2}}},
      {"m": 3, "kind": "sin", "profile": {"family": "constant", "params": {"value": 0.5}}}]},
      "support": [0, 1]}})");
  const PotentialSpec spec = parse_run_config(j).potential();
  const double th = 0.3;
  EXPECT_NEAR(spec(0.5, th), 2.0 + std::sin(3.0 * th), 1e-15);
  EXPECT_EQ(spec.max_mode(), 3);
}

TEST(Config, TabulatedAnnulusFile) {
  const fs::path dir = scratch("table");
  {
    std::ofstream f(dir / "t.csv");
    f << "r,theta,value\n";
    for (double r : {1.0, 2.0})
      for (double th : {0.0, 3.14159})
        f << r << ',' << th << ',' << 4.0 << '\n';
  }
  const json j = json::parse(R"({"potential": {"family": "annulus_tabulated", "params": {"file": "t.csv"}}})");
  const PotentialSpec spec = parse_run_config(j, dir).potential();
  EXPECT_DOUBLE_EQ(spec(1.5, 1.0), 4.0);
  EXPECT_EQ(spec(0.5, 1.0), 0.0);
  EXPECT_EQ(spec(3.0, 1.0), 0.0);

  const json missing = json::parse(R"({"potential": {"family": "annulus_tabulated", "params": {"file": "nope.csv"}}})");
  EXPECT_THROW(parse_run_config(missing, dir), ConfigError);
}

TEST(Config, ShippedExamplesParse) {
  const fs::path dir = fs::path(SEMIWEYL_SOURCE_DIR) / "configs";
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".json") continue;
    EXPECT_NO_THROW(load_run_config(e.path())) << e.path();
    ++n;
  }
  EXPECT_GE(n, 5u);
}

TEST(Config, InvalidJsonFile) {
  const fs::path dir = scratch("badjson");
  std::ofstream(dir / "bad.json") << "{\"potential\": ";
  EXPECT_THROW(load_run_config(dir / "bad.json"), ConfigError);
  EXPECT_THROW(load_run_config(dir / "absent.json"), ConfigError);
}
