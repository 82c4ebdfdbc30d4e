#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "coolsim/scenario.hpp"
#include "support.hpp"

using namespace coolsim;
using test::kind_of;
namespace fs = std::filesystem;

namespace {

const char* fig2 =
    "# figure parameters\n"
    "scenario = common-gaussian\n"
    "N = 1000000\n"
    "g = 0.001\n"
    "eta = 1\n"
    "omega_nu = 0.0005\n"
    "kappa = 1\n"
    "m0 = 1000\n"
    "t_final = 30\n";

std::string with(std::string base, const std::string& key, const std::string& value) {
  std::istringstream in(base);
  std::string out, line;
  bool replaced = false;
  while (std::getline(in, line)) {
    if (line.rfind(key + " =", 0) == 0) {
      line = key + " = " + value;
      replaced = true;
    }
    out += line + "\n";
  }
  if (!replaced) out += key + " = " + value + "\n";
  return out;
}

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / ("coolsim_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(COOLSIM_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config parsing") {
  const auto cfg = parse_config(fig2);
  CHECK(cfg.scenario == Scenario::common_gaussian);
  CHECK(cfg.params.particles == 1000000);
  CHECK(cfg.params.omega_nu == std::vector<double>{0.0005});
  CHECK(cfg.integrator.samples == 200);
  CHECK(cfg.window_lo() == 10.0);
  CHECK(cfg.window_hi() == 30.0);

  const auto two = parse_config(with(with(fig2, "omega_nu", "3, 4"), "fit_window", "5,25"));
  CHECK(two.params.omega_nu.size() == 2);
  CHECK(two.window_lo() == 5.0);
  CHECK(parse_config(with(fig2, "sample_interval", "0.5")).integrator.samples == 60);

  CHECK(kind_of([] { parse_config(with(fig2, "colour", "red")); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_config(std::string(fig2) + "N = 3\n"); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_config(with(fig2, "N", "many")); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_config(with(fig2, "tolerance", "0.1")); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_config(with(fig2, "fit_window", "20,40")); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_config(with(fig2, "sample_interval", "0.7")); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_config(with(fig2, "omega_nu", "")); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_config(with(fig2, "representation", "qubits")); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_config("scenario = common-gaussian\ng = 1\n"); }) == ErrorKind::missing_drive);
}

TEST_CASE("size limits refuse before computing") {
  auto big = with(with(fig2, "scenario", "common-lindblad"), "dim_b", "60");
  big = with(big, "dim_c", "60");
  CHECK(kind_of([&] { run_scenario(parse_config(big)); }) == ErrorKind::refused_run);
  auto crowd = with(with(fig2, "scenario", "individual-lindblad"), "N", "4");
  CHECK(kind_of([&] { run_scenario(parse_config(crowd)); }) == ErrorKind::refused_run);
  auto reg = with(with(with(fig2, "scenario", "common-lindblad"), "representation", "qubits"), "N", "13");
  CHECK(kind_of([&] { check_limits(parse_config(reg)); }) == ErrorKind::refused_run);
}

TEST_CASE("figure run: report and CSV") {
  const auto result = run_scenario(parse_config(fig2));
  CHECK(result.rows.size() == 201);
  CHECK(result.report.analytic_rate == 0.06640625);
  CHECK(std::isfinite(result.report.fitted_rate));
  CHECK(std::isfinite(result.report.relative_rate_error));
  CHECK(std::isfinite(result.report.max_ratio_deviation));
  CHECK_FALSE(result.report.conservation_residuals.has_value());
  CHECK(result.report.warnings.empty());

  const auto csv = format_csv(result);
  CHECK(csv.rfind("t,nb,nc,k3,ns,Q,Qprime,L2,analytic_m\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 202);
  for (const auto& r : result.rows) CHECK(std::abs(r.q_prime - (r.nb + r.nc)) <= 1e-12 * std::max(1.0, r.q_prime));
  CHECK(result.analytic.back() == doctest::Approx(1000.0 * std::exp(-1.9921875)).epsilon(1e-14));

  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(136.4301) == "136.4301");

  const auto report = format_report(result.report);
  for (const char* key : {"fitted_rate=", "analytic_rate=", "relative_rate_error=", "max_ratio_deviation=",
                          "transient_length=", "fit_goodness="}) {
    CHECK(report.find(key) != std::string::npos);
  }
}

TEST_CASE("closed system residuals are reported") {
  const auto cfg = parse_config(with(with(fig2, "kappa", "0"), "t_final", "50"));
  const auto result = run_scenario(cfg);
  REQUIRE(result.report.conservation_residuals.has_value());
  const auto& r = *result.report.conservation_residuals;
  CHECK(r.l1 < 1e-9);
  CHECK(r.total_number < 1e-9);
  CHECK(*r.dark_population < 1e-9);
  for (const auto& x : {r.q, r.q_prime, r.l1, r.total_number}) CHECK(std::isfinite(x));
}

TEST_CASE("every scenario runs") {
  const std::string small = with(with(fig2, "t_final", "5"), "m0", "0.3");
  const auto lind = with(small, "scenario", "common-lindblad");
  for (const auto& text : {small, lind, with(lind, "representation", "dicke"),
                           with(with(with(lind, "representation", "qubits"), "N", "3"), "gamma", "0.01"),
                           with(with(small, "scenario", "individual-reduced"), "N", "4"),
                           with(with(small, "scenario", "individual-multimode"), "N", "4"),
                           with(with(with(small, "scenario", "individual-lindblad"), "N", "2"), "dim_s", "2"),
                           with(with(with(with(small, "scenario", "individual-lindblad"), "N", "2"), "representation", "qubits"), "dim_b", "3")}) {
    const auto cfg = parse_config(text);
    CAPTURE(text);
    const auto result = run_scenario(cfg);
    CHECK(result.rows.size() == 201);
    for (const auto& r : result.rows) CHECK(std::isfinite(r.nb));
  }
}

TEST_CASE("backend comparison") {
  auto common = with(with(with(fig2, "scenario", "common-lindblad"), "m0", "0.5"), "t_final", "20");
  CHECK(compare_backends(parse_config(common)).max() < 1e-6);

  auto indiv = with(with(fig2, "scenario", "individual-reduced"), "N", "3");
  indiv = with(with(indiv, "m0", "3"), "t_final", "20");
  const auto d = compare_backends(parse_config(indiv));
  CHECK(d.reference == "individual-multimode");
  CHECK(d.max() < 1e-8);

  auto zero = with(with(common, "g", "0"), "omega_nu", "0");
  zero = with(zero, "kappa", "0");
  CHECK(compare_backends(parse_config(zero)).max() < 1e-15);

  CHECK(kind_of([] { compare_backends(parse_config("scenario = algebra-checks\n")); }) == ErrorKind::infeasible_pairing);
  CHECK(kind_of([&] { compare_backends(parse_config(with(common, "representation", "dicke"))); }) ==
        ErrorKind::infeasible_pairing);
}

TEST_CASE("algebra report") {
  const auto cfg = parse_config("scenario = algebra-checks\nalgebra_N = 10, 100, 1000\nalgebra_l_max = 3\nalgebra_dim = 3\n");
  const auto result = run_scenario(cfg);
  REQUIRE(result.report.algebra.has_value());
  const auto& a = *result.report.algebra;
  CHECK(a.contraction.size() == 12);
  for (const auto& e : a.contraction) {
    CHECK(std::abs(e.contraction_error - 2.0 * double(e.excitation) / double(e.particles)) < 1e-12);
  }
  CHECK(a.max_commutator_residual() < 1e-12);
  CHECK(format_report(result.report).find("contraction_error.N100.l3=0.06") != std::string::npos);
  CHECK(result.rows.empty());
}

TEST_CASE("command line") {
  const auto dir = scratch();
  const auto cfg = dir / "fig2.cfg";
  write(cfg, fig2);
  const auto out = dir / "fig2.csv";

  CHECK(run_cli("run " + cfg.string() + " --out " + out.string()) == 0);
  CHECK(read(out).rfind("t,nb,nc,k3,ns,Q,Qprime,L2,analytic_m", 0) == 0);
  CHECK(fs::exists(dir / "fig2.csv.report"));
  const auto first = read(out);
  CHECK(run_cli("run " + cfg.string() + " --out " + out.string()) == 0);
  CHECK(read(out) == first);

  CHECK(run_cli("run " + cfg.string() + " --out " + out.string() + " --assert") == 5);

  const auto bad = dir / "bad.cfg";
  write(bad, with(fig2, "colour", "red"));
  CHECK(run_cli("run " + bad.string() + " --out " + (dir / "bad.csv").string()) == 2);
  CHECK_FALSE(fs::exists(dir / "bad.csv"));

  const auto huge = dir / "huge.cfg";
  write(huge, with(with(with(fig2, "scenario", "common-lindblad"), "dim_b", "60"), "dim_c", "60"));
  CHECK(run_cli("run " + huge.string() + " --out " + (dir / "huge.csv").string()) == 3);
  CHECK_FALSE(fs::exists(dir / "huge.csv"));
  CHECK_FALSE(fs::exists(dir / "huge.csv.report"));

  const auto ok = dir / "ok.cfg";
  write(ok, with(with(fig2, "kappa", "0"), "t_final", "5"));
  const auto sweep = dir / "sweep";
  fs::create_directories(sweep);
  CHECK(run_cli("run " + cfg.string() + " " + ok.string() + " --out " + sweep.string() + " --jobs 2") == 0);
  CHECK(fs::exists(sweep / "fig2.csv"));
  CHECK(fs::exists(sweep / "ok.csv"));
  CHECK(read(sweep / "fig2.csv") == first);

  CHECK(run_cli("compare " + cfg.string()) == 0);
  CHECK(run_cli("algebra " + cfg.string()) == 0);
  CHECK(run_cli("frobnicate") == 2);

  fs::remove_all(dir);
}

}
