#include "coolsim/scenario.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <system_error>

#include "coolsim/error.hpp"
#include "coolsim/lindblad.hpp"

namespace coolsim {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorKind::config, "bad value for " + std::string(key) + ": '" + std::string(value) + "'");
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) bad_value(key, v);
  return out;
}

std::size_t parse_size(std::string_view key, std::string_view v) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v);
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v);
}

template <typename F>
auto parse_list(std::string_view key, std::string_view v, F item) {
  std::vector<decltype(item(key, v))> out;
  while (true) {
    const auto comma = v.find(',');
    const auto piece = trim(v.substr(0, comma));
    if (piece.empty()) bad_value(key, v);
    out.push_back(item(key, piece));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

Scenario parse_scenario(std::string_view v) {
  for (auto s : {Scenario::common_gaussian, Scenario::common_lindblad, Scenario::individual_reduced,
                 Scenario::individual_multimode, Scenario::individual_lindblad, Scenario::algebra_checks}) {
    if (v == to_string(s)) return s;
  }
  bad_value("scenario", v);
}

std::size_t saturating_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) return std::numeric_limits<std::size_t>::max();
  return a * b;
}

std::size_t saturating_pow(std::size_t base, std::size_t exp) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) out = saturating_mul(out, base);
  return out;
}

double effective_particle_decay(const ScenarioConfig& cfg) {
  const bool exact = cfg.representation != ParticleRepresentation::bosonized &&
                     (cfg.scenario == Scenario::common_lindblad || cfg.scenario == Scenario::individual_lindblad);
  return (exact || cfg.particle_decay) ? cfg.params.gamma : 0.0;
}

SpaceDescriptor lindblad_space(const ScenarioConfig& cfg) {
  const std::size_t n = cfg.params.particles;
  if (cfg.scenario == Scenario::common_lindblad) {
    switch (cfg.representation) {
      case ParticleRepresentation::bosonized: return common_bosonized_space(cfg.dim_s, cfg.dim_b, cfg.dim_c);
      case ParticleRepresentation::dicke: return common_dicke_space(n, cfg.dim_s - 1, cfg.dim_b, cfg.dim_c);
      case ParticleRepresentation::qubits: return common_register_space(n, cfg.dim_b, cfg.dim_c);
    }
  }
  if (cfg.representation == ParticleRepresentation::qubits) return individual_register_space(n, cfg.dim_b, cfg.dim_c);
  return individual_bosonized_space(n, cfg.dim_s, cfg.dim_b, cfg.dim_c);
}

// M_ij = tr(rho a_i^dag a_j) = sum_kl (a_j rho)_kl conj((a_i)_kl).
MomentMatrix density_moments(const DensityMatrix& rho, const std::vector<OperatorMatrix>& ops) {
  const auto k = static_cast<Eigen::Index>(ops.size());
  std::vector<Eigen::MatrixXcd> applied;
  applied.reserve(ops.size());
  for (const auto& op : ops) applied.emplace_back(op.matrix() * rho.rho);
  MomentMatrix m(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& a = ops[static_cast<std::size_t>(i)].matrix();
    for (Eigen::Index j = 0; j < k; ++j) {
      cplx sum{};
      for (Eigen::Index r = 0; r < a.outerSize(); ++r) {
        for (SparseOp::InnerIterator it(a, r); it; ++it) sum += applied[static_cast<std::size_t>(j)](r, it.col()) * std::conj(it.value());
      }
      m(i, j) = sum;
    }
  }
  return m;
}

// Total number of quanta per basis state: boson occupations, Dicke level,
// excited qubits.
Eigen::VectorXd excitation_numbers(const SpaceDescriptor& space) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(space.dimension()));
  for (std::size_t i = 0; i < space.dimension(); ++i) {
    const auto d = space.digits(i);
    double total = 0.0;
    for (std::size_t m = 0; m < d.size(); ++m) {
      total += space.modes()[m].kind == ModeKind::qubit_register ? std::popcount(d[m]) : static_cast<double>(d[m]);
    }
    out(static_cast<Eigen::Index>(i)) = total;
  }
  return out;
}

std::vector<OperatorMatrix> moment_operators(const ScenarioConfig& cfg, const SpaceDescriptor& space) {
  std::vector<OperatorMatrix> ops;
  if (cfg.scenario == Scenario::common_lindblad) {
    ops.push_back(collective_lowering(space));
    ops.push_back(mode_annihilator("b", space));
    ops.push_back(mode_annihilator("c", space));
    return ops;
  }
  const ModelKind kind = model_kind(cfg);
  const std::size_t n = cfg.params.particles;
  for (std::size_t i = 0; i < n; ++i) ops.push_back(particle_lowering(kind, space, i));
  for (std::size_t i = 0; i < n; ++i) ops.push_back(mode_annihilator(phonon_label(i), space));
  ops.push_back(mode_annihilator("c", space));
  return ops;
}

struct Trajectory {
  std::vector<ObservableRecord> rows;
  std::vector<ConservedQuantities> conserved;
  bool truncation_flagged = false;
};

bool is_common(Scenario s) { return s == Scenario::common_gaussian || s == Scenario::common_lindblad; }

// Gaussian start: the phonons thermal with m0 quanta in total, everything
// else empty.
MomentMatrix thermal_moments(const ScenarioConfig& cfg) {
  if (is_common(cfg.scenario)) {
    MomentMatrix m = MomentMatrix::Zero(3, 3);
    m(1, 1) = cfg.params.m0;
    return m;
  }
  return expand_reduced(reduced_thermal_state(cfg.params.particles, cfg.params.m0), cfg.params.particles);
}

DensityMatrix thermal_density(const ScenarioConfig& cfg, const SpaceDescriptor& space) {
  std::vector<std::pair<std::string, double>> modes;
  if (cfg.scenario == Scenario::common_lindblad) {
    modes.emplace_back("b", cfg.params.m0);
  } else {
    const std::size_t n = cfg.params.particles;
    for (std::size_t i = 0; i < n; ++i) modes.emplace_back(phonon_label(i), cfg.params.m0 / static_cast<double>(n));
  }
  return product_thermal_state(space, modes);
}

ObservableRecord observe_moments(const ScenarioConfig& cfg, double t, const MomentMatrix& m, const DerivedCouplings& c,
                                 ConservedQuantities& conserved) {
  if (is_common(cfg.scenario)) {
    conserved = common_conserved(m, c);
    return common_observables(t, m, c);
  }
  const auto s = reduce_moments(m, cfg.params.particles);
  conserved = individual_conserved(s, cfg.params.particles, c);
  return individual_observables(t, s, cfg.params.particles, c);
}

Trajectory simulate_gaussian(const ScenarioConfig& cfg, const DerivedCouplings& c, const MomentMatrix& m0) {
  const double pd = effective_particle_decay(cfg);
  const LinearModel model = is_common(cfg.scenario)
                                ? common_linear_model(c, cfg.params.kappa, pd)
                                : individual_linear_model(cfg.params.particles, c, cfg.params.kappa, pd);
  Trajectory tr;
  evolve_moments(model, m0, cfg.integrator, [&](double t, const MomentMatrix& m) {
    ConservedQuantities q;
    tr.rows.push_back(observe_moments(cfg, t, m, c, q));
    tr.conserved.push_back(q);
  });
  return tr;
}

Trajectory simulate_reduced(const ScenarioConfig& cfg, const DerivedCouplings& c) {
  const auto model = reduce_individual(cfg.params, c, effective_particle_decay(cfg));
  const std::size_t n = cfg.params.particles;
  Trajectory tr;
  evolve_reduced(model, reduced_thermal_state(n, cfg.params.m0), cfg.integrator,
                 [&](double t, const ReducedIndividualState& s) {
                   tr.rows.push_back(individual_observables(t, s, n, c));
                   tr.conserved.push_back(individual_conserved(s, n, c));
                 });
  return tr;
}

Trajectory simulate_lindblad(const ScenarioConfig& cfg, const DerivedCouplings& c, const SpaceDescriptor& space,
                             const DensityMatrix& rho0) {
  DissipationOptions opts;
  opts.bosonized_particle_decay = cfg.particle_decay;
  const auto model = make_lindblad_model(model_kind(cfg), cfg.params, c, space, opts);
  const auto ops = moment_operators(cfg, space);
  const Eigen::VectorXd quanta = excitation_numbers(space);
  Trajectory tr;
  const auto report = evolve_density(model, rho0, cfg.integrator, [&](double t, const DensityMatrix& rho) {
    ConservedQuantities q;
    tr.rows.push_back(observe_moments(cfg, t, density_moments(rho, ops), c, q));
    q.total_number = rho.rho.diagonal().real().dot(quanta);
    q.l1 = c.z > 0.0 ? expectation(rho, model.hamiltonian()).real() / (2.0 * c.z) : 0.0;
    tr.conserved.push_back(q);
  });
  tr.truncation_flagged = report.flagged;
  return tr;
}

double relative_drift(const std::vector<double>& series) {
  if (series.empty()) return 0.0;
  double worst = 0.0;
  for (double v : series) worst = std::max(worst, std::abs(v - series.front()));
  return worst / std::max(std::abs(series.front()), 1.0);
}

ConservationResiduals conservation_residuals(const Trajectory& tr) {
  std::vector<double> q, qp, l1, total, dark;
  bool has_dark = true;
  for (std::size_t i = 0; i < tr.rows.size(); ++i) {
    q.push_back(tr.rows[i].q);
    qp.push_back(tr.rows[i].q_prime);
    l1.push_back(tr.conserved[i].l1);
    total.push_back(tr.conserved[i].total_number);
    if (tr.conserved[i].dark_population) {
      dark.push_back(*tr.conserved[i].dark_population);
    } else {
      has_dark = false;
    }
  }
  ConservationResiduals r;
  r.q = relative_drift(q);
  r.q_prime = relative_drift(qp);
  r.l1 = relative_drift(l1);
  r.total_number = relative_drift(total);
  if (has_dark) r.dark_population = relative_drift(dark);
  return r;
}

double ratio_deviation(double actual, double expected) {
  return expected == 0.0 ? std::abs(actual) : std::abs(actual / expected - 1.0);
}

void fill_rate_report(const ScenarioConfig& cfg, const DerivedCouplings& c, const Trajectory& tr, RunReport& rep) {
  const ModelKind kind = model_kind(cfg);
  const bool individual = !is_common(cfg.scenario);
  const double n = static_cast<double>(cfg.params.particles);

  std::vector<TimePoint> series;
  series.reserve(tr.rows.size());
  for (const auto& r : tr.rows) series.push_back({r.t, r.nb});
  const double lo = cfg.window_lo();
  const double hi = cfg.window_hi();
  try {
    const auto [fit, lo_used] = fit_exponential_rate_adaptive(series, lo, hi, cfg.min_goodness);
    rep.fitted_rate = fit.rate;
    rep.fit_goodness = fit.goodness;
    rep.transient_length = lo_used;
  } catch (const Error& e) {
    rep.fitted_rate = std::numeric_limits<double>::quiet_NaN();
    rep.fit_goodness = std::numeric_limits<double>::quiet_NaN();
    rep.transient_length = std::numeric_limits<double>::quiet_NaN();
    rep.warnings.emplace_back(std::string("rate fit unavailable: ") + e.what());
  }

  if (c.y > 0.0) {
    rep.analytic_rate = analytic_rate(kind, c, cfg.params.kappa);
    rep.relative_rate_error = rep.analytic_rate > 0.0
                                  ? std::abs(rep.fitted_rate - rep.analytic_rate) / rep.analytic_rate
                                  : std::numeric_limits<double>::quiet_NaN();
    const auto [photon, k3] = quasi_stationary_ratios(c);
    for (const auto& r : tr.rows) {
      if (r.t < lo || r.t > hi || !(r.nb > 0.0)) continue;
      const double photons = individual ? n * r.nc : r.nc;
      rep.max_photon_ratio_deviation = std::max(rep.max_photon_ratio_deviation, ratio_deviation(photons / r.nb, photon));
      rep.max_k3_ratio_deviation = std::max(rep.max_k3_ratio_deviation, ratio_deviation(r.k3 / r.nb, k3));
    }
    rep.max_ratio_deviation = std::max(rep.max_photon_ratio_deviation, rep.max_k3_ratio_deviation);
  } else {
    rep.analytic_rate = std::numeric_limits<double>::quiet_NaN();
    rep.relative_rate_error = std::numeric_limits<double>::quiet_NaN();
    rep.max_ratio_deviation = rep.max_photon_ratio_deviation = rep.max_k3_ratio_deviation =
        std::numeric_limits<double>::quiet_NaN();
    rep.warnings.emplace_back("y = 0: no cavity coupling, analytic predictions undefined");
  }
}

void append_double(std::string& out, double v) {
  if (std::isnan(v)) {
    out += "nan";
    return;
  }
  if (std::isinf(v)) {
    out += v > 0 ? "inf" : "-inf";
    return;
  }
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  out.append(buf, res.ptr);
}

}  // namespace

const char* to_string(Scenario s) noexcept {
  switch (s) {
    case Scenario::common_gaussian: return "common-gaussian";
    case Scenario::common_lindblad: return "common-lindblad";
    case Scenario::individual_reduced: return "individual-reduced";
    case Scenario::individual_multimode: return "individual-multimode";
    case Scenario::individual_lindblad: return "individual-lindblad";
    case Scenario::algebra_checks: return "algebra-checks";
  }
  return "?";
}

ModelKind model_kind(const ScenarioConfig& cfg) {
  const bool spin = cfg.representation != ParticleRepresentation::bosonized;
  switch (cfg.scenario) {
    case Scenario::common_gaussian:
    case Scenario::algebra_checks: return ModelKind::common_bosonized;
    case Scenario::common_lindblad: return spin ? ModelKind::common_spin_exact : ModelKind::common_bosonized;
    case Scenario::individual_reduced:
    case Scenario::individual_multimode: return ModelKind::individual_bosonized;
    case Scenario::individual_lindblad: return spin ? ModelKind::individual_spin_exact : ModelKind::individual_bosonized;
  }
  return ModelKind::common_bosonized;
}

ScenarioConfig parse_config(std::string_view text) {
  ScenarioConfig cfg;
  std::map<std::string, std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::config, "line " + std::to_string(line_no) + ": expected key=value");
    }
    const auto key = std::string(trim(line.substr(0, eq)));
    const auto value = std::string(trim(line.substr(eq + 1)));
    if (!seen.emplace(key, value).second) throw Error(ErrorKind::config, "duplicate key: " + key);
  }

  std::optional<double> sample_interval;
  for (const auto& [key, v] : seen) {
    if (key == "scenario") cfg.scenario = parse_scenario(v);
    else if (key == "N") cfg.params.particles = parse_size(key, v);
    else if (key == "g") cfg.params.g = parse_double(key, v);
    else if (key == "eta") cfg.params.eta = parse_double(key, v);
    else if (key == "omega_nu") cfg.params.omega_nu = parse_list(key, v, parse_double);
    else if (key == "kappa") cfg.params.kappa = parse_double(key, v);
    else if (key == "gamma") cfg.params.gamma = parse_double(key, v);
    else if (key == "m0") cfg.params.m0 = parse_double(key, v);
    else if (key == "method") {
      if (v == "rk4") cfg.integrator.method = IntegratorMethod::rk4;
      else if (v == "adaptive") cfg.integrator.method = IntegratorMethod::adaptive;
      else bad_value(key, v);
    }
    else if (key == "dt") cfg.integrator.dt = parse_double(key, v);
    else if (key == "tolerance") cfg.integrator.tolerance = parse_double(key, v);
    else if (key == "abs_tolerance") cfg.integrator.abs_tolerance = parse_double(key, v);
    else if (key == "t_final") cfg.integrator.t_final = parse_double(key, v);
    else if (key == "samples") cfg.integrator.samples = parse_size(key, v);
    else if (key == "sample_interval") sample_interval = parse_double(key, v);
    else if (key == "fit_window") {
      const auto w = parse_list(key, v, parse_double);
      if (w.size() != 2) bad_value(key, v);
      cfg.fit_lo = w[0];
      cfg.fit_hi = w[1];
    }
    else if (key == "output_path") cfg.output_path = v;
    else if (key == "representation") {
      if (v == "bosonized") cfg.representation = ParticleRepresentation::bosonized;
      else if (v == "dicke") cfg.representation = ParticleRepresentation::dicke;
      else if (v == "qubits") cfg.representation = ParticleRepresentation::qubits;
      else bad_value(key, v);
    }
    else if (key == "dim_s") cfg.dim_s = parse_size(key, v);
    else if (key == "dim_b") cfg.dim_b = parse_size(key, v);
    else if (key == "dim_c") cfg.dim_c = parse_size(key, v);
    else if (key == "particle_decay") cfg.particle_decay = parse_bool(key, v);
    else if (key == "rate_tolerance") cfg.rate_tolerance = parse_double(key, v);
    else if (key == "conservation_tolerance") cfg.conservation_tolerance = parse_double(key, v);
    else if (key == "min_goodness") cfg.min_goodness = parse_double(key, v);
    else if (key == "algebra_N") cfg.algebra_particles = parse_list(key, v, parse_size);
    else if (key == "algebra_l_max") cfg.algebra_max_excitation = parse_size(key, v);
    else if (key == "algebra_dim") cfg.algebra_dim = parse_size(key, v);
    else throw Error(ErrorKind::config, "unknown key: " + key);
  }

  if (sample_interval) {
    if (!(*sample_interval > 0.0)) bad_value("sample_interval", seen.find("sample_interval")->second);
    const double count = cfg.integrator.t_final / *sample_interval;
    const double rounded = std::round(count);
    if (rounded < 1.0 || std::abs(count - rounded) > 1e-9 * rounded) {
      throw Error(ErrorKind::config, "sample_interval must divide t_final");
    }
    cfg.integrator.samples = static_cast<std::size_t>(rounded);
  }

  validate(cfg.integrator);
  if (cfg.scenario != Scenario::algebra_checks) validate(cfg.params);
  if (cfg.dim_s < 2 || cfg.dim_b < 2 || cfg.dim_c < 2 || cfg.algebra_dim < 2) {
    throw Error(ErrorKind::invalid_dimension, "mode dimensions must be at least 2");
  }
  const double lo = cfg.window_lo();
  const double hi = cfg.window_hi();
  if (!(lo >= 0.0 && lo < hi && hi <= cfg.integrator.t_final)) {
    throw Error(ErrorKind::config, "fit window must satisfy 0 <= lo < hi <= t_final");
  }
  if (!(cfg.rate_tolerance > 0.0) || !(cfg.conservation_tolerance > 0.0) ||
      !(cfg.min_goodness > 0.0 && cfg.min_goodness <= 1.0)) {
    throw Error(ErrorKind::config, "tolerances must be positive and min_goodness in (0, 1]");
  }
  const bool lindblad = cfg.scenario == Scenario::common_lindblad || cfg.scenario == Scenario::individual_lindblad;
  if (cfg.representation != ParticleRepresentation::bosonized && !lindblad) {
    throw Error(ErrorKind::config, std::string(to_string(cfg.scenario)) + " needs representation=bosonized");
  }
  if (cfg.scenario == Scenario::individual_lindblad && cfg.representation == ParticleRepresentation::dicke) {
    throw Error(ErrorKind::config, "the Dicke ladder describes the common model only");
  }
  if (cfg.scenario == Scenario::common_lindblad && cfg.representation == ParticleRepresentation::dicke &&
      cfg.dim_s - 1 > cfg.params.particles) {
    throw Error(ErrorKind::invalid_excitation, "dim_s - 1 exceeds N for the Dicke ladder");
  }
  if (cfg.scenario == Scenario::individual_reduced && cfg.params.particles < 2) {
    throw Error(ErrorKind::config, "individual-reduced needs N >= 2");
  }
  if (cfg.scenario == Scenario::algebra_checks) {
    for (auto n : cfg.algebra_particles) {
      if (n < 1 || cfg.algebra_max_excitation + 1 > n) {
        throw Error(ErrorKind::invalid_excitation, "algebra_l_max + 1 must not exceed any algebra_N");
      }
    }
  }
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::config, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void check_limits(const ScenarioConfig& cfg) {
  const std::size_t n = cfg.params.particles;
  const auto refuse = [&](const std::string& why) {
    throw Error(ErrorKind::refused_run, std::string(to_string(cfg.scenario)) + ": " + why);
  };
  std::size_t dim = 0;
  switch (cfg.scenario) {
    case Scenario::common_lindblad: {
      std::size_t particle_dim = cfg.dim_s;
      if (cfg.representation == ParticleRepresentation::qubits) {
        if (n > max_register_particles) refuse("qubit register limited to " + std::to_string(max_register_particles));
        particle_dim = std::size_t{1} << n;
      }
      dim = saturating_mul(saturating_mul(particle_dim, cfg.dim_b), cfg.dim_c);
      break;
    }
    case Scenario::individual_lindblad: {
      if (n > max_individual_lindblad_particles) {
        refuse("N = " + std::to_string(n) + " exceeds " + std::to_string(max_individual_lindblad_particles));
      }
      const std::size_t per_particle = cfg.representation == ParticleRepresentation::qubits ? 2 : cfg.dim_s;
      dim = saturating_mul(saturating_pow(saturating_mul(per_particle, cfg.dim_b), n), cfg.dim_c);
      break;
    }
    case Scenario::individual_multimode:
      if (n > max_multimode_particles) {
        refuse("N = " + std::to_string(n) + " exceeds " + std::to_string(max_multimode_particles));
      }
      return;
    default: return;
  }
  if (dim > max_lindblad_dimension) {
    refuse("Hilbert space dimension " + std::to_string(dim) + " exceeds " + std::to_string(max_lindblad_dimension));
  }
}

double AlgebraReport::max_commutator_residual() const {
  double worst = std::max({ladder_residual, su2_residual, casimir_residual, casimir_commutator, hamiltonian_residual});
  for (const auto& e : contraction) worst = std::max(worst, e.residual);
  return worst;
}

AlgebraReport algebra_checks(const ScenarioConfig& cfg) {
  AlgebraReport rep;
  const std::size_t lmax = cfg.algebra_max_excitation;
  for (std::size_t n : cfg.algebra_particles) {
    // One level above lmax keeps <lmax|[S-, S+]|lmax> free of truncation.
    const auto s = dicke_lowering(n, lmax + 1);
    const auto comm = commutator(s, s.adjoint());
    for (std::size_t l = 0; l <= lmax; ++l) {
      ContractionEntry e;
      e.particles = n;
      e.excitation = l;
      const auto idx = static_cast<Eigen::Index>(l);
      e.commutator = comm.coeff(idx, idx).real();
      e.contraction_error = 1.0 - e.commutator;
      e.residual = std::abs(e.commutator - (1.0 - 2.0 * static_cast<double>(l) / static_cast<double>(n)));
      rep.contraction.push_back(e);
    }
  }

  const std::size_t d = cfg.algebra_dim;
  {
    const auto a = annihilator(d);
    const Eigen::MatrixXcd c = commutator(a, a.adjoint()).dense();
    for (Eigen::Index i = 0; i + 1 < static_cast<Eigen::Index>(d); ++i) {
      for (Eigen::Index j = 0; j + 1 < static_cast<Eigen::Index>(d); ++j) {
        rep.ladder_residual = std::max(rep.ladder_residual, std::abs(c(i, j) - cplx(i == j ? 1.0 : 0.0)));
      }
    }
  }

  DerivedCouplings c = couplings_from_xy(1.0, 1.0);
  if (!cfg.params.omega_nu.empty()) {
    const auto physical = derive_couplings(cfg.params);
    if (physical.z > 0.0) c = physical;
  }
  const auto space = common_bosonized_space(d, d, d);
  const auto l = angular_momentum_ops(space, c);
  const auto low = low_excitation_indices(space, d - 1);
  const auto restricted = [&](const OperatorMatrix& lhs, const OperatorMatrix& rhs) {
    const Eigen::MatrixXcd diff = (lhs - rhs).dense();
    double worst = 0.0;
    for (auto i : low) {
      for (auto j : low) worst = std::max(worst, std::abs(diff(Eigen::Index(i), Eigen::Index(j))));
    }
    return worst;
  };
  const cplx i1{0.0, 1.0};
  rep.su2_residual = std::max({restricted(commutator(l.l1, l.l2), i1 * l.l3),
                               restricted(commutator(l.l2, l.l3), i1 * l.l1),
                               restricted(commutator(l.l3, l.l1), i1 * l.l2)});
  const auto s_op = collective_lowering(space);
  const auto a_op = polariton_annihilator(space, c);
  const auto number = s_op.adjoint() * s_op + a_op.adjoint() * a_op;
  const auto casimir_expected = 0.5 * number + 0.25 * (number * number);
  rep.casimir_residual = restricted(l.casimir, casimir_expected);
  rep.casimir_commutator = restricted(commutator(l.casimir, l.l1), zero_operator(space));
  rep.hamiltonian_residual = max_abs_difference(build_hamiltonian(ModelKind::common_bosonized, c, space),
                                                (2.0 * c.z) * l.l1);
  return rep;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  check_limits(cfg);
  ScenarioResult result;
  RunReport& rep = result.report;
  rep.scenario = cfg.scenario;
  if (cfg.scenario == Scenario::algebra_checks) {
    rep.algebra = algebra_checks(cfg);
    return result;
  }

  const DerivedCouplings c = derive_couplings(cfg.params);
  rep.warnings = validate_regime(cfg.params);
  if (cfg.params.gamma > 0.0 && effective_particle_decay(cfg) == 0.0) {
    rep.warnings.emplace_back("gamma ignored: bosonized particle modes carry no decay channel");
  }

  Trajectory tr;
  switch (cfg.scenario) {
    case Scenario::common_gaussian:
    case Scenario::individual_multimode: tr = simulate_gaussian(cfg, c, thermal_moments(cfg)); break;
    case Scenario::individual_reduced: tr = simulate_reduced(cfg, c); break;
    case Scenario::common_lindblad:
    case Scenario::individual_lindblad: {
      const auto space = lindblad_space(cfg);
      tr = simulate_lindblad(cfg, c, space, thermal_density(cfg, space));
      break;
    }
    case Scenario::algebra_checks: break;
  }
  rep.truncation_flagged = tr.truncation_flagged;
  if (tr.truncation_flagged) rep.warnings.emplace_back("truncation: top-level population above threshold");

  fill_rate_report(cfg, c, tr, rep);
  if (cfg.params.kappa == 0.0 && effective_particle_decay(cfg) == 0.0) {
    rep.conservation_residuals = conservation_residuals(tr);
  }

  const ModelKind kind = model_kind(cfg);
  result.analytic.reserve(tr.rows.size());
  for (const auto& r : tr.rows) {
    result.analytic.push_back(c.y > 0.0 ? analytic_phonon_curve(kind, cfg.params.m0, c, cfg.params.kappa, r.t)
                                        : std::numeric_limits<double>::quiet_NaN());
  }
  result.rows = std::move(tr.rows);
  return result;
}

double BackendDeviation::max() const { return std::max({nb, nc, k3}); }

BackendDeviation compare_backends(const ScenarioConfig& cfg) {
  check_limits(cfg);
  if (cfg.scenario == Scenario::algebra_checks) {
    throw Error(ErrorKind::infeasible_pairing, "algebra-checks has no second backend");
  }
  const DerivedCouplings c = derive_couplings(cfg.params);
  BackendDeviation dev;
  Trajectory ref, cand;
  switch (cfg.scenario) {
    case Scenario::common_gaussian:
    case Scenario::common_lindblad:
    case Scenario::individual_lindblad: {
      ScenarioConfig lcfg = cfg;
      if (cfg.scenario == Scenario::common_gaussian) lcfg.scenario = Scenario::common_lindblad;
      check_limits(lcfg);
      if (lcfg.representation != ParticleRepresentation::bosonized) {
        throw Error(ErrorKind::infeasible_pairing, "the Gaussian backend needs bosonized particles");
      }
      const auto space = lindblad_space(lcfg);
      const auto rho0 = thermal_density(lcfg, space);
      ref = simulate_lindblad(lcfg, c, space, rho0);
      ScenarioConfig gcfg = lcfg;
      gcfg.scenario = lcfg.scenario == Scenario::common_lindblad ? Scenario::common_gaussian
                                                                 : Scenario::individual_multimode;
      cand = simulate_gaussian(gcfg, c, density_moments(rho0, moment_operators(lcfg, space)));
      dev.reference = std::string(to_string(lcfg.scenario));
      dev.candidate = std::string(to_string(gcfg.scenario));
      break;
    }
    case Scenario::individual_reduced:
    case Scenario::individual_multimode: {
      ScenarioConfig mcfg = cfg;
      mcfg.scenario = Scenario::individual_multimode;
      check_limits(mcfg);
      if (cfg.params.particles < 2) throw Error(ErrorKind::infeasible_pairing, "the reduced model needs N >= 2");
      ref = simulate_gaussian(mcfg, c, thermal_moments(mcfg));
      cand = simulate_reduced(cfg, c);
      dev.reference = "individual-multimode";
      dev.candidate = "individual-reduced";
      break;
    }
    case Scenario::algebra_checks: break;
  }
  for (std::size_t i = 0; i < std::min(ref.rows.size(), cand.rows.size()); ++i) {
    dev.nb = std::max(dev.nb, std::abs(ref.rows[i].nb - cand.rows[i].nb));
    dev.nc = std::max(dev.nc, std::abs(ref.rows[i].nc - cand.rows[i].nc));
    dev.k3 = std::max(dev.k3, std::abs(ref.rows[i].k3 - cand.rows[i].k3));
  }
  return dev;
}

std::string format_number(double value) {
  std::string out;
  append_double(out, value);
  return out;
}

std::string format_csv(const ScenarioResult& result) {
  std::string out(csv_header);
  out += '\n';
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const auto& r = result.rows[i];
    for (double v : {r.t, r.nb, r.nc, r.k3, r.ns, r.q, r.q_prime, r.l2}) {
      append_double(out, v);
      out += ',';
    }
    append_double(out, i < result.analytic.size() ? result.analytic[i] : std::numeric_limits<double>::quiet_NaN());
    out += '\n';
  }
  return out;
}

std::string format_report(const RunReport& rep) {
  std::string out;
  const auto line = [&](std::string_view key, double v) {
    out += key;
    out += '=';
    append_double(out, v);
    out += '\n';
  };
  out += "scenario=";
  out += to_string(rep.scenario);
  out += '\n';
  if (rep.algebra) {
    const auto& a = *rep.algebra;
    for (const auto& e : a.contraction) {
      const std::string key = "contraction_error.N" + std::to_string(e.particles) + ".l" + std::to_string(e.excitation);
      line(key, e.contraction_error);
    }
    line("ladder_residual", a.ladder_residual);
    line("su2_residual", a.su2_residual);
    line("casimir_residual", a.casimir_residual);
    line("casimir_commutator", a.casimir_commutator);
    line("hamiltonian_residual", a.hamiltonian_residual);
    line("max_commutator_residual", a.max_commutator_residual());
    return out;
  }
  line("fitted_rate", rep.fitted_rate);
  line("fit_goodness", rep.fit_goodness);
  line("analytic_rate", rep.analytic_rate);
  line("relative_rate_error", rep.relative_rate_error);
  line("max_ratio_deviation", rep.max_ratio_deviation);
  line("max_photon_ratio_deviation", rep.max_photon_ratio_deviation);
  line("max_k3_ratio_deviation", rep.max_k3_ratio_deviation);
  line("transient_length", rep.transient_length);
  if (rep.conservation_residuals) {
    const auto& r = *rep.conservation_residuals;
    line("conservation_residual.Q", r.q);
    line("conservation_residual.Qprime", r.q_prime);
    line("conservation_residual.L1", r.l1);
    line("conservation_residual.total_number", r.total_number);
    if (r.dark_population) line("conservation_residual.dark_population", *r.dark_population);
  }
  out += "truncation_flagged=";
  out += rep.truncation_flagged ? "true" : "false";
  out += '\n';
  for (const auto& w : rep.warnings) {
    out += "warning=";
    out += w;
    out += '\n';
  }
  return out;
}

std::string format_deviation(const BackendDeviation& dev) {
  std::string out = "reference=" + dev.reference + "\ncandidate=" + dev.candidate + "\n";
  for (auto [key, v] : {std::pair{"max_deviation.nb", dev.nb}, std::pair{"max_deviation.nc", dev.nc},
                        std::pair{"max_deviation.k3", dev.k3}, std::pair{"max_deviation", dev.max()}}) {
    out += key;
    out += '=';
    append_double(out, v);
    out += '\n';
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::config, "cannot write " + tmp.string());
    out << contents;
    if (!out.flush()) throw Error(ErrorKind::config, "cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::config, "cannot write " + path.string());
  }
}

std::vector<std::string> assert_thresholds(const ScenarioConfig& cfg, const RunReport& rep) {
  std::vector<std::string> failures;
  if (rep.algebra) {
    if (!(rep.algebra->max_commutator_residual() <= 1e-12)) {
      failures.push_back("commutator residual " + format_number(rep.algebra->max_commutator_residual()));
    }
    return failures;
  }
  if (rep.conservation_residuals) {
    const auto& r = *rep.conservation_residuals;
    for (auto [name, v] : {std::pair{"Q", r.q}, std::pair{"Qprime", r.q_prime}}) {
      if (!(v <= cfg.conservation_tolerance)) {
        failures.push_back(std::string(name) + " drift " + format_number(v) + " > " +
                           format_number(cfg.conservation_tolerance));
      }
    }
  } else if (!(rep.relative_rate_error <= cfg.rate_tolerance)) {
    failures.push_back("relative rate error " + format_number(rep.relative_rate_error) + " > " +
                       format_number(cfg.rate_tolerance));
  }
  return failures;
}

}  // namespace coolsim
