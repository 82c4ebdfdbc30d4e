#include <doctest.h>

#include <cmath>
#include <limits>

#include "coolsim/gaussian.hpp"
#include "coolsim/lindblad.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace coolsim;
using test::kind_of;
using test::max_diff;

namespace {

Eigen::MatrixXcd projector(Eigen::Index dim, Eigen::Index k) {
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(dim, dim);
  p(k, k) = 1.0;
  return p;
}

IntegratorConfig run_for(double t_final, std::size_t samples) {
  IntegratorConfig cfg;
  cfg.t_final = t_final;
  cfg.samples = samples;
  return cfg;
}

PhysicalParams closed_params() {
  PhysicalParams p;
  p.kappa = 0.0;
  p.omega_nu = {1.0};
  return p;
}

}  // namespace

TEST_SUITE("lindblad") {

TEST_CASE("pure cavity decay generator") {
  const SpaceDescriptor space({boson_mode("c", 2)});
  LindbladModel model(zero_operator(space));
  model.add_channel(1.0, mode_annihilator("c", space));
  const auto d = lindblad_rhs(model, {space, projector(2, 1)});
  CHECK(max_diff(d, projector(2, 0) - projector(2, 1)) < 1e-15);
}

TEST_CASE("generator is traceless and Hermitian, and matches the dense Liouvillian") {
  const auto space = common_bosonized_space(2, 3, 2);
  const auto c = couplings_from_xy(0.3, 0.9);
  PhysicalParams p;
  p.kappa = 0.7;
  p.omega_nu = {1.0};
  const auto model = make_lindblad_model(ModelKind::common_bosonized, p, c, space);

  Eigen::MatrixXcd x = Eigen::MatrixXcd::Random(12, 12);
  Eigen::MatrixXcd rho = x * x.adjoint();
  rho /= rho.trace();
  const auto d = lindblad_rhs(model, {space, rho});
  CHECK(std::abs(d.trace()) < 1e-12);
  CHECK(max_diff(d, d.adjoint()) < 1e-12);

  const auto l = oracle::liouvillian(model.hamiltonian().dense(), {{0.7, mode_annihilator("c", space).dense()}});
  const Eigen::VectorXcd expected = l * rho.reshaped();
  CHECK(max_diff(d.reshaped(), expected) < 1e-12);
}

TEST_CASE("beamsplitter second derivative") {
  // H = x (S^dag b + S b^dag), rho = |0>_S |1>_b
  const SpaceDescriptor space({boson_mode("S", 2), boson_mode("b", 2)});
  const double x = 0.37;
  const auto s = mode_annihilator("S", space), b = mode_annihilator("b", space);
  const auto h = x * (s.adjoint() * b + s * b.adjoint());
  LindbladModel model(h);
  const auto nb = b.adjoint() * b;
  const DensityMatrix rho{space, projector(4, 1)};
  const auto d1 = lindblad_rhs(model, rho);
  const DensityMatrix d1_state{space, d1};
  const auto d2 = lindblad_rhs(model, d1_state);
  CHECK(std::abs(expectation(d1_state, nb)) < 1e-15);
  CHECK(std::abs(expectation({space, d2}, nb) - cplx(-2.0 * x * x)) < 1e-14);
}

TEST_CASE("cavity decay from one photon") {
  const SpaceDescriptor space({boson_mode("c", 3)});
  LindbladModel model(zero_operator(space));
  const auto c = mode_annihilator("c", space);
  model.add_channel(1.0, c);
  const auto traj = evolve_density(model, {space, projector(3, 1)}, run_for(1.0, 10));
  CHECK(std::abs(expectation(traj.back().second, c.adjoint() * c).real() - std::exp(-1.0)) < 1e-8);
}

TEST_CASE("closed evolution stays pure") {
  const auto space = common_bosonized_space(3, 3, 3);
  const auto c = couplings_from_xy(0.25, 1.0);
  const auto model = make_lindblad_model(ModelKind::common_bosonized, closed_params(), c, space);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(27);
  psi(2 * 3) = 1.0;  // two phonons
  const auto traj = evolve_density(model, {space, psi * psi.adjoint()}, run_for(10.0, 20));
  double worst = 0.0;
  for (const auto& [t, rho] : traj) worst = std::max(worst, std::abs((rho.rho * rho.rho).trace().real() - 1.0));
  CHECK(worst < 1e-9);
}

TEST_CASE("evolution matches the matrix exponential") {
  const auto space = common_bosonized_space(2, 3, 3);
  const auto c = couplings_from_xy(0.25, 1.0);
  PhysicalParams p;
  p.omega_nu = {1.0};
  const auto model = make_lindblad_model(ModelKind::common_bosonized, p, c, space);
  const auto rho0 = product_thermal_state(space, {{"b", 0.4}});
  const auto traj = evolve_density(model, rho0, run_for(5.0, 5));
  const auto l = oracle::liouvillian(model.hamiltonian().dense(), {{1.0, mode_annihilator("c", space).dense()}});
  for (const auto& [t, rho] : traj) CHECK(max_diff(rho.rho, oracle::evolve_density(l, rho0.rho, t)) < 1e-9);
}

TEST_CASE("closed system conserves the excitation number") {
  const auto space = common_bosonized_space(3, 3, 3);
  const auto c = couplings_from_xy(0.25, 1.0);
  const auto model = make_lindblad_model(ModelKind::common_bosonized, closed_params(), c, space);
  OperatorMatrix n = zero_operator(space);
  for (const char* m : {"S", "b", "c"}) n += mode_annihilator(m, space).adjoint() * mode_annihilator(m, space);
  const auto traj = evolve_density(model, product_thermal_state(space, {{"b", 0.3}}), run_for(20.0, 40));
  const double n0 = expectation(traj.front().second, n).real();
  for (const auto& [t, rho] : traj) CHECK(std::abs(expectation(rho, n).real() - n0) < 1e-9);
}

TEST_CASE("expectation values") {
  const SpaceDescriptor bc({boson_mode("b", 2), boson_mode("c", 2)});
  const auto b = mode_annihilator("b", bc), c = mode_annihilator("c", bc);
  const auto k3 = b.adjoint() * c + b * c.adjoint();
  const DensityMatrix product{bc, projector(4, 2)};  // |1>_b |0>_c
  CHECK(expectation(product, identity(bc)) == cplx(1.0));
  CHECK(expectation(product, k3) == cplx(0.0));
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(4);
  psi(2) = psi(1) = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(expectation({bc, psi * psi.adjoint()}, k3) - cplx(1.0)) < 1e-15);
}

TEST_CASE("thermal state") {
  const auto p = thermal_populations(0.5, 6);
  CHECK(max_diff(p.cast<cplx>(), oracle::thermal(0.5, 6).cast<cplx>()) < 1e-15);
  const auto space = common_bosonized_space(2, 4, 2);
  const auto rho = product_thermal_state(space, {{"b", 0.5}});
  CHECK(check_density(rho).empty());
  CHECK(kind_of([&] { product_thermal_state(common_register_space(2, 2, 2), {{"S", 0.5}}); }) == ErrorKind::descriptor);
}

TEST_CASE("density invariants are checked") {
  const auto space = common_bosonized_space(2, 2, 2);
  DensityMatrix bad{space, 1.5 * projector(8, 0)};
  CHECK(check_density(bad).find("trace") != std::string::npos);
  Eigen::MatrixXcd neg = projector(8, 0) * 1.1 - projector(8, 1) * 0.1;
  CHECK(check_density({space, neg}).find("eigenvalue") != std::string::npos);
  const auto model = make_lindblad_model(ModelKind::common_bosonized, closed_params(), couplings_from_xy(1, 1), space);
  CHECK(kind_of([&] { evolve_density(model, bad, run_for(1.0, 2)); }) == ErrorKind::integration_failure);
}

TEST_CASE("truncation flag") {
  const auto space = common_bosonized_space(4, 4, 4);
  const auto c = couplings_from_xy(0.25, 1.0);
  PhysicalParams p;
  p.omega_nu = {1.0};
  const auto model = make_lindblad_model(ModelKind::common_bosonized, p, c, space);
  const auto ignore = [](double, const DensityMatrix&) {};
  const auto report = evolve_density(model, product_thermal_state(space, {{"b", 0.5}}), run_for(1.0, 2), ignore);
  CHECK(report.flagged);
  const auto small = evolve_density(model, product_thermal_state(space, {{"b", 0.001}}), run_for(1.0, 2), ignore);
  CHECK_FALSE(small.flagged);
}

TEST_CASE("spontaneous emission channels") {
  const auto c = couplings_from_xy(0.5, 1.0);
  PhysicalParams p;
  p.particles = 2;
  p.gamma = 0.1;
  p.omega_nu = {1.0};
  CHECK(make_lindblad_model(ModelKind::common_spin_exact, p, c, common_register_space(2, 2, 2)).channels().size() == 3);
  CHECK(kind_of([&] { make_lindblad_model(ModelKind::common_spin_exact, p, c, common_dicke_space(2, 2, 2, 2)); }) ==
        ErrorKind::unsupported_combination);
  CHECK(make_lindblad_model(ModelKind::common_bosonized, p, c, common_bosonized_space(2, 2, 2)).channels().size() == 1);
  DissipationOptions on;
  on.bosonized_particle_decay = true;
  CHECK(make_lindblad_model(ModelKind::common_bosonized, p, c, common_bosonized_space(2, 2, 2), on).channels().size() == 2);
}

TEST_CASE("fixed-step integration converges at fourth order") {
  const auto space = common_bosonized_space(3, 3, 3);
  const auto c = couplings_from_xy(0.25, 1.0);
  PhysicalParams p;
  p.omega_nu = {1.0};
  const auto model = make_lindblad_model(ModelKind::common_bosonized, p, c, space);
  const auto rho0 = product_thermal_state(space, {{"b", 0.3}});
  auto cfg = run_for(4.0, 4);
  cfg.tolerance = 1e-12;
  cfg.abs_tolerance = 1e-14;
  const auto reference = evolve_density(model, rho0, cfg).back().second.rho;
  cfg.method = IntegratorMethod::rk4;
  // coarse steps dip slightly below positivity; only the error ratio matters here
  DensityEvolutionOptions loose;
  loose.tolerances.min_eigenvalue = -std::numeric_limits<double>::infinity();
  cfg.dt = 0.2;
  const double coarse = max_diff(evolve_density(model, rho0, cfg, loose).back().second.rho, reference);
  cfg.dt = 0.1;
  const double fine = max_diff(evolve_density(model, rho0, cfg, loose).back().second.rho, reference);
  CHECK(coarse / fine >= 8.0);
}

TEST_CASE("individual spin model, two particles: phonon rate identity") {
  // d<sum b_i^dag b_i>/dt = i (x/sqrt N) <sum sigma_i^+ b_i - sigma_i^- b_i^dag>
  const std::size_t n = 2;
  const auto c = couplings_from_xy(0.5, 1.0);
  const auto space = individual_register_space(n, 3, 3);
  PhysicalParams p;
  p.particles = n;
  p.omega_nu = {1.0};
  const auto model = make_lindblad_model(ModelKind::individual_spin_exact, p, c, space);
  OperatorMatrix phonons = zero_operator(space), flow = zero_operator(space);
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = particle_lowering(ModelKind::individual_spin_exact, space, i);
    const auto b = mode_annihilator(phonon_label(i), space);
    phonons += b.adjoint() * b;
    flow += s.adjoint() * b - s * b.adjoint();
  }
  const cplx factor{0.0, c.x / std::sqrt(double(n))};
  const auto rho0 = product_thermal_state(space, {{"b0", 0.4}, {"b1", 0.4}});

  IntegratorConfig cfg = run_for(6.0, 600);
  std::vector<double> pops, flows;
  double worst = 0.0;
  evolve_density(model, rho0, cfg, [&](double, const DensityMatrix& rho) {
    pops.push_back(expectation(rho, phonons).real());
    flows.push_back((factor * expectation(rho, flow)).real());
    const double exact = expectation({space, lindblad_rhs(model, rho)}, phonons).real();
    worst = std::max(worst, std::abs(exact - flows.back()));
  });
  CHECK(worst < 1e-12);

  // and against finite differences of the sampled trajectory
  const double h = cfg.sample_interval();
  double fd_worst = 0.0;
  for (std::size_t k = 1; k + 1 < pops.size(); ++k) {
    fd_worst = std::max(fd_worst, std::abs((pops[k + 1] - pops[k - 1]) / (2.0 * h) - flows[k]));
  }
  CHECK(fd_worst < 1e-4);
}

}
