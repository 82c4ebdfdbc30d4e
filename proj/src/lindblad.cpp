#include "coolsim/lindblad.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "coolsim/error.hpp"

namespace coolsim {

namespace {

void require_space(const SpaceDescriptor& a, const SpaceDescriptor& b, const char* what) {
  if (!(a == b)) throw Error(ErrorKind::descriptor, std::string(what) + ": space mismatch");
}

}  // namespace

std::string check_density(const DensityMatrix& state, const DensityTolerances& tol) {
  const Eigen::MatrixXcd& rho = state.rho;
  std::ostringstream os;
  const double trace_err = std::abs(rho.trace() - cplx(1.0, 0.0));
  if (!(trace_err <= tol.trace)) {
    os << "trace deviates from 1 by " << trace_err;
    return os.str();
  }
  const double herm_err = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (!(herm_err <= tol.hermiticity)) {
    os << "hermiticity violated by " << herm_err;
    return os.str();
  }
  if (std::isinf(tol.min_eigenvalue)) return {};
  const Eigen::MatrixXcd sym = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sym, Eigen::EigenvaluesOnly);
  const double min_eig = solver.eigenvalues().minCoeff();
  if (!(min_eig >= tol.min_eigenvalue)) {
    os << "positivity violated, minimum eigenvalue " << min_eig;
    return os.str();
  }
  return {};
}

LindbladModel::LindbladModel(OperatorMatrix hamiltonian) : hamiltonian_(std::move(hamiltonian)) {}

void LindbladModel::add_channel(double rate, OperatorMatrix jump) {
  require_space(jump.space(), hamiltonian_.space(), "add_channel");
  if (!(rate >= 0.0)) throw Error(ErrorKind::config, "decay rates must be nonnegative");
  jump_adjoint_.push_back(jump.matrix().adjoint());
  number_.push_back(jump_adjoint_.back() * jump.matrix());
  channels_.push_back({rate, std::move(jump)});
}

Eigen::MatrixXcd LindbladModel::apply(const Eigen::MatrixXcd& rho) const {
  const SparseOp& h = hamiltonian_.matrix();
  const cplx minus_i(0.0, -1.0);
  Eigen::MatrixXcd out = minus_i * (h * rho);
  out.noalias() -= minus_i * (rho * h);
  for (std::size_t k = 0; k < channels_.size(); ++k) {
    const double rate = channels_[k].rate;
    if (rate == 0.0) continue;
    const SparseOp& j = channels_[k].jump.matrix();
    const Eigen::MatrixXcd j_rho = j * rho;
    out.noalias() += rate * (j_rho * jump_adjoint_[k]);
    out.noalias() -= (0.5 * rate) * (number_[k] * rho);
    out.noalias() -= (0.5 * rate) * (rho * number_[k]);
  }
  return out;
}

Eigen::MatrixXcd lindblad_rhs(const LindbladModel& model, const DensityMatrix& rho) {
  require_space(rho.space, model.space(), "lindblad_rhs");
  return model.apply(rho.rho);
}

LindbladModel make_lindblad_model(ModelKind kind, const PhysicalParams& params, const DerivedCouplings& c,
                                  const SpaceDescriptor& space, const DissipationOptions& options) {
  LindbladModel model(build_hamiltonian(kind, c, space));
  model.add_channel(params.kappa, mode_annihilator("c", space));
  if (params.gamma > 0.0) {
    const Mode& first = space.modes().front();
    if (first.kind == ModeKind::dicke) {
      throw Error(ErrorKind::unsupported_combination,
                  "spontaneous emission leaves the symmetric Dicke subspace; use a qubit register");
    }
    if (first.kind == ModeKind::qubit_register) {
      for (std::size_t i = 0; i < first.particles; ++i) {
        model.add_channel(params.gamma, embed(qubit_register_lowering(first.particles, i), first.label, space));
      }
    } else if (options.bosonized_particle_decay) {
      if (kind == ModelKind::individual_bosonized) {
        const std::size_t n = particle_count(kind, space);
        for (std::size_t i = 0; i < n; ++i) model.add_channel(params.gamma, mode_annihilator(particle_label(i), space));
      } else {
        model.add_channel(params.gamma, mode_annihilator("S", space));
      }
    }
  }
  return model;
}

cplx expectation(const DensityMatrix& rho, const OperatorMatrix& op) {
  require_space(rho.space, op.space(), "expectation");
  cplx sum(0.0, 0.0);
  const SparseOp& m = op.matrix();
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    for (SparseOp::InnerIterator it(m, r); it; ++it) sum += rho.rho(it.col(), it.row()) * it.value();
  }
  return sum;
}

Eigen::VectorXd thermal_populations(double mean, std::size_t dim) {
  if (dim < 1) throw Error(ErrorKind::invalid_dimension, "thermal state needs dim >= 1");
  if (!(mean >= 0.0)) throw Error(ErrorKind::config, "thermal mean must be nonnegative");
  Eigen::VectorXd p(static_cast<Eigen::Index>(dim));
  const double ratio = mean / (1.0 + mean);
  double w = 1.0;
  for (Eigen::Index n = 0; n < p.size(); ++n) {
    p[n] = w;
    w *= ratio;
  }
  return p / p.sum();
}

DensityMatrix product_thermal_state(const SpaceDescriptor& space,
                                    const std::vector<std::pair<std::string, double>>& thermal_modes) {
  Eigen::VectorXd diag = Eigen::VectorXd::Ones(1);
  for (const Mode& m : space.modes()) {
    Eigen::VectorXd factor = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.dim));
    factor[0] = 1.0;
    for (const auto& [label, mean] : thermal_modes) {
      if (label == m.label) {
        if (m.kind != ModeKind::boson) throw Error(ErrorKind::descriptor, "thermal state on non-boson mode");
        factor = thermal_populations(mean, m.dim);
      }
    }
    Eigen::VectorXd next(diag.size() * factor.size());
    for (Eigen::Index i = 0; i < diag.size(); ++i) next.segment(i * factor.size(), factor.size()) = diag[i] * factor;
    diag = std::move(next);
  }
  for (const auto& [label, mean] : thermal_modes) space.index_of(label);
  DensityMatrix out{space, Eigen::MatrixXcd::Zero(diag.size(), diag.size())};
  out.rho.diagonal() = diag.cast<cplx>();
  return out;
}

TruncationReport evolve_density(const LindbladModel& model, const DensityMatrix& rho0, const IntegratorConfig& cfg,
                                const DensityObserver& observe, const DensityEvolutionOptions& options) {
  require_space(rho0.space, model.space(), "evolve_density");
  DensityTolerances initial_tol = options.tolerances;
  if (const std::string bad = check_density(rho0, initial_tol); !bad.empty()) {
    throw Error(ErrorKind::integration_failure, "initial state invalid: " + bad);
  }

  TruncationReport report;
  report.threshold = options.truncation_threshold;
  for (const Mode& m : rho0.space.modes()) {
    if (m.kind == ModeKind::boson) report.max_top_population.emplace_back(m.label, 0.0);
  }

  const double drift_per_time = 1e-9;
  DensityMatrix sample{rho0.space, {}};
  const auto rhs = [&](double, const Eigen::MatrixXcd& rho) { return model.apply(rho); };
  integrate(rhs, Eigen::MatrixXcd(rho0.rho), cfg, [&](double t, const Eigen::MatrixXcd& rho) {
    sample.rho = rho;
    DensityTolerances tol = options.tolerances;
    tol.trace = std::max(tol.trace, drift_per_time * t);
    if (sample.rho.rows() > static_cast<Eigen::Index>(options.positivity_check_max_dim)) {
      tol.min_eigenvalue = -std::numeric_limits<double>::infinity();
    }
    if (const std::string bad = check_density(sample, tol); !bad.empty()) {
      std::ostringstream os;
      os << bad << " at t=" << t;
      throw Error(ErrorKind::integration_failure, os.str());
    }
    const Eigen::VectorXd pops = sample.rho.diagonal().real();
    for (auto& [label, worst] : report.max_top_population) {
      worst = std::max(worst, top_level_population(pops, label, sample.space));
      if (worst > report.threshold) report.flagged = true;
    }
    observe(t, sample);
    return true;
  });
  return report;
}

std::vector<std::pair<double, DensityMatrix>> evolve_density(const LindbladModel& model, const DensityMatrix& rho0,
                                                             const IntegratorConfig& cfg,
                                                             const DensityEvolutionOptions& options) {
  std::vector<std::pair<double, DensityMatrix>> out;
  evolve_density(
      model, rho0, cfg, [&](double t, const DensityMatrix& rho) { out.emplace_back(t, rho); }, options);
  return out;
}

}  // namespace coolsim
