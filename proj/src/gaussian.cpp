#include "coolsim/gaussian.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "coolsim/error.hpp"

namespace coolsim {

namespace {

const cplx I(0.0, 1.0);

void require_dims(const LinearModel& model, const Eigen::MatrixXcd& m, const char* what) {
  if (m.rows() != model.modes() || m.cols() != model.modes()) {
    throw Error(ErrorKind::descriptor, std::string(what) + ": dimension mismatch");
  }
}

}  // namespace

void validate(const LinearModel& model) {
  if (model.h.rows() != model.h.cols() || model.decay.size() != model.h.rows()) {
    throw Error(ErrorKind::descriptor, "linear model: h must be k x k and decay length k");
  }
  if ((model.h - model.h.adjoint()).cwiseAbs().maxCoeff() != 0.0) {
    throw Error(ErrorKind::descriptor, "linear model: coupling matrix is not Hermitian");
  }
  if ((model.decay.array() < 0.0).any()) throw Error(ErrorKind::config, "linear model: negative decay rate");
}

std::string check_moments(const MomentMatrix& m, double hermiticity_tol, double psd_tol) {
  std::ostringstream os;
  const double scale = std::max(1.0, std::abs(m.trace()));
  const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (!(herm <= hermiticity_tol * scale)) {
    os << "moment matrix not Hermitian (" << herm << ")";
    return os.str();
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (!(m(i, i).real() >= -psd_tol * scale)) {
      os << "negative population " << m(i, i).real() << " in mode " << i;
      return os.str();
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  const double min_eig = solver.eigenvalues().minCoeff();
  if (!(min_eig >= -psd_tol * scale)) {
    os << "moment matrix not positive semidefinite (min eigenvalue " << min_eig << ")";
    return os.str();
  }
  return {};
}

MomentMatrix moment_rhs(const LinearModel& model, const MomentMatrix& m) {
  require_dims(model, m, "moment_rhs");
  const Eigen::MatrixXcd ht = model.h.transpose();
  MomentMatrix out = I * (ht * m - m * ht);
  const auto& d = model.decay;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) -= 0.5 * (d[i] + d[j]) * m(i, j);
  }
  return out;
}

Eigen::MatrixXcd anomalous_rhs(const LinearModel& model, const Eigen::MatrixXcd& a) {
  require_dims(model, a, "anomalous_rhs");
  Eigen::MatrixXcd out = -I * (model.h * a + a * model.h.transpose());
  const auto& d = model.decay;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out(i, j) -= 0.5 * (d[i] + d[j]) * a(i, j);
  }
  return out;
}

LinearModel common_linear_model(const DerivedCouplings& c, double kappa, double particle_decay) {
  LinearModel model;
  model.h = Eigen::MatrixXcd::Zero(3, 3);
  model.h(0, 1) = model.h(1, 0) = c.x;
  model.h(0, 2) = model.h(2, 0) = c.y;
  model.decay = Eigen::Vector3d(particle_decay, 0.0, kappa);
  return model;
}

LinearModel individual_linear_model(std::size_t particles, const DerivedCouplings& c, double kappa,
                                    double particle_decay) {
  const auto n = static_cast<Eigen::Index>(particles);
  const double scale = 1.0 / std::sqrt(static_cast<double>(particles));
  LinearModel model;
  model.h = Eigen::MatrixXcd::Zero(2 * n + 1, 2 * n + 1);
  model.decay = Eigen::VectorXd::Zero(2 * n + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    model.h(i, n + i) = model.h(n + i, i) = c.x * scale;
    model.h(i, 2 * n) = model.h(2 * n, i) = c.y * scale;
    model.decay[i] = particle_decay;
  }
  model.decay[2 * n] = kappa;
  return model;
}

Eigen::MatrixXcd coupling_matrix(const OperatorMatrix& hamiltonian, const std::vector<std::string>& labels) {
  const SpaceDescriptor& space = hamiltonian.space();
  std::vector<Eigen::Index> single(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::size_t k = space.index_of(labels[i]);
    std::size_t stride = 1;
    for (std::size_t j = k + 1; j < space.modes().size(); ++j) stride *= space.modes()[j].dim;
    single[i] = static_cast<Eigen::Index>(stride);
  }
  const auto n = static_cast<Eigen::Index>(labels.size());
  Eigen::MatrixXcd h(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) h(i, j) = hamiltonian.coeff(single[i], single[j]);
  }
  return h;
}

MomentEvolutionSummary evolve_moments(const LinearModel& model, const MomentMatrix& m0, const IntegratorConfig& cfg,
                                      const MomentObserver& observe, const MomentEvolutionOptions& options) {
  validate(model);
  require_dims(model, m0, "evolve_moments");
  if (const std::string bad = check_moments(m0, options.hermiticity_tol, options.psd_tol); !bad.empty()) {
    throw Error(ErrorKind::integration_failure, "initial moments invalid: " + bad);
  }
  const Eigen::Index k = model.modes();
  MomentEvolutionSummary summary;

  // State layout: rows [0, k) hold M, rows [k, 2k) the anomalous block when tracked.
  const Eigen::Index rows = options.track_anomalous ? 2 * k : k;
  Eigen::MatrixXcd y0 = Eigen::MatrixXcd::Zero(rows, k);
  y0.topRows(k) = m0;
  const auto rhs = [&](double, const Eigen::MatrixXcd& y) {
    Eigen::MatrixXcd out(y.rows(), y.cols());
    out.topRows(k) = moment_rhs(model, y.topRows(k));
    if (options.track_anomalous) out.bottomRows(k) = anomalous_rhs(model, y.bottomRows(k));
    return out;
  };
  integrate(rhs, std::move(y0), cfg, [&](double t, const Eigen::MatrixXcd& y) {
    const MomentMatrix m = y.topRows(k);
    if (const std::string bad = check_moments(m, options.hermiticity_tol, options.psd_tol); !bad.empty()) {
      std::ostringstream os;
      os << bad << " at t=" << t;
      throw Error(ErrorKind::integration_failure, os.str());
    }
    if (options.track_anomalous) {
      summary.max_anomalous = std::max(summary.max_anomalous, y.bottomRows(k).cwiseAbs().maxCoeff());
    }
    observe(t, m);
    return true;
  });
  return summary;
}

std::vector<std::pair<double, MomentMatrix>> evolve_moments(const LinearModel& model, const MomentMatrix& m0,
                                                            const IntegratorConfig& cfg,
                                                            const MomentEvolutionOptions& options) {
  std::vector<std::pair<double, MomentMatrix>> out;
  evolve_moments(model, m0, cfg, [&](double t, const MomentMatrix& m) { out.emplace_back(t, m); }, options);
  return out;
}

ReducedIndividualState::Vector ReducedIndividualState::to_vector() const {
  Vector v;
  v << p_s, p_b, n_c, r_sb.real(), r_sb.imag(), r_sc.real(), r_sc.imag(), r_bc.real(), r_bc.imag(), u_ss, u_bb,
      u_sb.real(), u_sb.imag();
  return v;
}

ReducedIndividualState ReducedIndividualState::from_vector(const Vector& v) {
  ReducedIndividualState s;
  s.p_s = v[0];
  s.p_b = v[1];
  s.n_c = v[2];
  s.r_sb = {v[3], v[4]};
  s.r_sc = {v[5], v[6]};
  s.r_bc = {v[7], v[8]};
  s.u_ss = v[9];
  s.u_bb = v[10];
  s.u_sb = {v[11], v[12]};
  return s;
}

ReducedIndividualModel reduce_individual(const PhysicalParams& params, const DerivedCouplings& c,
                                         double particle_decay) {
  if (params.particles < 2) throw Error(ErrorKind::config, "symmetric reduction needs N >= 2");
  return {params.particles, c.x, c.y, params.kappa, particle_decay};
}

ReducedIndividualState reduced_rhs(const ReducedIndividualModel& m, const ReducedIndividualState& s) {
  const double n = static_cast<double>(m.particles);
  const double alpha = m.x / std::sqrt(n);
  const double beta = m.y / std::sqrt(n);
  const double others = n - 1.0;
  const double gs = m.particle_decay;
  ReducedIndividualState d;
  d.p_s = 2.0 * alpha * s.r_sb.imag() + 2.0 * beta * s.r_sc.imag() - gs * s.p_s;
  d.p_b = -2.0 * alpha * s.r_sb.imag();
  d.n_c = -2.0 * beta * n * s.r_sc.imag() - m.kappa * s.n_c;
  d.r_sb = I * (alpha * (s.p_b - s.p_s) + beta * std::conj(s.r_bc)) - 0.5 * gs * s.r_sb;
  d.r_sc = I * (alpha * s.r_bc + beta * s.n_c - beta * (s.p_s + others * s.u_ss)) - 0.5 * (gs + m.kappa) * s.r_sc;
  d.r_bc = I * (alpha * s.r_sc - beta * (std::conj(s.r_sb) + others * std::conj(s.u_sb))) - 0.5 * m.kappa * s.r_bc;
  d.u_ss = 2.0 * alpha * s.u_sb.imag() + 2.0 * beta * s.r_sc.imag() - gs * s.u_ss;
  d.u_bb = -2.0 * alpha * s.u_sb.imag();
  d.u_sb = I * (alpha * s.u_bb + beta * std::conj(s.r_bc) - alpha * s.u_ss) - 0.5 * gs * s.u_sb;
  return d;
}

ReducedIndividualState reduced_thermal_state(std::size_t particles, double total_phonons) {
  ReducedIndividualState s;
  s.p_b = total_phonons / static_cast<double>(particles);
  return s;
}

MomentMatrix expand_reduced(const ReducedIndividualState& s, std::size_t particles) {
  const auto n = static_cast<Eigen::Index>(particles);
  MomentMatrix m = MomentMatrix::Zero(2 * n + 1, 2 * n + 1);
  const Eigen::Index c = 2 * n;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const bool same = i == j;
      m(i, j) = same ? cplx(s.p_s) : cplx(s.u_ss);
      m(n + i, n + j) = same ? cplx(s.p_b) : cplx(s.u_bb);
      m(i, n + j) = same ? s.r_sb : s.u_sb;
      m(n + j, i) = std::conj(m(i, n + j));
    }
    m(i, c) = s.r_sc;
    m(c, i) = std::conj(s.r_sc);
    m(n + i, c) = s.r_bc;
    m(c, n + i) = std::conj(s.r_bc);
  }
  m(c, c) = s.n_c;
  return m;
}

ReducedIndividualState reduce_moments(const MomentMatrix& m, std::size_t particles) {
  const auto n = static_cast<Eigen::Index>(particles);
  if (m.rows() != 2 * n + 1) throw Error(ErrorKind::descriptor, "reduce_moments: expected 2N+1 modes");
  const Eigen::Index c = 2 * n;
  ReducedIndividualState s;
  const double pairs = static_cast<double>(n * (n - 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    s.p_s += m(i, i).real() / n;
    s.p_b += m(n + i, n + i).real() / n;
    s.r_sb += m(i, n + i) / double(n);
    s.r_sc += m(i, c) / double(n);
    s.r_bc += m(n + i, c) / double(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      s.u_ss += m(i, j).real() / pairs;
      s.u_bb += m(n + i, n + j).real() / pairs;
      s.u_sb += m(i, n + j) / pairs;
    }
  }
  s.n_c = m(c, c).real();
  return s;
}

void evolve_reduced(const ReducedIndividualModel& model, const ReducedIndividualState& s0,
                    const IntegratorConfig& cfg, const ReducedObserver& observe) {
  using Vector = ReducedIndividualState::Vector;
  const auto rhs = [&](double, const Vector& v) {
    return reduced_rhs(model, ReducedIndividualState::from_vector(v)).to_vector();
  };
  integrate(rhs, s0.to_vector(), cfg, [&](double t, const Vector& v) {
    const auto s = ReducedIndividualState::from_vector(v);
    if (!(s.p_s >= -1e-10 * std::max(1.0, s.p_b)) || !(s.p_b >= -1e-10) || !(s.n_c >= -1e-10 * std::max(1.0, s.p_b))) {
      std::ostringstream os;
      os << "negative population in reduced state at t=" << t;
      throw Error(ErrorKind::integration_failure, os.str());
    }
    observe(t, s);
    return true;
  });
}

ObservableRecord common_observables(double t, const MomentMatrix& m, const DerivedCouplings& c) {
  ObservableRecord r;
  r.t = t;
  r.ns = m(0, 0).real();
  r.nb = m(1, 1).real();
  r.nc = m(2, 2).real();
  r.k3 = 2.0 * m(1, 2).real();
  r.q_prime = r.nb + r.nc;
  if (c.z > 0.0) {
    const double z2 = c.z * c.z;
    r.q = (c.x * c.x * r.nb + c.y * c.y * r.nc + c.x * c.y * r.k3) / z2;
    r.l2 = (c.x * m(0, 1) + c.y * m(0, 2)).imag() / c.z;
  }
  return r;
}

ObservableRecord individual_observables(double t, const ReducedIndividualState& s, std::size_t particles,
                                        const DerivedCouplings& c) {
  const double n = static_cast<double>(particles);
  ObservableRecord r;
  r.t = t;
  r.nb = n * s.p_b;
  r.nc = s.n_c;
  r.k3 = 2.0 * n * s.r_bc.real();
  r.ns = n * s.p_s;
  r.q = c.y * c.y * r.nb + c.x * c.x * r.nc - c.x * c.y * r.k3;
  r.q_prime = r.nb + r.nc;
  if (c.z > 0.0) r.l2 = std::sqrt(n) * (c.x * s.r_sb + c.y * s.r_sc).imag() / c.z;
  return r;
}

ConservedQuantities common_conserved(const MomentMatrix& m, const DerivedCouplings& c) {
  ConservedQuantities q;
  q.total_number = m.trace().real();
  if (c.z > 0.0) {
    q.l1 = (c.x * m(0, 1) + c.y * m(0, 2)).real() / c.z;
    const double nb = m(1, 1).real();
    const double nc = m(2, 2).real();
    const double k3 = 2.0 * m(1, 2).real();
    q.dark_population = (c.y * c.y * nb + c.x * c.x * nc - c.x * c.y * k3) / (c.z * c.z);
  }
  return q;
}

ConservedQuantities individual_conserved(const ReducedIndividualState& s, std::size_t particles,
                                         const DerivedCouplings& c) {
  const double n = static_cast<double>(particles);
  ConservedQuantities q;
  q.total_number = n * (s.p_s + s.p_b) + s.n_c;
  if (c.z > 0.0) q.l1 = std::sqrt(n) * (c.x * s.r_sb + c.y * s.r_sc).real() / c.z;
  return q;
}

}  // namespace coolsim
