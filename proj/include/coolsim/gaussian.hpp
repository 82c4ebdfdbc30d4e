#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "coolsim/integrate.hpp"
#include "coolsim/model.hpp"
#include "coolsim/operators.hpp"

namespace coolsim {

/// Number-conserving quadratic model H = sum_ij h_ij a_i^dag a_j with
/// independent decay D[sqrt(decay_i) a_i] on every mode.
struct LinearModel {
  Eigen::MatrixXcd h;
  Eigen::VectorXd decay;

  Eigen::Index modes() const { return h.rows(); }
};

/// Normally ordered second moments, M_ij = <a_i^dag a_j>.
using MomentMatrix = Eigen::MatrixXcd;

void validate(const LinearModel& model);

/// First violated MomentMatrix invariant, or an empty string. Tolerances are
/// scaled by max(1, trace M).
std::string check_moments(const MomentMatrix& m, double hermiticity_tol = 1e-12, double psd_tol = 1e-10);

/// dM/dt = i (h^T M - M h^T) - (D M + M D) / 2.
MomentMatrix moment_rhs(const LinearModel& model, const MomentMatrix& m);

/// d<a_i a_j>/dt = -i (h A + A h^T) - (D A + A D) / 2.
Eigen::MatrixXcd anomalous_rhs(const LinearModel& model, const Eigen::MatrixXcd& anomalous);

/// Modes (S, b, c). `particle_decay` is the optional S-mode channel.
LinearModel common_linear_model(const DerivedCouplings& c, double kappa, double particle_decay = 0.0);

/// Modes (s_0..s_{N-1}, b_0..b_{N-1}, c), per-particle couplings x/sqrt(N)
/// and y/sqrt(N).
LinearModel individual_linear_model(std::size_t particles, const DerivedCouplings& c, double kappa,
                                    double particle_decay = 0.0);

/// Single-particle coupling matrix of an OperatorMatrix Hamiltonian that is
/// quadratic and number conserving in the given boson modes:
/// h_ij = <1_i| H |1_j> on single-excitation states.
Eigen::MatrixXcd coupling_matrix(const OperatorMatrix& hamiltonian, const std::vector<std::string>& labels);

struct MomentEvolutionOptions {
  double hermiticity_tol = 1e-12;
  double psd_tol = 1e-10;
  /// Evolve <a_i a_j> from zero alongside M and report its largest magnitude.
  bool track_anomalous = false;
};

struct MomentEvolutionSummary {
  double max_anomalous = 0.0;
};

using MomentObserver = std::function<void(double, const MomentMatrix&)>;

MomentEvolutionSummary evolve_moments(const LinearModel& model, const MomentMatrix& m0, const IntegratorConfig& cfg,
                                      const MomentObserver& observe, const MomentEvolutionOptions& options = {});

std::vector<std::pair<double, MomentMatrix>> evolve_moments(const LinearModel& model, const MomentMatrix& m0,
                                                            const IntegratorConfig& cfg,
                                                            const MomentEvolutionOptions& options = {});

/// Permutation-symmetric moments of the individual-mode model. The
/// single-particle entries refer to any particle i; the u_* entries couple
/// two different particles i != j.
struct ReducedIndividualState {
  double p_s = 0.0;  // <s_i^dag s_i>
  double p_b = 0.0;  // <b_i^dag b_i>
  double n_c = 0.0;  // <c^dag c>
  cplx r_sb{};       // <s_i^dag b_i>
  cplx r_sc{};       // <s_i^dag c>
  cplx r_bc{};       // <b_i^dag c>
  double u_ss = 0.0; // <s_i^dag s_j>
  double u_bb = 0.0; // <b_i^dag b_j>
  cplx u_sb{};       // <s_i^dag b_j>

  using Vector = Eigen::Matrix<double, 13, 1>;
  Vector to_vector() const;
  static ReducedIndividualState from_vector(const Vector& v);
};

struct ReducedIndividualModel {
  std::size_t particles = 2;
  double x = 0.0;
  double y = 0.0;
  double kappa = 0.0;
  double particle_decay = 0.0;
};

ReducedIndividualModel reduce_individual(const PhysicalParams& params, const DerivedCouplings& c,
                                         double particle_decay = 0.0);

ReducedIndividualState reduced_rhs(const ReducedIndividualModel& model, const ReducedIndividualState& state);

/// Uncorrelated thermal start: every particle phonon mode holds total/N.
ReducedIndividualState reduced_thermal_state(std::size_t particles, double total_phonons);

/// Full (2N+1)-mode moment matrix of a symmetric state, and back (averaging).
MomentMatrix expand_reduced(const ReducedIndividualState& state, std::size_t particles);
ReducedIndividualState reduce_moments(const MomentMatrix& m, std::size_t particles);

using ReducedObserver = std::function<void(double, const ReducedIndividualState&)>;

void evolve_reduced(const ReducedIndividualModel& model, const ReducedIndividualState& s0,
                    const IntegratorConfig& cfg, const ReducedObserver& observe);

/// One time sample of the headline expectation values.
struct ObservableRecord {
  double t = 0.0;
  double nb = 0.0;      // total phonon number
  double nc = 0.0;      // cavity photon number
  double k3 = 0.0;      // <b^dag c + b c^dag>
  double ns = 0.0;      // particle excitations
  double q = 0.0;
  double q_prime = 0.0; // nb + nc
  double l2 = 0.0;
};

/// Common model, mode order (S, b, c).
ObservableRecord common_observables(double t, const MomentMatrix& m, const DerivedCouplings& c);

/// Individual model; Q and Q' follow the per-particle definitions,
/// Q = y^2 nb + x^2 nc - x y k3 and Q' = nb + nc.
ObservableRecord individual_observables(double t, const ReducedIndividualState& s, std::size_t particles,
                                        const DerivedCouplings& c);

/// Quantities conserved exactly when kappa = gamma = 0.
struct ConservedQuantities {
  double l1 = 0.0;            // <H> / 2z
  double total_number = 0.0;  // particle excitations + phonons + photons
  std::optional<double> dark_population;  // common model only: <d^dag d>, d = (y b - x c)/z
};

ConservedQuantities common_conserved(const MomentMatrix& m, const DerivedCouplings& c);
ConservedQuantities individual_conserved(const ReducedIndividualState& s, std::size_t particles,
                                         const DerivedCouplings& c);

}  // namespace coolsim
