#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "coolsim/integrate.hpp"
#include "coolsim/model.hpp"
#include "coolsim/operators.hpp"

namespace coolsim {

/// Dense density matrix on a truncated product space.
struct DensityMatrix {
  SpaceDescriptor space;
  Eigen::MatrixXcd rho;
};

/// Tolerances of the DensityMatrix invariants.
struct DensityTolerances {
  double trace = 1e-10;
  double hermiticity = 1e-12;
  double min_eigenvalue = -1e-8;
};

/// Describes the first violated invariant, or an empty string.
std::string check_density(const DensityMatrix& state, const DensityTolerances& tol = {});

struct DecayChannel {
  double rate = 0.0;
  OperatorMatrix jump;
};

/// H plus dissipative channels rate * D[J]. J^dagger J is cached per channel.
class LindbladModel {
 public:
  explicit LindbladModel(OperatorMatrix hamiltonian);

  void add_channel(double rate, OperatorMatrix jump);

  const OperatorMatrix& hamiltonian() const noexcept { return hamiltonian_; }
  const std::vector<DecayChannel>& channels() const noexcept { return channels_; }
  const SpaceDescriptor& space() const noexcept { return hamiltonian_.space(); }

  /// -i[H, rho] + sum rate (J rho J^dag - {J^dag J, rho}/2) on a raw matrix.
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const;

 private:
  OperatorMatrix hamiltonian_;
  std::vector<DecayChannel> channels_;
  std::vector<SparseOp> jump_adjoint_;
  std::vector<SparseOp> number_;
};

Eigen::MatrixXcd lindblad_rhs(const LindbladModel& model, const DensityMatrix& rho);

/// Options for assembling a dissipative model from physical parameters.
struct DissipationOptions {
  /// Bosonized particle modes get a decay channel of rate gamma. Off by
  /// default; exists for sensitivity studies only.
  bool bosonized_particle_decay = false;
};

/// Hamiltonian of `kind` plus cavity decay (kappa, c) and, where the particles
/// are represented exactly, spontaneous emission (gamma, sigma_i). A Dicke
/// ladder with gamma > 0 is rejected as an unsupported combination.
LindbladModel make_lindblad_model(ModelKind kind, const PhysicalParams& params, const DerivedCouplings& c,
                                  const SpaceDescriptor& space, const DissipationOptions& options = {});

/// tr(rho op).
cplx expectation(const DensityMatrix& rho, const OperatorMatrix& op);

/// Truncated thermal state with mean occupation `mean` (before truncation),
/// renormalized on the kept levels.
Eigen::VectorXd thermal_populations(double mean, std::size_t dim);

/// Vacuum in every mode except the listed boson modes, which are thermal with
/// the given means.
DensityMatrix product_thermal_state(const SpaceDescriptor& space,
                                    const std::vector<std::pair<std::string, double>>& thermal_modes);

struct TruncationReport {
  double threshold = 1e-6;
  /// Largest top-level population seen per boson mode, in mode order.
  std::vector<std::pair<std::string, double>> max_top_population;
  bool flagged = false;
};

struct DensityEvolutionOptions {
  DensityTolerances tolerances;
  double truncation_threshold = 1e-6;
  /// Positivity is checked by diagonalization, skipped above this dimension.
  std::size_t positivity_check_max_dim = 4096;
};

using DensityObserver = std::function<void(double, const DensityMatrix&)>;

/// Integrates the master equation, checking the state invariants at every
/// sample. A violation throws an integration failure naming the invariant and
/// time.
TruncationReport evolve_density(const LindbladModel& model, const DensityMatrix& rho0,
                                const IntegratorConfig& cfg, const DensityObserver& observe,
                                const DensityEvolutionOptions& options = {});

std::vector<std::pair<double, DensityMatrix>> evolve_density(const LindbladModel& model,
                                                             const DensityMatrix& rho0,
                                                             const IntegratorConfig& cfg,
                                                             const DensityEvolutionOptions& options = {});

}  // namespace coolsim
