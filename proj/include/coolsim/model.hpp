#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "coolsim/operators.hpp"

namespace coolsim {

/// Raw experiment parameters. All rates are in units of the cavity decay
/// rate, so `kappa` is normally 1.
struct PhysicalParams {
  std::size_t particles = 1;
  double g = 0.0;
  double eta = 1.0;
  std::vector<double> omega_nu;
  double kappa = 1.0;
  double gamma = 0.0;
  double m0 = 0.0;
};

/// Collective couplings seen by the ensemble.
struct DerivedCouplings {
  double omega = 0.0;  // sqrt(sum omega_nu^2)
  double x = 0.0;      // laser side, sqrt(N) eta omega / 2
  double y = 0.0;      // cavity side, sqrt(N) g
  double z = 0.0;      // sqrt(x^2 + y^2)
};

enum class ModelKind { common_bosonized, common_spin_exact, individual_bosonized, individual_spin_exact };

/// Algebraic form used to assemble a Hamiltonian. `separate` couples the
/// particles to b and c independently; `polariton` couples them to the
/// normalized mode a = (x b + y c) / z.
enum class HamiltonianForm { separate, polariton };

inline constexpr std::size_t max_individual_spin_particles = 4;

void validate(const PhysicalParams& params);

DerivedCouplings derive_couplings(const PhysicalParams& params);

/// Couplings from (x, y) directly.
DerivedCouplings couplings_from_xy(double x, double y);

/// w_nu = omega_nu / omega, so that b = sum w_nu b_nu is normalized.
std::vector<double> effective_mode_weights(const std::vector<double>& omega_nu);

/// (x/z, y/z): the weights of b and c in the polariton mode a.
std::pair<double, double> effective_a_weights(const DerivedCouplings& c);

// Space factories. Mode order is always (particles, phonons..., cavity).
SpaceDescriptor common_bosonized_space(std::size_t dim_s, std::size_t dim_b, std::size_t dim_c);
SpaceDescriptor common_dicke_space(std::size_t particles, std::size_t max_excitation, std::size_t dim_b,
                                   std::size_t dim_c);
SpaceDescriptor common_register_space(std::size_t particles, std::size_t dim_b, std::size_t dim_c);
SpaceDescriptor individual_bosonized_space(std::size_t particles, std::size_t dim_s, std::size_t dim_b,
                                           std::size_t dim_c);
SpaceDescriptor individual_register_space(std::size_t particles, std::size_t dim_b, std::size_t dim_c);
/// Common model with one phonon mode per laser frequency ("b0", "b1", ...).
SpaceDescriptor common_multimode_space(std::size_t dim_s, std::size_t phonon_modes, std::size_t dim_b,
                                       std::size_t dim_c);

std::string phonon_label(std::size_t i);
std::string particle_label(std::size_t i);

/// Number of particles a space of the given kind describes.
std::size_t particle_count(ModelKind kind, const SpaceDescriptor& space);

/// Collective lowering operator S- on the particle factor of a common-model
/// space (boson mode, Dicke ladder or qubit register).
OperatorMatrix collective_lowering(const SpaceDescriptor& space);

/// sigma_i^- (register) or s_i (bosonized) embedded in an individual-model space.
OperatorMatrix particle_lowering(ModelKind kind, const SpaceDescriptor& space, std::size_t i);

OperatorMatrix build_hamiltonian(ModelKind kind, const DerivedCouplings& c, const SpaceDescriptor& space,
                                 HamiltonianForm form = HamiltonianForm::separate);

/// Common-mode Hamiltonian before the phonon modes are combined: every laser
/// frequency drives its own phonon mode "b<nu>" with coupling
/// sqrt(N) eta omega_nu / 2.
OperatorMatrix build_multimode_common_hamiltonian(const PhysicalParams& params, const SpaceDescriptor& space);

/// Advisory checks of the strong collective coupling regime.
std::vector<std::string> validate_regime(const PhysicalParams& params);

const char* to_string(ModelKind kind) noexcept;

}  // namespace coolsim
