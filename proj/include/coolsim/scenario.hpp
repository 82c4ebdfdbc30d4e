#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coolsim/adiabatic.hpp"
#include "coolsim/gaussian.hpp"
#include "coolsim/integrate.hpp"
#include "coolsim/model.hpp"

namespace coolsim {

enum class Scenario {
  common_gaussian,
  common_lindblad,
  individual_reduced,
  individual_multimode,
  individual_lindblad,
  algebra_checks,
};

enum class ParticleRepresentation { bosonized, dicke, qubits };

inline constexpr std::size_t max_lindblad_dimension = 10000;
inline constexpr std::size_t max_individual_lindblad_particles = 3;
inline constexpr std::size_t max_multimode_particles = 2000;

struct ScenarioConfig {
  Scenario scenario = Scenario::common_gaussian;
  PhysicalParams params;
  IntegratorConfig integrator;
  std::optional<double> fit_lo;  // default t_final / 3
  std::optional<double> fit_hi;  // default t_final
  std::string output_path;

  ParticleRepresentation representation = ParticleRepresentation::bosonized;
  std::size_t dim_s = 4;
  std::size_t dim_b = 4;
  std::size_t dim_c = 4;
  bool particle_decay = false;

  double rate_tolerance = 0.10;
  double conservation_tolerance = 1e-9;
  double min_goodness = 0.999;

  std::vector<std::size_t> algebra_particles{10, 100, 1000};
  std::size_t algebra_max_excitation = 3;
  std::size_t algebra_dim = 3;

  double window_lo() const { return fit_lo.value_or(integrator.t_final / 3.0); }
  double window_hi() const { return fit_hi.value_or(integrator.t_final); }
};

/// Parses flat `key=value` text; `#` starts a comment. Throws a config error
/// on unknown keys or malformed values.
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Throws `refused_run` when the scenario exceeds its size limits.
void check_limits(const ScenarioConfig& config);

const char* to_string(Scenario s) noexcept;
ModelKind model_kind(const ScenarioConfig& config);

/// Relative drift max_t |X(t) - X(0)| / max(|X(0)|, 1) of the quantities
/// that are conserved without dissipation.
struct ConservationResiduals {
  double q = 0.0;
  double q_prime = 0.0;
  double l1 = 0.0;
  double total_number = 0.0;
  std::optional<double> dark_population;
};

struct ContractionEntry {
  std::size_t particles = 0;
  std::size_t excitation = 0;
  double commutator = 0.0;        // <l|[S-, S+]|l>
  double contraction_error = 0.0; // 1 - commutator, expected 2l/N
  double residual = 0.0;          // |commutator - (1 - 2l/N)|
};

struct AlgebraReport {
  std::vector<ContractionEntry> contraction;
  double ladder_residual = 0.0;    // [a, a+] - 1 below the top level
  double su2_residual = 0.0;       // max over [Li, Lj] - i eps_ijk Lk
  double casimir_residual = 0.0;   // L^2 - n(1 + n/2)/2
  double casimir_commutator = 0.0; // [L^2, L1]
  double hamiltonian_residual = 0.0; // H - 2z L1
  double max_commutator_residual() const;
};

struct RunReport {
  Scenario scenario = Scenario::common_gaussian;
  double fitted_rate = 0.0;
  double fit_goodness = 0.0;
  double analytic_rate = 0.0;
  double relative_rate_error = 0.0;
  double max_ratio_deviation = 0.0;
  double max_photon_ratio_deviation = 0.0;
  double max_k3_ratio_deviation = 0.0;
  std::optional<ConservationResiduals> conservation_residuals;
  double transient_length = 0.0;
  bool truncation_flagged = false;
  std::vector<std::string> warnings;
  std::optional<AlgebraReport> algebra;
};

struct ScenarioResult {
  RunReport report;
  std::vector<ObservableRecord> rows;
  std::vector<double> analytic;  // analytic phonon curve at each row
};

/// Runs the scenario in memory; nothing is written.
ScenarioResult run_scenario(const ScenarioConfig& config);

AlgebraReport algebra_checks(const ScenarioConfig& config);

struct BackendDeviation {
  std::string reference;
  std::string candidate;
  double nb = 0.0;
  double nc = 0.0;
  double k3 = 0.0;
  double max() const;
};

BackendDeviation compare_backends(const ScenarioConfig& config);

/// Locale-independent decimal with 12 significant digits.
std::string format_number(double value);

inline constexpr std::string_view csv_header = "t,nb,nc,k3,ns,Q,Qprime,L2,analytic_m";

std::string format_csv(const ScenarioResult& result);
std::string format_report(const RunReport& report);
std::string format_deviation(const BackendDeviation& deviation);

/// Writes `contents` to `path` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Threshold checks behind `--assert`; returns failure descriptions.
std::vector<std::string> assert_thresholds(const ScenarioConfig& config, const RunReport& report);

}  // namespace coolsim
