#include "coolsim/model.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "coolsim/error.hpp"

namespace coolsim {

namespace {

void require(bool ok, ErrorKind kind, const std::string& msg) {
  if (!ok) throw Error(kind, msg);
}

bool is_individual(ModelKind kind) {
  return kind == ModelKind::individual_bosonized || kind == ModelKind::individual_spin_exact;
}

// Checks the (particles, phonons..., c) layout for `kind`.
void check_layout(ModelKind kind, const SpaceDescriptor& space) {
  const auto& modes = space.modes();
  const auto mismatch = [&](const std::string& why) {
    throw Error(ErrorKind::descriptor, std::string(to_string(kind)) + " space mismatch: " + why);
  };
  if (!space.contains("c") || space.mode("c").kind != ModeKind::boson) mismatch("missing boson mode 'c'");
  switch (kind) {
    case ModelKind::common_bosonized:
      if (modes.size() != 3 || modes[0].label != "S" || modes[0].kind != ModeKind::boson ||
          modes[1].label != "b" || modes[1].kind != ModeKind::boson)
        mismatch("expected boson modes (S, b, c)");
      break;
    case ModelKind::common_spin_exact:
      if (modes.size() != 3 || modes[0].label != "S" ||
          (modes[0].kind != ModeKind::dicke && modes[0].kind != ModeKind::qubit_register) ||
          modes[1].label != "b" || modes[1].kind != ModeKind::boson)
        mismatch("expected (dicke or qubit-register S, b, c)");
      break;
    case ModelKind::individual_bosonized: {
      if (modes.size() < 3 || (modes.size() - 1) % 2 != 0) mismatch("expected (s0..s{N-1}, b0..b{N-1}, c)");
      const std::size_t n = (modes.size() - 1) / 2;
      for (std::size_t i = 0; i < n; ++i) {
        if (modes[i].label != particle_label(i) || modes[i].kind != ModeKind::boson ||
            modes[n + i].label != phonon_label(i) || modes[n + i].kind != ModeKind::boson)
          mismatch("expected (s0..s{N-1}, b0..b{N-1}, c)");
      }
      break;
    }
    case ModelKind::individual_spin_exact: {
      if (modes.size() < 3 || modes[0].label != "S" || modes[0].kind != ModeKind::qubit_register)
        mismatch("expected qubit register 'S' first");
      const std::size_t n = modes[0].particles;
      if (n > max_individual_spin_particles)
        throw Error(ErrorKind::resource_limit, "individual spin-exact model supports at most 4 particles");
      if (modes.size() != n + 2) mismatch("expected one phonon mode per particle");
      for (std::size_t i = 0; i < n; ++i) {
        if (modes[1 + i].label != phonon_label(i) || modes[1 + i].kind != ModeKind::boson)
          mismatch("expected phonon modes b0..b{N-1}");
      }
      break;
    }
  }
  if (modes.back().label != "c") mismatch("cavity mode must be last");
}

}  // namespace

void validate(const PhysicalParams& p) {
  require(p.particles >= 1, ErrorKind::config, "particle count must be >= 1");
  require(!p.omega_nu.empty(), ErrorKind::missing_drive, "no laser Rabi frequencies given");
  require(p.g >= 0 && p.eta >= 0 && p.kappa >= 0 && p.gamma >= 0 && p.m0 >= 0, ErrorKind::config,
          "rates, couplings and m0 must be nonnegative");
  for (double w : p.omega_nu) require(w >= 0, ErrorKind::config, "Rabi frequencies must be nonnegative");
}

DerivedCouplings derive_couplings(const PhysicalParams& p) {
  if (p.omega_nu.empty()) throw Error(ErrorKind::missing_drive, "no laser Rabi frequencies given");
  validate(p);
  double sum_sq = 0.0;
  for (double w : p.omega_nu) sum_sq += w * w;
  const double sqrt_n = std::sqrt(static_cast<double>(p.particles));
  DerivedCouplings c;
  c.omega = std::sqrt(sum_sq);
  c.x = 0.5 * sqrt_n * p.eta * c.omega;
  c.y = sqrt_n * p.g;
  c.z = std::hypot(c.x, c.y);
  return c;
}

DerivedCouplings couplings_from_xy(double x, double y) {
  DerivedCouplings c;
  c.x = x;
  c.y = y;
  c.z = std::hypot(x, y);
  return c;
}

std::vector<double> effective_mode_weights(const std::vector<double>& omega_nu) {
  if (omega_nu.empty()) throw Error(ErrorKind::missing_drive, "no laser Rabi frequencies given");
  double sum_sq = 0.0;
  for (double w : omega_nu) sum_sq += w * w;
  if (!(sum_sq > 0.0)) throw Error(ErrorKind::degenerate_drive, "all Rabi frequencies vanish");
  const double omega = std::sqrt(sum_sq);
  std::vector<double> w;
  w.reserve(omega_nu.size());
  for (double o : omega_nu) w.push_back(o / omega);
  return w;
}

std::pair<double, double> effective_a_weights(const DerivedCouplings& c) {
  if (!(c.z > 0.0)) throw Error(ErrorKind::degenerate_coupling, "z = 0, the polariton mode is undefined");
  return {c.x / c.z, c.y / c.z};
}

std::string phonon_label(std::size_t i) { return "b" + std::to_string(i); }
std::string particle_label(std::size_t i) { return "s" + std::to_string(i); }

SpaceDescriptor common_bosonized_space(std::size_t dim_s, std::size_t dim_b, std::size_t dim_c) {
  return SpaceDescriptor({boson_mode("S", dim_s), boson_mode("b", dim_b), boson_mode("c", dim_c)});
}

SpaceDescriptor common_dicke_space(std::size_t particles, std::size_t max_excitation, std::size_t dim_b,
                                   std::size_t dim_c) {
  return SpaceDescriptor(
      {dicke_mode("S", particles, max_excitation), boson_mode("b", dim_b), boson_mode("c", dim_c)});
}

SpaceDescriptor common_register_space(std::size_t particles, std::size_t dim_b, std::size_t dim_c) {
  return SpaceDescriptor({qubit_register_mode("S", particles), boson_mode("b", dim_b), boson_mode("c", dim_c)});
}

SpaceDescriptor individual_bosonized_space(std::size_t particles, std::size_t dim_s, std::size_t dim_b,
                                           std::size_t dim_c) {
  std::vector<Mode> modes;
  for (std::size_t i = 0; i < particles; ++i) modes.push_back(boson_mode(particle_label(i), dim_s));
  for (std::size_t i = 0; i < particles; ++i) modes.push_back(boson_mode(phonon_label(i), dim_b));
  modes.push_back(boson_mode("c", dim_c));
  return SpaceDescriptor(std::move(modes));
}

SpaceDescriptor individual_register_space(std::size_t particles, std::size_t dim_b, std::size_t dim_c) {
  if (particles > max_individual_spin_particles) {
    throw Error(ErrorKind::resource_limit, "individual spin-exact model supports at most 4 particles");
  }
  std::vector<Mode> modes{qubit_register_mode("S", particles)};
  for (std::size_t i = 0; i < particles; ++i) modes.push_back(boson_mode(phonon_label(i), dim_b));
  modes.push_back(boson_mode("c", dim_c));
  return SpaceDescriptor(std::move(modes));
}

SpaceDescriptor common_multimode_space(std::size_t dim_s, std::size_t phonon_modes, std::size_t dim_b,
                                       std::size_t dim_c) {
  std::vector<Mode> modes{boson_mode("S", dim_s)};
  for (std::size_t nu = 0; nu < phonon_modes; ++nu) modes.push_back(boson_mode(phonon_label(nu), dim_b));
  modes.push_back(boson_mode("c", dim_c));
  return SpaceDescriptor(std::move(modes));
}

std::size_t particle_count(ModelKind kind, const SpaceDescriptor& space) {
  check_layout(kind, space);
  const Mode& first = space.modes().front();
  switch (kind) {
    case ModelKind::common_bosonized: return 1;
    case ModelKind::common_spin_exact:
    case ModelKind::individual_spin_exact: return first.particles;
    case ModelKind::individual_bosonized: return (space.modes().size() - 1) / 2;
  }
  return 1;
}

OperatorMatrix collective_lowering(const SpaceDescriptor& space) {
  const Mode& m = space.mode("S");
  switch (m.kind) {
    case ModeKind::boson: return embed(annihilator(m.dim), "S", space);
    case ModeKind::dicke: return embed(dicke_lowering(m.particles, m.dim - 1), "S", space);
    case ModeKind::qubit_register: {
      OperatorMatrix sum = zero_operator(SpaceDescriptor({m}));
      for (std::size_t i = 0; i < m.particles; ++i) {
        const OperatorMatrix s = qubit_register_lowering(m.particles, i);
        sum += OperatorMatrix(sum.space(), s.matrix());
      }
      sum *= cplx(1.0 / std::sqrt(static_cast<double>(m.particles)), 0.0);
      return embed(sum, "S", space);
    }
  }
  throw Error(ErrorKind::descriptor, "unknown particle mode kind");
}

OperatorMatrix particle_lowering(ModelKind kind, const SpaceDescriptor& space, std::size_t i) {
  if (kind == ModelKind::individual_bosonized) return mode_annihilator(particle_label(i), space);
  const Mode& reg = space.mode("S");
  if (reg.kind != ModeKind::qubit_register) {
    throw Error(ErrorKind::descriptor, "individual particle operators need a qubit register");
  }
  const OperatorMatrix s = qubit_register_lowering(reg.particles, i);
  return embed(s, "S", space);
}

OperatorMatrix build_hamiltonian(ModelKind kind, const DerivedCouplings& c, const SpaceDescriptor& space,
                                 HamiltonianForm form) {
  check_layout(kind, space);
  const OperatorMatrix cav = mode_annihilator("c", space);
  OperatorMatrix raising_part = zero_operator(space);  // the S+ (...) half; H = A + A^dagger

  const auto couple = [&](const OperatorMatrix& lowering, const OperatorMatrix& phonon, double scale) {
    const OperatorMatrix raise = lowering.adjoint();
    if (form == HamiltonianForm::separate) {
      raising_part += (c.x * scale) * (raise * phonon);
      raising_part += (c.y * scale) * (raise * cav);
    } else {
      const auto [wb, wc] = effective_a_weights(c);
      const OperatorMatrix a = wb * phonon + wc * cav;
      raising_part += (c.z * scale) * (raise * a);
    }
  };

  if (!is_individual(kind)) {
    if (c.x == 0.0 && c.y == 0.0) return zero_operator(space);
    couple(collective_lowering(space), mode_annihilator("b", space), 1.0);
  } else {
    const std::size_t n = particle_count(kind, space);
    if (c.x == 0.0 && c.y == 0.0) return zero_operator(space);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      couple(particle_lowering(kind, space, i), mode_annihilator(phonon_label(i), space), scale);
    }
  }
  return raising_part + raising_part.adjoint();
}

OperatorMatrix build_multimode_common_hamiltonian(const PhysicalParams& params, const SpaceDescriptor& space) {
  validate(params);
  const auto& modes = space.modes();
  if (modes.size() != params.omega_nu.size() + 2 || modes.front().label != "S" || modes.back().label != "c") {
    throw Error(ErrorKind::descriptor, "multimode space must be (S, b0..b{K-1}, c) with one phonon mode per laser");
  }
  const double sqrt_n = std::sqrt(static_cast<double>(params.particles));
  const OperatorMatrix raise = collective_lowering(space).adjoint();
  OperatorMatrix raising_part = (sqrt_n * params.g) * (raise * mode_annihilator("c", space));
  for (std::size_t nu = 0; nu < params.omega_nu.size(); ++nu) {
    const double coupling = 0.5 * sqrt_n * params.eta * params.omega_nu[nu];
    raising_part += coupling * (raise * mode_annihilator(phonon_label(nu), space));
  }
  return raising_part + raising_part.adjoint();
}

std::vector<std::string> validate_regime(const PhysicalParams& params) {
  std::vector<std::string> warnings;
  const DerivedCouplings c = derive_couplings(params);
  const double kappa = params.kappa;
  if (c.y < kappa / 3.0 || c.y > 3.0 * kappa) {
    std::ostringstream os;
    os << "cavity coupling sqrt(N) g = " << c.y << " is not comparable to kappa = " << kappa;
    warnings.push_back(os.str());
  }
  if (std::min(c.x, c.y) < 10.0 * params.gamma) {
    std::ostringstream os;
    os << "spontaneous emission gamma = " << params.gamma << " is not small against min(x, y) = "
       << std::min(c.x, c.y);
    warnings.push_back(os.str());
  }
  return warnings;
}

const char* to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::common_bosonized: return "common-bosonized";
    case ModelKind::common_spin_exact: return "common-spin-exact";
    case ModelKind::individual_bosonized: return "individual-bosonized";
    case ModelKind::individual_spin_exact: return "individual-spin-exact";
  }
  return "unknown";
}

}  // namespace coolsim
