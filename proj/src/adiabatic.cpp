#include "coolsim/adiabatic.hpp"

#include <cmath>
#include <string>

#include "coolsim/error.hpp"

namespace coolsim {

std::pair<double, double> quasi_stationary_ratios(const DerivedCouplings& c) {
  if (!(c.y > 0.0)) throw Error(ErrorKind::no_cavity_coupling, "quasi-stationary ratios need y > 0");
  const double r = c.x / c.y;
  return {r * r, -2.0 * r};
}

double analytic_rate(ModelKind kind, const DerivedCouplings& c, double kappa) {
  if (!(c.y > 0.0)) throw Error(ErrorKind::no_cavity_coupling, "analytic rate needs y > 0");
  const double r2 = (c.x * c.x) / (c.y * c.y);
  const bool common = kind == ModelKind::common_bosonized || kind == ModelKind::common_spin_exact;
  return common ? r2 * (c.z * c.z) / (c.y * c.y) * kappa : r2 * kappa;
}

CoolingPrediction predict_cooling(ModelKind kind, const DerivedCouplings& c, double kappa, double m0) {
  const auto [photons, k3] = quasi_stationary_ratios(c);
  return {kind, analytic_rate(kind, c, kappa), photons, k3, m0};
}

double analytic_phonon_curve(ModelKind kind, double m0, const DerivedCouplings& c, double kappa, double t) {
  if (!(t >= 0.0)) throw Error(ErrorKind::config, "analytic curve needs t >= 0");
  return m0 * std::exp(-analytic_rate(kind, c, kappa) * t);
}

OperatorMatrix polariton_annihilator(const SpaceDescriptor& space, const DerivedCouplings& c) {
  const auto [wb, wc] = effective_a_weights(c);
  return wb * mode_annihilator("b", space) + wc * mode_annihilator("c", space);
}

AngularMomentum angular_momentum_ops(const SpaceDescriptor& space, const DerivedCouplings& c) {
  const auto& modes = space.modes();
  if (modes.size() != 3 || modes[0].label != "S" || modes[0].kind != ModeKind::boson || modes[1].label != "b" ||
      modes[2].label != "c") {
    throw Error(ErrorKind::descriptor, "angular momentum operators need the bosonized (S, b, c) space");
  }
  const OperatorMatrix s = mode_annihilator("S", space);
  const OperatorMatrix a = polariton_annihilator(space, c);
  const OperatorMatrix sd = s.adjoint();
  const OperatorMatrix ad = a.adjoint();
  const OperatorMatrix raise_a = sd * a;   // S+ a
  const OperatorMatrix lower_a = s * ad;   // S- a+
  AngularMomentum out{
      0.5 * (raise_a + lower_a),
      cplx(0.0, -0.5) * (raise_a - lower_a),
      0.5 * (sd * s - ad * a),
      zero_operator(space),
  };
  out.casimir = out.l1 * out.l1 + out.l2 * out.l2 + out.l3 * out.l3;
  return out;
}

ExponentialFit fit_exponential_rate(std::span<const TimePoint> series, double t_lo, double t_hi) {
  double st = 0, sy = 0, stt = 0, sty = 0;
  std::size_t n = 0;
  for (const auto& p : series) {
    if (p.t < t_lo || p.t > t_hi) continue;
    if (!(p.value > 0.0)) {
      throw Error(ErrorKind::fit_domain, "nonpositive value " + std::to_string(p.value) + " at t=" +
                                             std::to_string(p.t));
    }
    const double ly = std::log(p.value);
    st += p.t;
    sy += ly;
    stt += p.t * p.t;
    sty += p.t * ly;
    ++n;
  }
  if (n < 10) throw Error(ErrorKind::fit_domain, "fewer than 10 samples in the fit window");
  const double nn = static_cast<double>(n);
  const double t_mean = st / nn;
  const double y_mean = sy / nn;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& p : series) {
    if (p.t < t_lo || p.t > t_hi) continue;
    const double dt = p.t - t_mean;
    const double dy = std::log(p.value) - y_mean;
    sxx += dt * dt;
    sxy += dt * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::fit_domain, "fit window spans a single time");
  const double slope = sxy / sxx;
  const double intercept = y_mean - slope * t_mean;
  double ss_res = 0;
  for (const auto& p : series) {
    if (p.t < t_lo || p.t > t_hi) continue;
    const double r = std::log(p.value) - (intercept + slope * p.t);
    ss_res += r * r;
  }
  ExponentialFit fit;
  fit.rate = -slope;
  fit.goodness = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.samples = n;
  return fit;
}

std::pair<ExponentialFit, double> fit_exponential_rate_adaptive(std::span<const TimePoint> series, double t_lo,
                                                                double t_hi, double min_goodness) {
  const double step = (t_hi - t_lo) / 10.0;
  double lo = t_lo;
  ExponentialFit fit = fit_exponential_rate(series, lo, t_hi);
  while (fit.goodness < min_goodness) {
    const double next = lo + step;
    std::size_t remaining = 0;
    for (const auto& p : series) remaining += (p.t >= next && p.t <= t_hi) ? 1 : 0;
    if (remaining < 10 || next >= t_hi) break;
    lo = next;
    fit = fit_exponential_rate(series, lo, t_hi);
  }
  return {fit, lo};
}

}  // namespace coolsim
