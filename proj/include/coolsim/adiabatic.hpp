#pragma once

#include <span>
#include <utility>

#include "coolsim/model.hpp"
#include "coolsim/operators.hpp"

namespace coolsim {

/// Closed-form cooling prediction in the quasi-stationary regime.
struct CoolingPrediction {
  ModelKind kind = ModelKind::common_bosonized;
  double rate = 0.0;          // units of kappa
  double photon_ratio = 0.0;  // <c^dag c> / <b^dag b> = x^2 / y^2
  double k3_ratio = 0.0;      // <k3> / <b^dag b> = -2x / y
  double m0 = 0.0;
};

/// (x^2/y^2, -2x/y). Throws when y = 0.
std::pair<double, double> quasi_stationary_ratios(const DerivedCouplings& c);

/// Common modes cool at x^2 z^2 / y^4 kappa, individual modes at x^2/y^2 kappa.
double analytic_rate(ModelKind kind, const DerivedCouplings& c, double kappa);

CoolingPrediction predict_cooling(ModelKind kind, const DerivedCouplings& c, double kappa, double m0);

/// m0 exp(-rate t).
double analytic_phonon_curve(ModelKind kind, double m0, const DerivedCouplings& c, double kappa, double t);

/// Angular-momentum operators of the particle/polariton pair on a common
/// bosonized space (S, b, c):
///   L1 = (S+ a + S- a+)/2,  L2 = -i (S+ a - S- a+)/2,  L3 = (S+ S- - a+ a)/2,
/// and the Casimir L^2 = L1^2 + L2^2 + L3^2.
struct AngularMomentum {
  OperatorMatrix l1;
  OperatorMatrix l2;
  OperatorMatrix l3;
  OperatorMatrix casimir;
};

AngularMomentum angular_momentum_ops(const SpaceDescriptor& space, const DerivedCouplings& c);

/// Polariton annihilator a = (x b + y c)/z on a common space.
OperatorMatrix polariton_annihilator(const SpaceDescriptor& space, const DerivedCouplings& c);

struct TimePoint {
  double t = 0.0;
  double value = 0.0;
};

struct ExponentialFit {
  double rate = 0.0;
  double goodness = 0.0;  // coefficient of determination of the log-linear fit
  std::size_t samples = 0;
};

/// Least-squares slope of log(value) against t over samples with t in
/// [t_lo, t_hi], negated. Needs at least 10 samples, all positive.
ExponentialFit fit_exponential_rate(std::span<const TimePoint> series, double t_lo, double t_hi);

/// Fit with the start of the window pushed forward in tenths of its length
/// until the goodness reaches `min_goodness` or fewer than 10 samples would
/// remain. Returns the fit and the window start used.
std::pair<ExponentialFit, double> fit_exponential_rate_adaptive(std::span<const TimePoint> series, double t_lo,
                                                                double t_hi, double min_goodness = 0.999);

}  // namespace coolsim
