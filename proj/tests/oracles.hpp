// Reference implementations used only by the tests. Everything here is built
// from dense matrices and textbook formulas, sharing no code with the library.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;

inline Mat annihilator(std::size_t dim) {
  Mat a = Mat::Zero(Eigen::Index(dim), Eigen::Index(dim));
  for (std::size_t n = 1; n < dim; ++n) a(Eigen::Index(n - 1), Eigen::Index(n)) = std::sqrt(double(n));
  return a;
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// op acting on factor `slot` of a product of spaces with the given dims;
/// factor 0 is the most significant.
inline Mat lift(const Mat& op, std::size_t slot, const std::vector<std::size_t>& dims) {
  Mat out = Mat::Identity(1, 1);
  for (std::size_t k = 0; k < dims.size(); ++k) {
    out = kron(out, k == slot ? op : Mat(Mat::Identity(Eigen::Index(dims[k]), Eigen::Index(dims[k]))));
  }
  return out;
}

/// J- / sqrt(N) for spin j = N/2 on |j, -j + l>, l = 0..lmax, from
/// J-|j,m> = sqrt((j+m)(j-m+1)) |j,m-1>.
inline Mat collective_lowering(std::size_t n, std::size_t lmax) {
  const double j = 0.5 * double(n);
  Mat s = Mat::Zero(Eigen::Index(lmax + 1), Eigen::Index(lmax + 1));
  for (std::size_t l = 1; l <= lmax; ++l) {
    const double m = -j + double(l);
    s(Eigen::Index(l - 1), Eigen::Index(l)) = std::sqrt((j + m) * (j - m + 1.0) / double(n));
  }
  return s;
}

/// sigma^- = |0><1| on qubit i of an N-qubit register, qubit 0 leftmost.
inline Mat sigma_minus(std::size_t n, std::size_t i) {
  Mat sm = Mat::Zero(2, 2);
  sm(0, 1) = 1.0;
  return lift(sm, i, std::vector<std::size_t>(n, 2));
}

/// Column-stacked Lindblad generator: vec(A X B) = (B^T kron A) vec(X).
inline Mat liouvillian(const Mat& h, const std::vector<std::pair<double, Mat>>& channels) {
  const Eigen::Index d = h.rows();
  const Mat id = Mat::Identity(d, d);
  Mat l = cplx(0.0, -1.0) * (kron(id, h) - kron(h.transpose(), id));
  for (const auto& [rate, j] : channels) {
    const Mat jj = j.adjoint() * j;
    l += rate * (kron(j.conjugate(), j) - 0.5 * kron(id, jj) - 0.5 * kron(jj.transpose(), id));
  }
  return l;
}

inline Mat evolve_density(const Mat& liouv, const Mat& rho0, double t) {
  const Eigen::Index d = rho0.rows();
  const Eigen::VectorXcd v0 = rho0.reshaped();
  const Mat prop = (liouv * t).exp();
  const Eigen::VectorXcd v = prop * v0;
  return v.reshaped(d, d);
}

/// Normally ordered moments of a linear model in closed form: a(t) = U a(0)
/// with U = exp((-i h - D/2) t), so M(t) = conj(U) M0 U^T.
inline Mat evolve_moments(const Mat& h, const Eigen::VectorXd& decay, const Mat& m0, double t) {
  const Mat gen = cplx(0.0, -1.0) * h - 0.5 * Mat(decay.cast<cplx>().asDiagonal());
  const Mat u = (gen * t).exp();
  return u.conjugate() * m0 * u.transpose();
}

/// tr(rho a_i^dag a_j) for dense operators.
inline Mat moments(const Mat& rho, const std::vector<Mat>& ops) {
  const auto k = Eigen::Index(ops.size());
  Mat m(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) m(i, j) = (rho * ops[std::size_t(i)].adjoint() * ops[std::size_t(j)]).trace();
  return m;
}

inline Eigen::VectorXd thermal(double mean, std::size_t dim) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(Eigen::Index(dim));
  const double q = mean / (1.0 + mean);
  for (std::size_t n = 0; n < dim; ++n) p(Eigen::Index(n)) = std::pow(q, double(n));
  return p / p.sum();
}

template <typename F>
double central_difference(F f, double t, double h) {
  return (f(t + h) - f(t - h)) / (2.0 * h);
}

template <typename F>
double second_difference(F f, double t, double h) {
  return (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
}

}  // namespace oracle
