#include "coolsim/operators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "coolsim/error.hpp"

namespace coolsim {

namespace {

using Triplet = Eigen::Triplet<cplx>;

SparseOp from_triplets(std::size_t dim, const std::vector<Triplet>& triplets) {
  SparseOp m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

void require_same_space(const OperatorMatrix& a, const OperatorMatrix& b, const char* what) {
  if (!(a.space() == b.space())) {
    throw Error(ErrorKind::descriptor, std::string(what) + ": operands live on different spaces");
  }
}

}  // namespace

Mode boson_mode(std::string label, std::size_t dim) {
  if (dim < 2) throw Error(ErrorKind::invalid_dimension, "boson mode '" + label + "' needs dim >= 2");
  return Mode{std::move(label), ModeKind::boson, dim, 0};
}

Mode dicke_mode(std::string label, std::size_t particles, std::size_t max_excitation) {
  if (max_excitation < 1 || max_excitation > particles) {
    throw Error(ErrorKind::invalid_excitation,
                "dicke mode needs 1 <= l_max <= N (l_max=" + std::to_string(max_excitation) +
                    ", N=" + std::to_string(particles) + ")");
  }
  return Mode{std::move(label), ModeKind::dicke, max_excitation + 1, particles};
}

Mode qubit_register_mode(std::string label, std::size_t particles) {
  if (particles < 1 || particles > max_register_particles) {
    throw Error(ErrorKind::resource_limit,
                "qubit register of " + std::to_string(particles) + " particles exceeds the exact limit of " +
                    std::to_string(max_register_particles));
  }
  return Mode{std::move(label), ModeKind::qubit_register, std::size_t{1} << particles, particles};
}

SpaceDescriptor::SpaceDescriptor(std::vector<Mode> modes) : modes_(std::move(modes)) {
  std::set<std::string> labels;
  for (const auto& m : modes_) {
    if (m.dim < 1) throw Error(ErrorKind::invalid_dimension, "mode '" + m.label + "' has zero dimension");
    if (!labels.insert(m.label).second) {
      throw Error(ErrorKind::descriptor, "duplicate mode label '" + m.label + "'");
    }
    if (m.kind == ModeKind::dicke && (m.dim < 2 || m.dim - 1 > m.particles)) {
      throw Error(ErrorKind::invalid_excitation, "dicke mode '" + m.label + "' violates l_max <= N");
    }
    dimension_ *= m.dim;
  }
}

std::size_t SpaceDescriptor::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    if (modes_[i].label == label) return i;
  }
  throw Error(ErrorKind::descriptor, "no mode labelled '" + std::string(label) + "'");
}

bool SpaceDescriptor::contains(std::string_view label) const noexcept {
  return std::any_of(modes_.begin(), modes_.end(), [&](const Mode& m) { return m.label == label; });
}

std::vector<std::size_t> SpaceDescriptor::digits(std::size_t index) const {
  std::vector<std::size_t> out(modes_.size());
  for (std::size_t k = modes_.size(); k-- > 0;) {
    out[k] = index % modes_[k].dim;
    index /= modes_[k].dim;
  }
  return out;
}

OperatorMatrix::OperatorMatrix(SpaceDescriptor space, SparseOp matrix)
    : space_(std::move(space)), matrix_(std::move(matrix)) {
  const auto dim = static_cast<Eigen::Index>(space_.dimension());
  if (matrix_.rows() != dim || matrix_.cols() != dim) {
    throw Error(ErrorKind::descriptor, "matrix shape does not match space dimension");
  }
  matrix_.makeCompressed();
}

OperatorMatrix OperatorMatrix::adjoint() const {
  return OperatorMatrix(space_, SparseOp(matrix_.adjoint()));
}

OperatorMatrix& OperatorMatrix::operator+=(const OperatorMatrix& other) {
  require_same_space(*this, other, "operator+");
  matrix_ = matrix_ + other.matrix_;
  return *this;
}

OperatorMatrix& OperatorMatrix::operator-=(const OperatorMatrix& other) {
  require_same_space(*this, other, "operator-");
  matrix_ = matrix_ - other.matrix_;
  return *this;
}

OperatorMatrix& OperatorMatrix::operator*=(cplx factor) {
  matrix_ *= factor;
  return *this;
}

OperatorMatrix operator+(OperatorMatrix lhs, const OperatorMatrix& rhs) { return lhs += rhs; }
OperatorMatrix operator-(OperatorMatrix lhs, const OperatorMatrix& rhs) { return lhs -= rhs; }

OperatorMatrix operator*(const OperatorMatrix& lhs, const OperatorMatrix& rhs) {
  require_same_space(lhs, rhs, "operator*");
  return OperatorMatrix(lhs.space(), SparseOp(lhs.matrix() * rhs.matrix()));
}

OperatorMatrix operator*(cplx factor, OperatorMatrix op) { return op *= factor; }
OperatorMatrix operator*(double factor, OperatorMatrix op) { return op *= cplx(factor, 0.0); }

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  SparseOp m = (a * b - b * a).matrix();
  m.prune([](Eigen::Index, Eigen::Index, const cplx& v) { return v != cplx(0.0); });  // exact cancellations
  return OperatorMatrix(a.space(), std::move(m));
}

double max_abs_difference(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_space(a, b, "max_abs_difference");
  const SparseOp diff = a.matrix() - b.matrix();
  double worst = 0.0;
  for (Eigen::Index r = 0; r < diff.outerSize(); ++r) {
    for (SparseOp::InnerIterator it(diff, r); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  return worst;
}

bool is_hermitian(const OperatorMatrix& op) {
  const SparseOp adj = op.matrix().adjoint();
  for (Eigen::Index r = 0; r < op.matrix().outerSize(); ++r) {
    for (SparseOp::InnerIterator it(op.matrix(), r); it; ++it) {
      if (adj.coeff(it.row(), it.col()) != it.value()) return false;
    }
  }
  return op.matrix().nonZeros() == adj.nonZeros();
}

OperatorMatrix identity(const SpaceDescriptor& space) {
  SparseOp m(static_cast<Eigen::Index>(space.dimension()), static_cast<Eigen::Index>(space.dimension()));
  m.setIdentity();
  return OperatorMatrix(space, std::move(m));
}

OperatorMatrix zero_operator(const SpaceDescriptor& space) {
  const auto dim = static_cast<Eigen::Index>(space.dimension());
  return OperatorMatrix(space, SparseOp(dim, dim));
}

OperatorMatrix annihilator(std::size_t dim) {
  if (dim < 2) throw Error(ErrorKind::invalid_dimension, "annihilator needs dim >= 2");
  std::vector<Triplet> t;
  for (std::size_t n = 1; n < dim; ++n) {
    t.emplace_back(static_cast<int>(n - 1), static_cast<int>(n), std::sqrt(static_cast<double>(n)));
  }
  return OperatorMatrix(SpaceDescriptor({boson_mode("a", dim)}), from_triplets(dim, t));
}

OperatorMatrix dicke_lowering(std::size_t particles, std::size_t max_excitation) {
  if (max_excitation > particles) {
    throw Error(ErrorKind::invalid_excitation, "dicke ladder cannot hold more excitations than particles");
  }
  const Mode mode = dicke_mode("S", particles, max_excitation);
  const double n = static_cast<double>(particles);
  std::vector<Triplet> t;
  for (std::size_t l = 1; l <= max_excitation; ++l) {
    const double ll = static_cast<double>(l);
    t.emplace_back(static_cast<int>(l - 1), static_cast<int>(l), std::sqrt(ll * (n - ll + 1.0) / n));
  }
  return OperatorMatrix(SpaceDescriptor({mode}), from_triplets(mode.dim, t));
}

OperatorMatrix qubit_register_lowering(std::size_t particles, std::size_t index) {
  const Mode mode = qubit_register_mode("S", particles);
  if (index >= particles) {
    throw Error(ErrorKind::descriptor, "particle index " + std::to_string(index) + " out of range");
  }
  const std::size_t bit = std::size_t{1} << (particles - 1 - index);
  std::vector<Triplet> t;
  for (std::size_t s = 0; s < mode.dim; ++s) {
    if (s & bit) t.emplace_back(static_cast<int>(s & ~bit), static_cast<int>(s), cplx(1.0, 0.0));
  }
  return OperatorMatrix(SpaceDescriptor({mode}), from_triplets(mode.dim, t));
}

OperatorMatrix embed(const OperatorMatrix& op, std::string_view label, const SpaceDescriptor& space) {
  const std::size_t k = space.index_of(label);
  const std::size_t d = space.modes()[k].dim;
  if (op.dimension() != d) {
    throw Error(ErrorKind::descriptor, "operator dimension " + std::to_string(op.dimension()) +
                                           " does not match mode '" + std::string(label) + "' (dim " +
                                           std::to_string(d) + ")");
  }
  std::size_t left = 1;
  std::size_t right = 1;
  for (std::size_t i = 0; i < k; ++i) left *= space.modes()[i].dim;
  for (std::size_t i = k + 1; i < space.modes().size(); ++i) right *= space.modes()[i].dim;

  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(op.nonzeros()) * left * right);
  const SparseOp& m = op.matrix();
  for (std::size_t l = 0; l < left; ++l) {
    for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
      for (SparseOp::InnerIterator it(m, r); it; ++it) {
        const std::size_t row0 = (l * d + static_cast<std::size_t>(it.row())) * right;
        const std::size_t col0 = (l * d + static_cast<std::size_t>(it.col())) * right;
        for (std::size_t q = 0; q < right; ++q) {
          t.emplace_back(static_cast<int>(row0 + q), static_cast<int>(col0 + q), it.value());
        }
      }
    }
  }
  return OperatorMatrix(space, from_triplets(space.dimension(), t));
}

OperatorMatrix mode_annihilator(std::string_view label, const SpaceDescriptor& space) {
  const Mode& m = space.mode(label);
  if (m.kind != ModeKind::boson) {
    throw Error(ErrorKind::descriptor, "mode '" + std::string(label) + "' is not a boson mode");
  }
  return embed(annihilator(m.dim), label, space);
}

double top_level_population(const Eigen::VectorXd& populations, std::string_view label,
                            const SpaceDescriptor& space) {
  const std::size_t k = space.index_of(label);
  const std::size_t d = space.modes()[k].dim;
  std::size_t right = 1;
  for (std::size_t i = k + 1; i < space.modes().size(); ++i) right *= space.modes()[i].dim;
  double total = 0.0;
  for (Eigen::Index s = 0; s < populations.size(); ++s) {
    if ((static_cast<std::size_t>(s) / right) % d == d - 1) total += populations[s];
  }
  return total;
}

std::vector<std::size_t> low_excitation_indices(const SpaceDescriptor& space, std::size_t max_quanta) {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < space.dimension(); ++s) {
    const auto occ = space.digits(s);
    std::size_t quanta = 0;
    for (std::size_t k = 0; k < occ.size(); ++k) {
      quanta += space.modes()[k].kind == ModeKind::qubit_register
                    ? static_cast<std::size_t>(std::popcount(occ[k]))
                    : occ[k];
    }
    if (quanta <= max_quanta) out.push_back(s);
  }
  return out;
}

}  // namespace coolsim
