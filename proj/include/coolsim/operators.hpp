#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace coolsim {

using cplx = std::complex<double>;
using SparseOp = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

enum class ModeKind { boson, dicke, qubit_register };

/// One tensor factor of the Hilbert space.
///
/// For `dicke` modes `particles` is N and `dim - 1` the largest excitation
/// kept; for `qubit_register` modes dim is 2^particles.
struct Mode {
  std::string label;
  ModeKind kind = ModeKind::boson;
  std::size_t dim = 0;
  std::size_t particles = 0;

  bool operator==(const Mode&) const = default;
};

Mode boson_mode(std::string label, std::size_t dim);
Mode dicke_mode(std::string label, std::size_t particles, std::size_t max_excitation);
Mode qubit_register_mode(std::string label, std::size_t particles);

/// Ordered list of modes; the first mode is the most significant factor of the
/// product basis index.
class SpaceDescriptor {
 public:
  SpaceDescriptor() = default;
  explicit SpaceDescriptor(std::vector<Mode> modes);

  const std::vector<Mode>& modes() const noexcept { return modes_; }
  std::size_t dimension() const noexcept { return dimension_; }

  /// Index of the mode carrying `label`; throws a descriptor error if absent.
  std::size_t index_of(std::string_view label) const;
  bool contains(std::string_view label) const noexcept;
  const Mode& mode(std::string_view label) const { return modes_[index_of(label)]; }

  /// Occupation of every mode for a product-basis index.
  std::vector<std::size_t> digits(std::size_t index) const;

  bool operator==(const SpaceDescriptor&) const = default;

 private:
  std::vector<Mode> modes_;
  std::size_t dimension_ = 1;
};

/// Sparse operator tagged with the space it acts on. Entries are stored
/// row-major and sorted, so iteration order is deterministic.
class OperatorMatrix {
 public:
  OperatorMatrix() = default;
  OperatorMatrix(SpaceDescriptor space, SparseOp matrix);

  const SpaceDescriptor& space() const noexcept { return space_; }
  const SparseOp& matrix() const noexcept { return matrix_; }
  std::size_t dimension() const noexcept { return space_.dimension(); }
  Eigen::Index nonzeros() const { return matrix_.nonZeros(); }

  cplx coeff(Eigen::Index row, Eigen::Index col) const { return matrix_.coeff(row, col); }
  Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(matrix_); }

  OperatorMatrix adjoint() const;

  OperatorMatrix& operator+=(const OperatorMatrix& other);
  OperatorMatrix& operator-=(const OperatorMatrix& other);
  OperatorMatrix& operator*=(cplx factor);

 private:
  SpaceDescriptor space_;
  SparseOp matrix_;
};

OperatorMatrix operator+(OperatorMatrix lhs, const OperatorMatrix& rhs);
OperatorMatrix operator-(OperatorMatrix lhs, const OperatorMatrix& rhs);
OperatorMatrix operator*(const OperatorMatrix& lhs, const OperatorMatrix& rhs);
OperatorMatrix operator*(cplx factor, OperatorMatrix op);
OperatorMatrix operator*(double factor, OperatorMatrix op);

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b);

/// Largest |A_ij - B_ij| over all entries; spaces must match.
double max_abs_difference(const OperatorMatrix& a, const OperatorMatrix& b);
bool is_hermitian(const OperatorMatrix& op);

OperatorMatrix identity(const SpaceDescriptor& space);
OperatorMatrix zero_operator(const SpaceDescriptor& space);

/// Truncated boson annihilator, <n-1|a|n> = sqrt(n).
OperatorMatrix annihilator(std::size_t dim);

/// Collective lowering operator S- = J-/sqrt(N) on the symmetric Dicke ladder
/// |0>..|l_max>, <l-1|S-|l> = sqrt(l (N - l + 1) / N).
OperatorMatrix dicke_lowering(std::size_t particles, std::size_t max_excitation);

/// Largest register size accepted by the exact qubit constructors.
inline constexpr std::size_t max_register_particles = 12;

/// sigma_i^- on an N-qubit register; qubit 0 is the most significant bit and
/// |1> is the excited state.
OperatorMatrix qubit_register_lowering(std::size_t particles, std::size_t index);

/// Lift a single-mode operator onto `space`, acting on the mode `label`.
OperatorMatrix embed(const OperatorMatrix& op, std::string_view label,
                     const SpaceDescriptor& space);

/// Annihilator of boson mode `label` embedded in `space`.
OperatorMatrix mode_annihilator(std::string_view label, const SpaceDescriptor& space);

/// Population of the highest kept level of mode `label` in the diagonal
/// basis-state weights `populations`.
double top_level_population(const Eigen::VectorXd& populations, std::string_view label,
                            const SpaceDescriptor& space);

/// Product-basis indices whose total number of quanta (over boson and dicke
/// modes) is at most `max_quanta`.
std::vector<std::size_t> low_excitation_indices(const SpaceDescriptor& space,
                                                std::size_t max_quanta);

}  // namespace coolsim
