#ifndef DFSLAB_OPERATOR_SPACE_HPP
#define DFSLAB_OPERATOR_SPACE_HPP

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "dfslab/random.hpp"
#include "dfslab/tolerances.hpp"

namespace dfslab {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Dense square complex matrix on a finite Hilbert space.  Construction
/// rejects empty, non-square and non-finite input; everything else is a
/// plain value type.
class Operator {
 public:
  explicit Operator(Matrix m);

  static Operator identity(int dim);
  static Operator zero(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  cplx operator()(int row, int col) const { return m_(row, col); }

  Operator adjoint() const;
  cplx trace() const { return m_.trace(); }
  /// Frobenius norm.
  double norm() const { return m_.norm(); }
  /// ‖A − A†‖_F ≤ tol · max(1, ‖A‖_F)
  bool is_hermitian(double tol = kHermitianTol) const;

  Operator& operator+=(const Operator& o);
  Operator& operator-=(const Operator& o);
  Operator& operator*=(cplx s);

  friend Operator operator+(Operator a, const Operator& b) { return a += b; }
  friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
  friend Operator operator*(const Operator& a, const Operator& b);
  friend Operator operator*(cplx s, Operator a) { return a *= s; }
  friend Operator operator*(Operator a, cplx s) { return a *= s; }
  friend Operator operator*(double s, Operator a) { return a *= s; }

 private:
  Matrix m_;
};

/// Hermitian, unit-trace, positive-semidefinite operator.
class DensityMatrix {
 public:
  /// Validates hermiticity, trace and positivity (min eigenvalue ≥ −tol).
  explicit DensityMatrix(Operator op, double tol = kPositivityTol);

  /// Skips the positivity check (hermiticity and trace are still enforced).
  /// Used for outputs of linear maps that are not guaranteed to be
  /// completely positive, e.g. the ε-truncated perturbed generator.
  static DensityMatrix unchecked_positivity(Operator op);

  static DensityMatrix pure(const Vector& psi);
  static DensityMatrix maximally_mixed(int dim);

  int dim() const { return op_.dim(); }
  const Operator& op() const { return op_; }
  const Matrix& matrix() const { return op_.matrix(); }
  double purity() const;
  double min_eigenvalue() const;

 private:
  struct NoCheck {};
  DensityMatrix(Operator op, NoCheck) : op_(std::move(op)) {}
  Operator op_;
};

/// Fixed operator basis {K_0 = I, K_1, …, K_M} with Tr[K_α K_β†] = δ_αβ
/// for α, β ≥ 1 and every K_α (α ≥ 1) orthogonal to the identity.
/// Sub-algebra bases (M < dim² − 1) are accepted.
class OperatorBasis {
 public:
  explicit OperatorBasis(std::vector<Operator> elements, double tol = 1e-10);

  int dim() const { return elements_.front().dim(); }
  /// Number of elements including the identity (M + 1).
  int size() const { return static_cast<int>(elements_.size()); }
  int m() const { return size() - 1; }
  const Operator& operator[](int alpha) const { return elements_[static_cast<std::size_t>(alpha)]; }
  const std::vector<Operator>& elements() const { return elements_; }
  /// Tr[K_α K_α†]: dim for α = 0, 1 otherwise.
  double norm_squared(int alpha) const { return alpha == 0 ? static_cast<double>(dim()) : 1.0; }
  /// True when M = dim² − 1, i.e. the basis spans all operators.
  bool is_complete() const { return size() == dim() * dim(); }

 private:
  std::vector<Operator> elements_;
};

/// Identity plus the n² − 1 generalized Gell-Mann matrices scaled to unit
/// Hilbert-Schmidt norm: symmetric off-diagonals, antisymmetric
/// off-diagonals, then the n − 1 diagonal generators.
OperatorBasis su_basis(int n);

/// Tr[a b†]
cplx hs_inner(const Operator& a, const Operator& b);

/// Hilbert-Schmidt Gram matrix G_αβ = Tr[K_α K_β†] over the whole basis.
Matrix gram_matrix(const OperatorBasis& basis);

Operator kron(const Operator& a, const Operator& b);
Operator commutator(const Operator& a, const Operator& b);

/// Tr_B over a system ⊗ bath operator (system index slow).
Operator partial_trace_bath(const Operator& m, int dim_s, int dim_b);

/// ad_h^n(x) = [h, [h, … [h, x]]], n ≥ 0.
Operator nested_adjoint(const Operator& h, const Operator& x, int n);

/// exp(−i h t) from a cached eigendecomposition of h, so evaluating many
/// times costs one decomposition.
class HermitianPropagator {
 public:
  explicit HermitianPropagator(const Operator& h, double tol = kHermitianTol);

  Operator at(double t) const;
  int dim() const { return static_cast<int>(eigenvalues_.size()); }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

 private:
  Eigen::VectorXd eigenvalues_;
  Matrix eigenvectors_;
};

Operator propagator(const Operator& h, double t);

/// ‖U U† − I‖_F
double unitarity_defect(const Operator& u);

/// Smallest eigenvalue of the hermitian part.
double min_hermitian_eigenvalue(const Operator& a);

// Random instances for property tests and seeded theorem suites.
Operator random_hermitian(int dim, Rng& rng);
Operator random_operator(int dim, Rng& rng);
Vector random_state_vector(int dim, Rng& rng);
/// Rank-`rank` density matrix (full rank when rank ≤ 0).
DensityMatrix random_density(int dim, Rng& rng, int rank = 0);

}  // namespace dfslab

#endif  // DFSLAB_OPERATOR_SPACE_HPP
