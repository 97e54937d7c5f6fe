#include "dfslab/operator_space.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include <Eigen/Eigenvalues>

#include "dfslab/error.hpp"

namespace dfslab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidDimension: return "invalid-dimension";
    case ErrorKind::kDimensionMismatch: return "dimension-mismatch";
    case ErrorKind::kNonFinite: return "non-finite";
    case ErrorKind::kNotHermitian: return "not-hermitian";
    case ErrorKind::kNotDensityMatrix: return "not-density-matrix";
    case ErrorKind::kNotUnitary: return "not-unitary";
    case ErrorKind::kNotTracePreserving: return "not-trace-preserving";
    case ErrorKind::kSingularHamiltonian: return "singular-hamiltonian";
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kInvalidGrid: return "invalid-grid";
    case ErrorKind::kUnsupported: return "unsupported";
    case ErrorKind::kConfig: return "configuration";
  }
  return "unknown";
}

double numeric_tolerance_from_env() {
  const char* raw = std::getenv("DFSLAB_TOL");
  if (raw == nullptr) return 1e-10;
  char* end = nullptr;
  const double v = std::strtod(raw, &end);
  if (end == raw || !(v > 0.0) || !std::isfinite(v)) return 1e-10;
  return v;
}

// ---------------------------------------------------------------- Operator

Operator::Operator(Matrix m) : m_(std::move(m)) {
  if (m_.rows() == 0 || m_.rows() != m_.cols()) {
    throw Error(ErrorKind::kInvalidDimension,
                "operator must be square and non-empty, got " + std::to_string(m_.rows()) + "x" +
                    std::to_string(m_.cols()));
  }
  if (!m_.allFinite()) throw Error(ErrorKind::kNonFinite, "operator has NaN/Inf entries");
}

Operator Operator::identity(int dim) {
  if (dim < 1) throw Error(ErrorKind::kInvalidDimension, "dim must be >= 1");
  return Operator(Matrix::Identity(dim, dim));
}

Operator Operator::zero(int dim) {
  if (dim < 1) throw Error(ErrorKind::kInvalidDimension, "dim must be >= 1");
  return Operator(Matrix::Zero(dim, dim));
}

Operator Operator::adjoint() const { return Operator(m_.adjoint()); }

bool Operator::is_hermitian(double tol) const {
  return (m_ - m_.adjoint()).norm() <= tol * std::max(1.0, m_.norm());
}

static void require_same_dim(const Operator& a, const Operator& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::kDimensionMismatch, std::string(what) + ": " + std::to_string(a.dim()) +
                                                   " vs " + std::to_string(b.dim()));
  }
}

Operator& Operator::operator+=(const Operator& o) {
  require_same_dim(*this, o, "operator +");
  m_ += o.m_;
  return *this;
}

Operator& Operator::operator-=(const Operator& o) {
  require_same_dim(*this, o, "operator -");
  m_ -= o.m_;
  return *this;
}

Operator& Operator::operator*=(cplx s) {
  m_ *= s;
  return *this;
}

Operator operator*(const Operator& a, const Operator& b) {
  require_same_dim(a, b, "operator *");
  return Operator(a.m_ * b.m_);
}

// ----------------------------------------------------------- DensityMatrix

DensityMatrix::DensityMatrix(Operator op, double tol) : op_(std::move(op)) {
  if (!op_.is_hermitian()) throw Error(ErrorKind::kNotDensityMatrix, "density matrix is not hermitian");
  if (std::abs(op_.trace() - cplx(1.0)) > kTraceTol * std::max(1.0, op_.norm()) * op_.dim()) {
    throw Error(ErrorKind::kNotDensityMatrix, "density matrix trace differs from 1");
  }
  const double lmin = min_eigenvalue();
  if (lmin < -tol) {
    throw Error(ErrorKind::kNotDensityMatrix, "density matrix has eigenvalue " + std::to_string(lmin));
  }
}

DensityMatrix DensityMatrix::unchecked_positivity(Operator op) {
  if (!op.is_hermitian()) throw Error(ErrorKind::kNotDensityMatrix, "density matrix is not hermitian");
  if (std::abs(op.trace() - cplx(1.0)) > 1e-8) {
    throw Error(ErrorKind::kNotDensityMatrix, "density matrix trace differs from 1");
  }
  Matrix h = 0.5 * (op.matrix() + op.matrix().adjoint());
  return DensityMatrix(Operator(std::move(h)), NoCheck{});
}

DensityMatrix DensityMatrix::pure(const Vector& psi) {
  const double n = psi.norm();
  if (psi.size() == 0 || std::abs(n - 1.0) > 1e-10) {
    throw Error(ErrorKind::kInvalidArgument, "state vector must be normalized");
  }
  return DensityMatrix(Operator(psi * psi.adjoint()));
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  return DensityMatrix(Operator(Matrix::Identity(dim, dim) / static_cast<double>(dim)));
}

double DensityMatrix::purity() const { return (op_.matrix() * op_.matrix()).trace().real(); }

double DensityMatrix::min_eigenvalue() const { return min_hermitian_eigenvalue(op_); }

// ----------------------------------------------------------- OperatorBasis

OperatorBasis::OperatorBasis(std::vector<Operator> elements, double tol) : elements_(std::move(elements)) {
  if (elements_.empty()) throw Error(ErrorKind::kInvalidArgument, "basis needs at least K_0");
  const int d = elements_.front().dim();
  for (const auto& k : elements_) require_same_dim(elements_.front(), k, "basis element");
  if ((elements_.front().matrix() - Matrix::Identity(d, d)).norm() > tol) {
    throw Error(ErrorKind::kInvalidArgument, "K_0 must be the identity");
  }
  if (size() > d * d) throw Error(ErrorKind::kInvalidArgument, "more basis elements than dim^2");
  const Matrix g = gram_matrix(*this);
  for (int a = 0; a < size(); ++a) {
    for (int b = 0; b < size(); ++b) {
      const double expect = a == b ? norm_squared(a) : 0.0;
      if (std::abs(g(a, b) - expect) > tol) {
        throw Error(ErrorKind::kInvalidArgument, "basis is not Hilbert-Schmidt orthonormal at (" +
                                                     std::to_string(a) + "," + std::to_string(b) + ")");
      }
    }
  }
}

OperatorBasis su_basis(int n) {
  if (n < 2) throw Error(ErrorKind::kInvalidDimension, "su(n) basis needs n >= 2");
  const double r = 1.0 / std::sqrt(2.0);
  std::vector<Operator> out;
  out.reserve(static_cast<std::size_t>(n * n));
  out.push_back(Operator::identity(n));
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      Matrix m = Matrix::Zero(n, n);
      m(j, k) = r;
      m(k, j) = r;
      out.emplace_back(std::move(m));
    }
  }
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      Matrix m = Matrix::Zero(n, n);
      m(j, k) = cplx(0.0, -r);
      m(k, j) = cplx(0.0, r);
      out.emplace_back(std::move(m));
    }
  }
  for (int l = 1; l < n; ++l) {
    const double s = 1.0 / std::sqrt(static_cast<double>(l) * (l + 1));
    Matrix m = Matrix::Zero(n, n);
    for (int j = 0; j < l; ++j) m(j, j) = s;
    m(l, l) = -s * l;
    out.emplace_back(std::move(m));
  }
  return OperatorBasis(std::move(out));
}

cplx hs_inner(const Operator& a, const Operator& b) {
  require_same_dim(a, b, "hs_inner");
  // Tr[a b†] = Σ_ij a_ij conj(b_ij)
  return (a.matrix().array() * b.matrix().array().conjugate()).sum();
}

Matrix gram_matrix(const OperatorBasis& basis) {
  const int n = basis.size();
  Matrix g(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) g(a, b) = hs_inner(basis[a], basis[b]);
  }
  return g;
}

Operator kron(const Operator& a, const Operator& b) {
  const Matrix& x = a.matrix();
  const Matrix& y = b.matrix();
  const Eigen::Index p = y.rows();
  Matrix out(x.rows() * p, x.cols() * p);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) out.block(i * p, j * p, p, p) = x(i, j) * y;
  }
  return Operator(std::move(out));
}

Operator commutator(const Operator& a, const Operator& b) {
  require_same_dim(a, b, "commutator");
  return Operator(a.matrix() * b.matrix() - b.matrix() * a.matrix());
}

Operator partial_trace_bath(const Operator& m, int dim_s, int dim_b) {
  if (dim_s < 1 || dim_b < 1) throw Error(ErrorKind::kInvalidDimension, "partial trace needs positive dims");
  if (m.dim() != dim_s * dim_b) {
    throw Error(ErrorKind::kDimensionMismatch, "cannot factor dim " + std::to_string(m.dim()) + " as " +
                                                  std::to_string(dim_s) + "x" + std::to_string(dim_b));
  }
  Matrix out = Matrix::Zero(dim_s, dim_s);
  const Matrix& x = m.matrix();
  for (int i = 0; i < dim_s; ++i) {
    for (int j = 0; j < dim_s; ++j) {
      cplx acc = 0.0;
      for (int a = 0; a < dim_b; ++a) acc += x(i * dim_b + a, j * dim_b + a);
      out(i, j) = acc;
    }
  }
  return Operator(std::move(out));
}

Operator nested_adjoint(const Operator& h, const Operator& x, int n) {
  if (n < 0) throw Error(ErrorKind::kInvalidArgument, "nested_adjoint order must be >= 0");
  require_same_dim(h, x, "nested_adjoint");
  Matrix acc = x.matrix();
  for (int k = 0; k < n; ++k) acc = h.matrix() * acc - acc * h.matrix();
  return Operator(std::move(acc));
}

// ------------------------------------------------------------- propagators

HermitianPropagator::HermitianPropagator(const Operator& h, double tol) {
  if (!h.is_hermitian(tol)) throw Error(ErrorKind::kNotHermitian, "propagator needs a hermitian generator");
  const Matrix herm = 0.5 * (h.matrix() + h.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm);
  eigenvalues_ = es.eigenvalues();
  eigenvectors_ = es.eigenvectors();
}

Operator HermitianPropagator::at(double t) const {
  Vector phases(eigenvalues_.size());
  for (Eigen::Index k = 0; k < eigenvalues_.size(); ++k) phases(k) = std::polar(1.0, -eigenvalues_(k) * t);
  return Operator(eigenvectors_ * phases.asDiagonal() * eigenvectors_.adjoint());
}

Operator propagator(const Operator& h, double t) { return HermitianPropagator(h).at(t); }

double unitarity_defect(const Operator& u) {
  return (u.matrix() * u.matrix().adjoint() - Matrix::Identity(u.dim(), u.dim())).norm();
}

double min_hermitian_eigenvalue(const Operator& a) {
  const Matrix herm = 0.5 * (a.matrix() + a.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------- random

Operator random_operator(int dim, Rng& rng) {
  Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) m(i, j) = rng.complex_normal();
  }
  return Operator(std::move(m));
}

Operator random_hermitian(int dim, Rng& rng) {
  const Operator a = random_operator(dim, rng);
  return Operator(0.5 * (a.matrix() + a.matrix().adjoint()));
}

Vector random_state_vector(int dim, Rng& rng) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.complex_normal();
  return v / v.norm();
}

DensityMatrix random_density(int dim, Rng& rng, int rank) {
  if (rank <= 0 || rank > dim) rank = dim;
  Matrix g(dim, rank);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < rank; ++j) g(i, j) = rng.complex_normal();
  }
  Matrix rho = g * g.adjoint();
  rho /= rho.trace();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(Operator(std::move(rho)));
}

}  // namespace dfslab
