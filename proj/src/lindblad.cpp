#include "dfslab/lindblad.hpp"

#include <bit>
#include <cstring>
#include <mutex>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "dfslab/error.hpp"

namespace dfslab {

namespace {

constexpr cplx kI{0.0, 1.0};

// Generator as a list of (coefficient matrix, operator list, Hamiltonian).
struct Expanded {
  Matrix h;
  std::vector<Matrix> ops;
  Matrix coeff;
};

Expanded expand(const LindbladModel& m, double eps, GeneratorMode mode) {
  m.validate();
  const auto nf = static_cast<Eigen::Index>(m.f_ops.size());
  Expanded e;
  e.h = m.h_eff.matrix();
  for (const auto& f : m.f_ops) e.ops.push_back(f.matrix());
  if (!m.perturbation || eps == 0.0) {
    e.coeff = m.a;
    return e;
  }
  const auto& p = *m.perturbation;
  const auto np = static_cast<Eigen::Index>(p.g_ops.size());
  e.h += eps * p.h_lamb_pert.matrix();
  for (const auto& g : p.g_ops) e.ops.push_back(eps * g.matrix());
  e.coeff = Matrix::Zero(nf + np, nf + np);
  e.coeff.topLeftCorner(nf, nf) = m.a;
  // A_pα = g_pα multiplies 𝙻_{εG_p, F_α}; A_αp = g*_pα multiplies 𝙻_{F_α, εG_p}.
  e.coeff.bottomLeftCorner(np, nf) = p.g;
  e.coeff.topRightCorner(nf, np) = p.g.adjoint();
  if (mode == GeneratorMode::kExact) e.coeff.bottomRightCorner(np, np) = p.c;
  return e;
}

Matrix apply_expanded(const Expanded& e, const Matrix& rho) {
  Matrix out = -kI * (e.h * rho - rho * e.h);
  const auto n = static_cast<Eigen::Index>(e.ops.size());
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) {
      const cplx c = e.coeff(x, y);
      if (c == cplx(0.0)) continue;
      const Matrix& fx = e.ops[static_cast<std::size_t>(x)];
      const Matrix yd = e.ops[static_cast<std::size_t>(y)].adjoint();
      const Matrix ydx = yd * fx;
      out += 0.5 * c * (2.0 * fx * rho * yd - ydx * rho - rho * ydx);
    }
  }
  return out;
}

void hash_bytes(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
}

void hash_matrix(std::uint64_t& h, const Matrix& m) {
  const auto rows = m.rows();
  const auto cols = m.cols();
  hash_bytes(h, &rows, sizeof rows);
  hash_bytes(h, &cols, sizeof cols);
  hash_bytes(h, m.data(), static_cast<std::size_t>(m.size()) * sizeof(cplx));
}

}  // namespace

void LindbladModel::validate() const {
  if (dim < 1 || dim > kMaxDim) throw Error(ErrorKind::kInvalidDimension, "Lindblad dim out of range");
  if (h_eff.dim() != dim) throw Error(ErrorKind::kDimensionMismatch, "h_eff has wrong dim");
  if (!h_eff.is_hermitian()) throw Error(ErrorKind::kNotHermitian, "h_eff is not hermitian");
  const auto nf = static_cast<Eigen::Index>(f_ops.size());
  for (const auto& f : f_ops) {
    if (f.dim() != dim) throw Error(ErrorKind::kDimensionMismatch, "error generator has wrong dim");
  }
  if (a.rows() != nf || a.cols() != nf) throw Error(ErrorKind::kDimensionMismatch, "a must be M x M");
  if ((a - a.adjoint()).norm() > kHermitianTol * std::max(1.0, a.norm())) {
    throw Error(ErrorKind::kNotHermitian, "coefficient matrix a is not hermitian");
  }
  if (!perturbation) return;
  const auto& p = *perturbation;
  const auto np = static_cast<Eigen::Index>(p.g_ops.size());
  for (const auto& g : p.g_ops) {
    if (g.dim() != dim) throw Error(ErrorKind::kDimensionMismatch, "perturbing generator has wrong dim");
  }
  if (p.g.rows() != np || p.g.cols() != nf) throw Error(ErrorKind::kDimensionMismatch, "g must be P x M");
  if (p.c.rows() != np || p.c.cols() != np) throw Error(ErrorKind::kDimensionMismatch, "c must be P x P");
  if ((p.c - p.c.adjoint()).norm() > kHermitianTol * std::max(1.0, p.c.norm())) {
    throw Error(ErrorKind::kNotHermitian, "perturbation block c is not hermitian");
  }
  if (p.h_lamb_pert.dim() != dim) throw Error(ErrorKind::kDimensionMismatch, "h_lamb_pert has wrong dim");
  if (!p.h_lamb_pert.is_hermitian()) throw Error(ErrorKind::kNotHermitian, "h_lamb_pert is not hermitian");
}

Operator dissipator_pair(const Operator& x, const Operator& y, const Operator& rho) {
  if (x.dim() != y.dim() || x.dim() != rho.dim()) {
    throw Error(ErrorKind::kDimensionMismatch, "dissipator_pair dims");
  }
  const Matrix yd = y.matrix().adjoint();
  const Matrix ydx = yd * x.matrix();
  return Operator(2.0 * x.matrix() * rho.matrix() * yd - ydx * rho.matrix() - rho.matrix() * ydx);
}

Operator lindblad_generator(const LindbladModel& m, const Operator& rho, double eps, GeneratorMode mode) {
  if (rho.dim() != m.dim) throw Error(ErrorKind::kDimensionMismatch, "generator input has wrong dim");
  return Operator(apply_expanded(expand(m, eps, mode), rho.matrix()));
}

Vector vectorize(const Operator& x) {
  return Eigen::Map<const Vector>(x.matrix().data(), x.matrix().size());
}

Operator unvectorize(const Vector& v, int dim) {
  if (v.size() != static_cast<Eigen::Index>(dim) * dim) {
    throw Error(ErrorKind::kDimensionMismatch, "vector length is not dim^2");
  }
  return Operator(Eigen::Map<const Matrix>(v.data(), dim, dim));
}

Superoperator liouvillian_matrix(const LindbladModel& m, double eps, GeneratorMode mode) {
  const Expanded e = expand(m, eps, mode);
  const int d = m.dim;
  const long long n = static_cast<long long>(d) * d;
  Matrix out(n, n);
#pragma omp parallel for schedule(static)
  for (long long col = 0; col < n; ++col) {
    Matrix unit = Matrix::Zero(d, d);
    unit(static_cast<Eigen::Index>(col % d), static_cast<Eigen::Index>(col / d)) = 1.0;
    const Matrix image = apply_expanded(e, unit);
    out.col(static_cast<Eigen::Index>(col)) = Eigen::Map<const Vector>(image.data(), n);
  }
  return {d, std::move(out)};
}

Superoperator liouvillian_matrix_serial(const LindbladModel& m, double eps, GeneratorMode mode) {
  const Expanded e = expand(m, eps, mode);
  const int d = m.dim;
  const Operator id = Operator::identity(d);
  auto k = [](const Matrix& a, const Matrix& b) { return kron(Operator(a), Operator(b)).matrix(); };
  // −i[H, ρ] → −i (I ⊗ H − Hᵀ ⊗ I)
  Matrix out = -kI * (k(id.matrix(), e.h) - k(e.h.transpose(), id.matrix()));
  const auto n = static_cast<Eigen::Index>(e.ops.size());
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) {
      const cplx c = e.coeff(x, y);
      if (c == cplx(0.0)) continue;
      const Matrix& fx = e.ops[static_cast<std::size_t>(x)];
      const Matrix& fy = e.ops[static_cast<std::size_t>(y)];
      const Matrix ydx = fy.adjoint() * fx;
      // 2 F_x ρ F_y† − F_y†F_x ρ − ρ F_y†F_x
      out += 0.5 * c * (2.0 * k(fy.conjugate(), fx) - k(id.matrix(), ydx) - k(ydx.transpose(), id.matrix()));
    }
  }
  return {d, std::move(out)};
}

Operator propagate_operator(const Superoperator& s, const Operator& x, double t) {
  const Matrix expo = (s.matrix * t).exp();
  return unvectorize(expo * vectorize(x), s.dim);
}

DensityMatrix integrate_sme(const LindbladModel& m, const DensityMatrix& rho0, double t, double eps,
                            GeneratorMode mode) {
  if (rho0.dim() != m.dim) throw Error(ErrorKind::kDimensionMismatch, "initial state has wrong dim");
  if (t == 0.0) return rho0;
  const auto s = default_superoperator_cache().get(m, eps, mode);
  return DensityMatrix::unchecked_positivity(propagate_operator(*s, rho0.op(), t));
}

Operator sme_derivative(const LindbladModel& m, const Operator& rho0, int n, double eps, GeneratorMode mode) {
  if (n < 1) throw Error(ErrorKind::kInvalidArgument, "sme_derivative order must be >= 1");
  if (rho0.dim() != m.dim) throw Error(ErrorKind::kDimensionMismatch, "sme_derivative input has wrong dim");
  const Expanded e = expand(m, eps, mode);
  Matrix acc = rho0.matrix();
  for (int i = 0; i < n; ++i) acc = apply_expanded(e, acc);
  return Operator(std::move(acc));
}

std::uint64_t model_fingerprint(const LindbladModel& m) {
  std::uint64_t h = 14695981039346656037ull;
  hash_bytes(h, &m.dim, sizeof m.dim);
  hash_matrix(h, m.h_eff.matrix());
  for (const auto& f : m.f_ops) hash_matrix(h, f.matrix());
  hash_matrix(h, m.a);
  if (m.perturbation) {
    const auto& p = *m.perturbation;
    for (const auto& g : p.g_ops) hash_matrix(h, g.matrix());
    hash_matrix(h, p.g);
    hash_matrix(h, p.c);
    hash_matrix(h, p.h_lamb_pert.matrix());
  }
  return h;
}

std::shared_ptr<const Superoperator> SuperoperatorCache::get(const LindbladModel& m, double eps, GeneratorMode mode) {
  const Key key{model_fingerprint(m), std::bit_cast<std::uint64_t>(eps), static_cast<int>(mode)};
  {
    std::shared_lock lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  auto built = std::make_shared<const Superoperator>(liouvillian_matrix(m, eps, mode));
  std::unique_lock lock(mutex_);
  auto [it, inserted] = entries_.emplace(key, std::move(built));
  return it->second;
}

std::size_t SuperoperatorCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

void SuperoperatorCache::clear() {
  std::unique_lock lock(mutex_);
  entries_.clear();
}

SuperoperatorCache& default_superoperator_cache() {
  static SuperoperatorCache cache;
  return cache;
}

}  // namespace dfslab
