#include "dfslab/fixed_basis_osr.hpp"

#include <Eigen/Eigenvalues>

#include "dfslab/error.hpp"

namespace dfslab {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kRateStep = 1e-4;

// Richardson combination of central differences at h and h/2.
template <class F>
auto richardson_derivative(F&& f) {
  const double h = kRateStep;
  const auto d1 = ((f(h) - f(-h)) / (2.0 * h)).eval();
  const auto d2 = ((f(h / 2) - f(-h / 2)) / h).eval();
  return ((4.0 * d2 - d1) / 3.0).eval();
}

void require_basis_dim(const OperatorBasis& basis, int dim) {
  if (basis.dim() != dim) throw Error(ErrorKind::kDimensionMismatch, "basis dim does not match system dim");
}

}  // namespace

double ChiProcess::normalization_defect() const {
  const int d = basis.dim();
  Matrix acc = Matrix::Zero(d, d);
  for (int a = 0; a < basis.size(); ++a) {
    for (int b = 0; b < basis.size(); ++b) {
      acc += chi(a, b) * basis[b].matrix().adjoint() * basis[a].matrix();
    }
  }
  return (acc - Matrix::Identity(d, d)).norm();
}

double ChiProcess::min_eigenvalue() const {
  const Matrix herm = 0.5 * (chi + chi.adjoint());
  return Eigen::SelfAdjointEigenSolver<Matrix>(herm, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

CoefficientTable expand_kraus(const KrausSet& k, const OperatorBasis& basis) {
  require_basis_dim(basis, k.dim_s);
  const auto n = static_cast<Eigen::Index>(k.operators.size());
  Matrix b(n, basis.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int a = 0; a < basis.size(); ++a) {
      b(i, a) = hs_inner(k.operators[static_cast<std::size_t>(i)], basis[a]) / basis.norm_squared(a);
    }
  }
  return {std::move(b), k.time};
}

Operator reconstruct_kraus(const CoefficientTable& table, const OperatorBasis& basis, int i) {
  if (i < 0 || i >= table.b.rows()) throw Error(ErrorKind::kInvalidArgument, "Kraus index out of range");
  if (table.b.cols() != basis.size()) throw Error(ErrorKind::kDimensionMismatch, "table/basis size mismatch");
  Operator out = Operator::zero(basis.dim());
  for (int a = 0; a < basis.size(); ++a) out += table.b(i, a) * basis[a];
  return out;
}

ChiProcess compute_chi(const CoefficientTable& table, const OperatorBasis& basis) {
  if (table.b.cols() != basis.size()) throw Error(ErrorKind::kDimensionMismatch, "table/basis size mismatch");
  // χ_αβ = Σ_i b_iα b*_iβ
  Matrix chi = table.b.transpose() * table.b.conjugate();
  return {basis, std::move(chi), table.time};
}

ChiProcess chi_at(const SystemBathModel& m, double t, double eps, const OperatorBasis& basis) {
  return compute_chi(expand_kraus(extract_kraus(m, t, eps), basis), basis);
}

ChiProcess chi_at(const JointPropagator& p, double t, const OperatorBasis& basis) {
  return compute_chi(expand_kraus(extract_kraus(p, t), basis), basis);
}

Operator compute_s_operator(const ChiProcess& c) {
  const int d = c.basis.dim();
  Matrix s = Matrix::Zero(d, d);
  for (int a = 1; a < c.basis.size(); ++a) {
    const Matrix& k = c.basis[a].matrix();
    s += c.chi(a, 0) * k - c.chi(0, a) * k.adjoint();
  }
  s *= 0.5 * kI;
  return Operator(0.5 * (s + s.adjoint()));
}

DensityMatrix apply_fixed_basis_osr(const ChiProcess& c, const DensityMatrix& rho0, double tol) {
  require_basis_dim(c.basis, rho0.dim());
  const double defect = c.normalization_defect();
  if (defect > tol) {
    throw Error(ErrorKind::kNotTracePreserving, "chi normalization defect " + std::to_string(defect));
  }
  const Matrix& rho = rho0.matrix();
  const Matrix s = compute_s_operator(c).matrix();
  Matrix out = rho - kI * (s * rho - rho * s);
  for (int a = 1; a < c.basis.size(); ++a) {
    const Matrix& ka = c.basis[a].matrix();
    for (int b = 1; b < c.basis.size(); ++b) {
      const cplx x = c.chi(a, b);
      if (x == cplx(0.0)) continue;
      const Matrix kbd = c.basis[b].matrix().adjoint();
      const Matrix kk = kbd * ka;
      out += 0.5 * x * (2.0 * ka * rho * kbd - kk * rho - rho * kk);
    }
  }
  return DensityMatrix::unchecked_positivity(Operator(std::move(out)));
}

OsrGeneratorRate chi_rate(const SystemBathModel& m, double tau, double eps, const OperatorBasis& basis) {
  if (!(tau >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "tau must be >= 0");
  require_basis_dim(basis, m.dim_s);
  if (tau > 0.0) {
    const ChiProcess c0 = chi_at(m, 0.0, eps, basis);
    const ChiProcess c1 = chi_at(m, tau, eps, basis);
    const Matrix chi_dot = (c1.chi - c0.chi) / tau;
    const Matrix s_dot = (compute_s_operator(c1).matrix() - compute_s_operator(c0).matrix()) / tau;
    return {basis, chi_dot, Operator(s_dot), tau};
  }
  const Matrix chi_dot = richardson_derivative([&](double t) { return chi_at(m, t, eps, basis).chi; });
  const Matrix s_dot =
      richardson_derivative([&](double t) { return compute_s_operator(chi_at(m, t, eps, basis)).matrix(); });
  return {basis, chi_dot, Operator(0.5 * (s_dot + s_dot.adjoint())), 0.0};
}

ChiSplit split_chi(const SystemBathModel& m, double tau, const OperatorBasis& basis, double eps) {
  require_basis_dim(basis, m.dim_s);
  ChiProcess full = chi_at(m, tau, eps, basis);
  ChiProcess iso = chi_at(m.isolated(), tau, 0.0, basis);
  Operator s_full = compute_s_operator(full);
  Operator s_iso = compute_s_operator(iso);
  ChiProcess coupling{basis, full.chi - iso.chi, tau};
  return {std::move(iso), std::move(coupling), s_iso, s_full - s_iso};
}

LindbladModel coarse_grain_to_sme(const SystemBathModel& m, double tau, const OperatorBasis& basis, double eps) {
  if (!(tau > 0.0)) throw Error(ErrorKind::kInvalidArgument, "coarse-graining window tau must be > 0");
  require_basis_dim(basis, m.dim_s);
  // χ⁽¹⁾(0) = 0 and S⁽¹⁾(0) = 0, so the window averages are plain quotients.
  const ChiSplit split = split_chi(m, tau, basis, eps);
  const int mm = basis.m();
  Matrix a = split.coupling.chi.bottomRightCorner(mm, mm) / tau;
  a = 0.5 * (a + a.adjoint());
  std::vector<Operator> f_ops(basis.elements().begin() + 1, basis.elements().end());
  Operator h_eff = m.h_s + (1.0 / tau) * split.s_coupling;
  return {m.dim_s, std::move(h_eff), std::move(f_ops), std::move(a), std::nullopt};
}

LindbladModel coarse_grain_to_sme(const SystemBathModel& m, double tau) {
  return coarse_grain_to_sme(m, tau, su_basis(m.dim_s));
}

}  // namespace dfslab
