#include "dfslab/system_bath.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include <Eigen/Eigenvalues>

#include "dfslab/error.hpp"

namespace dfslab {

namespace {

void check_system_op(const Operator& op, int dim_s, const char* what) {
  if (op.dim() != dim_s) throw Error(ErrorKind::kDimensionMismatch, std::string(what) + " has wrong system dim");
}

void check_bath_op(const Operator& op, int dim_b, const char* what) {
  if (op.dim() != dim_b) throw Error(ErrorKind::kDimensionMismatch, std::string(what) + " has wrong bath dim");
}

Operator coupling_sum(const std::vector<CouplingTerm>& terms, int dim_s, int dim_b) {
  Matrix acc = Matrix::Zero(dim_s * dim_b, dim_s * dim_b);
  for (const auto& term : terms) acc += kron(term.system, term.bath).matrix();
  return Operator(std::move(acc));
}

void check_rho_dim(const DensityMatrix& rho0, int dim_s) {
  if (rho0.dim() != dim_s) throw Error(ErrorKind::kDimensionMismatch, "initial state has wrong system dim");
}

DensityMatrix reduce(const Operator& u, const DensityMatrix& rho0, const DensityMatrix& rho_b, int dim_s,
                     int dim_b) {
  const Operator joint = kron(rho0.op(), rho_b.op());
  const Operator evolved(u.matrix() * joint.matrix() * u.matrix().adjoint());
  Operator reduced = partial_trace_bath(evolved, dim_s, dim_b);
  return DensityMatrix::unchecked_positivity(std::move(reduced));
}

}  // namespace

void SystemBathModel::validate() const {
  if (dim_s < 1 || dim_b < 1) throw Error(ErrorKind::kInvalidDimension, "model dims must be >= 1");
  if (dim_s * dim_b > kMaxDim) throw Error(ErrorKind::kInvalidDimension, "joint dimension exceeds 64");
  check_system_op(h_s, dim_s, "h_s");
  check_bath_op(h_b, dim_b, "h_b");
  check_bath_op(rho_b.op(), dim_b, "rho_b");
  if (!h_s.is_hermitian()) throw Error(ErrorKind::kNotHermitian, "h_s is not hermitian");
  if (!h_b.is_hermitian()) throw Error(ErrorKind::kNotHermitian, "h_b is not hermitian");
  for (const auto* terms : {&couplings, &perturbations}) {
    for (const auto& term : *terms) {
      check_system_op(term.system, dim_s, "coupling system operator");
      check_bath_op(term.bath, dim_b, "coupling bath operator");
    }
  }
  if (!coupling_sum(couplings, dim_s, dim_b).is_hermitian()) {
    throw Error(ErrorKind::kNotHermitian, "interaction Hamiltonian is not hermitian");
  }
  if (!coupling_sum(perturbations, dim_s, dim_b).is_hermitian()) {
    throw Error(ErrorKind::kNotHermitian, "perturbation Hamiltonian is not hermitian");
  }
}

SystemBathModel SystemBathModel::isolated() const {
  SystemBathModel out = *this;
  out.couplings.clear();
  out.perturbations.clear();
  return out;
}

double KrausSet::normalization_defect() const {
  Matrix acc = Matrix::Zero(dim_s, dim_s);
  for (const auto& a : operators) acc += a.matrix().adjoint() * a.matrix();
  return (acc - Matrix::Identity(dim_s, dim_s)).norm();
}

Operator total_hamiltonian(const SystemBathModel& m, double eps) {
  m.validate();
  Matrix h = kron(m.h_s, Operator::identity(m.dim_b)).matrix() + kron(Operator::identity(m.dim_s), m.h_b).matrix();
  h += coupling_sum(m.couplings, m.dim_s, m.dim_b).matrix();
  if (eps != 0.0) h += eps * coupling_sum(m.perturbations, m.dim_s, m.dim_b).matrix();
  return Operator(std::move(h));
}

Operator perturbation_hamiltonian(const SystemBathModel& m) {
  return coupling_sum(m.perturbations, m.dim_s, m.dim_b);
}

DensityMatrix evolve_reduced(const SystemBathModel& m, const DensityMatrix& rho0, double t, double eps) {
  check_rho_dim(rho0, m.dim_s);
  const Operator u = propagator(total_hamiltonian(m, eps), t);
  return reduce(u, rho0, m.rho_b, m.dim_s, m.dim_b);
}

DensityMatrix evolve_reduced(const JointPropagator& p, const DensityMatrix& rho0, double t) {
  check_rho_dim(rho0, p.dim_s);
  const Operator u = p.u_of_t(t);
  if (u.dim() != p.dim_s * p.dim_b) throw Error(ErrorKind::kDimensionMismatch, "joint propagator has wrong dim");
  if (unitarity_defect(u) > kUnitaryTol * u.dim()) {
    throw Error(ErrorKind::kNotUnitary, "joint propagator is not unitary at t=" + std::to_string(t));
  }
  return reduce(u, rho0, p.rho_b, p.dim_s, p.dim_b);
}

KrausSet kraus_from_joint_unitary(const Operator& u, const DensityMatrix& rho_b, int dim_s, int dim_b, double t) {
  if (u.dim() != dim_s * dim_b) throw Error(ErrorKind::kDimensionMismatch, "joint unitary has wrong dim");
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho_b.matrix());
  const Matrix& uu = u.matrix();
  KrausSet out{dim_s, {}, t};
  // Largest weights first so pure baths put their Kraus operators up front.
  for (Eigen::Index nu = es.eigenvalues().size() - 1; nu >= 0; --nu) {
    const double w = es.eigenvalues()(nu);
    if (w <= kBathEigenvalueCutoff) continue;
    const Vector bath_vec = es.eigenvectors().col(nu);
    const double sw = std::sqrt(w);
    for (int mu = 0; mu < dim_b; ++mu) {
      Matrix a(dim_s, dim_s);
      for (int row = 0; row < dim_s; ++row) {
        for (int col = 0; col < dim_s; ++col) {
          cplx acc = 0.0;
          for (int b = 0; b < dim_b; ++b) acc += uu(row * dim_b + mu, col * dim_b + b) * bath_vec(b);
          a(row, col) = sw * acc;
        }
      }
      out.operators.emplace_back(std::move(a));
    }
  }
  return out;
}

KrausSet extract_kraus(const SystemBathModel& m, double t, double eps) {
  return kraus_from_joint_unitary(propagator(total_hamiltonian(m, eps), t), m.rho_b, m.dim_s, m.dim_b, t);
}

KrausSet extract_kraus(const JointPropagator& p, double t) {
  const Operator u = p.u_of_t(t);
  if (unitarity_defect(u) > kUnitaryTol * u.dim()) {
    throw Error(ErrorKind::kNotUnitary, "joint propagator is not unitary at t=" + std::to_string(t));
  }
  return kraus_from_joint_unitary(u, p.rho_b, p.dim_s, p.dim_b, t);
}

Operator apply_kraus_map(const KrausSet& k, const Operator& x) {
  if (x.dim() != k.dim_s) throw Error(ErrorKind::kDimensionMismatch, "apply_kraus: state dim mismatch");
  Matrix acc = Matrix::Zero(k.dim_s, k.dim_s);
  for (const auto& a : k.operators) acc += a.matrix() * x.matrix() * a.matrix().adjoint();
  return Operator(std::move(acc));
}

DensityMatrix apply_kraus(const KrausSet& k, const DensityMatrix& rho, double tol) {
  const double defect = k.normalization_defect();
  if (defect > tol) {
    throw Error(ErrorKind::kNotTracePreserving, "Kraus normalization defect " + std::to_string(defect));
  }
  return DensityMatrix::unchecked_positivity(apply_kraus_map(k, rho.op()));
}

KrausSet canonicalize_phases(const KrausSet& k) {
  KrausSet out{k.dim_s, {}, k.time};
  for (const auto& a : k.operators) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    const Matrix& m = a.matrix();
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double v = std::abs(m.data()[i]);
      if (v > best_abs * (1.0 + 1e-12)) {
        best_abs = v;
        best = i;
      }
    }
    const cplx pivot = m.data()[best];
    const cplx phase = best_abs > 0.0 ? std::conj(pivot) / best_abs : cplx(1.0);
    out.operators.emplace_back(m * phase);
  }
  return out;
}

Operator hamiltonian_from_unitary(const JointPropagator& p, double t, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::kInvalidArgument, "dt must be positive");
  if (p.singular_at_origin && t - dt <= 0.0) {
    throw Error(ErrorKind::kSingularHamiltonian,
                "the generating Hamiltonian of family '" + p.family + "' is singular at t = 0");
  }
  auto central = [&](double h) -> Matrix {
    return (p.u_of_t(t + h).matrix() - p.u_of_t(t - h).matrix()) / (2.0 * h);
  };
  const Matrix du = (4.0 * central(0.5 * dt) - central(dt)) / 3.0;
  const Matrix h = cplx(0.0, 1.0) * du * p.u_of_t(t).matrix().adjoint();
  const double anti = (h - h.adjoint()).norm();
  if (anti > 1e-5 * std::max(1.0, h.norm())) {
    throw Error(ErrorKind::kNotHermitian, "recovered Hamiltonian is not hermitian (" + std::to_string(anti) + ")");
  }
  return Operator(0.5 * (h + h.adjoint()));
}

JointPropagator phase_damping_propagator(double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::kInvalidArgument, "phase damping rate must be positive");
  auto u_of_t = [lambda](double t) -> Operator {
    if (t < 0.0) throw Error(ErrorKind::kInvalidArgument, "phase damping propagator needs t >= 0");
    const double c = std::exp(-lambda * t);
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    // Bath ⊗ system ordering |b s⟩, b ∈ {↓, ↑}, s ∈ {0, 1}.
    Matrix bs = Matrix::Identity(4, 4);
    bs(1, 1) = c;
    bs(1, 3) = s;
    bs(3, 1) = -s;
    bs(3, 3) = c;
    // Reorder to system ⊗ bath: index 2s + b.
    Matrix sb(4, 4);
    for (int s1 = 0; s1 < 2; ++s1)
      for (int b1 = 0; b1 < 2; ++b1)
        for (int s2 = 0; s2 < 2; ++s2)
          for (int b2 = 0; b2 < 2; ++b2) sb(2 * s1 + b1, 2 * s2 + b2) = bs(2 * b1 + s1, 2 * b2 + s2);
    return Operator(std::move(sb));
  };
  Matrix down = Matrix::Zero(2, 2);
  down(0, 0) = 1.0;
  return JointPropagator{2, 2, std::move(u_of_t), DensityMatrix(Operator(down)), true, "phase_damping", lambda};
}

JointPropagator constant_hamiltonian_propagator(const SystemBathModel& m, double eps) {
  auto prop = std::make_shared<HermitianPropagator>(total_hamiltonian(m, eps));
  return JointPropagator{m.dim_s, m.dim_b, [prop](double t) { return prop->at(t); }, m.rho_b, false,
                         "constant_hamiltonian", 0.0};
}

Operator perturbation_series_term(const Operator& h, const Operator& hp, int n, int k) {
  if (h.dim() != hp.dim()) throw Error(ErrorKind::kDimensionMismatch, "perturbation_series_term dims");
  if (n < 0 || k < 0 || k > n) {
    throw Error(ErrorKind::kInvalidArgument, "perturbation_series_term needs 0 <= k <= n");
  }
  // f_n^(j) = h f_{n-1}^(j) + hp f_{n-1}^(j-1), f_0^(0) = I.
  const int d = h.dim();
  std::vector<Matrix> f(static_cast<std::size_t>(k + 1), Matrix::Zero(d, d));
  f[0] = Matrix::Identity(d, d);
  for (int step = 1; step <= n; ++step) {
    for (int j = std::min(k, step); j >= 0; --j) {
      Matrix next = h.matrix() * f[static_cast<std::size_t>(j)];
      if (j > 0) next += hp.matrix() * f[static_cast<std::size_t>(j - 1)];
      f[static_cast<std::size_t>(j)] = std::move(next);
    }
  }
  return Operator(f[static_cast<std::size_t>(k)]);
}

double perturbed_propagator_check(const SystemBathModel& m, double t, double eps, int n_max) {
  if (n_max < 2) throw Error(ErrorKind::kInvalidArgument, "n_max must be >= 2");
  const Operator h = total_hamiltonian(m, 0.0);
  const Operator hp = perturbation_hamiltonian(m);
  const Matrix u = propagator(h, t).matrix();
  const Matrix u_pert = propagator(total_hamiltonian(m, eps), t).matrix();
  const int d = h.dim();
  std::vector<Matrix> f(3, Matrix::Zero(d, d));
  f[0] = Matrix::Identity(d, d);
  Matrix series = Matrix::Zero(d, d);
  cplx coeff = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    for (int j = std::min(2, n); j >= 0; --j) {
      Matrix next = h.matrix() * f[static_cast<std::size_t>(j)];
      if (j > 0) next += hp.matrix() * f[static_cast<std::size_t>(j - 1)];
      f[static_cast<std::size_t>(j)] = std::move(next);
    }
    coeff *= cplx(0.0, -t) / static_cast<double>(n);
    series += coeff * (eps * f[1] + eps * eps * f[2]);
  }
  return (u_pert - (u + series)).norm();
}

SystemBathModel random_system_bath_model(const RandomModelSpec& spec, Rng& rng) {
  const int ds = spec.dim_s;
  const int db = spec.dim_b;
  SystemBathModel m{ds,
                    db,
                    random_hermitian(ds, rng),
                    random_hermitian(db, rng),
                    {},
                    {},
                    random_density(db, rng, spec.bath_rank)};
  for (int i = 0; i < spec.n_couplings; ++i) m.couplings.push_back({random_hermitian(ds, rng), random_hermitian(db, rng)});
  for (int i = 0; i < spec.n_perturbations; ++i) {
    m.perturbations.push_back({random_hermitian(ds, rng), random_hermitian(db, rng)});
  }
  // Rescale every Hamiltonian piece so the spectral norm of H_SB(0) lands
  // in [0.5, max_norm].
  const Operator h = total_hamiltonian(m, 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix(), Eigen::EigenvaluesOnly);
  const double spectral = es.eigenvalues().cwiseAbs().maxCoeff();
  const double target = rng.uniform(0.5, spec.max_norm);
  const double scale = spectral > 0.0 ? target / spectral : 1.0;
  m.h_s *= scale;
  m.h_b *= scale;
  for (auto& term : m.couplings) term.bath *= scale;
  for (auto& term : m.perturbations) term.bath *= scale;
  return m;
}

}  // namespace dfslab
