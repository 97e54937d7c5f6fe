#include "dfslab/dfs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "dfslab/error.hpp"

namespace dfslab {

namespace {

double spectral_norm(const Matrix& m) {
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

bool eig_before(cplx a, cplx b) {
  if (a.real() != b.real()) return a.real() > b.real();
  return a.imag() > b.imag();
}

std::string format_c(cplx c) {
  std::ostringstream os;
  os.precision(6);
  os << "(" << c.real() << (c.imag() < 0 ? "" : "+") << c.imag() << "i)";
  return os.str();
}

// Presentation basis: Gram-Schmidt on P|e_i⟩ in index order, so subspaces
// spanned by computational states come out as those states.
Matrix presentation_basis(const Matrix& q) {
  const Eigen::Index d = q.rows();
  const Eigen::Index k = q.cols();
  const Matrix p = q * q.adjoint();
  Matrix out(d, k);
  Eigen::Index filled = 0;
  for (Eigen::Index i = 0; i < d && filled < k; ++i) {
    Vector v = p.col(i);
    for (Eigen::Index j = 0; j < filled; ++j) v -= out.col(j).dot(v) * out.col(j);
    for (Eigen::Index j = 0; j < filled; ++j) v -= out.col(j).dot(v) * out.col(j);
    const double n = v.norm();
    if (n < 1e-6) continue;
    out.col(filled++) = v / n;
  }
  if (filled < k) return q;
  return out;
}

void check_ops(const std::vector<Operator>& ops) {
  if (ops.empty()) throw Error(ErrorKind::kInvalidArgument, "need at least one operator");
  for (const auto& op : ops) {
    if (op.dim() != ops.front().dim()) throw Error(ErrorKind::kDimensionMismatch, "operators differ in dim");
  }
}

struct Search {
  const std::vector<Operator>& ops;
  std::vector<double> scales;
  double tol;
  DfsSearchResult& out;

  void run(std::size_t j, const Matrix& q, std::vector<cplx> cs) {
    if (j == ops.size()) {
      emit(q, std::move(cs));
      return;
    }
    const Matrix& op = ops[j].matrix();
    const double cluster_tol = tol * scales[j];
    const Matrix compressed = q.adjoint() * op * q;
    Eigen::ComplexEigenSolver<Matrix> es(compressed, false);
    std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(ev.begin(), ev.end(), eig_before);

    // Single-linkage clustering.
    std::vector<std::size_t> parent(ev.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (std::size_t a = 0; a < ev.size(); ++a) {
      for (std::size_t b = a + 1; b < ev.size(); ++b) {
        if (std::abs(ev[a] - ev[b]) <= cluster_tol) parent[find(b)] = find(a);
      }
    }
    std::vector<std::vector<std::size_t>> clusters;
    std::vector<std::size_t> root_slot(ev.size(), ev.size());
    for (std::size_t a = 0; a < ev.size(); ++a) {
      const std::size_t r = find(a);
      if (root_slot[r] == ev.size()) {
        root_slot[r] = clusters.size();
        clusters.emplace_back();
      }
      clusters[root_slot[r]].push_back(a);
    }

    for (const auto& cl : clusters) {
      cplx center = 0.0;
      for (auto i : cl) center += ev[i];
      center /= static_cast<double>(cl.size());
      double diameter = 0.0;
      for (auto a : cl) {
        for (auto b : cl) diameter = std::max(diameter, std::abs(ev[a] - ev[b]));
      }
      double gap = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < ev.size(); ++i) {
        if (std::find(cl.begin(), cl.end(), i) == cl.end()) gap = std::min(gap, std::abs(ev[i] - center));
      }
      const double null_tol = 10.0 * cluster_tol;
      // A cluster closer to its neighbours than the null-space threshold
      // cannot be separated from them either.
      if ((diameter > 0.0 && gap <= 10.0 * diameter) || gap <= null_tol) {
        out.diagnostics.push_back("ill-conditioned clustering: operator " + std::to_string(j) + " eigenvalue " +
                                  format_c(center) + " diameter " + std::to_string(diameter) + " gap " +
                                  std::to_string(gap));
        continue;
      }
      const Matrix shifted = (op - center * Matrix::Identity(op.rows(), op.cols())) * q;
      Eigen::JacobiSVD<Matrix> svd(shifted, Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      std::vector<Eigen::Index> null_cols;
      for (Eigen::Index i = 0; i < q.cols(); ++i) {
        const double s = i < sv.size() ? sv(i) : 0.0;
        if (s <= null_tol) null_cols.push_back(i);
      }
      if (null_cols.empty()) continue;
      Matrix v(q.cols(), static_cast<Eigen::Index>(null_cols.size()));
      for (std::size_t c = 0; c < null_cols.size(); ++c) {
        v.col(static_cast<Eigen::Index>(c)) = svd.matrixV().col(null_cols[c]);
      }
      const Matrix q_next = q * v;
      const cplx c_fit = (q_next.adjoint() * op * q_next).trace() / static_cast<double>(q_next.cols());
      auto cs_next = cs;
      cs_next.push_back(c_fit);
      run(j + 1, q_next, std::move(cs_next));
    }
  }

  void emit(const Matrix& q, std::vector<cplx> cs) {
    const Matrix basis = presentation_basis(q);
    DfSubspace s{static_cast<int>(q.rows()), {}, std::move(cs)};
    for (Eigen::Index i = 0; i < basis.cols(); ++i) s.basis_vectors.emplace_back(basis.col(i));
    if (s.is_trivial()) {
      std::string c;
      for (auto x : s.eigenvalues) c += format_c(x);
      out.diagnostics.push_back("one-dimensional subspace " + c + " carries no encoded qubit");
    }
    out.subspaces.push_back(std::move(s));
  }
};

Operator kron_all(const std::vector<Operator>& factors) {
  Operator acc = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) acc = kron(acc, factors[i]);
  return acc;
}

Operator unit_spectral(const Operator& h) {
  const double n = spectral_norm(h.matrix());
  return n > 0.0 ? (1.0 / n) * h : h;
}

}  // namespace

DfSubspace DfSubspace::from_vectors(const std::vector<Vector>& vectors, const std::vector<Operator>& ops) {
  if (vectors.empty()) throw Error(ErrorKind::kInvalidArgument, "subspace needs at least one vector");
  const auto d = vectors.front().size();
  Matrix q(d, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != d) throw Error(ErrorKind::kDimensionMismatch, "vectors differ in length");
    Vector v = vectors[i];
    for (std::size_t j = 0; j < i; ++j) v -= q.col(static_cast<Eigen::Index>(j)).dot(v) * q.col(static_cast<Eigen::Index>(j));
    const double n = v.norm();
    if (n < 1e-12) throw Error(ErrorKind::kInvalidArgument, "vectors are linearly dependent");
    q.col(static_cast<Eigen::Index>(i)) = v / n;
  }
  DfSubspace s{static_cast<int>(d), {}, {}};
  for (Eigen::Index i = 0; i < q.cols(); ++i) s.basis_vectors.emplace_back(q.col(i));
  for (const auto& op : ops) {
    if (op.dim() != d) throw Error(ErrorKind::kDimensionMismatch, "operator dim does not match vectors");
    s.eigenvalues.push_back((q.adjoint() * op.matrix() * q).trace() / static_cast<double>(q.cols()));
  }
  return s;
}

Matrix DfSubspace::basis_matrix() const {
  Matrix q(dim, size());
  for (int i = 0; i < size(); ++i) q.col(i) = basis_vectors[static_cast<std::size_t>(i)];
  return q;
}

Operator DfSubspace::projector() const {
  const Matrix q = basis_matrix();
  return Operator(q * q.adjoint());
}

DfsSearchResult find_df_subspaces(const std::vector<Operator>& ops, double tol) {
  check_ops(ops);
  if (!(tol > 0.0)) throw Error(ErrorKind::kInvalidArgument, "tolerance must be positive");
  DfsSearchResult result;
  Search search{ops, {}, tol, result};
  for (const auto& op : ops) search.scales.push_back(std::max(1.0, spectral_norm(op.matrix())));
  const int d = ops.front().dim();
  search.run(0, Matrix::Identity(d, d), {});
  return result;
}

DfCertificate check_df_condition(const DfSubspace& s, const std::vector<Operator>& ops, double tol) {
  const Matrix q = s.basis_matrix();
  DfCertificate cert;
  cert.pass = true;
  for (const auto& op : ops) {
    if (op.dim() != s.dim) throw Error(ErrorKind::kDimensionMismatch, "operator dim does not match subspace");
    const cplx c = (q.adjoint() * op.matrix() * q).trace() / static_cast<double>(q.cols());
    const Matrix r = op.matrix() * q - c * q;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < r.cols(); ++i) worst = std::max(worst, r.col(i).norm());
    cert.residuals.push_back(worst);
    cert.fitted_eigenvalues.push_back(c);
    if (worst > tol) cert.pass = false;
  }
  return cert;
}

CompatibilityReport check_hamiltonian_compatibility(const Operator& h, const DfSubspace& s, double tol) {
  if (h.dim() != s.dim) throw Error(ErrorKind::kDimensionMismatch, "Hamiltonian dim does not match subspace");
  const Matrix p = s.projector().matrix();
  const Matrix leak = (Matrix::Identity(s.dim, s.dim) - p) * h.matrix() * p;
  const double l = leak.norm();
  return {l, l <= tol};
}

CompatibilityReport check_scalar_action(const Operator& h, const DfSubspace& s, double tol) {
  if (h.dim() != s.dim) throw Error(ErrorKind::kDimensionMismatch, "operator dim does not match subspace");
  const Matrix q = s.basis_matrix();
  const Matrix block = q.adjoint() * h.matrix() * q;
  const cplx c = block.trace() / static_cast<double>(q.cols());
  const double off = (block - c * Matrix::Identity(q.cols(), q.cols())).norm();
  const double l = std::max(off, check_hamiltonian_compatibility(h, s, tol).leakage);
  return {l, l <= tol};
}

bool check_memory_condition(const Operator& h, const DensityMatrix& rho, double tol) {
  if (h.dim() != rho.dim()) throw Error(ErrorKind::kDimensionMismatch, "Hamiltonian dim does not match state");
  return commutator(h, rho.op()).norm() <= tol;
}

DensityMatrix project_state(const DfSubspace& s, const Vector& coeffs) {
  if (coeffs.size() != s.size()) throw Error(ErrorKind::kDimensionMismatch, "coefficient count != subspace dim");
  if (std::abs(coeffs.norm() - 1.0) > 1e-10) throw Error(ErrorKind::kInvalidArgument, "coefficients not normalized");
  return DensityMatrix::pure(s.basis_matrix() * coeffs);
}

Operator pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return Operator(m);
}

Operator pauli_y() {
  Matrix m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return Operator(m);
}

Operator pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return Operator(m);
}

Operator single_qubit_operator(const Operator& sigma, int which, int n_qubits) {
  if (n_qubits < 1 || which < 0 || which >= n_qubits) throw Error(ErrorKind::kInvalidArgument, "bad qubit index");
  std::vector<Operator> f(static_cast<std::size_t>(n_qubits), Operator::identity(2));
  f[static_cast<std::size_t>(which)] = sigma;
  return kron_all(f);
}

Operator collective_sigma_z(int n_qubits) {
  if (n_qubits < 1 || n_qubits > 6) throw Error(ErrorKind::kInvalidDimension, "qubit count out of range");
  Operator s = Operator::zero(1 << n_qubits);
  for (int i = 0; i < n_qubits; ++i) s += single_qubit_operator(pauli_z(), i, n_qubits);
  return s;
}

SystemBathModel collective_dephasing_model(int n_qubits, int bath_dim, double coupling, std::uint64_t seed) {
  if (n_qubits < 2) throw Error(ErrorKind::kInvalidDimension, "collective dephasing needs >= 2 qubits");
  if (bath_dim < 2) throw Error(ErrorKind::kInvalidDimension, "collective dephasing needs bath_dim >= 2");
  if (n_qubits > 5 || (1 << n_qubits) * bath_dim > kMaxDim) {
    throw Error(ErrorKind::kInvalidDimension, "joint dimension exceeds 64");
  }
  if (!std::isfinite(coupling)) throw Error(ErrorKind::kNonFinite, "coupling must be finite");
  Rng rng(seed);
  const Operator b = unit_spectral(random_hermitian(bath_dim, rng));
  const Operator h_b = unit_spectral(random_hermitian(bath_dim, rng));
  Matrix w = Matrix::Zero(bath_dim, bath_dim);
  double total = 0.0;
  for (int k = 0; k < bath_dim; ++k) total += std::ldexp(1.0, -k);
  for (int k = 0; k < bath_dim; ++k) w(k, k) = std::ldexp(1.0, -k) / total;
  const int ds = 1 << n_qubits;
  SystemBathModel m{ds,
                    bath_dim,
                    Operator::zero(ds),
                    h_b,
                    {{collective_sigma_z(n_qubits), coupling * b}},
                    {},
                    DensityMatrix(Operator(w))};
  m.validate();
  return m;
}

Operator exchange_hamiltonian(double omega) {
  const Operator xx = kron(pauli_x(), pauli_x());
  const Operator yy = kron(pauli_y(), pauli_y());
  return (omega / 2.0) * (xx + yy);
}

SystemBathModel perturbed_dfs_model(double coupling, const Operator& h_s, std::uint64_t seed) {
  SystemBathModel m = collective_dephasing_model(2, 2, coupling, seed);
  if (h_s.dim() != 4) throw Error(ErrorKind::kDimensionMismatch, "h_s must act on two qubits");
  m.h_s = h_s;
  Rng rng(seed + 1);
  m.perturbations.push_back({single_qubit_operator(pauli_x(), 0, 2), unit_spectral(random_hermitian(2, rng))});
  m.validate();
  return m;
}

LindbladModel perturbed_dfs_sme(double gamma, const Operator& h_eff, const Operator& h_lamb_pert) {
  Matrix one(1, 1);
  one(0, 0) = gamma;
  LindbladPerturbation p{{single_qubit_operator(pauli_x(), 0, 2)}, one, 0.0, h_lamb_pert, one};
  LindbladModel m{4, h_eff, {collective_sigma_z(2)}, one, std::move(p)};
  m.validate();
  return m;
}

DensityMatrix dfs_bell_state() {
  Vector psi = Vector::Zero(4);
  psi(1) = psi(2) = 1.0 / std::sqrt(2.0);
  return DensityMatrix::pure(psi);
}

}  // namespace dfslab
