#include <algorithm>
#include <cmath>

#include "dfslab/fidelity.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace dfslab;
using testing::ket;
using testing::thrown_kind;

namespace {

bool has_diagnostic(const DfsSearchResult& r, const std::string& needle) {
  return std::any_of(r.diagnostics.begin(), r.diagnostics.end(),
                     [&](const std::string& d) { return d.find(needle) != std::string::npos; });
}

Matrix random_unitary(int n, Rng& rng) {
  Matrix x(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) x(i, j) = rng.complex_normal();
  Eigen::HouseholderQR<Matrix> qr(x);
  return qr.householderQ();
}

}  // namespace

TEST_SUITE("dfs") {
  TEST_CASE("collective dephasing on two qubits") {
    const DfsSearchResult r = find_df_subspaces({collective_sigma_z(2)});
    REQUIRE(r.subspaces.size() == 3);
    std::vector<std::pair<double, int>> got;
    for (const auto& s : r.subspaces) got.emplace_back(s.eigenvalues[0].real(), s.size());
    std::sort(got.begin(), got.end());
    CHECK(got == std::vector<std::pair<double, int>>{{-2.0, 1}, {0.0, 2}, {2.0, 1}});
    // The two-dimensional block is spanned by |01⟩ and |10⟩ exactly.
    for (const auto& s : r.subspaces) {
      if (s.size() != 2) continue;
      CHECK((s.basis_vectors[0] - ket(4, 1)).norm() < 1e-12);
      CHECK((s.basis_vectors[1] - ket(4, 2)).norm() < 1e-12);
    }
    CHECK(std::count_if(r.diagnostics.begin(), r.diagnostics.end(),
                        [](const std::string& d) { return d.find("one-dimensional") != std::string::npos; }) == 2);
  }

  TEST_CASE("finder agrees with the joint-eigenspace oracle") {
    // Commuting hermitian set on three qubits.
    const Operator zz01 = single_qubit_operator(pauli_z(), 0, 3) * single_qubit_operator(pauli_z(), 1, 3);
    const Operator zz12 = single_qubit_operator(pauli_z(), 1, 3) * single_qubit_operator(pauli_z(), 2, 3);
    for (const auto& ops : std::vector<std::vector<Operator>>{{collective_sigma_z(3)},
                                                              {collective_sigma_z(3), zz01 + zz12},
                                                              {zz01, zz12}}) {
      std::vector<Matrix> raw;
      for (const auto& o : ops) raw.push_back(o.matrix());
      const auto expected = oracle::joint_eigenspaces(raw);
      std::map<std::vector<long long>, int> got;
      for (const auto& s : find_df_subspaces(ops).subspaces) {
        std::vector<long long> key;
        for (auto c : s.eigenvalues) key.push_back(std::llround(1e6 * c.real()));
        got[key] += s.size();
      }
      CHECK(got == expected);
    }
  }

  TEST_CASE("three-qubit collective dephasing has two three-dimensional subspaces") {
    const DfsSearchResult r = find_df_subspaces({collective_sigma_z(3)});
    std::vector<int> dims;
    for (const auto& s : r.subspaces) dims.push_back(s.size());
    std::sort(dims.begin(), dims.end());
    CHECK(dims == std::vector<int>{1, 1, 3, 3});
  }

  TEST_CASE("independent dephasing leaves only trivial subspaces") {
    const DfsSearchResult r =
        find_df_subspaces({single_qubit_operator(pauli_z(), 0, 2), single_qubit_operator(pauli_z(), 1, 2)});
    CHECK(r.subspaces.size() == 4);
    for (const auto& s : r.subspaces) CHECK(s.is_trivial());
    CHECK(r.diagnostics.size() == 4);
  }

  TEST_CASE("non-normal operators") {
    Matrix lower = Matrix::Zero(2, 2);
    lower(0, 1) = 1.0;  // σ₋ = |0⟩⟨1|
    const DfsSearchResult r = find_df_subspaces({Operator(lower)});
    REQUIRE(r.subspaces.size() == 1);
    CHECK(r.subspaces[0].size() == 1);
    CHECK(std::abs(std::abs(r.subspaces[0].basis_vectors[0](0)) - 1.0) < 1e-12);
    CHECK(std::abs(r.subspaces[0].eigenvalues[0]) < 1e-12);

    // Jordan block plus a separate eigenvalue: only the eigenvector survives.
    Matrix j = Matrix::Zero(3, 3);
    j(0, 0) = j(1, 1) = 1.0;
    j(0, 1) = 1.0;
    j(2, 2) = 3.0;
    const DfsSearchResult rj = find_df_subspaces({Operator(j)});
    int total = 0;
    for (const auto& s : rj.subspaces) {
      total += s.size();
      CHECK(check_df_condition(s, {Operator(j)}).pass);
    }
    CHECK(total == 2);
  }

  TEST_CASE("near-degenerate clusters are reported, not guessed") {
    Matrix d = Matrix::Zero(4, 4);
    d(1, 1) = 5e-10;
    d(2, 2) = 2e-9;
    d(3, 3) = 1.0;
    const DfsSearchResult r = find_df_subspaces({Operator(d)});
    CHECK(has_diagnostic(r, "ill-conditioned"));
    // Only the isolated eigenvalue 1 is resolvable.
    REQUIRE(r.subspaces.size() == 1);
    CHECK(r.subspaces[0].size() == 1);
    CHECK(std::abs(r.subspaces[0].eigenvalues[0] - 1.0) < 1e-12);
  }

  TEST_CASE("hidden subspace in a random frame") {
    Rng rng(71);
    const Matrix v = random_unitary(5, rng);
    const std::vector<cplx> c{cplx(0.7, 0.0), cplx(-1.1, 0.4)};
    std::vector<Operator> ops;
    for (const cplx ci : c) {
      Matrix block = Matrix::Zero(5, 5);
      block(0, 0) = block(1, 1) = ci;
      Matrix rest(3, 3);
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) rest(i, k) = rng.complex_normal();
      block.bottomRightCorner(3, 3) = rest;
      ops.emplace_back(v * block * v.adjoint());
    }
    const DfsSearchResult r = find_df_subspaces(ops);
    const DfSubspace* found = nullptr;
    for (const auto& s : r.subspaces)
      if (s.size() == 2) found = &s;
    REQUIRE(found != nullptr);
    CHECK(std::abs(found->eigenvalues[0] - c[0]) < 1e-9);
    CHECK(std::abs(found->eigenvalues[1] - c[1]) < 1e-9);
    const Matrix p_true = v.leftCols(2) * v.leftCols(2).adjoint();
    CHECK((found->projector().matrix() - p_true).norm() < 1e-9);
    const DfCertificate cert = check_df_condition(*found, ops);
    CHECK(cert.pass);
    for (double res : cert.residuals) CHECK(res < 1e-9);
  }

  TEST_CASE("certificate rejects a subspace that is not decoherence-free") {
    const std::vector<Operator> ops{collective_sigma_z(2)};
    const DfSubspace bad = DfSubspace::from_vectors({ket(4, 0), ket(4, 1)}, ops);
    const DfCertificate cert = check_df_condition(bad, ops);
    CHECK(!cert.pass);
    CHECK(cert.residuals[0] == doctest::Approx(1.0));
    const DfSubspace good = DfSubspace::from_vectors({ket(4, 1) + ket(4, 2), ket(4, 1) - ket(4, 2)}, ops);
    CHECK(check_df_condition(good, ops).pass);
    CHECK(std::abs(good.eigenvalues[0]) < 1e-15);
    CHECK(thrown_kind([&] { (void)DfSubspace::from_vectors({ket(4, 1), 2.0 * ket(4, 1)}, ops); }) ==
          ErrorKind::kInvalidArgument);
  }

  TEST_CASE("Hamiltonian compatibility and scalar action") {
    const DfSubspace s = DfSubspace::from_vectors({ket(4, 1), ket(4, 2)}, {collective_sigma_z(2)});
    CHECK(check_hamiltonian_compatibility(exchange_hamiltonian(1.0), s).pass);
    const CompatibilityReport leak = check_hamiltonian_compatibility(single_qubit_operator(pauli_x(), 0, 2), s);
    CHECK(!leak.pass);
    CHECK(leak.leakage == doctest::Approx(std::sqrt(2.0)));
    // σz⊗σz is −1 on the block; the exchange term rotates inside it.
    CHECK(check_scalar_action(kron(pauli_z(), pauli_z()), s).pass);
    const CompatibilityReport rot = check_scalar_action(exchange_hamiltonian(1.0), s);
    CHECK(!rot.pass);
    CHECK(rot.leakage == doctest::Approx(std::sqrt(2.0)));
  }

  TEST_CASE("memory condition") {
    CHECK(check_memory_condition(exchange_hamiltonian(1.0), dfs_bell_state()));
    CHECK(!check_memory_condition(exchange_hamiltonian(1.0), DensityMatrix::pure(ket(4, 1))));
    CHECK(check_memory_condition(Operator::zero(4), DensityMatrix::pure(ket(4, 1))));
  }

  TEST_CASE("project_state") {
    const DfSubspace s = DfSubspace::from_vectors({ket(4, 1), ket(4, 2)}, {collective_sigma_z(2)});
    Vector coeffs(2);
    coeffs << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    CHECK((project_state(s, coeffs).matrix() - dfs_bell_state().matrix()).norm() < 1e-14);
    CHECK(thrown_kind([&] { (void)project_state(s, Vector::Ones(2)); }) == ErrorKind::kInvalidArgument);
    CHECK(thrown_kind([&] { (void)project_state(s, Vector::Ones(3)); }) == ErrorKind::kDimensionMismatch);
  }

  TEST_CASE("encoded states are untouched by the unperturbed dynamics") {
    const SystemBathModel osr = collective_dephasing_model(2, 3, 1.5);
    const LindbladModel sme = perturbed_dfs_sme(0.8, Operator::zero(4), Operator::zero(4));
    for (double t : {0.5, 2.0, 7.0}) {
      CHECK((evolve_reduced(osr, dfs_bell_state(), t, 0.0).matrix() - dfs_bell_state().matrix()).norm() < 1e-12);
      CHECK((integrate_sme(sme, dfs_bell_state(), t, 0.0).matrix() - dfs_bell_state().matrix()).norm() < 1e-12);
    }
    // A product state outside the subspace decoheres.
    const Vector plus = (ket(4, 0) + ket(4, 1) + ket(4, 2) + ket(4, 3)) / 2.0;
    CHECK(memory_fidelity(osr, DensityMatrix::pure(plus), 2.0, 0.0) < 0.999);
  }

  TEST_CASE("zero coupling is the identity channel") {
    const SystemBathModel m = collective_dephasing_model(2, 2, 0.0);
    Rng rng(4);
    const DensityMatrix rho = random_density(4, rng);
    CHECK((evolve_reduced(m, rho, 3.0, 0.0).matrix() - rho.matrix()).norm() < 1e-12);
  }

  TEST_CASE("builders validate their arguments") {
    CHECK(thrown_kind([] { (void)collective_dephasing_model(1, 2, 1.0); }) == ErrorKind::kInvalidDimension);
    CHECK(thrown_kind([] { (void)collective_dephasing_model(5, 4, 1.0); }) == ErrorKind::kInvalidDimension);
    CHECK(thrown_kind([] { (void)single_qubit_operator(pauli_x(), 2, 2); }) == ErrorKind::kInvalidArgument);
    CHECK(thrown_kind([] { (void)find_df_subspaces({}); }) == ErrorKind::kInvalidArgument);
    CHECK(thrown_kind([] { (void)find_df_subspaces({pauli_z(), collective_sigma_z(2)}); }) ==
          ErrorKind::kDimensionMismatch);
    CHECK(thrown_kind([] { (void)find_df_subspaces({pauli_z()}, 0.0); }) == ErrorKind::kInvalidArgument);
    const SystemBathModel m = collective_dephasing_model(2, 2, 1.0, 99);
    CHECK(m.h_s.norm() == 0.0);
    CHECK(std::abs(m.rho_b.matrix()(0, 0) - 2.0 / 3.0) < 1e-15);
  }
}
