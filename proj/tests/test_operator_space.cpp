#include <numbers>

#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace dfslab;
using testing::thrown_kind;

TEST_SUITE("operator_space") {
  TEST_CASE("su(2) basis is the Pauli set over sqrt 2") {
    const OperatorBasis b = su_basis(2);
    REQUIRE(b.size() == 4);
    CHECK((b[0].matrix() - Matrix::Identity(2, 2)).norm() == doctest::Approx(0.0));
    const std::vector<Operator> paulis{pauli_x(), pauli_y(), pauli_z()};
    for (int a = 1; a < 4; ++a) {
      CHECK(std::abs(b[a].trace()) < 1e-15);
      bool matched = false;
      for (const auto& p : paulis) {
        const Matrix target = p.matrix() / std::sqrt(2.0);
        if ((b[a].matrix() - target).norm() < 1e-14 || (b[a].matrix() + target).norm() < 1e-14) matched = true;
      }
      CHECK(matched);
    }
  }

  TEST_CASE("su(n) generators are hermitian, traceless and orthonormal") {
    for (int n : {3, 4, 5}) {
      const OperatorBasis b = su_basis(n);
      REQUIRE(b.size() == n * n);
      CHECK(b.is_complete());
      Matrix gram(b.m(), b.m());
      for (int x = 1; x < b.size(); ++x) {
        CHECK(b[x].is_hermitian(1e-14));
        CHECK(std::abs(b[x].trace()) < 1e-14);
        // Plain entrywise sum, independent of hs_inner.
        for (int y = 1; y < b.size(); ++y) {
          cplx s = 0;
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s += b[x](i, j) * std::conj(b[y](i, j));
          gram(x - 1, y - 1) = s;
        }
      }
      CHECK((gram - Matrix::Identity(b.m(), b.m())).norm() < 1e-12);
    }
  }

  TEST_CASE("su_basis rejects n < 2") {
    CHECK(thrown_kind([] { (void)su_basis(1); }) == ErrorKind::kInvalidDimension);
  }

  TEST_CASE("basis validation catches a non-orthogonal element") {
    std::vector<Operator> els{Operator::identity(2), pauli_x(), pauli_x()};
    CHECK_THROWS_AS(OperatorBasis{els}, Error);
  }

  TEST_CASE("hs_inner") {
    CHECK(hs_inner(Operator::identity(2), Operator::identity(2)) == cplx(2.0));
    CHECK(std::abs(hs_inner(pauli_x(), pauli_y())) < 1e-15);
    Rng rng(7);
    const Operator a = random_operator(5, rng);
    const cplx v = hs_inner(a, a);
    double sum = 0.0;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) sum += std::norm(a(i, j));
    CHECK(std::abs(v.imag()) < 1e-14);
    CHECK(v.real() == doctest::Approx(sum).epsilon(1e-13));
    CHECK(thrown_kind([] { (void)hs_inner(Operator::identity(2), Operator::identity(3)); }) ==
          ErrorKind::kDimensionMismatch);
  }

  TEST_CASE("kron matches the loop oracle") {
    Rng rng(3);
    const Operator a = random_operator(2, rng);
    const Operator b = random_operator(3, rng);
    CHECK((kron(a, b).matrix() - oracle::kron(a.matrix(), b.matrix())).norm() < 1e-15);
  }

  TEST_CASE("partial trace over the bath") {
    Rng rng(11);
    const DensityMatrix rho = random_density(3, rng);
    const DensityMatrix rho_b = random_density(2, rng);
    CHECK((partial_trace_bath(kron(rho.op(), rho_b.op()), 3, 2).matrix() - rho.matrix()).norm() < 1e-14);
    CHECK((partial_trace_bath(Operator::identity(4), 2, 2).matrix() - 2.0 * Matrix::Identity(2, 2)).norm() == 0.0);

    const Operator h = random_hermitian(12, rng);
    const Operator r = partial_trace_bath(h, 3, 4);
    CHECK((r.matrix() - oracle::partial_trace_bath(h.matrix(), 3, 4)).norm() < 1e-13);
    CHECK(r.is_hermitian());
    CHECK(std::abs(r.trace() - h.trace()) < 1e-13);
    CHECK(thrown_kind([&] { (void)partial_trace_bath(h, 5, 2); }) == ErrorKind::kDimensionMismatch);
  }

  TEST_CASE("reduced state of a unitary joint evolution is a state") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      const Operator h = random_hermitian(6, rng);
      const DensityMatrix rho = random_density(3, rng);
      const DensityMatrix rho_b = random_density(2, rng);
      const Matrix u = propagator(h, 0.8).matrix();
      const Matrix joint = u * kron(rho.op(), rho_b.op()).matrix() * u.adjoint();
      const Operator red = partial_trace_bath(Operator(joint), 3, 2);
      CHECK(std::abs(red.trace() - 1.0) < 1e-12);
      CHECK(min_hermitian_eigenvalue(red) >= -1e-10);
    }
  }

  TEST_CASE("propagator") {
    CHECK((propagator(pauli_z(), 0.0).matrix() - Matrix::Identity(2, 2)).norm() < 1e-15);
    const Matrix u = propagator(pauli_z(), std::numbers::pi / 2).matrix();
    CHECK(std::abs(u(0, 0) - std::exp(cplx(0, -std::numbers::pi / 2))) < 1e-15);
    CHECK(std::abs(u(1, 1) - std::exp(cplx(0, std::numbers::pi / 2))) < 1e-15);

    Rng rng(21);
    const Operator h = random_hermitian(4, rng);
    const Matrix u1 = propagator(h, 0.3).matrix();
    const Matrix u2 = propagator(h, 1.1).matrix();
    CHECK((u1 * u2 - propagator(h, 1.4).matrix()).norm() < 1e-12);
    CHECK((propagator(h, 1.4).matrix() - oracle::unitary(h.matrix(), 1.4)).norm() < 1e-12);
    CHECK(unitarity_defect(propagator(h, 3.0)) < 1e-12);

    const HermitianPropagator cached(h);
    CHECK((cached.at(1.4).matrix() - propagator(h, 1.4).matrix()).norm() < 1e-14);
    CHECK(thrown_kind([&] { (void)propagator(random_operator(3, rng), 1.0); }) == ErrorKind::kNotHermitian);
  }

  TEST_CASE("nested_adjoint") {
    Rng rng(8);
    const Operator h = random_hermitian(3, rng);
    const Operator x = random_hermitian(3, rng);
    CHECK((nested_adjoint(h, x, 0).matrix() - x.matrix()).norm() == 0.0);
    const Operator d1 = Operator(testing::diag2(1.0, 2.0));
    const Operator d2 = Operator(testing::diag2(-3.0, 0.5));
    CHECK(nested_adjoint(d1, d2, 1).norm() == 0.0);
    CHECK(nested_adjoint(d1, d2, 3).norm() == 0.0);
    const Matrix hm = h.matrix(), xm = x.matrix();
    const Matrix c1 = hm * xm - xm * hm;
    const Matrix c2 = hm * c1 - c1 * hm;
    CHECK((nested_adjoint(h, x, 2).matrix() - c2).norm() < 1e-13);
  }

  TEST_CASE("Heisenberg derivative at the origin") {
    Rng rng(19);
    const Operator h = random_hermitian(4, rng);
    const Operator x = random_hermitian(4, rng);
    auto conj = [&](double t) {
      const Matrix u = propagator(h, t).matrix();
      return Matrix(u * x.matrix() * u.adjoint());
    };
    const double step = 1e-5;
    const Matrix fd = (conj(step) - conj(-step)) / (2 * step);
    const Matrix exact = cplx(0, -1) * commutator(h, x).matrix();
    CHECK((fd - exact).norm() <= 1e-8);
  }

  TEST_CASE("Operator and DensityMatrix validation") {
    Matrix bad = Matrix::Identity(2, 2);
    bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK(thrown_kind([&] { Operator o(bad); }) == ErrorKind::kNonFinite);
    CHECK(thrown_kind([] { Operator o(Matrix::Zero(2, 3)); }) == ErrorKind::kInvalidDimension);
    CHECK(thrown_kind([] { Operator o(Matrix(0, 0)); }) == ErrorKind::kInvalidDimension);
    CHECK(thrown_kind([] { DensityMatrix d(Operator::identity(2)); }) == ErrorKind::kNotDensityMatrix);
    CHECK(thrown_kind([] { DensityMatrix d(Operator(testing::diag2(1.5, -0.5))); }) == ErrorKind::kNotDensityMatrix);
    CHECK(thrown_kind([] { DensityMatrix d(pauli_y()); }) != ErrorKind::kConfig);
    CHECK(DensityMatrix::maximally_mixed(4).purity() == doctest::Approx(0.25));
    CHECK(testing::plus_state().purity() == doctest::Approx(1.0));
  }

  TEST_CASE("operator arithmetic checks dimensions") {
    Operator a = Operator::identity(2);
    CHECK(thrown_kind([&] { a += Operator::identity(3); }) == ErrorKind::kDimensionMismatch);
    CHECK(thrown_kind([&] { (void)(a * Operator::identity(3)); }) == ErrorKind::kDimensionMismatch);
    CHECK(((2.0 * a) - a - a).norm() == 0.0);
  }

  TEST_CASE("error kinds have names") {
    CHECK(to_string(ErrorKind::kSingularHamiltonian) == "singular-hamiltonian");
    const Error e(ErrorKind::kConfig, "x");
    CHECK(std::string(e.what()).find("x") != std::string::npos);
  }

  TEST_CASE("random density matrices are valid with the requested rank") {
    Rng rng(2);
    const DensityMatrix r = random_density(4, rng, 2);
    Eigen::SelfAdjointEigenSolver<Matrix> es(r.matrix());
    int rank = 0;
    for (int i = 0; i < 4; ++i) rank += es.eigenvalues()(i) > 1e-12;
    CHECK(rank == 2);
  }
}
