#include <cmath>

#include "dfslab/fidelity.hpp"
#include "dfslab/fixed_basis_osr.hpp"
#include "dfslab/table1.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace dfslab;
using testing::ket;
using testing::thrown_kind;

namespace {

SystemBathModel small_model(std::uint64_t seed) {
  Rng rng(seed);
  return random_system_bath_model({2, 2, 2, 1, 2.0, 0}, rng);
}

DensityMatrix random_pure(int dim, std::uint64_t seed) {
  Rng rng(seed);
  return DensityMatrix::pure(random_state_vector(dim, rng));
}

std::vector<double> log_grid(double a, double b, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(a * std::pow(b / a, static_cast<double>(i) / (n - 1)));
  return g;
}

LindbladModel qubit_dephasing_sme(double gamma) {
  Matrix a(1, 1);
  a(0, 0) = gamma;
  return {2, Operator::zero(2), {pauli_z()}, a, std::nullopt};
}

}  // namespace

TEST_SUITE("fidelity") {
  TEST_CASE("memory fidelity of simple pairs") {
    const DensityMatrix zero = DensityMatrix::pure(ket(2, 0));
    const DensityMatrix one = DensityMatrix::pure(ket(2, 1));
    CHECK(memory_fidelity(zero, zero) == doctest::Approx(1.0));
    CHECK(memory_fidelity(zero, one) == doctest::Approx(0.0));
    CHECK(memory_fidelity(DensityMatrix::maximally_mixed(4), DensityMatrix::maximally_mixed(4)) ==
          doctest::Approx(0.25));
    CHECK(thrown_kind([&] { (void)memory_fidelity(zero, DensityMatrix::maximally_mixed(3)); }) ==
          ErrorKind::kDimensionMismatch);
  }

  TEST_CASE("signed roots") {
    CHECK(signed_root(-8.0, 3) == doctest::Approx(-2.0));
    CHECK(signed_root(16.0, 4) == doctest::Approx(2.0));
    CHECK(signed_root(-4.0, 2) == doctest::Approx(-2.0));
    CHECK(thrown_kind([] { (void)signed_root(1.0, 0); }) == ErrorKind::kInvalidArgument);
  }

  TEST_CASE("OSR rate terms match finite differences of the fidelity") {
    const SystemBathModel m = small_model(7);
    const DensityMatrix rho = random_pure(2, 8);
    const RateReport r = osr_rate_terms(m, rho, 4, 0.1);
    REQUIRE(r.terms.size() == 4);
    auto f = [&](double t) { return memory_fidelity(m, rho, t, 0.1); };
    const double h = 1e-3;
    CHECK(r.term(1) == doctest::Approx((f(h) - f(-h)) / (2 * h)).epsilon(1e-6));
    CHECK(std::abs(r.term(1)) < 1e-12);
    CHECK(r.term(2) == doctest::Approx((f(h) - 2 * f(0) + f(-h)) / (h * h)).epsilon(1e-4));
    const double h3 = 1e-2;
    const double d3 = (f(2 * h3) - 2 * f(h3) + 2 * f(-h3) - f(-2 * h3)) / (2 * h3 * h3 * h3);
    CHECK(std::abs(r.term(3) - d3) < 1e-3 * std::max(1.0, std::abs(d3)));
    // Taylor series against the evolved fidelity at a short time.
    const double t = 0.05;
    double series = f(0.0);
    double fact = 1.0;
    for (int n = 1; n <= 4; ++n) {
      fact *= n;
      series += r.term(n) * std::pow(t, n) / fact;
    }
    CHECK(series == doctest::Approx(f(t)).epsilon(1e-7));
    CHECK(r.terms[1].root == doctest::Approx(signed_root(r.term(2), 2)));
    CHECK(thrown_kind([&] { (void)r.term(9); }) == ErrorKind::kInvalidArgument);
    CHECK(thrown_kind([&] { (void)osr_rate_terms(m, rho, 7, 0.0); }) == ErrorKind::kInvalidArgument);
  }

  TEST_CASE("SME rate terms match finite differences") {
    const LindbladModel sme = coarse_grain_to_sme(small_model(11), 0.5);
    const DensityMatrix rho = random_pure(2, 12);
    const RateReport r = sme_rate_terms(sme, rho, 3, 0.0);
    auto f = [&](double t) {
      return memory_fidelity(rho, DensityMatrix::unchecked_positivity(
                                      propagate_operator(liouvillian_matrix(sme, 0.0), rho.op(), t)));
    };
    const double h = 1e-4;
    CHECK(r.term(1) == doctest::Approx((f(h) - f(-h)) / (2 * h)).epsilon(1e-6));
    CHECK(r.term(2) == doctest::Approx((f(1e-3) - 2 * f(0) + f(-1e-3)) / 1e-6).epsilon(1e-4));
    CHECK(r.method == "truncated-generator");
  }

  TEST_CASE("explicit propagators have no exact rate expansion") {
    const JointPropagator p = phase_damping_propagator(1.0);
    CHECK(thrown_kind([&] { (void)osr_rate_terms(p, testing::plus_state(), 2); }) == ErrorKind::kUnsupported);
  }

  TEST_CASE("phase damping: first-order memory rate") {
    // F(t) = (1 + e^{−λt})/2 on |+⟩, so the rate is −λ/2 there.
    for (double lambda : {1.0, 2.0}) {
      const JointPropagator p = phase_damping_propagator(lambda);
      CHECK(first_order_rate(p, testing::plus_state()) == doctest::Approx(-lambda / 2).epsilon(1e-6));
      CHECK(std::abs(first_order_rate(p, DensityMatrix::pure(ket(2, 0)))) < 1e-9);
      const PureStateMinimum best = minimize_first_order_rate(p);
      CHECK(best.rate == doctest::Approx(-lambda / 2).epsilon(1e-6));
      CHECK(best.theta == doctest::Approx(std::numbers::pi / 2).epsilon(1e-3));
    }
    CHECK(thrown_kind([] { (void)first_order_rate(phase_damping_propagator(1.0), testing::plus_state(), 0.0); }) ==
          ErrorKind::kInvalidArgument);
  }

  TEST_CASE("Markovian dephasing has a nonzero first-order rate") {
    const LindbladModel sme = qubit_dephasing_sme(0.5);
    CHECK(first_order_rate(sme, testing::plus_state(), 0.0) == doctest::Approx(-0.5));
    CHECK(std::abs(first_order_rate(sme, DensityMatrix::pure(ket(2, 1)), 0.0)) < 1e-15);
  }

  TEST_CASE("log-log fit on synthetic power laws") {
    const auto g = log_grid(1e-3, 1e-1, 9);
    std::vector<double> d;
    for (double x : g) d.push_back(3.0 * x * x);
    const ScalingFit f = fit_loglog(ScalingAxis::kEps, g, d);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(std::log(3.0)));
    CHECK(f.r_squared == doctest::Approx(1.0));
    CHECK(f.certified);
    CHECK(f.slope == doctest::Approx(oracle::loglog_slope(g, d)));

    std::vector<double> with_floor = d;
    with_floor[0] = 1e-15;
    const ScalingFit fl = fit_loglog(ScalingAxis::kEps, g, with_floor);
    CHECK(fl.excluded[0]);
    CHECK(fl.slope == doctest::Approx(2.0));
    CHECK(!fl.diagnostic.empty());

    const ScalingFit sk = fit_loglog(ScalingAxis::kTime, g, std::vector<double>(g.size(), 1e-13));
    CHECK(sk.skipped);
    CHECK(thrown_kind([&] { (void)fit_loglog(ScalingAxis::kEps, g, {1.0}); }) == ErrorKind::kDimensionMismatch);
  }

  TEST_CASE("scan grid validation") {
    auto quad = [](double x) { return x * x; };
    CHECK(thrown_kind([&] { (void)scaling_scan(ScalingAxis::kEps, {1e-2}, quad); }) == ErrorKind::kInvalidGrid);
    CHECK(thrown_kind([&] { (void)scaling_scan(ScalingAxis::kEps, {1e-3, 1e-3, 1e-1}, quad); }) ==
          ErrorKind::kInvalidGrid);
    CHECK(thrown_kind([&] { (void)scaling_scan(ScalingAxis::kEps, {-1e-3, 1e-1}, quad); }) ==
          ErrorKind::kInvalidGrid);
    CHECK(thrown_kind([&] { (void)scaling_scan(ScalingAxis::kEps, {1e-2, 1e-1}, quad); }) ==
          ErrorKind::kInvalidGrid);
    CHECK(thrown_kind([&] { (void)scaling_scan(ScalingAxis::kEps, {1e-2, 1.0}, quad); }) ==
          ErrorKind::kInvalidGrid);
    const ScalingFit ok = scaling_scan(ScalingAxis::kEps, {1e-3, 1e-2, 1e-1}, quad);
    CHECK(ok.certified);
    CHECK(!ok.refined);
  }

  TEST_CASE("scan refines once when the fit is poor") {
    auto wiggly = [](double x) { return x * x * (1.0 + 0.5 * std::sin(40.0 * std::log(x))); };
    const ScalingFit f = scaling_scan(ScalingAxis::kEps, log_grid(1e-4, 1e-2, 5), wiggly);
    CHECK(f.refined);
    CHECK(f.grid.size() == 9);
    CHECK(!f.certified);
    CHECK(f.diagnostic.find("after one refinement") != std::string::npos);
  }

  TEST_CASE("perturbed DFS: epsilon scaling in both pictures") {
    const SystemBathModel osr = perturbed_dfs_model(1.0, Operator::zero(4));
    const ScalingFit fo = epsilon_sensitivity(osr, dfs_bell_state(), 1.0, log_grid(1e-3, 1e-1, 7));
    CHECK(fo.certified);
    CHECK(fo.slope == doctest::Approx(2.0).epsilon(0.05));
    const LindbladModel sme = perturbed_dfs_sme(0.5, Operator::zero(4), kron(pauli_x(), pauli_x()));
    const ScalingFit fs = epsilon_sensitivity(sme, dfs_bell_state(), 1.0, log_grid(1e-3, 1e-1, 7));
    CHECK(fs.certified);
    CHECK(fs.slope == doctest::Approx(2.0).epsilon(0.05));
  }

  TEST_CASE("unperturbed DFS: nothing to fit") {
    const SystemBathModel osr = collective_dephasing_model(2, 2, 1.0);
    const ScalingFit f = epsilon_sensitivity(osr, dfs_bell_state(), 1.0, log_grid(1e-3, 1e-1, 5));
    CHECK(f.skipped);
  }

  TEST_CASE("time scaling of the memory deficit") {
    const DensityMatrix rho = random_pure(2, 5);
    const ScalingFit fo = time_scaling(small_model(3), rho, log_grid(1e-3, 1e-1, 7), 0.0, FidelityKind::kMemory);
    CHECK(fo.slope == doctest::Approx(2.0).epsilon(0.02));
    const ScalingFit fs =
        time_scaling(qubit_dephasing_sme(0.3), testing::plus_state(), log_grid(1e-4, 1e-2, 7), 0.0,
                     FidelityKind::kMemory);
    CHECK(fs.slope == doctest::Approx(1.0).epsilon(0.02));
  }

  TEST_CASE("dynamical terms: finite differences agree with the Leibniz route") {
    const SystemBathModel m = small_model(19);
    const DensityMatrix rho = random_pure(2, 20);
    const RateReport fd = dynamical_rate_terms(m, rho, 4, 0.05);
    const RateReport ex = dynamical_rate_terms(m, rho, 4, 0.05, DerivativeMethod::kExact);
    for (int n = 1; n <= 4; ++n) {
      CHECK(std::abs(fd.term(n) - ex.term(n)) < 1e-5 * std::max(1.0, std::abs(ex.term(n))));
    }
    CHECK(ex.method == "leibniz");
    // Isolated system: the target is followed exactly.
    const RateReport iso = dynamical_rate_terms(m.isolated(), rho, 4, 0.0, DerivativeMethod::kExact);
    for (const auto& t : iso.terms) CHECK(std::abs(t.value) < 1e-10);

    const LindbladModel sme = perturbed_dfs_sme(0.5, exchange_hamiltonian(1.0), Operator::zero(4));
    const DensityMatrix start = DensityMatrix::pure(ket(4, 1));
    const RateReport sfd = dynamical_rate_terms(sme, start, 4, 0.1, GeneratorMode::kExact);
    const RateReport sex = dynamical_rate_terms(sme, start, 4, 0.1, GeneratorMode::kExact, DerivativeMethod::kExact);
    for (int n = 1; n <= 4; ++n) {
      CHECK(std::abs(sfd.term(n) - sex.term(n)) < 1e-5 * std::max(1.0, std::abs(sex.term(n))));
    }
  }

  TEST_CASE("epsilon derivative stencil") {
    const EpsilonDerivative d = epsilon_derivative([](double e) { return 1.0 + 3.0 * e + 5.0 * e * e + e * e * e; });
    CHECK(d.derivative == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(d.curvature == doctest::Approx(10.0).epsilon(1e-5));
    CHECK(!d.vanishes());
    const EpsilonDerivative z = epsilon_derivative([](double e) { return 2.0 + 7.0 * e * e; });
    CHECK(z.vanishes());
  }

  TEST_CASE("memory rates of an encoded state are flat in epsilon") {
    const SystemBathModel osr = perturbed_dfs_model(1.0, Operator::zero(4));
    for (const auto& d : memory_rate_epsilon_derivatives(osr, dfs_bell_state(), 4)) CHECK(d.vanishes());
    const LindbladModel sme = perturbed_dfs_sme(0.5, Operator::zero(4), kron(pauli_x(), pauli_x()));
    for (auto mode : {GeneratorMode::kTruncated, GeneratorMode::kExact}) {
      for (const auto& d : memory_rate_epsilon_derivatives(sme, dfs_bell_state(), 4, mode)) CHECK(d.vanishes());
    }
  }

  TEST_CASE("Table I: default suite") {
    const Table1Report r = table1_report(default_table1_suite());
    CHECK(r.all_pass());
    bool exception_cell = false;
    for (const auto& c : r.cells) {
      if (c.status == CellStatus::kException) exception_cell = true;
      CHECK(c.status != CellStatus::kFail);
    }
    CHECK(exception_cell);
    CHECK(thrown_kind([] { (void)table1_report(Table1Suite{}); }) == ErrorKind::kConfig);
  }

  TEST_CASE("Table I: singular probe alone") {
    Table1Suite s;
    s.osr_general_singular = SingularCase{phase_damping_propagator(1.0), testing::plus_state()};
    const Table1Report r = table1_report(s);
    REQUIRE(r.cells.size() == 1);
    CHECK(r.cells[0].status == CellStatus::kException);
    CHECK(r.all_pass());
  }
}
