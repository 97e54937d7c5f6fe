#include "dfslab/table1.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dfslab/dfs.hpp"
#include "dfslab/error.hpp"
#include "dfslab/fixed_basis_osr.hpp"

namespace dfslab {

namespace {

constexpr double kZeroTol = 1e-10;
constexpr double kDynamicalZeroTol = 1e-9;
constexpr double kNonzero = 1e-8;

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::string order_claim(int n, bool zero, bool bar = false) {
  return std::string("1/") + (bar ? "taubar_" : "tau_") + std::to_string(n) + (zero ? " = 0" : " != 0");
}

void add(Table1Report& r, std::string row, Picture p, std::string claim, double measured, bool ok,
         std::string note = {}) {
  r.cells.push_back({std::move(row), p, std::move(claim), measured, ok ? CellStatus::kPass : CellStatus::kFail,
                     std::move(note)});
}

void general_rows(Table1Report& r, Picture p, const RateReport& rep) {
  for (const auto& t : rep.terms) {
    if (t.n == 1 && p == Picture::kOsr) {
      add(r, "general", p, order_claim(1, true), t.value, std::abs(t.value) <= kZeroTol, "finite bath, finite H");
    } else {
      add(r, "general", p, order_claim(t.n, false), t.value, std::abs(t.value) > kNonzero);
    }
  }
}

void dfs_rows(Table1Report& r, Picture p, const RateReport& rep, const std::string& note) {
  for (const auto& t : rep.terms) {
    add(r, "dfs", p, order_claim(t.n, true), t.value, std::abs(t.value) <= kZeroTol, note);
  }
}

void perturbed_memory_rows(Table1Report& r, Picture p, const std::vector<EpsilonDerivative>& d,
                           const std::string& note) {
  for (std::size_t i = 0; i < d.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    add(r, "perturbed_memory", p, "d/deps " + order_claim(n, true), d[i].derivative, d[i].vanishes(),
        note + (note.empty() ? "" : "; ") + "tolerance " + sci(d[i].tolerance));
  }
}

void perturbed_dynamical_rows(Table1Report& r, Picture p, const RateReport& rep) {
  for (const auto& t : rep.terms) {
    if (t.n == 1) {
      add(r, "perturbed_dynamical", p, order_claim(1, true, true), t.value, std::abs(t.value) <= kDynamicalZeroTol);
    } else {
      add(r, "perturbed_dynamical", p, order_claim(t.n, false, true), t.value, std::abs(t.value) > kNonzero,
          "eps = " + sci(rep.eps));
    }
  }
}

// Footnote a: a propagator with nonzero first-order rate must come from a
// generator that blows up as t → 0⁺.
void singular_probe(Table1Report& r, const SingularCase& c) {
  const double rate = first_order_rate(c.propagator, c.state);
  bool throws_at_origin = false;
  try {
    (void)hamiltonian_from_unitary(c.propagator, 1e-7);
  } catch (const Error& e) {
    throws_at_origin = e.kind() == ErrorKind::kSingularHamiltonian;
  }
  bool grows = true;
  double prev = 0.0;
  for (int k = 1; k <= 5; ++k) {
    const double t = std::pow(10.0, -k);
    const double n = hamiltonian_from_unitary(c.propagator, t, t * 1e-2).norm();
    if (k > 1 && !(n > prev)) grows = false;
    prev = n;
  }
  Table1Cell cell{"general", Picture::kOsr, order_claim(1, true), rate, CellStatus::kFail, {}};
  if (std::abs(rate) <= kZeroTol) {
    cell.status = CellStatus::kPass;
  } else if (throws_at_origin && grows) {
    cell.status = CellStatus::kException;
    cell.note = "'" + c.propagator.family +
                "' excluded: H_SB(t) singular as t -> 0 (finite bath and finite total Hamiltonian only)";
  } else {
    cell.note = "nonzero first-order rate without a singular generator";
  }
  r.cells.push_back(std::move(cell));
}

LindbladModel with_lamb_shift(LindbladModel m, const Operator& h) {
  m.h_eff = m.h_eff + h;
  return m;
}

}  // namespace

bool Table1Suite::empty() const {
  return !osr_general && !osr_general_singular && !sme_general && !osr_dfs_memory && !osr_dfs_dynamical &&
         !sme_dfs_memory && !sme_dfs_dynamical;
}

bool Table1Report::all_pass() const {
  return !cells.empty() &&
         std::none_of(cells.begin(), cells.end(), [](const Table1Cell& c) { return c.status == CellStatus::kFail; });
}

std::string_view to_string(CellStatus s) {
  switch (s) {
    case CellStatus::kPass:
      return "pass";
    case CellStatus::kFail:
      return "fail";
    default:
      return "exception";
  }
}

Table1Suite default_table1_suite(std::uint64_t seed) {
  Rng rng(seed);
  RandomModelSpec spec;
  spec.dim_s = 2;
  spec.dim_b = 2;
  spec.n_couplings = 2;
  spec.max_norm = 2.0;
  SystemBathModel general = random_system_bath_model(spec, rng);
  DensityMatrix general_state = random_density(2, rng, 1);

  const Operator zero4 = Operator::zero(4);
  const Operator exchange = exchange_hamiltonian(1.0);
  const Operator lamb_pert = 0.5 * kron(pauli_x(), pauli_x());
  Vector v01 = Vector::Zero(4);
  v01(1) = 1.0;
  const DensityMatrix rotating = DensityMatrix::pure(v01);

  Table1Suite s;
  s.osr_general = OsrCase{general, general_state};
  s.sme_general = SmeCase{coarse_grain_to_sme(general, 0.5), general_state};
  s.osr_general_singular = SingularCase{phase_damping_propagator(1.0), DensityMatrix::pure(Vector::Ones(2) / std::sqrt(2.0))};
  s.osr_dfs_memory = OsrCase{perturbed_dfs_model(1.0, zero4, seed), dfs_bell_state()};
  s.osr_dfs_dynamical = OsrCase{perturbed_dfs_model(1.0, exchange, seed), rotating};
  s.sme_dfs_memory = SmeCase{perturbed_dfs_sme(1.0, zero4, lamb_pert), dfs_bell_state()};
  s.sme_dfs_dynamical = SmeCase{perturbed_dfs_sme(1.0, exchange, lamb_pert), rotating};
  s.sme_dfs_lamb_shift = kron(pauli_z(), pauli_z());
  return s;
}

Table1Report table1_report(const Table1Suite& s) {
  if (s.empty()) throw Error(ErrorKind::kConfig, "table1 suite is empty");
  if (s.max_order < 2 || s.max_order > 4) throw Error(ErrorKind::kConfig, "table1 max_order must lie in [2, 4]");
  const int n = s.max_order;
  Table1Report r;

  if (s.sme_general) general_rows(r, Picture::kSme, sme_rate_terms(s.sme_general->model, s.sme_general->state, n, 0.0));
  if (s.osr_general) general_rows(r, Picture::kOsr, osr_rate_terms(s.osr_general->model, s.osr_general->state, n, 0.0));
  if (s.osr_general_singular) singular_probe(r, *s.osr_general_singular);

  if (s.sme_dfs_memory) {
    const auto& c = *s.sme_dfs_memory;
    dfs_rows(r, Picture::kSme, sme_rate_terms(c.model, c.state, n, 0.0), "without Lamb shift");
    if (s.sme_dfs_lamb_shift) {
      dfs_rows(r, Picture::kSme, sme_rate_terms(with_lamb_shift(c.model, *s.sme_dfs_lamb_shift), c.state, n, 0.0),
               "with Lamb shift");
    }
  }
  if (s.osr_dfs_memory) dfs_rows(r, Picture::kOsr, osr_rate_terms(s.osr_dfs_memory->model, s.osr_dfs_memory->state, n, 0.0), {});

  if (s.sme_dfs_memory) {
    const auto& c = *s.sme_dfs_memory;
    const bool lamb = c.model.perturbation && c.model.perturbation->h_lamb_pert.norm() > 0.0;
    perturbed_memory_rows(r, Picture::kSme, memory_rate_epsilon_derivatives(c.model, c.state, n),
                          lamb ? "perturbing Lamb shift on" : "");
  }
  if (s.osr_dfs_memory) {
    perturbed_memory_rows(r, Picture::kOsr, memory_rate_epsilon_derivatives(s.osr_dfs_memory->model, s.osr_dfs_memory->state, n),
                          {});
  }

  if (s.sme_dfs_dynamical) {
    const auto& c = *s.sme_dfs_dynamical;
    perturbed_dynamical_rows(r, Picture::kSme, dynamical_rate_terms(c.model, c.state, n, s.dynamical_eps,
                                                                    GeneratorMode::kTruncated, DerivativeMethod::kExact));
  }
  if (s.osr_dfs_dynamical) {
    const auto& c = *s.osr_dfs_dynamical;
    perturbed_dynamical_rows(r, Picture::kOsr,
                             dynamical_rate_terms(c.model, c.state, n, s.dynamical_eps, DerivativeMethod::kExact));
  }
  return r;
}

}  // namespace dfslab
