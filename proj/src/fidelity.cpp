#include "dfslab/fidelity.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numbers>

#include "dfslab/error.hpp"
#include "dfslab/parallel.hpp"

namespace dfslab {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr int kMaxRateOrder = 6;
constexpr int kMaxDynamicalOrder = 4;
constexpr double kEpsStep = 1e-4;
constexpr double kSkipDeficit = 1e-12;

double real_trace_product(const Matrix& a, const Matrix& b, const char* what) {
  const cplx v = (a * b).trace();
  const double scale = std::max(1.0, a.norm() * b.norm());
  if (std::abs(v.imag()) > 1e-10 * scale) {
    throw Error(ErrorKind::kNonFinite, std::string(what) + " has an imaginary part " + std::to_string(v.imag()));
  }
  return v.real();
}

void check_order(int n_max, int cap) {
  if (n_max < 1 || n_max > cap) {
    throw Error(ErrorKind::kInvalidArgument, "rate order must lie in [1, " + std::to_string(cap) + "]");
  }
}

void check_state(const DensityMatrix& rho0, int dim) {
  if (rho0.dim() != dim) throw Error(ErrorKind::kDimensionMismatch, "initial state has wrong dim");
}

// ρ⁽ʲ⁾(0) for j = 0..n from the joint Hamiltonian.
std::vector<Matrix> osr_state_derivatives(const SystemBathModel& m, const DensityMatrix& rho0, int n, double eps) {
  const Operator h = total_hamiltonian(m, eps);
  Operator x = kron(rho0.op(), m.rho_b.op());
  std::vector<Matrix> out{rho0.matrix()};
  for (int j = 1; j <= n; ++j) {
    x = -kI * commutator(h, x);
    out.push_back(partial_trace_bath(x, m.dim_s, m.dim_b).matrix());
  }
  return out;
}

std::vector<Matrix> sme_state_derivatives(const LindbladModel& m, const DensityMatrix& rho0, int n, double eps,
                                          GeneratorMode mode) {
  std::vector<Matrix> out{rho0.matrix()};
  Operator x = rho0.op();
  for (int j = 1; j <= n; ++j) {
    x = lindblad_generator(m, x, eps, mode);
    out.push_back(x.matrix());
  }
  return out;
}

// ρ_U⁽ᵏ⁾(0) = (−i)ᵏ adᵏ_h(ρ₀)
std::vector<Matrix> target_derivatives(const Operator& h, const DensityMatrix& rho0, int n) {
  std::vector<Matrix> out{rho0.matrix()};
  Operator x = rho0.op();
  for (int k = 1; k <= n; ++k) {
    x = -kI * commutator(h, x);
    out.push_back(x.matrix());
  }
  return out;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double leibniz(const std::vector<Matrix>& target, const std::vector<Matrix>& state, int n) {
  double acc = 0.0;
  for (int k = 0; k <= n; ++k) {
    acc += binomial(n, k) * real_trace_product(target[static_cast<std::size_t>(k)],
                                               state[static_cast<std::size_t>(n - k)], "dynamical term");
  }
  return acc;
}

RateReport memory_report(Picture picture, const std::vector<Matrix>& d, const DensityMatrix& rho0, double eps,
                         std::string method) {
  RateReport r{picture, FidelityKind::kMemory, {}, eps, std::move(method)};
  for (std::size_t n = 1; n < d.size(); ++n) {
    const double v = real_trace_product(rho0.matrix(), d[n], "rate term");
    r.terms.push_back({static_cast<int>(n), v, signed_root(v, static_cast<int>(n))});
  }
  return r;
}

// Central n-th derivative stencils (second-order accurate) with Richardson.
double central_derivative(const std::function<double(double)>& f, int n, double h) {
  auto stencil = [&](double s) {
    switch (n) {
      case 1:
        return (f(s) - f(-s)) / (2.0 * s);
      case 2:
        return (f(s) - 2.0 * f(0.0) + f(-s)) / (s * s);
      case 3:
        return (f(2 * s) - 2.0 * f(s) + 2.0 * f(-s) - f(-2 * s)) / (2.0 * s * s * s);
      default:
        return (f(2 * s) - 4.0 * f(s) + 6.0 * f(0.0) - 4.0 * f(-s) + f(-2 * s)) / (s * s * s * s);
    }
  };
  return (4.0 * stencil(h / 2) - stencil(h)) / 3.0;
}

constexpr std::array<double, 4> kDynamicalSteps{1e-3, 1e-3, 1e-2, 2e-2};

void validate_grid(const std::vector<double>& grid) {
  if (grid.size() < 2) throw Error(ErrorKind::kInvalidGrid, "insufficient points: need at least 2");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) throw Error(ErrorKind::kInvalidGrid, "grid values must be positive");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw Error(ErrorKind::kInvalidGrid, "grid must be strictly increasing");
  }
  if (grid.back() / grid.front() < 100.0 * (1.0 - 1e-12)) {
    throw Error(ErrorKind::kInvalidGrid, "grid must span at least two decades");
  }
}

std::vector<double> refine(const std::vector<double>& grid) {
  std::vector<double> out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0) out.push_back(std::sqrt(grid[i - 1] * grid[i]));
    out.push_back(grid[i]);
  }
  return out;
}

Operator target_hamiltonian(const SystemBathModel& m) { return m.h_s; }
Operator target_hamiltonian(const LindbladModel& m) { return m.h_eff; }

}  // namespace

std::string_view to_string(Picture p) { return p == Picture::kOsr ? "osr" : "sme"; }
std::string_view to_string(FidelityKind k) { return k == FidelityKind::kMemory ? "memory" : "dynamical"; }
std::string_view to_string(ScalingAxis a) { return a == ScalingAxis::kEps ? "eps" : "t"; }

double signed_root(double value, int n) {
  if (n < 1) throw Error(ErrorKind::kInvalidArgument, "root order must be >= 1");
  const double r = std::pow(std::abs(value), 1.0 / n);
  return value < 0.0 ? -r : r;
}

double RateReport::term(int n) const {
  for (const auto& t : terms) {
    if (t.n == n) return t.value;
  }
  throw Error(ErrorKind::kInvalidArgument, "rate term " + std::to_string(n) + " not in report");
}

double memory_fidelity(const DensityMatrix& rho0, const DensityMatrix& rho_t) {
  if (rho0.dim() != rho_t.dim()) throw Error(ErrorKind::kDimensionMismatch, "fidelity of states with different dims");
  return real_trace_product(rho0.matrix(), rho_t.matrix(), "memory fidelity");
}

double memory_fidelity(const SystemBathModel& m, const DensityMatrix& rho0, double t, double eps) {
  return memory_fidelity(rho0, evolve_reduced(m, rho0, t, eps));
}

double memory_fidelity(const LindbladModel& m, const DensityMatrix& rho0, double t, double eps, GeneratorMode mode) {
  return memory_fidelity(rho0, integrate_sme(m, rho0, t, eps, mode));
}

double dynamical_fidelity(const SystemBathModel& m, const DensityMatrix& rho0, double t, double eps) {
  const Operator u = propagator(m.h_s, t);
  const Matrix target = u.matrix() * rho0.matrix() * u.matrix().adjoint();
  return real_trace_product(target, evolve_reduced(m, rho0, t, eps).matrix(), "dynamical fidelity");
}

double dynamical_fidelity(const LindbladModel& m, const DensityMatrix& rho0, double t, double eps, GeneratorMode mode) {
  const Operator u = propagator(m.h_eff, t);
  const Matrix target = u.matrix() * rho0.matrix() * u.matrix().adjoint();
  return real_trace_product(target, integrate_sme(m, rho0, t, eps, mode).matrix(), "dynamical fidelity");
}

RateReport osr_rate_terms(const SystemBathModel& m, const DensityMatrix& rho0, int n_max, double eps) {
  check_order(n_max, kMaxRateOrder);
  check_state(rho0, m.dim_s);
  return memory_report(Picture::kOsr, osr_state_derivatives(m, rho0, n_max, eps), rho0, eps, "exact");
}

RateReport osr_rate_terms(const JointPropagator& p, const DensityMatrix&, int) {
  throw Error(ErrorKind::kUnsupported, "exact rate terms need a finite constant Hamiltonian; '" + p.family +
                                           "' only provides a propagator (use the finite-difference path)");
}

RateReport sme_rate_terms(const LindbladModel& m, const DensityMatrix& rho0, int n_max, double eps, GeneratorMode mode) {
  check_order(n_max, kMaxRateOrder);
  check_state(rho0, m.dim);
  return memory_report(Picture::kSme, sme_state_derivatives(m, rho0, n_max, eps, mode), rho0, eps,
                       mode == GeneratorMode::kExact ? "exact-generator" : "truncated-generator");
}

double first_order_rate(const SystemBathModel& m, const DensityMatrix& rho0, double eps) {
  return osr_rate_terms(m, rho0, 1, eps).term(1);
}

double first_order_rate(const LindbladModel& m, const DensityMatrix& rho0, double eps, GeneratorMode mode) {
  return sme_rate_terms(m, rho0, 1, eps, mode).term(1);
}

double first_order_rate(const JointPropagator& p, const DensityMatrix& rho0, double step) {
  if (!(step > 0.0)) throw Error(ErrorKind::kInvalidArgument, "step must be positive");
  check_state(rho0, p.dim_s);
  auto f = [&](double t) { return memory_fidelity(rho0, apply_kraus(extract_kraus(p, t), rho0)); };
  const double f0 = f(0.0);
  // (−3f(0) + 4f(h) − f(2h)) / 2h, error O(h²)
  auto d = [&](double h) { return (-3.0 * f0 + 4.0 * f(h) - f(2.0 * h)) / (2.0 * h); };
  return (4.0 * d(step / 2) - d(step)) / 3.0;
}

PureStateMinimum minimize_first_order_rate(const JointPropagator& p) {
  if (p.dim_s != 2) throw Error(ErrorKind::kInvalidDimension, "pure-state minimization is for qubits");
  auto rate = [&](double theta, double phi) {
    Vector psi(2);
    psi << std::cos(theta / 2), std::exp(kI * phi) * std::sin(theta / 2);
    return first_order_rate(p, DensityMatrix::pure(psi));
  };
  constexpr int kTheta = 25;
  constexpr int kPhi = 8;
  const double pi = std::numbers::pi;
  PureStateMinimum best{std::numeric_limits<double>::infinity(), 0.0, 0.0};
  for (int i = 0; i <= kTheta; ++i) {
    for (int j = 0; j < kPhi; ++j) {
      const double th = pi * i / kTheta;
      const double ph = 2.0 * pi * j / kPhi;
      const double r = rate(th, ph);
      if (r < best.rate) best = {r, th, ph};
    }
  }
  auto golden = [](auto&& f, double lo, double hi) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 60; ++it) {
      if (fc < fd) {
        b = d, d = c, fd = fc;
        c = b - g * (b - a), fc = f(c);
      } else {
        a = c, c = d, fc = fd;
        d = a + g * (b - a), fd = f(d);
      }
    }
    return (a + b) / 2;
  };
  for (int round = 0; round < 2; ++round) {
    const double th = golden([&](double x) { return rate(x, best.phi); }, std::max(0.0, best.theta - pi / kTheta),
                             std::min(pi, best.theta + pi / kTheta));
    const double r1 = rate(th, best.phi);
    if (r1 < best.rate) best = {r1, th, best.phi};
    const double ph = golden([&](double x) { return rate(best.theta, x); }, best.phi - pi / kPhi, best.phi + pi / kPhi);
    const double r2 = rate(best.theta, ph);
    if (r2 < best.rate) best = {r2, best.theta, ph};
  }
  return best;
}

ScalingFit fit_loglog(ScalingAxis axis, const std::vector<double>& grid, const std::vector<double>& deficits) {
  if (grid.size() != deficits.size()) throw Error(ErrorKind::kDimensionMismatch, "grid and deficit lengths differ");
  ScalingFit fit;
  fit.axis = axis;
  fit.grid = grid;
  fit.deficits = deficits;
  fit.excluded.assign(grid.size(), false);
  if (std::all_of(deficits.begin(), deficits.end(), [](double d) { return d <= kSkipDeficit; })) {
    fit.skipped = true;
    fit.diagnostic = "all deficits at or below 1e-12; fit skipped";
    return fit;
  }
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (deficits[i] < kDeficitFloor) {
      fit.excluded[i] = true;
      continue;
    }
    xs.push_back(std::log(grid[i]));
    ys.push_back(std::log(deficits[i]));
  }
  if (xs.size() < 2) {
    fit.diagnostic = "fewer than two deficits above the numerical floor";
    return fit;
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i] / n, my += ys[i] / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.certified = fit.r_squared >= kCertifiedRSquared;
  if (std::count(fit.excluded.begin(), fit.excluded.end(), true) > 0) {
    fit.diagnostic = "points below the 1e-13 floor were excluded";
  }
  return fit;
}

ScalingFit scaling_scan(ScalingAxis axis, const std::vector<double>& grid, const std::function<double(double)>& deficit,
                        double max_deficit) {
  validate_grid(grid);
  auto evaluate = [&](const std::vector<double>& g) {
    auto d = parallel_map(g.size(), [&](std::size_t i) { return deficit(g[i]); });
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d[i] > max_deficit) {
        throw Error(ErrorKind::kInvalidGrid, "deficit " + std::to_string(d[i]) + " at grid value " +
                                                 std::to_string(g[i]) + " exceeds the small-parameter bound");
      }
    }
    return d;
  };
  ScalingFit fit = fit_loglog(axis, grid, evaluate(grid));
  if (fit.skipped || fit.certified) return fit;
  const auto fine = refine(grid);
  ScalingFit second = fit_loglog(axis, fine, evaluate(fine));
  second.refined = true;
  if (!second.certified && !second.skipped) {
    second.diagnostic += (second.diagnostic.empty() ? "" : "; ") + std::string("r^2 ") +
                         std::to_string(second.r_squared) + " below 0.999 after one refinement";
  }
  return second;
}

ScalingFit epsilon_sensitivity(const SystemBathModel& m, const DensityMatrix& rho0, double t,
                               const std::vector<double>& eps_grid) {
  check_state(rho0, m.dim_s);
  return scaling_scan(ScalingAxis::kEps, eps_grid, [&](double e) { return 1.0 - memory_fidelity(m, rho0, t, e); });
}

ScalingFit epsilon_sensitivity(const LindbladModel& m, const DensityMatrix& rho0, double t,
                               const std::vector<double>& eps_grid, GeneratorMode mode) {
  check_state(rho0, m.dim);
  return scaling_scan(ScalingAxis::kEps, eps_grid,
                      [&](double e) { return 1.0 - memory_fidelity(m, rho0, t, e, mode); });
}

ScalingFit time_scaling(const SystemBathModel& m, const DensityMatrix& rho0, const std::vector<double>& t_grid,
                        double eps, FidelityKind kind) {
  check_state(rho0, m.dim_s);
  return scaling_scan(ScalingAxis::kTime, t_grid, [&](double t) {
    return 1.0 - (kind == FidelityKind::kMemory ? memory_fidelity(m, rho0, t, eps) : dynamical_fidelity(m, rho0, t, eps));
  });
}

ScalingFit time_scaling(const LindbladModel& m, const DensityMatrix& rho0, const std::vector<double>& t_grid,
                        double eps, FidelityKind kind, GeneratorMode mode) {
  check_state(rho0, m.dim);
  return scaling_scan(ScalingAxis::kTime, t_grid, [&](double t) {
    return 1.0 - (kind == FidelityKind::kMemory ? memory_fidelity(m, rho0, t, eps, mode)
                                                : dynamical_fidelity(m, rho0, t, eps, mode));
  });
}

RateReport dynamical_rate_terms(const SystemBathModel& m, const DensityMatrix& rho0, int n_max, double eps,
                                DerivativeMethod method) {
  check_order(n_max, kMaxDynamicalOrder);
  check_state(rho0, m.dim_s);
  RateReport r{Picture::kOsr, FidelityKind::kDynamical, {}, eps, {}};
  if (method == DerivativeMethod::kExact) {
    r.method = "leibniz";
    const auto target = target_derivatives(target_hamiltonian(m), rho0, n_max);
    const auto state = osr_state_derivatives(m, rho0, n_max, eps);
    for (int n = 1; n <= n_max; ++n) {
      const double v = leibniz(target, state, n);
      r.terms.push_back({n, v, signed_root(v, n)});
    }
    return r;
  }
  r.method = "finite-difference";
  auto f = [&](double t) { return dynamical_fidelity(m, rho0, t, eps); };
  for (int n = 1; n <= n_max; ++n) {
    const double v = central_derivative(f, n, kDynamicalSteps[static_cast<std::size_t>(n - 1)]);
    r.terms.push_back({n, v, signed_root(v, n)});
  }
  return r;
}

RateReport dynamical_rate_terms(const LindbladModel& m, const DensityMatrix& rho0, int n_max, double eps,
                                GeneratorMode mode, DerivativeMethod method) {
  check_order(n_max, kMaxDynamicalOrder);
  check_state(rho0, m.dim);
  RateReport r{Picture::kSme, FidelityKind::kDynamical, {}, eps, {}};
  if (method == DerivativeMethod::kExact) {
    r.method = "leibniz";
    const auto target = target_derivatives(target_hamiltonian(m), rho0, n_max);
    const auto state = sme_state_derivatives(m, rho0, n_max, eps, mode);
    for (int n = 1; n <= n_max; ++n) {
      const double v = leibniz(target, state, n);
      r.terms.push_back({n, v, signed_root(v, n)});
    }
    return r;
  }
  r.method = "finite-difference";
  auto f = [&](double t) { return dynamical_fidelity(m, rho0, t, eps, mode); };
  for (int n = 1; n <= n_max; ++n) {
    const double v = central_derivative(f, n, kDynamicalSteps[static_cast<std::size_t>(n - 1)]);
    r.terms.push_back({n, v, signed_root(v, n)});
  }
  return r;
}

EpsilonDerivative epsilon_derivative(const std::function<double(double)>& f) {
  const double h = kEpsStep;
  const double fp = f(h), fm = f(-h), fp2 = f(h / 2), fm2 = f(-h / 2), f0 = f(0.0);
  const double d1 = (fp - fm) / (2.0 * h);
  const double d2 = (fp2 - fm2) / h;
  EpsilonDerivative out;
  out.derivative = (4.0 * d2 - d1) / 3.0;
  out.curvature = (fp - 2.0 * f0 + fm) / (h * h);
  out.tolerance = 1e-7 * std::max(1.0, std::abs(out.curvature));
  return out;
}

std::vector<EpsilonDerivative> memory_rate_epsilon_derivatives(const SystemBathModel& m, const DensityMatrix& rho0,
                                                               int n_max) {
  check_order(n_max, kMaxRateOrder);
  std::vector<EpsilonDerivative> out;
  for (int n = 1; n <= n_max; ++n) {
    out.push_back(epsilon_derivative([&](double e) { return osr_rate_terms(m, rho0, n, e).term(n); }));
  }
  return out;
}

std::vector<EpsilonDerivative> memory_rate_epsilon_derivatives(const LindbladModel& m, const DensityMatrix& rho0,
                                                               int n_max, GeneratorMode mode) {
  check_order(n_max, kMaxRateOrder);
  std::vector<EpsilonDerivative> out;
  for (int n = 1; n <= n_max; ++n) {
    out.push_back(epsilon_derivative([&](double e) { return sme_rate_terms(m, rho0, n, e, mode).term(n); }));
  }
  return out;
}

EpsilonDerivative dynamical_rate_epsilon_derivative(const SystemBathModel& m, const DensityMatrix& rho0, int n) {
  check_order(n, kMaxDynamicalOrder);
  return epsilon_derivative(
      [&](double e) { return dynamical_rate_terms(m, rho0, n, e, DerivativeMethod::kExact).term(n); });
}

EpsilonDerivative dynamical_rate_epsilon_derivative(const LindbladModel& m, const DensityMatrix& rho0, int n,
                                                    GeneratorMode mode) {
  check_order(n, kMaxDynamicalOrder);
  return epsilon_derivative(
      [&](double e) { return dynamical_rate_terms(m, rho0, n, e, mode, DerivativeMethod::kExact).term(n); });
}

}  // namespace dfslab
