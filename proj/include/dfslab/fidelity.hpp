#ifndef DFSLAB_FIDELITY_HPP
#define DFSLAB_FIDELITY_HPP

#include <cmath>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "dfslab/lindblad.hpp"
#include "dfslab/operator_space.hpp"
#include "dfslab/system_bath.hpp"

namespace dfslab {

enum class Picture { kOsr, kSme };
enum class FidelityKind { kMemory, kDynamical };
enum class ScalingAxis { kEps, kTime };
enum class DerivativeMethod { kFiniteDifference, kExact };

std::string_view to_string(Picture p);
std::string_view to_string(FidelityKind k);
std::string_view to_string(ScalingAxis a);

/// sign(x)|x|^{1/n}
double signed_root(double value, int n);

struct RateTerm {
  int n;
  double value;
  double root;
};

/// R_n = Tr[ρ(0)ρ⁽ⁿ⁾(0)] (memory) or dⁿF_d/dtⁿ at 0 (dynamical).  The
/// series F(t) = F(0) + Σ_{n≥1} R_n tⁿ/n! carries its n = 0 term explicitly.
struct RateReport {
  Picture picture = Picture::kOsr;
  FidelityKind kind = FidelityKind::kMemory;
  std::vector<RateTerm> terms;
  double eps = 0.0;
  std::string method;

  double term(int n) const;
};

double memory_fidelity(const DensityMatrix& rho0, const DensityMatrix& rho_t);
double memory_fidelity(const SystemBathModel& m, const DensityMatrix& rho0, double t, double eps);
double memory_fidelity(const LindbladModel& m, const DensityMatrix& rho0, double t, double eps,
                       GeneratorMode mode = GeneratorMode::kExact);

/// Tr[ρ_U(t) ρ(t)] with ρ_U = U_S ρ₀ U_S†, U_S generated by H_S (OSR) or
/// h_eff (SME).
double dynamical_fidelity(const SystemBathModel& m, const DensityMatrix& rho0, double t, double eps);
double dynamical_fidelity(const LindbladModel& m, const DensityMatrix& rho0, double t, double eps,
                          GeneratorMode mode = GeneratorMode::kTruncated);

/// Exact terms from ρ_tot⁽ⁿ⁾(0) = (−i)ⁿ adⁿ_{H_SB}(ρ₀ ⊗ ρ_B), n ≤ 6.
RateReport osr_rate_terms(const SystemBathModel& m, const DensityMatrix& rho0, int n_max, double eps);
/// Explicit propagators have no finite generator to expand: throws
/// kUnsupported.  Use first_order_rate for the finite-difference path.
RateReport osr_rate_terms(const JointPropagator& p, const DensityMatrix& rho0, int n_max);
/// R_n = Tr[ρ₀ (𝙻′)ⁿ[ρ₀]], n ≤ 6.
RateReport sme_rate_terms(const LindbladModel& m, const DensityMatrix& rho0, int n_max, double eps,
                          GeneratorMode mode = GeneratorMode::kTruncated);

double first_order_rate(const SystemBathModel& m, const DensityMatrix& rho0, double eps);
double first_order_rate(const LindbladModel& m, const DensityMatrix& rho0, double eps,
                        GeneratorMode mode = GeneratorMode::kTruncated);
/// dF_m/dt at 0⁺ from the Kraus path: one-sided second-order differences
/// with Richardson extrapolation (no negative times needed).
double first_order_rate(const JointPropagator& p, const DensityMatrix& rho0, double step = 1e-3);

struct PureStateMinimum {
  double rate;
  double theta;
  double phi;
};

/// Minimum of the first-order rate over pure qubit states
/// cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩: coarse grid, then golden-section
/// refinement in θ and φ.
PureStateMinimum minimize_first_order_rate(const JointPropagator& p);

struct ScalingFit {
  ScalingAxis axis = ScalingAxis::kEps;
  std::vector<double> grid;
  std::vector<double> deficits;
  /// Points whose deficit lies below the floor and were left out of the fit.
  std::vector<bool> excluded;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  bool certified = false;
  bool refined = false;
  /// Every deficit at or below 1e-12: nothing to fit.
  bool skipped = false;
  std::string diagnostic;
};

/// Least-squares slope of log(deficit) against log(grid).
ScalingFit fit_loglog(ScalingAxis axis, const std::vector<double>& grid, const std::vector<double>& deficits);

/// Evaluates `deficit` on the grid (grid points in parallel), fits, and
/// refines the grid once with geometric midpoints when r² < 0.999.
/// Requires ≥ 2 strictly increasing positive points spanning ≥ 2 decades.
ScalingFit scaling_scan(ScalingAxis axis, const std::vector<double>& grid,
                        const std::function<double(double)>& deficit, double max_deficit = 0.1);

/// 1 − F_m(t) against ε.
ScalingFit epsilon_sensitivity(const SystemBathModel& m, const DensityMatrix& rho0, double t,
                               const std::vector<double>& eps_grid);
ScalingFit epsilon_sensitivity(const LindbladModel& m, const DensityMatrix& rho0, double t,
                               const std::vector<double>& eps_grid, GeneratorMode mode = GeneratorMode::kExact);

/// 1 − F(t) against t for the chosen fidelity.
ScalingFit time_scaling(const SystemBathModel& m, const DensityMatrix& rho0, const std::vector<double>& t_grid,
                        double eps, FidelityKind kind);
ScalingFit time_scaling(const LindbladModel& m, const DensityMatrix& rho0, const std::vector<double>& t_grid,
                        double eps, FidelityKind kind, GeneratorMode mode = GeneratorMode::kExact);

/// dⁿF_d/dtⁿ at 0, n ≤ 4.  kFiniteDifference: Richardson-extrapolated
/// central differences on the computed F_d(t).  kExact: Leibniz rule over
/// exact derivatives of ρ_U(t) and ρ(t).
RateReport dynamical_rate_terms(const SystemBathModel& m, const DensityMatrix& rho0, int n_max, double eps,
                                DerivativeMethod method = DerivativeMethod::kFiniteDifference);
RateReport dynamical_rate_terms(const LindbladModel& m, const DensityMatrix& rho0, int n_max, double eps,
                                GeneratorMode mode = GeneratorMode::kTruncated,
                                DerivativeMethod method = DerivativeMethod::kFiniteDifference);

/// d f/dε at 0 from central differences at ±1e−4 and ±5e−5 with Richardson
/// extrapolation.  The tolerance is 1e−7 · max(1, |f″(0)|), with the
/// curvature read off the same stencil.
struct EpsilonDerivative {
  double derivative = 0.0;
  double curvature = 0.0;
  double tolerance = 0.0;
  bool vanishes() const { return std::abs(derivative) <= tolerance; }
};

EpsilonDerivative epsilon_derivative(const std::function<double(double)>& f);

/// dR_n/dε at ε = 0 for n = 1..n_max (memory terms).
std::vector<EpsilonDerivative> memory_rate_epsilon_derivatives(const SystemBathModel& m, const DensityMatrix& rho0,
                                                               int n_max);
std::vector<EpsilonDerivative> memory_rate_epsilon_derivatives(const LindbladModel& m, const DensityMatrix& rho0,
                                                               int n_max,
                                                               GeneratorMode mode = GeneratorMode::kTruncated);

/// dR̄_n/dε at ε = 0 for the dynamical term of order n (exact route).
EpsilonDerivative dynamical_rate_epsilon_derivative(const SystemBathModel& m, const DensityMatrix& rho0, int n);
EpsilonDerivative dynamical_rate_epsilon_derivative(const LindbladModel& m, const DensityMatrix& rho0, int n,
                                                    GeneratorMode mode = GeneratorMode::kTruncated);

}  // namespace dfslab

#endif  // DFSLAB_FIDELITY_HPP
