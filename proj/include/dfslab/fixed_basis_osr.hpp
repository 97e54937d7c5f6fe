#ifndef DFSLAB_FIXED_BASIS_OSR_HPP
#define DFSLAB_FIXED_BASIS_OSR_HPP

#include <optional>

#include "dfslab/lindblad.hpp"
#include "dfslab/operator_space.hpp"
#include "dfslab/system_bath.hpp"

namespace dfslab {

/// b_iα: row i per Kraus operator, column α per basis element.
struct CoefficientTable {
  Matrix b;
  double time = 0.0;
};

/// χ_αβ(t) = Σ_i b_iα b*_iβ over a fixed basis.
struct ChiProcess {
  OperatorBasis basis;
  Matrix chi;
  double time = 0.0;

  /// ‖Σ_αβ χ_αβ K_β† K_α − I‖_F
  double normalization_defect() const;
  double hermiticity_defect() const { return (chi - chi.adjoint()).norm(); }
  /// Smallest eigenvalue of the hermitian part of χ.
  double min_eigenvalue() const;
};

/// Window-averaged (tau > 0) or instantaneous (tau = 0) rates ⟨χ̇⟩, ⟨Ṡ⟩.
struct OsrGeneratorRate {
  OperatorBasis basis;
  Matrix chi_dot;
  Operator s_dot;
  double tau = 0.0;
};

/// Isolated-system and coupling parts of χ (and S) at one time.
struct ChiSplit {
  ChiProcess isolated;
  ChiProcess coupling;
  Operator s_isolated;
  Operator s_coupling;
};

/// b_iα = ⟨A_i, K_α⟩ / ⟨K_α, K_α⟩.  Incomplete bases drop the component of
/// A_i outside their span.
CoefficientTable expand_kraus(const KrausSet& k, const OperatorBasis& basis);

/// Σ_α b_iα K_α for one row of the table.
Operator reconstruct_kraus(const CoefficientTable& table, const OperatorBasis& basis, int i);

ChiProcess compute_chi(const CoefficientTable& table, const OperatorBasis& basis);

/// χ(t) for the model at (t, ε), via Kraus extraction and expansion.
ChiProcess chi_at(const SystemBathModel& m, double t, double eps, const OperatorBasis& basis);
ChiProcess chi_at(const JointPropagator& p, double t, const OperatorBasis& basis);

/// S = (i/2) Σ_{α≥1} [χ_α0 K_α − χ_0α K_α†]  (ħ = 1).
Operator compute_s_operator(const ChiProcess& c);

/// ρ(t) = ρ(0) − i[S, ρ(0)] + ½ Σ_{α,β≥1} χ_αβ ([K_α, ρK_β†] + [K_αρ, K_β†]).
/// Throws kNotTracePreserving when the χ normalization defect exceeds tol.
DensityMatrix apply_fixed_basis_osr(const ChiProcess& c, const DensityMatrix& rho0,
                                    double tol = kChiNormalizationTol);

/// tau > 0: (X(τ) − X(0))/τ, the exact window average of Ẋ.
/// tau = 0: Ẋ(0) by Richardson-extrapolated central differences with steps
/// 1e-4 and 5e-5.
OsrGeneratorRate chi_rate(const SystemBathModel& m, double tau, double eps, const OperatorBasis& basis);

/// χ⁽⁰⁾ from the model with couplings and perturbations removed, and
/// χ⁽¹⁾ = χ − χ⁽⁰⁾, both at time tau.
ChiSplit split_chi(const SystemBathModel& m, double tau, const OperatorBasis& basis, double eps = 0.0);

/// Semigroup generator from the window averages over [0, τ]:
/// H_eff = H_S + ⟨Ṡ⁽¹⁾⟩, F_α = K_α (α ≥ 1), a_αβ = ⟨χ̇⁽¹⁾_αβ⟩.
LindbladModel coarse_grain_to_sme(const SystemBathModel& m, double tau, const OperatorBasis& basis,
                                  double eps = 0.0);
/// Uses su(dim_s).
LindbladModel coarse_grain_to_sme(const SystemBathModel& m, double tau);

}  // namespace dfslab

#endif  // DFSLAB_FIXED_BASIS_OSR_HPP
