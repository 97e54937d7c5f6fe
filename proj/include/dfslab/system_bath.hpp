#ifndef DFSLAB_SYSTEM_BATH_HPP
#define DFSLAB_SYSTEM_BATH_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dfslab/operator_space.hpp"

namespace dfslab {

/// One term S ⊗ B of an interaction Hamiltonian.
struct CouplingTerm {
  Operator system;
  Operator bath;
};

/// Closed system + bath: H_SB(ε) = H_S⊗I + I⊗H_B + Σ S_α⊗B_α + ε Σ S′_p⊗B′_p,
/// bath initially in rho_b.  Perturbations live in the interaction only; a
/// perturbation of H_S is written as an (S′, I_B) pair.
struct SystemBathModel {
  int dim_s;
  int dim_b;
  Operator h_s;
  Operator h_b;
  std::vector<CouplingTerm> couplings;
  std::vector<CouplingTerm> perturbations;
  DensityMatrix rho_b;

  /// Throws if dims disagree or any Hamiltonian piece is not hermitian.
  void validate() const;

  /// Same model with couplings and perturbations removed.
  SystemBathModel isolated() const;
};

/// Explicit time-parameterized joint unitary, for families that no finite
/// constant Hamiltonian generates.
struct JointPropagator {
  int dim_s;
  int dim_b;
  std::function<Operator(double)> u_of_t;
  DensityMatrix rho_b;
  /// Generator diverges as t → 0⁺; u_of_t is only defined for t ≥ 0.
  bool singular_at_origin = false;
  /// Builtin provenance for reports and serialization ("phase_damping").
  std::string family;
  double parameter = 0.0;
};

/// Weighted Kraus operators A_i on the system space at `time`.
struct KrausSet {
  int dim_s;
  std::vector<Operator> operators;
  double time;

  /// ‖Σ A_i†A_i − I‖_F
  double normalization_defect() const;
};

Operator total_hamiltonian(const SystemBathModel& m, double eps);
/// Σ S′_p ⊗ B′_p (zero when the model has no perturbations).
Operator perturbation_hamiltonian(const SystemBathModel& m);

/// Tr_B[U (ρ₀ ⊗ ρ_B) U†] with U = exp(−i H_SB(ε) t).
DensityMatrix evolve_reduced(const SystemBathModel& m, const DensityMatrix& rho0, double t, double eps);
DensityMatrix evolve_reduced(const JointPropagator& p, const DensityMatrix& rho0, double t);

/// [A_(μ,ν)]_mn = √w_ν ⟨m|⟨μ|U|ν⟩|n⟩ over bath eigenpairs (w_ν, |ν⟩) with
/// w_ν above the cutoff and the computational bath basis |μ⟩.  Ordered
/// with ν outer, μ inner.
KrausSet extract_kraus(const SystemBathModel& m, double t, double eps);
KrausSet extract_kraus(const JointPropagator& p, double t);
KrausSet kraus_from_joint_unitary(const Operator& u, const DensityMatrix& rho_b, int dim_s, int dim_b, double t);

/// Σ A_i ρ A_i†.  Throws kNotTracePreserving if the set's normalization
/// defect exceeds `tol`.
DensityMatrix apply_kraus(const KrausSet& k, const DensityMatrix& rho, double tol = kKrausNormalizationTol);
/// Same map without the normalization check, on an arbitrary operator.
Operator apply_kraus_map(const KrausSet& k, const Operator& x);

/// Fixes the per-operator phase freedom A_i → e^{iφ} A_i: the entry of
/// largest modulus (first in column-major order on ties) becomes real
/// positive.  The induced channel is unchanged.
KrausSet canonicalize_phases(const KrausSet& k);

/// H(t) = i (dU/dt) U†, derivative by Richardson-extrapolated central
/// differences with steps dt and dt/2.  Families singular at the origin
/// throw kSingularHamiltonian when t − dt ≤ 0.
Operator hamiltonian_from_unitary(const JointPropagator& p, double t, double dt = 1e-6);

/// Phase-damping joint unitary on qubit system ⊗ qubit bath, bath starting
/// in its first basis state.  Reduces to the Kraus pair diag(1, e^{−λt}),
/// diag(0, √(1 − e^{−2λt})).
JointPropagator phase_damping_propagator(double lambda);

/// JointPropagator driven by a constant finite Hamiltonian.
JointPropagator constant_hamiltonian_propagator(const SystemBathModel& m, double eps);

/// f_n^(k)(h, hp): sum over all C(n, k) words with k factors hp and n − k
/// factors h.
Operator perturbation_series_term(const Operator& h, const Operator& hp, int n, int k);

/// ‖U′(t) − [U(t) + Σ_{k=1,2} ε^k Σ_{n=k}^{n_max} ((−it)^n/n!) f_n^(k)]‖_F
/// with U′ generated by H_SB + ε H′_I.
double perturbed_propagator_check(const SystemBathModel& m, double t, double eps, int n_max);

struct RandomModelSpec {
  int dim_s = 2;
  int dim_b = 2;
  int n_couplings = 2;
  int n_perturbations = 0;
  /// Spectral norm cap for H_SB(0).
  double max_norm = 10.0;
  /// Bath state rank (full when ≤ 0).
  int bath_rank = 0;
};

SystemBathModel random_system_bath_model(const RandomModelSpec& spec, Rng& rng);

}  // namespace dfslab

#endif  // DFSLAB_SYSTEM_BATH_HPP
