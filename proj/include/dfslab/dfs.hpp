#ifndef DFSLAB_DFS_HPP
#define DFSLAB_DFS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dfslab/lindblad.hpp"
#include "dfslab/operator_space.hpp"
#include "dfslab/system_bath.hpp"

namespace dfslab {

/// Orthonormal basis of a simultaneous eigenspace with one eigenvalue per
/// error generator.
struct DfSubspace {
  int dim;
  std::vector<Vector> basis_vectors;
  std::vector<cplx> eigenvalues;

  /// Orthonormalizes `vectors` and records c_α = Tr[Q† F_α Q] / k for each
  /// operator, without certifying the eigenvalue condition.
  static DfSubspace from_vectors(const std::vector<Vector>& vectors, const std::vector<Operator>& ops);

  int size() const { return static_cast<int>(basis_vectors.size()); }
  /// Singlets of dimension one hold no encoded qubit.
  bool is_trivial() const { return size() == 1; }
  /// dim × k matrix whose columns are the basis vectors.
  Matrix basis_matrix() const;
  Operator projector() const;
};

struct DfsSearchResult {
  std::vector<DfSubspace> subspaces;
  /// Ill-conditioned clusters and flagged one-dimensional subspaces.
  std::vector<std::string> diagnostics;
};

/// Maximal subspaces on which every operator acts as a scalar, found by
/// recursive eigenspace intersection.  Eigenvalues of the compressed
/// operator are clustered within `tol` (relative to max(1, ‖F‖₂)); a
/// cluster is kept only when its gap to the rest of the spectrum exceeds ten
/// times its diameter.  Non-normal operators are supported.
DfsSearchResult find_df_subspaces(const std::vector<Operator>& ops, double tol = kClusterTol);

struct DfCertificate {
  /// max_i ‖F_α|ĩ⟩ − c_α|ĩ⟩‖ per operator, with c_α fitted on the subspace.
  std::vector<double> residuals;
  std::vector<cplx> fitted_eigenvalues;
  bool pass = false;
};

DfCertificate check_df_condition(const DfSubspace& s, const std::vector<Operator>& ops, double tol = kClusterTol);

struct CompatibilityReport {
  double leakage = 0.0;
  bool pass = false;
};

/// Leakage ‖(I − P) h P‖_F out of the subspace.
CompatibilityReport check_hamiltonian_compatibility(const Operator& h, const DfSubspace& s,
                                                    double tol = kHermitianTol);

/// Scalar-action form of the Lamb-shift condition: P h P = c P.
CompatibilityReport check_scalar_action(const Operator& h, const DfSubspace& s, double tol = kHermitianTol);

/// ‖[h, ρ]‖_F ≤ tol.
bool check_memory_condition(const Operator& h, const DensityMatrix& rho, double tol = kHermitianTol);

/// Pure state Σ c_i |ĩ⟩ on the subspace.
DensityMatrix project_state(const DfSubspace& s, const Vector& coeffs);

/// Σ_i σ_z^(i) on n qubits (qubit 0 is the most significant bit).
Operator collective_sigma_z(int n_qubits);
/// σ on qubit `which` of n, identity elsewhere.
Operator single_qubit_operator(const Operator& sigma, int which, int n_qubits);

Operator pauli_x();
Operator pauli_y();
Operator pauli_z();

/// n qubits coupled through S = Σ σ_z^(i) to a seeded random bath:
/// B = coupling · B̂ with ‖B̂‖₂ = 1, random H_B of unit spectral norm, and a
/// full-rank bath state with geometric weights.  H_S = 0.
SystemBathModel collective_dephasing_model(int n_qubits, int bath_dim, double coupling,
                                           std::uint64_t seed = 20240521);

/// (ω/2)(XX + YY) on two qubits: swaps |01⟩ and |10⟩, kills |00⟩ and |11⟩,
/// so it rotates inside the collective-dephasing DFS.
Operator exchange_hamiltonian(double omega);

/// Two-qubit collective dephasing plus the symmetry-breaking pair
/// (σ_x ⊗ I, B′) with a seeded unit-norm bath operator B′.
SystemBathModel perturbed_dfs_model(double coupling, const Operator& h_s, std::uint64_t seed = 20240521);

/// SME counterpart: F = Σσ_z with a = γ, perturbation G = σ_x ⊗ I with
/// g = c = γ (so the exact coefficient matrix is positive), and H′_Lamb.
LindbladModel perturbed_dfs_sme(double gamma, const Operator& h_eff, const Operator& h_lamb_pert);

/// (|01⟩ + |10⟩)/√2.
DensityMatrix dfs_bell_state();

}  // namespace dfslab

#endif  // DFSLAB_DFS_HPP
