#ifndef DFSLAB_TABLE1_HPP
#define DFSLAB_TABLE1_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dfslab/fidelity.hpp"
#include "dfslab/lindblad.hpp"
#include "dfslab/system_bath.hpp"

namespace dfslab {

struct OsrCase {
  SystemBathModel model;
  DensityMatrix state;
};

struct SmeCase {
  LindbladModel model;
  DensityMatrix state;
};

/// Explicit propagator offered as a "general OSR" instance; it is probed
/// for a singular generator rather than scored against the finite-H claim.
struct SingularCase {
  JointPropagator propagator;
  DensityMatrix state;
};

struct Table1Suite {
  std::optional<OsrCase> osr_general;
  std::optional<SingularCase> osr_general_singular;
  std::optional<SmeCase> sme_general;
  /// Perturbed-DFS models; ε = 0 gives the unperturbed DFS rows.  Memory
  /// cases need [H, ρ̃] = 0, dynamical cases a compatible rotating H_S.
  std::optional<OsrCase> osr_dfs_memory;
  std::optional<OsrCase> osr_dfs_dynamical;
  std::optional<SmeCase> sme_dfs_memory;
  std::optional<SmeCase> sme_dfs_dynamical;
  /// Lamb shift acting as a scalar on the DFS, for the SME DFS row.
  std::optional<Operator> sme_dfs_lamb_shift;
  /// Finite ε at which the dynamical row is evaluated.
  double dynamical_eps = 0.1;
  int max_order = 4;

  bool empty() const;
};

enum class CellStatus { kPass, kFail, kException };

struct Table1Cell {
  std::string row;
  Picture picture;
  std::string claim;
  double measured;
  CellStatus status;
  std::string note;
};

struct Table1Report {
  std::vector<Table1Cell> cells;
  /// Exception cells count as reproduced: the table itself carves them out.
  bool all_pass() const;
};

std::string_view to_string(CellStatus s);

/// Default suite: seeded random finite model and its coarse-grained SME,
/// two-qubit collective-dephasing DFS in both pictures with σ_x ⊗ I
/// symmetry breaking, and the phase-damping probe.
Table1Suite default_table1_suite(std::uint64_t seed = 20240521);

/// Throws kConfig on an empty suite.
Table1Report table1_report(const Table1Suite& suite);

}  // namespace dfslab

#endif  // DFSLAB_TABLE1_HPP
