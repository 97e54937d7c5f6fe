#ifndef DFSLAB_LINDBLAD_HPP
#define DFSLAB_LINDBLAD_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <tuple>
#include <vector>

#include "dfslab/operator_space.hpp"

namespace dfslab {

/// Symmetry-breaking additions to a semigroup generator: new error
/// generators ε G_p coupled to the F_α through g_pα, and a perturbing Lamb
/// shift ε H′_Lamb.  `c` is the G-G block of the full coefficient matrix;
/// it only enters the exact generator mode.
struct LindbladPerturbation {
  std::vector<Operator> g_ops;
  Matrix g;          // P × M
  double eps = 0.0;  // nominal strength, used when no ε is supplied
  Operator h_lamb_pert;
  Matrix c;          // P × P, hermitian
};

struct LindbladModel {
  int dim;
  Operator h_eff;
  std::vector<Operator> f_ops;
  Matrix a;  // M × M, hermitian
  std::optional<LindbladPerturbation> perturbation;

  void validate() const;
  /// Nominal ε of the perturbation block, 0 without one.
  double nominal_eps() const { return perturbation ? perturbation->eps : 0.0; }
};

enum class GeneratorMode {
  /// Unperturbed generator plus the O(ε) cross terms and ε H′_Lamb; all
  /// O(ε²) terms dropped.
  kTruncated,
  /// Full dissipator over {F_α} ∪ {ε G_p} with coefficient matrix
  /// [[a, g†], [g, c]], plus ε H′_Lamb.
  kExact,
};

/// Column-stacked superoperator: matrix · vec(ρ) = vec(L[ρ]).
struct Superoperator {
  int dim;
  Matrix matrix;
};

/// 𝙻_{x,y}[ρ] = [x, ρy†] + [xρ, y†] = 2xρy† − y†xρ − ρy†x.
Operator dissipator_pair(const Operator& x, const Operator& y, const Operator& rho);

/// L′[ρ] for any operator ρ (the map is linear, so states and intermediate
/// derivatives share one entry point).
Operator lindblad_generator(const LindbladModel& m, const Operator& rho, double eps,
                            GeneratorMode mode = GeneratorMode::kTruncated);

/// Builds the superoperator column by column from generator action on the
/// matrix units, columns fanned out over OpenMP threads.
Superoperator liouvillian_matrix(const LindbladModel& m, double eps, GeneratorMode mode = GeneratorMode::kTruncated);

/// Reference construction from the vectorization identity
/// vec(AXB) = (Bᵀ ⊗ A) vec(X), single-threaded.
Superoperator liouvillian_matrix_serial(const LindbladModel& m, double eps,
                                        GeneratorMode mode = GeneratorMode::kTruncated);

Vector vectorize(const Operator& x);
Operator unvectorize(const Vector& v, int dim);

/// exp(L t) ρ₀ by the scaling-and-squaring matrix exponential of the
/// superoperator.  Positivity of the result is only guaranteed for
/// completely positive generators.
DensityMatrix integrate_sme(const LindbladModel& m, const DensityMatrix& rho0, double t, double eps,
                            GeneratorMode mode = GeneratorMode::kTruncated);
/// Propagates an arbitrary operator; t may be negative (finite differences).
Operator propagate_operator(const Superoperator& s, const Operator& x, double t);

/// (L′)ⁿ[ρ₀], n ≥ 1.
Operator sme_derivative(const LindbladModel& m, const Operator& rho0, int n, double eps,
                        GeneratorMode mode = GeneratorMode::kTruncated);

/// Content hash of a model (matrices, perturbation block); equal models
/// hash equal.
std::uint64_t model_fingerprint(const LindbladModel& m);

/// Superoperators keyed by (model fingerprint, ε, mode).  Lookups take a
/// shared lock; insertion takes the exclusive lock.
class SuperoperatorCache {
 public:
  std::shared_ptr<const Superoperator> get(const LindbladModel& m, double eps, GeneratorMode mode);
  std::size_t size() const;
  void clear();

 private:
  using Key = std::tuple<std::uint64_t, std::uint64_t, int>;
  mutable std::shared_mutex mutex_;
  std::map<Key, std::shared_ptr<const Superoperator>> entries_;
};

/// Process-wide cache used by integrate_sme.
SuperoperatorCache& default_superoperator_cache();

}  // namespace dfslab

#endif  // DFSLAB_LINDBLAD_HPP
