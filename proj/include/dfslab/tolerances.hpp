#ifndef DFSLAB_TOLERANCES_HPP
#define DFSLAB_TOLERANCES_HPP

namespace dfslab {

// Hermiticity is judged relative to the operator norm.
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kPositivityTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kKrausNormalizationTol = 1e-10;
inline constexpr double kChiNormalizationTol = 1e-9;
inline constexpr double kBathEigenvalueCutoff = 1e-14;
inline constexpr double kClusterTol = 1e-9;
inline constexpr double kDeficitFloor = 1e-13;
inline constexpr double kCertifiedRSquared = 0.999;
inline constexpr int kMaxDim = 64;

/// Numeric tolerance used by the command-line front end.  The DFSLAB_TOL
/// environment variable replaces the default (1e-10) when it parses as a
/// positive number.
double numeric_tolerance_from_env();

}  // namespace dfslab

#endif  // DFSLAB_TOLERANCES_HPP
