#ifndef DFSLAB_ERROR_HPP
#define DFSLAB_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace dfslab {

enum class ErrorKind {
  kInvalidDimension,
  kDimensionMismatch,
  kNonFinite,
  kNotHermitian,
  kNotDensityMatrix,
  kNotUnitary,
  kNotTracePreserving,
  kSingularHamiltonian,
  kInvalidArgument,
  kInvalidGrid,
  kUnsupported,
  kConfig,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI exit-code mapping) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dfslab

#endif  // DFSLAB_ERROR_HPP
