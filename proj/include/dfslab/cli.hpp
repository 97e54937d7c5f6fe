#ifndef DFSLAB_CLI_HPP
#define DFSLAB_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dfslab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;

/// Resolved options for one invocation.
struct ExperimentConfig {
  std::string command;
  std::string model = "collective_dephasing";
  std::optional<std::string> model_file;
  double lambda = 1.0;
  int qubits = 2;
  int bath_dim = 2;
  double coupling = 1.0;
  double omega = 0.0;
  std::string state = "auto";
  std::vector<double> t_grid{1.0};
  std::vector<double> eps_grid{0.0};
  double tau = 0.5;
  std::string picture = "osr";
  std::string fidelity = "memory";
  std::string axis = "eps";
  std::string mode = "auto";
  int n_max = 4;
  std::uint64_t seed = 20240521;
  std::optional<double> expect_slope;
  std::optional<std::string> out;
  std::optional<std::string> export_model;
  std::string format = "json";
};

/// "0.1,1,3" or "log:1e-4:1e-2:9" (n log-spaced points, endpoints included).
std::vector<double> parse_grid(const std::string& text);

/// Runs one subcommand.  Exit codes: 0 success, 1 theorem-check failure,
/// 2 configuration error.
int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to run().
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dfslab

#endif  // DFSLAB_CLI_HPP
