#include <benchmark/benchmark.h>

#include "dfslab/dfs.hpp"
#include "dfslab/fidelity.hpp"
#include "dfslab/lindblad.hpp"
#include "dfslab/parallel.hpp"

using namespace dfslab;

namespace {

LindbladModel bench_model() {
  return perturbed_dfs_sme(0.5, exchange_hamiltonian(1.0), kron(pauli_x(), pauli_x()));
}

void BM_LiouvillianParallel(benchmark::State& state) {
  const LindbladModel m = bench_model();
  for (auto _ : state) benchmark::DoNotOptimize(liouvillian_matrix(m, 0.1, GeneratorMode::kExact));
}

void BM_LiouvillianSerial(benchmark::State& state) {
  const LindbladModel m = bench_model();
  for (auto _ : state) benchmark::DoNotOptimize(liouvillian_matrix_serial(m, 0.1, GeneratorMode::kExact));
}

// A 32-point memory-fidelity sweep over ε, the shape of a stability scan.
template <bool Parallel>
void BM_FidelitySweep(benchmark::State& state) {
  const SystemBathModel m = perturbed_dfs_model(1.0, exchange_hamiltonian(1.0));
  const DensityMatrix bell = dfs_bell_state();
  auto point = [&](std::size_t i) { return memory_fidelity(m, bell, 1.0, 1e-3 * static_cast<double>(i + 1)); };
  for (auto _ : state) {
    if constexpr (Parallel)
      benchmark::DoNotOptimize(parallel_map(32, point));
    else
      benchmark::DoNotOptimize(serial_map(32, point));
  }
}

}  // namespace

BENCHMARK(BM_LiouvillianParallel);
BENCHMARK(BM_LiouvillianSerial);
BENCHMARK(BM_FidelitySweep<true>)->Name("BM_FidelitySweep/parallel");
BENCHMARK(BM_FidelitySweep<false>)->Name("BM_FidelitySweep/serial");

BENCHMARK_MAIN();
