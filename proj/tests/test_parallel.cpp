#include <cmath>
#include <stdexcept>

#include "dfslab/parallel.hpp"
#include "test_helpers.hpp"

using namespace dfslab;

TEST_SUITE("parallel") {
  TEST_CASE("parallel_map matches serial_map bit for bit") {
    auto f = [](std::size_t i) {
      Rng rng(i);
      const Operator h = random_hermitian(4, rng);
      return propagator(h, 0.37 * static_cast<double>(i)).matrix();
    };
    const auto a = serial_map(64, f);
    const auto b = parallel_map(64, f);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK((a[i] - b[i]).norm() == 0.0);
    CHECK(parallel_map(0, f).empty());
  }

  TEST_CASE("task exceptions reach the caller") {
    auto f = [](std::size_t i) -> double {
      if (i == 7) throw Error(ErrorKind::kInvalidArgument, "seven");
      return std::sqrt(static_cast<double>(i));
    };
    CHECK(testing::thrown_kind([&] { (void)parallel_map(16, f); }) == ErrorKind::kInvalidArgument);
  }

  TEST_CASE("thread count is reported") { CHECK(max_threads() >= 1); }
}
