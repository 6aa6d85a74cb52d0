#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <stdexcept>

#include "gsgp/backend.hpp"

namespace gsgp {
namespace {

TEST(ChooseChunk, CeilingWithFloorOfOne) {
  EXPECT_EQ(choose_chunk(100, 4), 25u);
  EXPECT_EQ(choose_chunk(101, 4), 26u);
  EXPECT_EQ(choose_chunk(10, 16), 1u);
  EXPECT_EQ(choose_chunk(1, 1), 1u);
}

TEST(MapElements, ConstantKernel) {
  auto par = Backend::parallel(4);
  Matrix<double> out(5, 7, 3.0);
  par.map_elements(out, [](std::size_t, std::size_t) { return 0.0; });
  EXPECT_EQ(out, Matrix<double>(5, 7, 0.0));
}

TEST(MapElements, RowMajorCounter) {
  auto par = Backend::parallel(4);
  Matrix<std::size_t> out(3, 2);
  par.map_elements(out, [](std::size_t i, std::size_t j) { return i * 2 + j; });
  for (std::size_t idx = 0; idx < 6; ++idx) EXPECT_EQ(out.flat()[idx], idx);
}

TEST(MapElements, OutputIndependentOfWorkerCount) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t rows = 1 + rng() % 40, cols = 1 + rng() % 40;
    const double a = std::uniform_real_distribution<>(-2, 2)(rng);
    const double b = std::uniform_real_distribution<>(-2, 2)(rng);
    auto kernel = [&](std::size_t i, std::size_t j) {
      return std::sin(a * static_cast<double>(i)) * std::exp(b * 0.01 * static_cast<double>(j));
    };
    auto one = Backend::sequential();
    auto eight = Backend::parallel(8);
    Matrix<double> x(rows, cols), y(rows, cols);
    one.map_elements(x, kernel);
    eight.map_elements(y, kernel);
    ASSERT_EQ(x, y);
  }
}

TEST(MapElements, EveryCellWrittenExactlyOnce) {
  auto par = Backend::parallel(7);
  for (std::size_t rows : {1u, 3u, 13u, 64u})
    for (std::size_t cols : {1u, 5u, 31u}) {
      auto shadow = std::make_unique<std::atomic<int>[]>(rows * cols);
      Matrix<int> out(rows, cols);
      par.map_elements(out, [&](std::size_t i, std::size_t j) {
        shadow[i * cols + j].fetch_add(1);
        return 1;
      });
      for (std::size_t c = 0; c < rows * cols; ++c) ASSERT_EQ(shadow[c].load(), 1);
    }
}

TEST(MapRows, IdentityKernel) {
  auto par = Backend::parallel(3);
  std::vector<std::size_t> out(17);
  par.map_rows(std::span<std::size_t>(out), [](std::size_t i) { return i; });
  std::vector<std::size_t> expect(17);
  std::iota(expect.begin(), expect.end(), 0u);
  EXPECT_EQ(out, expect);
}

TEST(MapRows, RowSumsMatchAcrossWorkerCounts) {
  std::mt19937_64 rng(11);
  Matrix<double> m(97, 333);
  for (double& v : m.flat()) v = std::uniform_real_distribution<>(-1e3, 1e3)(rng);
  auto row_sum = [&](std::size_t i) {
    double s = 0.0;
    for (double v : m.row(i)) s += v;
    return s;
  };
  std::vector<double> ref(m.rows());
  auto seq = Backend::sequential();
  seq.map_rows(std::span<double>(ref), row_sum);
  for (std::size_t w : {2u, 4u, 8u, 16u}) {
    auto par = Backend::parallel(w);
    std::vector<double> got(m.rows());
    par.map_rows(std::span<double>(got), row_sum);
    ASSERT_EQ(got, ref) << w << " workers";
  }
}

TEST(MapRows, EmptyExtentIsNoop) {
  auto par = Backend::parallel(4);
  std::vector<int> out;
  bool called = false;
  par.map_rows(std::span<int>(out), [&](std::size_t) {
    called = true;
    return 0;
  });
  EXPECT_FALSE(called);
  Matrix<int> empty;
  par.map_elements(empty, [&](std::size_t, std::size_t) {
    called = true;
    return 0;
  });
  EXPECT_FALSE(called);
}

TEST(Backend, KernelExceptionsPropagate) {
  auto par = Backend::parallel(4);
  std::vector<int> out(100);
  EXPECT_THROW(par.map_rows(std::span<int>(out),
                            [](std::size_t i) -> int {
                              if (i == 63) throw std::runtime_error("boom");
                              return 0;
                            }),
               std::runtime_error);
  // Pool is still usable afterwards.
  par.map_rows(std::span<int>(out), [](std::size_t i) { return static_cast<int>(i); });
  EXPECT_EQ(out[99], 99);
}

TEST(Backend, ManyDispatchesReuseThePool) {
  auto par = Backend::parallel(5);
  std::vector<long> out(50);
  long total = 0;
  for (int rep = 0; rep < 2000; ++rep) {
    par.map_rows(std::span<long>(out), [rep](std::size_t i) { return rep + long(i); });
    total += out[49];
  }
  EXPECT_EQ(total, 2000L * 49 + 1999L * 2000 / 2);
}

TEST(Backend, Descriptor) {
  EXPECT_EQ(Backend::sequential().descriptor().name, "sequential");
  EXPECT_EQ(Backend::sequential().workers(), 1u);
  EXPECT_EQ(Backend::parallel(6).workers(), 6u);
  EXPECT_GE(Backend::parallel().workers(), 1u);
  RunConfig cfg;
  cfg.backend = BackendKind::Sequential;
  EXPECT_EQ(Backend::from_config(cfg).kind(), BackendKind::Sequential);
}

}  // namespace
}  // namespace gsgp
