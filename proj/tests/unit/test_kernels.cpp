#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "rispoison/kernels.hpp"

using namespace rispoison::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

void require_close(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(std::abs(a[i] - b[i]) <= 1e-12 * (1.0 + std::abs(a[i])));
  }
}

// Shapes cover the 16-wide, 4-wide and scalar tails of the vector loops.
const std::size_t kDims[] = {1, 3, 4, 7, 16, 17, 41, 64};

}  // namespace

TEST_CASE("scalar reference matches a naive triple loop") {
  std::mt19937_64 rng(1);
  const std::size_t m = 5, n = 7, k = 9;
  auto a = random_vec(rng, m * k), b = random_vec(rng, k * n);
  std::vector<double> c(m * n), naive(m * n, 0.0);
  scalar::kTable.gemm_nn(m, n, k, a.data(), b.data(), c.data(), false);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = 0; p < k; ++p) naive[i * n + j] += a[i * k + p] * b[p * n + j];
  require_close(c, naive);
}

TEST_CASE("SIMD kernels agree with the scalar reference") {
  if (!isa_supported(Isa::avx2)) {
    MESSAGE("AVX2 not available; only the scalar path is exercised");
    return;
  }
  const KernelTable& ref = table(Isa::scalar);
  const KernelTable& vec = table(Isa::avx2);
  std::mt19937_64 rng(7);
  for (std::size_t m : kDims) {
    for (std::size_t n : kDims) {
      for (std::size_t k : {std::size_t{1}, std::size_t{5}, std::size_t{16}, std::size_t{34}}) {
        const bool acc = (m + n + k) % 2 == 0;
        auto a = random_vec(rng, m * k), b = random_vec(rng, k * n), init = random_vec(rng, m * n);
        auto c1 = init, c2 = init;
        ref.gemm_nn(m, n, k, a.data(), b.data(), c1.data(), acc);
        vec.gemm_nn(m, n, k, a.data(), b.data(), c2.data(), acc);
        require_close(c1, c2);

        // a is k x m for the transposed-left product.
        auto at = random_vec(rng, k * m);
        c1 = init, c2 = init;
        ref.gemm_tn(m, n, k, at.data(), b.data(), c1.data(), acc);
        vec.gemm_tn(m, n, k, at.data(), b.data(), c2.data(), acc);
        require_close(c1, c2);

        auto bt = random_vec(rng, n * k);
        c1 = init, c2 = init;
        ref.gemm_nt(m, n, k, a.data(), bt.data(), c1.data(), acc);
        vec.gemm_nt(m, n, k, a.data(), bt.data(), c2.data(), acc);
        require_close(c1, c2);
      }
    }
  }
}

TEST_CASE("SIMD Adam and lerp agree with the scalar reference") {
  if (!isa_supported(Isa::avx2)) return;
  std::mt19937_64 rng(3);
  for (std::size_t n : kDims) {
    auto p1 = random_vec(rng, n), g = random_vec(rng, n);
    auto m1 = random_vec(rng, n), v1 = random_vec(rng, n);
    for (double& x : v1) x = std::abs(x);
    auto p2 = p1, m2 = m1, v2 = v1;
    const AdamParams hp{1e-3, 0.9, 0.999, 1e-8, 1 - 0.9 * 0.9, 1 - 0.999 * 0.999};
    table(Isa::scalar).adam_update(n, p1.data(), g.data(), m1.data(), v1.data(), hp);
    table(Isa::avx2).adam_update(n, p2.data(), g.data(), m2.data(), v2.data(), hp);
    require_close(p1, p2);
    require_close(m1, m2);
    require_close(v1, v2);

    auto src = random_vec(rng, n);
    table(Isa::scalar).lerp(n, p1.data(), src.data(), 0.005);
    table(Isa::avx2).lerp(n, p2.data(), src.data(), 0.005);
    require_close(p1, p2);
  }
}

TEST_CASE("active table is one of the supported ISAs") {
  CHECK(isa_supported(active_isa()));
  CHECK(&active() == &table(active_isa()));
}
