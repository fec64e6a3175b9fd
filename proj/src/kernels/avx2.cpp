#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

#include "rispoison/kernels.hpp"

#define RP_AVX2 __attribute__((target("avx2,fma")))

namespace rispoison::kernels::avx2 {
namespace {

RP_AVX2 inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Row i of c accumulates a[i,p] * b[p,:] over p; columns in blocks of 4.
RP_AVX2 void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a,
                     const double* b, double* c, bool accumulate) {
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    if (!accumulate) {
      for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    }
    std::size_t j = 0;
    for (; j + 16 <= n4; j += 16) {
      __m256d c0 = _mm256_loadu_pd(crow + j);
      __m256d c1 = _mm256_loadu_pd(crow + j + 4);
      __m256d c2 = _mm256_loadu_pd(crow + j + 8);
      __m256d c3 = _mm256_loadu_pd(crow + j + 12);
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d av = _mm256_set1_pd(a[i * k + p]);
        const double* brow = b + p * n + j;
        c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow), c0);
        c1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 4), c1);
        c2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 8), c2);
        c3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 12), c3);
      }
      _mm256_storeu_pd(crow + j, c0);
      _mm256_storeu_pd(crow + j + 4, c1);
      _mm256_storeu_pd(crow + j + 8, c2);
      _mm256_storeu_pd(crow + j + 12, c3);
    }
    for (; j < n4; j += 4) {
      __m256d c0 = _mm256_loadu_pd(crow + j);
      for (std::size_t p = 0; p < k; ++p) {
        c0 = _mm256_fmadd_pd(_mm256_set1_pd(a[i * k + p]), _mm256_loadu_pd(b + p * n + j), c0);
      }
      _mm256_storeu_pd(crow + j, c0);
    }
    for (; j < n; ++j) {
      __m256d acc = _mm256_setzero_pd();
      std::size_t p = 0;
      // Strided column of b; gather-free: four rows at a time.
      for (; p + 4 <= k; p += 4) {
        const __m256d av = _mm256_loadu_pd(a + i * k + p);
        const __m256d bv = _mm256_set_pd(b[(p + 3) * n + j], b[(p + 2) * n + j],
                                         b[(p + 1) * n + j], b[p * n + j]);
        acc = _mm256_fmadd_pd(av, bv, acc);
      }
      double s = hsum(acc);
      for (; p < k; ++p) s += a[i * k + p] * b[p * n + j];
      crow[j] += s;
    }
  }
}

RP_AVX2 void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a,
                     const double* b, double* c, bool accumulate) {
  if (!accumulate) {
    for (std::size_t i = 0; i < m * n; ++i) c[i] = 0.0;
  }
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a + p * m;
    const double* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double api = arow[i];
      if (api == 0.0) continue;  // relu masks make this common
      const __m256d av = _mm256_set1_pd(api);
      double* crow = c + i * n;
      std::size_t j = 0;
      for (; j < n4; j += 4) {
        _mm256_storeu_pd(crow + j,
                         _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + j), _mm256_loadu_pd(crow + j)));
      }
      for (; j < n; ++j) crow[j] += api * brow[j];
    }
  }
}

RP_AVX2 void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a,
                     const double* b, double* c, bool accumulate) {
  const std::size_t k4 = k & ~std::size_t{3};
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = b + j * k;
      __m256d acc = _mm256_setzero_pd();
      std::size_t p = 0;
      for (; p < k4; p += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(arow + p), _mm256_loadu_pd(brow + p), acc);
      }
      double s = hsum(acc);
      for (; p < k; ++p) s += arow[p] * brow[p];
      c[i * n + j] = accumulate ? c[i * n + j] + s : s;
    }
  }
}

RP_AVX2 void adam_update(std::size_t n, double* param, const double* grad, double* m, double* v,
                         const AdamParams& p) {
  const __m256d b1 = _mm256_set1_pd(p.beta1);
  const __m256d b2 = _mm256_set1_pd(p.beta2);
  const __m256d omb1 = _mm256_set1_pd(1.0 - p.beta1);
  const __m256d omb2 = _mm256_set1_pd(1.0 - p.beta2);
  const __m256d bc1 = _mm256_set1_pd(p.bias_correction1);
  const __m256d bc2 = _mm256_set1_pd(p.bias_correction2);
  const __m256d lr = _mm256_set1_pd(p.lr);
  const __m256d eps = _mm256_set1_pd(p.eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    const __m256d mv = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(omb1, g));
    const __m256d vv = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(omb2, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m + i, mv);
    _mm256_storeu_pd(v + i, vv);
    const __m256d mhat = _mm256_div_pd(mv, bc1);
    const __m256d vhat = _mm256_div_pd(vv, bc2);
    const __m256d step = _mm256_div_pd(_mm256_mul_pd(lr, mhat), _mm256_add_pd(_mm256_sqrt_pd(vhat), eps));
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
  }
  for (; i < n; ++i) {
    m[i] = p.beta1 * m[i] + (1.0 - p.beta1) * grad[i];
    v[i] = p.beta2 * v[i] + (1.0 - p.beta2) * grad[i] * grad[i];
    param[i] -= p.lr * (m[i] / p.bias_correction1) /
                (std::sqrt(v[i] / p.bias_correction2) + p.eps);
  }
}

RP_AVX2 void lerp(std::size_t n, double* dst, const double* src, double t) {
  const __m256d tv = _mm256_set1_pd(t);
  const __m256d omt = _mm256_set1_pd(1.0 - t);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_mul_pd(omt, _mm256_loadu_pd(dst + i));
    _mm256_storeu_pd(dst + i, _mm256_add_pd(d, _mm256_mul_pd(tv, _mm256_loadu_pd(src + i))));
  }
  for (; i < n; ++i) dst[i] = (1.0 - t) * dst[i] + t * src[i];
}

}  // namespace

const KernelTable kTable{gemm_nn, gemm_tn, gemm_nt, adam_update, lerp};

}  // namespace rispoison::kernels::avx2

#endif
