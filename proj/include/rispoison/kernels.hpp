#pragma once

// Dense double-precision inner loops used by the NN core.
//
// Every kernel has a portable scalar reference and, on x86-64, an AVX2/FMA
// variant. The variant is chosen once per process from CPUID; setting the
// environment variable RISPOISON_ISA=scalar forces the reference path.
// Results of the two paths agree to rounding, not bit-for-bit (FMA and
// lane-wise partial sums reorder additions).

#include <cstddef>
#include <string_view>

namespace rispoison::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

struct AdamParams {
  double lr;
  double beta1;
  double beta2;
  double eps;
  double bias_correction1;  // 1 - beta1^t
  double bias_correction2;  // 1 - beta2^t
};

struct KernelTable {
  // c[m x n] (+)= a[m x k] * b[k x n]
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c, bool accumulate);
  // c[m x n] (+)= a[k x m]^T * b[k x n]
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c, bool accumulate);
  // c[m x n] (+)= a[m x k] * b[n x k]^T
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c, bool accumulate);
  // One bias-corrected Adam step over n parameters.
  void (*adam_update)(std::size_t n, double* param, const double* grad, double* m,
                      double* v, const AdamParams& p);
  // dst <- (1 - t) * dst + t * src
  void (*lerp)(std::size_t n, double* dst, const double* src, double t);
};

bool isa_supported(Isa isa);

/// Kernel table for a specific ISA. Throws ConfigError if unsupported.
const KernelTable& table(Isa isa);

/// Process-wide selection (CPUID, overridable via RISPOISON_ISA).
Isa active_isa();
const KernelTable& active();

namespace scalar {
extern const KernelTable kTable;
}
#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
extern const KernelTable kTable;
}
#endif

}  // namespace rispoison::kernels
