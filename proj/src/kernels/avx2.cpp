#include "circtz/kernels.hpp"

#include <immintrin.h>

namespace circtz::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* x, const double* w, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(w + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(w + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(w + i), acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        acc += x[i] * w[i];
    }
    return acc;
}

void dot2_avx2(const double* x, const double* a, const double* b, std::size_t n, double* out_a, double* out_b) {
    __m256d acc_a0 = _mm256_setzero_pd();
    __m256d acc_a1 = _mm256_setzero_pd();
    __m256d acc_b0 = _mm256_setzero_pd();
    __m256d acc_b1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d x0 = _mm256_loadu_pd(x + i);
        const __m256d x1 = _mm256_loadu_pd(x + i + 4);
        acc_a0 = _mm256_fmadd_pd(x0, _mm256_loadu_pd(a + i), acc_a0);
        acc_a1 = _mm256_fmadd_pd(x1, _mm256_loadu_pd(a + i + 4), acc_a1);
        acc_b0 = _mm256_fmadd_pd(x0, _mm256_loadu_pd(b + i), acc_b0);
        acc_b1 = _mm256_fmadd_pd(x1, _mm256_loadu_pd(b + i + 4), acc_b1);
    }
    for (; i + 4 <= n; i += 4) {
        const __m256d x0 = _mm256_loadu_pd(x + i);
        acc_a0 = _mm256_fmadd_pd(x0, _mm256_loadu_pd(a + i), acc_a0);
        acc_b0 = _mm256_fmadd_pd(x0, _mm256_loadu_pd(b + i), acc_b0);
    }
    double sa = hsum(_mm256_add_pd(acc_a0, acc_a1));
    double sb = hsum(_mm256_add_pd(acc_b0, acc_b1));
    for (; i < n; ++i) {
        sa += x[i] * a[i];
        sb += x[i] * b[i];
    }
    *out_a = sa;
    *out_b = sb;
}

}  // namespace

const KernelTable& avx2_table_impl() {
    static const KernelTable table{Backend::Avx2, &dot_avx2, &dot2_avx2};
    return table;
}

}  // namespace circtz::kernels
