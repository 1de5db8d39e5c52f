#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Inner-loop arithmetic for the detrender and the wavelet transform. Every
// routine has a scalar reference; wider variants are picked once at startup
// from the CPU feature set and must agree with the reference to rounding.
namespace circtz::kernels {

enum class Backend { Scalar, Avx2 };

struct KernelTable {
    Backend backend;
    /// sum_i x[i] * w[i]
    double (*dot)(const double* x, const double* w, std::size_t n);
    /// Two dot products sharing one signal: (sum x*a, sum x*b).
    void (*dot2)(const double* x, const double* a, const double* b, std::size_t n, double* out_a, double* out_b);
};

const KernelTable& scalar_table();
/// nullptr when the binary was built without AVX2 support or the CPU lacks it.
const KernelTable* avx2_table();

/// Best table for this CPU. CIRCTZ_SIMD=scalar in the environment pins the reference path.
const KernelTable& active();
std::string_view backend_name(Backend b);

/// Pins the table returned by active(); used by tests and benchmarks.
void force_backend(Backend b);
void reset_backend();

inline double dot(std::span<const double> x, std::span<const double> w) {
    return active().dot(x.data(), w.data(), x.size());
}

}  // namespace circtz::kernels
