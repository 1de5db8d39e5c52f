#include "circtz/kernels.hpp"

namespace circtz::kernels {
namespace {

double dot_scalar(const double* x, const double* w, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += x[i] * w[i];
    }
    return acc;
}

void dot2_scalar(const double* x, const double* a, const double* b, std::size_t n, double* out_a, double* out_b) {
    double acc_a = 0.0;
    double acc_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc_a += x[i] * a[i];
        acc_b += x[i] * b[i];
    }
    *out_a = acc_a;
    *out_b = acc_b;
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{Backend::Scalar, &dot_scalar, &dot2_scalar};
    return table;
}

}  // namespace circtz::kernels
