#include <cmath>
#include <cstring>

#include "hut/kernels.hpp"

// Reference kernels.  Written as the plainest possible loops; every SIMD
// variant is validated bit-for-bit against these, so any change to operation
// order here is a behavioural change for the whole library.

namespace hut::kernels {
namespace {

// i-k-j loop order: each c[i][j] accumulates its m products in ascending-k
// order, which is the same per-element order the vectorized kernels use.
void matmul_scalar(const double* a, const double* b, double* c,
                   std::size_t n, std::size_t m, std::size_t p) {
    std::memset(c, 0, n * p * sizeof(double));
    for (std::size_t i = 0; i < n; ++i) {
        const double* arow = a + i * m;
        double* crow = c + i * p;
        for (std::size_t k = 0; k < m; ++k) {
            const double aik = arow[k];
            const double* brow = b + k * p;
            for (std::size_t j = 0; j < p; ++j) {
                crow[j] += aik * brow[j];
            }
        }
    }
}

void hadamard_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void add_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void scale_scalar(const double* a, double s, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = s * a[i];
}

void outer_scalar(const double* col, const double* row, double* out,
                  std::size_t d, std::size_t k) {
    for (std::size_t i = 0; i < d; ++i) {
        const double ci = col[i];
        double* orow = out + i * k;
        for (std::size_t j = 0; j < k; ++j) orow[j] = ci * row[j];
    }
}

void scale_shift_scalar(const double* y, const double* g, const double* b,
                        double* out, std::size_t n, std::size_t k) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* yrow = y + i * k;
        double* orow = out + i * k;
        for (std::size_t j = 0; j < k; ++j) orow[j] = g[j] * yrow[j] + b[j];
    }
}

void add_rowvec_scalar(const double* y, const double* v, double* out,
                       std::size_t n, std::size_t k) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* yrow = y + i * k;
        double* orow = out + i * k;
        for (std::size_t j = 0; j < k; ++j) orow[j] = yrow[j] + v[j];
    }
}

// Ascending-i accumulation per column, matching the vector variant's order.
void col_sum_scalar(const double* x, double* out, std::size_t n, std::size_t k) {
    std::memset(out, 0, k * sizeof(double));
    for (std::size_t i = 0; i < n; ++i) {
        const double* xrow = x + i * k;
        for (std::size_t j = 0; j < k; ++j) out[j] += xrow[j];
    }
}

void adamw_scalar(double* p, double* m, double* v, const double* g,
                  std::size_t n, const AdamStep& s) {
    for (std::size_t i = 0; i < n; ++i) {
        const double gi = g[i];
        m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * gi;
        v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * (gi * gi);
        const double mhat = m[i] * s.bias_corr1_inv;
        const double vhat = v[i] * s.bias_corr2_inv;
        p[i] = p[i] * s.decay_factor - s.lr * (mhat / (std::sqrt(vhat) + s.eps));
    }
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table = {
        "scalar",
        matmul_scalar,
        hadamard_scalar,
        add_scalar,
        sub_scalar,
        scale_scalar,
        outer_scalar,
        scale_shift_scalar,
        add_rowvec_scalar,
        col_sum_scalar,
        adamw_scalar,
    };
    return table;
}

}  // namespace hut::kernels
