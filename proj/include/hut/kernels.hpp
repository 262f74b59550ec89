#pragma once

#include <cstddef>

namespace hut::kernels {

// Hyperparameters for one decoupled-weight-decay Adam update, with the
// per-step bias corrections precomputed by the caller so the kernel itself
// is a pure elementwise pass.
struct AdamStep {
    double lr;
    double beta1;
    double beta2;
    double eps;
    double decay_factor;    // 1 - lr * weight_decay
    double bias_corr1_inv;  // 1 / (1 - beta1^t)
    double bias_corr2_inv;  // 1 / (1 - beta2^t)
};

// One set of inner-loop kernels.  All buffers are row-major, caller-allocated
// and non-aliasing unless a parameter is documented as in/out.
//
// Every variant of a kernel must produce bit-identical output to the scalar
// reference: per-element operations are kept in the same order and shape
// (mul + add, never fma), so vectorization changes only the lane count.
// The equivalence tests assert this with memcmp.
struct KernelTable {
    const char* name;

    // c[n*p] = a[n*m] * b[m*p]; c is zeroed first, then accumulated in
    // ascending-k order for every output element.
    void (*matmul)(const double* a, const double* b, double* c,
                   std::size_t n, std::size_t m, std::size_t p);

    // out[i] = a[i] * b[i]
    void (*hadamard)(const double* a, const double* b, double* out, std::size_t n);

    // out[i] = a[i] + b[i]
    void (*add)(const double* a, const double* b, double* out, std::size_t n);

    // out[i] = a[i] - b[i]
    void (*sub)(const double* a, const double* b, double* out, std::size_t n);

    // out[i] = s * a[i]
    void (*scale)(const double* a, double s, double* out, std::size_t n);

    // out[i*k + j] = col[i] * row[j]
    void (*outer)(const double* col, const double* row, double* out,
                  std::size_t d, std::size_t k);

    // out[i*k + j] = g[j] * y[i*k + j] + b[j]
    void (*scale_shift)(const double* y, const double* g, const double* b,
                        double* out, std::size_t n, std::size_t k);

    // out[i*k + j] = y[i*k + j] + v[j]
    void (*add_rowvec)(const double* y, const double* v, double* out,
                       std::size_t n, std::size_t k);

    // out[j] = sum_i x[i*k + j], accumulated in ascending-i order
    void (*col_sum)(const double* x, double* out, std::size_t n, std::size_t k);

    // In-place Adam update with decoupled weight decay over n elements:
    //   m = beta1*m + (1-beta1)*g
    //   v = beta2*v + (1-beta2)*g*g
    //   p = p*decay_factor - lr * (m*bias_corr1_inv) / (sqrt(v*bias_corr2_inv) + eps)
    void (*adamw_update)(double* p, double* m, double* v, const double* g,
                         std::size_t n, const AdamStep& s);
};

// Plain-loop reference implementation; always available.
const KernelTable& scalar_table();

// AVX2 implementation, or nullptr when the build or the running CPU lacks it.
const KernelTable* avx2_table();

// Table used by the library.  Chosen once per process: the HUT_KERNELS
// environment variable ("scalar" or "avx2") forces a path, otherwise the best
// supported one is picked.  Forcing an unavailable path throws.
const KernelTable& active();

}  // namespace hut::kernels
