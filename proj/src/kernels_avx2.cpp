// AVX2 variants of the inner-loop kernels (4 doubles per lane group).
//
// This file is compiled with -mavx2 only; no -mfma, and contraction is off
// project-wide.  Each kernel performs the same per-element operations in the
// same order as its scalar reference, so outputs are bit-identical and the
// equivalence tests can compare with memcmp.  Main loops step 4 elements,
// a plain scalar loop finishes the remainder.

#if defined(__AVX2__)

#include <immintrin.h>

#include <cmath>
#include <cstring>

#include "hut/kernels.hpp"

namespace hut::kernels {
namespace {

void matmul_avx2(const double* a, const double* b, double* c,
                 std::size_t n, std::size_t m, std::size_t p) {
    std::memset(c, 0, n * p * sizeof(double));
    for (std::size_t i = 0; i < n; ++i) {
        const double* arow = a + i * m;
        double* crow = c + i * p;
        for (std::size_t k = 0; k < m; ++k) {
            const double aik = arow[k];
            const double* brow = b + k * p;
            const __m256d va = _mm256_set1_pd(aik);
            std::size_t j = 0;
            for (; j + 4 <= p; j += 4) {
                __m256d vc = _mm256_loadu_pd(crow + j);
                __m256d vb = _mm256_loadu_pd(brow + j);
                vc = _mm256_add_pd(vc, _mm256_mul_pd(va, vb));
                _mm256_storeu_pd(crow + j, vc);
            }
            for (; j < p; ++j) crow[j] += aik * brow[j];
        }
    }
}

void hadamard_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void add_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) out[i] = a[i] - b[i];
}

void scale_avx2(const double* a, double s, double* out, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_mul_pd(vs, _mm256_loadu_pd(a + i)));
    }
    for (; i < n; ++i) out[i] = s * a[i];
}

void outer_avx2(const double* col, const double* row, double* out,
                std::size_t d, std::size_t k) {
    for (std::size_t i = 0; i < d; ++i) {
        const __m256d vc = _mm256_set1_pd(col[i]);
        double* orow = out + i * k;
        std::size_t j = 0;
        for (; j + 4 <= k; j += 4) {
            _mm256_storeu_pd(orow + j, _mm256_mul_pd(vc, _mm256_loadu_pd(row + j)));
        }
        for (; j < k; ++j) orow[j] = col[i] * row[j];
    }
}

void scale_shift_avx2(const double* y, const double* g, const double* b,
                      double* out, std::size_t n, std::size_t k) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* yrow = y + i * k;
        double* orow = out + i * k;
        std::size_t j = 0;
        for (; j + 4 <= k; j += 4) {
            __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(g + j), _mm256_loadu_pd(yrow + j));
            _mm256_storeu_pd(orow + j, _mm256_add_pd(prod, _mm256_loadu_pd(b + j)));
        }
        for (; j < k; ++j) orow[j] = g[j] * yrow[j] + b[j];
    }
}

void add_rowvec_avx2(const double* y, const double* v, double* out,
                     std::size_t n, std::size_t k) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* yrow = y + i * k;
        double* orow = out + i * k;
        std::size_t j = 0;
        for (; j + 4 <= k; j += 4) {
            _mm256_storeu_pd(orow + j, _mm256_add_pd(_mm256_loadu_pd(yrow + j), _mm256_loadu_pd(v + j)));
        }
        for (; j < k; ++j) orow[j] = yrow[j] + v[j];
    }
}

void col_sum_avx2(const double* x, double* out, std::size_t n, std::size_t k) {
    std::memset(out, 0, k * sizeof(double));
    for (std::size_t i = 0; i < n; ++i) {
        const double* xrow = x + i * k;
        std::size_t j = 0;
        for (; j + 4 <= k; j += 4) {
            __m256d acc = _mm256_loadu_pd(out + j);
            _mm256_storeu_pd(out + j, _mm256_add_pd(acc, _mm256_loadu_pd(xrow + j)));
        }
        for (; j < k; ++j) out[j] += xrow[j];
    }
}

void adamw_avx2(double* p, double* m, double* v, const double* g,
                std::size_t n, const AdamStep& s) {
    const __m256d b1 = _mm256_set1_pd(s.beta1);
    const __m256d omb1 = _mm256_set1_pd(1.0 - s.beta1);
    const __m256d b2 = _mm256_set1_pd(s.beta2);
    const __m256d omb2 = _mm256_set1_pd(1.0 - s.beta2);
    const __m256d bc1 = _mm256_set1_pd(s.bias_corr1_inv);
    const __m256d bc2 = _mm256_set1_pd(s.bias_corr2_inv);
    const __m256d eps = _mm256_set1_pd(s.eps);
    const __m256d lr = _mm256_set1_pd(s.lr);
    const __m256d df = _mm256_set1_pd(s.decay_factor);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d gi = _mm256_loadu_pd(g + i);
        __m256d mi = _mm256_loadu_pd(m + i);
        __m256d vi = _mm256_loadu_pd(v + i);
        mi = _mm256_add_pd(_mm256_mul_pd(b1, mi), _mm256_mul_pd(omb1, gi));
        vi = _mm256_add_pd(_mm256_mul_pd(b2, vi), _mm256_mul_pd(omb2, _mm256_mul_pd(gi, gi)));
        _mm256_storeu_pd(m + i, mi);
        _mm256_storeu_pd(v + i, vi);
        const __m256d mhat = _mm256_mul_pd(mi, bc1);
        const __m256d vhat = _mm256_mul_pd(vi, bc2);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), eps);
        const __m256d step = _mm256_mul_pd(lr, _mm256_div_pd(mhat, denom));
        const __m256d pi = _mm256_sub_pd(_mm256_mul_pd(_mm256_loadu_pd(p + i), df), step);
        _mm256_storeu_pd(p + i, pi);
    }
    for (; i < n; ++i) {
        const double gi = g[i];
        m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * gi;
        v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * (gi * gi);
        const double mhat = m[i] * s.bias_corr1_inv;
        const double vhat = v[i] * s.bias_corr2_inv;
        p[i] = p[i] * s.decay_factor - s.lr * (mhat / (std::sqrt(vhat) + s.eps));
    }
}

}  // namespace

const KernelTable* avx2_table_impl() {
    static const KernelTable table = {
        "avx2",
        matmul_avx2,
        hadamard_avx2,
        add_avx2,
        sub_avx2,
        scale_avx2,
        outer_avx2,
        scale_shift_avx2,
        add_rowvec_avx2,
        col_sum_avx2,
        adamw_avx2,
    };
    return &table;
}

}  // namespace hut::kernels

#endif  // __AVX2__
