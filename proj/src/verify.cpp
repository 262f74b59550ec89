#include "hut/verify.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <random>
#include <sstream>

#include "hut/block.hpp"
#include "hut/checkpoint.hpp"
#include "hut/flops.hpp"
#include "hut/flops_model.hpp"
#include "hut/kernels.hpp"
#include "hut/ops.hpp"
#include "hut/rng.hpp"
#include "hut/train.hpp"

namespace hut {

HutAdapter random_hut_state(std::size_t d, std::size_t k, std::size_t r, std::uint64_t seed) {
    const Matrix w0 = gaussian_matrix(d, k, 0.0, 1.0, mix_seed(seed, 1));
    HutAdapter st = hut_init(w0, r, 0.4, mix_seed(seed, 2));
    seeded_fill(st.gamma, Dist::Gaussian, 1.0, 0.3, mix_seed(seed, 3));
    seeded_fill(st.beta, Dist::Gaussian, 0.0, 0.5, mix_seed(seed, 4));
    return st;
}

LoraAdapter random_lora_state(std::size_t d, std::size_t k, std::size_t r, double s,
                              std::uint64_t seed) {
    const Matrix w0 = gaussian_matrix(d, k, 0.0, 1.0, mix_seed(seed, 1));
    LoraAdapter st = lora_init(w0, r, s, mix_seed(seed, 2));
    // lora_init zeroes WB (identity at start); tests want a live adapter.
    seeded_fill(st.wb, Dist::Gaussian, 0.0, 0.3, mix_seed(seed, 3));
    return st;
}

namespace {

double probe_hut(const HutAdapter& st, const Matrix& x, const Matrix& upstream) {
    const Matrix h = hut_forward(st, x);
    double s = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) s += upstream.values()[i] * h.values()[i];
    return s;
}

double probe_lora(const LoraAdapter& st, const Matrix& x, const Matrix& upstream) {
    const Matrix h = lora_forward(st, x);
    double s = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) s += upstream.values()[i] * h.values()[i];
    return s;
}

template <typename State, typename Probe>
void fd_tensor(State& st, Matrix& param, const Matrix& analytic, const Matrix& x,
               const Matrix& upstream, double step, double floor, Probe&& probe,
               GradCheckReport& rep) {
    for (std::size_t i = 0; i < param.size(); ++i) {
        double* slot = param.mutable_data() + i;
        const double orig = *slot;
        *slot = orig + step;
        const double fp = probe(st, x, upstream);
        *slot = orig - step;
        const double fm = probe(st, x, upstream);
        *slot = orig;
        const double fd = (fp - fm) * 0.5 / step;
        rep.worst = std::max(rep.worst, rel_err(analytic.values()[i], fd, floor));
        ++rep.checked;
    }
}

}  // namespace

GradCheckReport gradcheck_hut(const HutAdapter& st0, const Matrix& x, const Matrix& upstream,
                              double step, double floor) {
    HutAdapter st = st0;
    const HutGradients g = hut_backward(st, x, upstream);
    GradCheckReport rep;
    fd_tensor(st, st.ma, g.ma, x, upstream, step, floor, probe_hut, rep);
    fd_tensor(st, st.mb, g.mb, x, upstream, step, floor, probe_hut, rep);
    fd_tensor(st, st.gamma, g.gamma, x, upstream, step, floor, probe_hut, rep);
    fd_tensor(st, st.beta, g.beta, x, upstream, step, floor, probe_hut, rep);
    return rep;
}

GradCheckReport gradcheck_lora(const LoraAdapter& st0, const Matrix& x, const Matrix& upstream,
                               double step, double floor) {
    LoraAdapter st = st0;
    const LoraGradients g = lora_backward(st, x, upstream);
    GradCheckReport rep;
    fd_tensor(st, st.wa, g.wa, x, upstream, step, floor, probe_lora, rep);
    fd_tensor(st, st.wb, g.wb, x, upstream, step, floor, probe_lora, rep);
    return rep;
}

std::string delta_flops_table(const std::vector<std::int64_t>& ranks) {
    std::ostringstream out;
    out << "    d";
    for (std::int64_t r : ranks) out << "  r=" << r << " (cost delta)";
    out << '\n';
    for (std::int64_t d = 8; d <= 1024; d *= 2) {
        char head[32];
        std::snprintf(head, sizeof(head), "%5" PRId64, d);
        out << head;
        for (std::int64_t r : ranks) {
            char cell[40];
            std::snprintf(cell, sizeof(cell), "  %+18" PRId64, delta_flops(d, r));
            out << cell;
        }
        out << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// validation battery
// ---------------------------------------------------------------------------

namespace {

struct Rng {
    std::mt19937_64 eng;
    explicit Rng(std::uint64_t seed) : eng(seed) {}
    std::size_t size(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(eng);
    }
};

std::string fmt(const char* pattern, double v) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), pattern, v);
    return std::string(buf);
}

PropertyResult check_counter_charges(std::uint64_t seed) {
    Rng rng(seed);
    std::size_t ops = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = rng.size(1, 12), m = rng.size(1, 12), p = rng.size(1, 12);
        const Matrix a = gaussian_matrix(n, m, 0.0, 1.0, mix_seed(seed, 10 + trial));
        const Matrix b = gaussian_matrix(m, p, 0.0, 1.0, mix_seed(seed, 40 + trial));
        const Matrix c = gaussian_matrix(n, m, 0.0, 1.0, mix_seed(seed, 70 + trial));
        const Matrix col = gaussian_matrix(n, 1, 0.0, 1.0, mix_seed(seed, 100 + trial));
        const Matrix row = gaussian_matrix(1, m, 0.0, 1.0, mix_seed(seed, 130 + trial));

        auto expect = [&](std::uint64_t want, std::uint64_t got, const char* op)
            -> PropertyResult {
            return {"counter-charges", false,
                    std::string(op) + " charged " + std::to_string(got) + ", formula says " +
                        std::to_string(want) + " at shape " + std::to_string(n) + "x" +
                        std::to_string(m) + "x" + std::to_string(p)};
        };
        {
            FlopScope s;
            (void)matmul(a, b);
            if (s.count() != (2 * m - 1) * n * p) return expect((2 * m - 1) * n * p, s.count(), "matmul");
        }
        {
            FlopScope s;
            (void)hadamard(a, c);
            if (s.count() != n * m) return expect(n * m, s.count(), "hadamard");
        }
        {
            FlopScope s;
            (void)add(a, c);
            (void)sub(a, c);
            (void)scale(a, 1.5);
            if (s.count() != 3 * n * m) return expect(3 * n * m, s.count(), "add+sub+scale");
        }
        {
            FlopScope s;
            (void)outer(col, row);
            if (s.count() != n * m) return expect(n * m, s.count(), "outer");
        }
        {
            FlopScope s;
            (void)row_mean(a);
            if (s.count() != m * n) return expect(m * n, s.count(), "row_mean");
        }
        {
            FlopScope s;
            (void)col_mean(a);
            if (s.count() != n * m) return expect(n * m, s.count(), "col_mean");
        }
        {
            FlopScope s;
            (void)row_sum(a);
            (void)col_sum(a);
            if (s.count() != (m - 1) * n + (n - 1) * m) {
                return expect((m - 1) * n + (n - 1) * m, s.count(), "row_sum+col_sum");
            }
        }
        {
            const Matrix g = gaussian_matrix(1, m, 1.0, 0.1, mix_seed(seed, 160 + trial));
            const Matrix be = gaussian_matrix(1, m, 0.0, 0.1, mix_seed(seed, 190 + trial));
            FlopScope s;
            (void)scale_shift(a, g, be);
            if (s.count() != 2 * n * m) return expect(2 * n * m, s.count(), "scale_shift");
            const std::uint64_t before = s.count();
            (void)add_row_vector(a, be);
            if (s.count() - before != n * m) return expect(n * m, s.count() - before, "add_row_vector");
        }
        {
            FlopScope s;
            (void)broadcast_rows(row, n);
            if (s.count() != n * m) return expect(n * m, s.count(), "broadcast_rows");
        }
        ops += 12;
    }
    return {"counter-charges", true,
            std::to_string(ops) + " op measurements over 20 random shapes, all exactly the "
            "shape formula"};
}

PropertyResult check_implicit_ones(std::uint64_t seed) {
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t d = 2 + trial % 7, r = 1 + trial % 5, k = 2 + (trial * 3) % 9;
        const Matrix ma = gaussian_matrix(d, r, 1.0, 0.7, mix_seed(seed, trial));
        const Matrix mb = gaussian_matrix(r, k, 1.0, 0.7, mix_seed(seed, 100 + trial));

        // row_mean must equal the materialized product (MA x ones[r x 1]) / r
        // bitwise: same summation order, same final divide.
        const Matrix prod = matmul(ma, Matrix::ones(r, 1));
        const Matrix mean = row_mean(ma);
        for (std::size_t i = 0; i < d; ++i) {
            const double byhand = prod.at(i, 0) / static_cast<double>(r);
            if (byhand != mean.at(i, 0)) {
                return {"implicit-ones-means", false,
                        "row_mean diverges from materialized ones-product at row " +
                            std::to_string(i)};
            }
        }
        // And (MA x ones[r x k]) / r must be column-constant, every column the
        // row mean.
        const Matrix wide = matmul(ma, Matrix::ones(r, k));
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                if (wide.at(i, j) / static_cast<double>(r) != mean.at(i, 0)) {
                    return {"implicit-ones-means", false,
                            "wide ones-product column " + std::to_string(j) +
                                " disagrees with row_mean"};
                }
            }
        }
        // Same statement transposed for col_mean.
        const Matrix cprod = matmul(Matrix::ones(1, r), mb);
        const Matrix cmean = col_mean(mb);
        for (std::size_t j = 0; j < k; ++j) {
            if (cprod.at(0, j) / static_cast<double>(r) != cmean.at(0, j)) {
                return {"implicit-ones-means", false,
                        "col_mean diverges from materialized ones-product at col " +
                            std::to_string(j)};
            }
        }
    }
    return {"implicit-ones-means", true,
            "20 trials: means equal materialized all-ones products bitwise"};
}

PropertyResult check_kernel_equivalence(std::uint64_t seed) {
    const kernels::KernelTable& ref = kernels::scalar_table();
    const kernels::KernelTable* simd = kernels::avx2_table();
    if (simd == nullptr) {
        return {"kernel-equivalence", true,
                "avx2 unavailable on this build/CPU; scalar path is the only path"};
    }
    Rng rng(seed);
    auto mismatch = [&](const char* op, std::size_t n) -> PropertyResult {
        return {"kernel-equivalence", false,
                std::string(op) + " scalar vs " + simd->name + " differ at size " +
                    std::to_string(n)};
    };
    for (int trial = 0; trial < 30; ++trial) {
        // Sizes straddle the 4-lane width so remainder loops get exercised.
        const std::size_t n = rng.size(1, 9), m = rng.size(1, 9), p = rng.size(1, 9);
        const Matrix a = gaussian_matrix(n, m, 0.0, 1.0, mix_seed(seed, 300 + trial));
        const Matrix b = gaussian_matrix(m, p, 0.0, 1.0, mix_seed(seed, 400 + trial));
        const Matrix c = gaussian_matrix(n, m, 0.0, 1.0, mix_seed(seed, 500 + trial));

        Matrix out1(n, p), out2(n, p);
        ref.matmul(a.data(), b.data(), out1.mutable_data(), n, m, p);
        simd->matmul(a.data(), b.data(), out2.mutable_data(), n, m, p);
        if (std::memcmp(out1.data(), out2.data(), n * p * 8) != 0) return mismatch("matmul", n * m * p);

        Matrix e1(n, m), e2(n, m);
        ref.hadamard(a.data(), c.data(), e1.mutable_data(), a.size());
        simd->hadamard(a.data(), c.data(), e2.mutable_data(), a.size());
        if (std::memcmp(e1.data(), e2.data(), a.size() * 8) != 0) return mismatch("hadamard", a.size());

        ref.add(a.data(), c.data(), e1.mutable_data(), a.size());
        simd->add(a.data(), c.data(), e2.mutable_data(), a.size());
        if (std::memcmp(e1.data(), e2.data(), a.size() * 8) != 0) return mismatch("add", a.size());

        ref.sub(a.data(), c.data(), e1.mutable_data(), a.size());
        simd->sub(a.data(), c.data(), e2.mutable_data(), a.size());
        if (std::memcmp(e1.data(), e2.data(), a.size() * 8) != 0) return mismatch("sub", a.size());

        ref.scale(a.data(), -1.7, e1.mutable_data(), a.size());
        simd->scale(a.data(), -1.7, e2.mutable_data(), a.size());
        if (std::memcmp(e1.data(), e2.data(), a.size() * 8) != 0) return mismatch("scale", a.size());

        const Matrix colv = gaussian_matrix(n, 1, 0.0, 1.0, mix_seed(seed, 600 + trial));
        const Matrix rowv = gaussian_matrix(1, m, 0.0, 1.0, mix_seed(seed, 700 + trial));
        ref.outer(colv.data(), rowv.data(), e1.mutable_data(), n, m);
        simd->outer(colv.data(), rowv.data(), e2.mutable_data(), n, m);
        if (std::memcmp(e1.data(), e2.data(), a.size() * 8) != 0) return mismatch("outer", a.size());

        const Matrix g = gaussian_matrix(1, m, 1.0, 0.2, mix_seed(seed, 800 + trial));
        const Matrix be = gaussian_matrix(1, m, 0.0, 0.2, mix_seed(seed, 900 + trial));
        ref.scale_shift(a.data(), g.data(), be.data(), e1.mutable_data(), n, m);
        simd->scale_shift(a.data(), g.data(), be.data(), e2.mutable_data(), n, m);
        if (std::memcmp(e1.data(), e2.data(), a.size() * 8) != 0) return mismatch("scale_shift", a.size());

        ref.add_rowvec(a.data(), be.data(), e1.mutable_data(), n, m);
        simd->add_rowvec(a.data(), be.data(), e2.mutable_data(), n, m);
        if (std::memcmp(e1.data(), e2.data(), a.size() * 8) != 0) return mismatch("add_rowvec", a.size());

        Matrix s1(1, m), s2(1, m);
        ref.col_sum(a.data(), s1.mutable_data(), n, m);
        simd->col_sum(a.data(), s2.mutable_data(), n, m);
        if (std::memcmp(s1.data(), s2.data(), m * 8) != 0) return mismatch("col_sum", m);

        kernels::AdamStep st{0.01, 0.9, 0.999, 1e-8, 1.0 - 0.01 * 0.1, 1.0 / (1.0 - 0.9),
                             1.0 / (1.0 - 0.999)};
        Matrix p1 = a, p2 = a, m1 = c, m2 = c;
        Matrix v1(n, m, 0.5), v2(n, m, 0.5);
        const Matrix grad = gaussian_matrix(n, m, 0.0, 1.0, mix_seed(seed, 1000 + trial));
        ref.adamw_update(p1.mutable_data(), m1.mutable_data(), v1.mutable_data(), grad.data(),
                         p1.size(), st);
        simd->adamw_update(p2.mutable_data(), m2.mutable_data(), v2.mutable_data(), grad.data(),
                           p2.size(), st);
        if (std::memcmp(p1.data(), p2.data(), p1.size() * 8) != 0 ||
            std::memcmp(m1.data(), m2.data(), m1.size() * 8) != 0 ||
            std::memcmp(v1.data(), v2.data(), v1.size() * 8) != 0) {
            return mismatch("adamw_update", p1.size());
        }
    }
    return {"kernel-equivalence", true,
            std::string("scalar vs ") + simd->name + ": 10 kernels x 30 random shapes, bitwise identical"};
}

PropertyResult check_merge_hut(std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t d = rng.size(3, 16), k = rng.size(3, 16);
        const std::size_t r = rng.size(1, std::min<std::size_t>(4, std::min(d, k)));
        const std::size_t n = rng.size(1, 4);
        const HutAdapter st = random_hut_state(d, k, r, mix_seed(seed, 5000 + trial));
        const Matrix x = gaussian_matrix(n, d, 0.0, 1.0, mix_seed(seed, 6000 + trial));
        worst = std::max(worst, max_rel_err(hut_merge(st).forward(x), hut_forward(st, x)));
    }
    const bool ok = worst <= 1e-10;
    return {"merge-equivalence-hut", ok,
            fmt("100 random (state, x) pairs, worst relative gap %.3e (bound 1e-10)", worst)};
}

PropertyResult check_merge_lora(std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t d = rng.size(3, 16), k = rng.size(3, 16);
        const std::size_t r = rng.size(1, std::min<std::size_t>(4, std::min(d, k)));
        const std::size_t n = rng.size(1, 4);
        const double s = 1.0 + 0.5 * static_cast<double>(trial % 3);
        const LoraAdapter st = random_lora_state(d, k, r, s, mix_seed(seed, 7000 + trial));
        const Matrix x = gaussian_matrix(n, d, 0.0, 1.0, mix_seed(seed, 8000 + trial));
        worst = std::max(worst, max_rel_err(lora_merge(st).forward(x), lora_forward(st, x)));
    }
    const bool ok = worst <= 1e-10;
    return {"merge-equivalence-lora", ok,
            fmt("100 random (state, x) pairs, worst relative gap %.3e (bound 1e-10)", worst)};
}

PropertyResult check_reduced_form(std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t d = rng.size(3, 16), k = rng.size(3, 16);
        const std::size_t r = rng.size(1, std::min<std::size_t>(4, std::min(d, k)));
        const std::size_t n = rng.size(1, 4);
        const HutAdapter st = random_hut_state(d, k, r, mix_seed(seed, 9000 + trial));
        const Matrix x = gaussian_matrix(n, d, 0.0, 1.0, mix_seed(seed, 9500 + trial));
        worst = std::max(worst, max_rel_err(hut_forward_reduced(st, x), hut_forward(st, x)));
    }
    const bool ok = worst <= 1e-10;
    return {"reduced-form-consistency", ok,
            fmt("gamma-folded forward vs training forward, worst %.3e (bound 1e-10)", worst)};
}

PropertyResult check_modulation_structure(std::uint64_t seed) {
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t d = 4 + trial % 3, k = 4 + (trial * 2) % 5;
        HutAdapter st = random_hut_state(d, k, 2, mix_seed(seed, 11000 + trial));
        // Pin a couple of base entries to zero; the update must keep them zero.
        st.w0.at(0, 0) = 0.0;
        st.w0.at(d - 1, k - 1) = 0.0;
        const Matrix w = hut_updated_weight(st);
        if (w.at(0, 0) != 0.0 || w.at(d - 1, k - 1) != 0.0) {
            return {"modulation-structure", false, "zero base entry left the zero set"};
        }
        // Entrywise ratio against nonzero base entries is rank one: every 2x2
        // minor of a_i*b_j vanishes up to rounding.
        double worst = 0.0;
        for (std::size_t i1 = 0; i1 + 1 < d; ++i1) {
            for (std::size_t j1 = 0; j1 + 1 < k; ++j1) {
                const std::size_t i2 = i1 + 1, j2 = j1 + 1;
                if (st.w0.at(i1, j1) == 0.0 || st.w0.at(i1, j2) == 0.0 ||
                    st.w0.at(i2, j1) == 0.0 || st.w0.at(i2, j2) == 0.0) {
                    continue;
                }
                const double r11 = w.at(i1, j1) / st.w0.at(i1, j1);
                const double r12 = w.at(i1, j2) / st.w0.at(i1, j2);
                const double r21 = w.at(i2, j1) / st.w0.at(i2, j1);
                const double r22 = w.at(i2, j2) / st.w0.at(i2, j2);
                worst = std::max(worst, std::abs(r11 * r22 - r12 * r21));
            }
        }
        if (worst > 1e-9) {
            return {"modulation-structure", false,
                    fmt("update/base ratio has a 2x2 minor of %.3e (bound 1e-9)", worst)};
        }
    }
    return {"modulation-structure", true,
            "25 trials: zero entries preserved exactly, ratio minors vanish"};
}

PropertyResult check_gradcheck_hut(std::uint64_t seed) {
    Rng rng(seed);
    GradCheckReport total;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t d = rng.size(3, 10), k = rng.size(3, 10);
        const std::size_t r = rng.size(1, std::min<std::size_t>(4, std::min(d, k)));
        const std::size_t n = rng.size(1, 4);
        const HutAdapter st = random_hut_state(d, k, r, mix_seed(seed, 12000 + trial));
        const Matrix x = gaussian_matrix(n, d, 0.0, 1.0, mix_seed(seed, 13000 + trial));
        const Matrix up = gaussian_matrix(n, k, 0.0, 1.0, mix_seed(seed, 14000 + trial));
        const GradCheckReport rep = gradcheck_hut(st, x, up);
        total.worst = std::max(total.worst, rep.worst);
        total.checked += rep.checked;
    }
    const bool ok = total.worst <= 1e-5;
    return {"gradcheck-hut", ok,
            fmt(("central differences over " + std::to_string(total.checked) +
                 " entries (20 instances), worst error %.3e (bound 1e-5)")
                    .c_str(),
                total.worst)};
}

PropertyResult check_gradcheck_lora(std::uint64_t seed) {
    Rng rng(seed);
    GradCheckReport total;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t d = rng.size(3, 10), k = rng.size(3, 10);
        const std::size_t r = rng.size(1, std::min<std::size_t>(4, std::min(d, k)));
        const std::size_t n = rng.size(1, 4);
        const LoraAdapter st =
            random_lora_state(d, k, r, 1.0 + (trial % 2), mix_seed(seed, 15000 + trial));
        const Matrix x = gaussian_matrix(n, d, 0.0, 1.0, mix_seed(seed, 16000 + trial));
        const Matrix up = gaussian_matrix(n, k, 0.0, 1.0, mix_seed(seed, 17000 + trial));
        const GradCheckReport rep = gradcheck_lora(st, x, up);
        total.worst = std::max(total.worst, rep.worst);
        total.checked += rep.checked;
    }
    const bool ok = total.worst <= 1e-5;
    return {"gradcheck-lora", ok,
            fmt(("central differences over " + std::to_string(total.checked) +
                 " entries (20 instances), worst error %.3e (bound 1e-5)")
                    .c_str(),
                total.worst)};
}

PropertyResult check_flops_exactness(std::uint64_t seed, bool inject_skew) {
    std::size_t configs = 0;
    bool tie_seen = false;
    for (std::int64_t n : {1, 2, 5}) {
        for (std::int64_t d : {4, 8, 16, 32}) {
            for (std::int64_t k : {d, d / 2}) {
                for (std::int64_t r : {1, 2, 4}) {
                    if (r > d || r > k) continue;
                    ++configs;
                    for (const char* method : {"hut", "lora", "merged"}) {
                        FlopsReport rep = measure_forward_flops(
                            method, n, d, k, r, mix_seed(seed, configs * 7));
                        if (inject_skew) rep.measured += 1;
                        if (!rep.exact()) {
                            return {"flops-exactness", false,
                                    std::string(method) + " at N=" + std::to_string(n) +
                                        " d=" + std::to_string(d) + " k=" + std::to_string(k) +
                                        " r=" + std::to_string(r) + ": measured " +
                                        std::to_string(rep.measured) + " vs formula " +
                                        std::to_string(rep.theoretical)};
                        }
                    }
                    if (n == 1 && d == 4 && k == 4 && r == 2) {
                        tie_seen = flops_hut(1, 4, 4, 2) == 108 && flops_lora(1, 4, 4, 2) == 108;
                    }
                }
            }
        }
    }
    if (!tie_seen) {
        return {"flops-exactness", false,
                "grid did not confirm the 108/108 tie at N=1, d=k=4, r=2"};
    }
    return {"flops-exactness", true,
            std::to_string(configs) + " configurations x 3 methods, measured == formula "
            "everywhere; N=1 d=k=4 r=2 ties at 108/108"};
}

PropertyResult check_crossover_sign() {
    if (delta_flops(4, 1) >= 0) {
        return {"crossover-sign", false, "delta(4,1) is not negative"};
    }
    if (delta_flops(4, 2) != 0) {
        return {"crossover-sign", false, "delta(4,2) is not the exact tie"};
    }
    std::size_t checked = 0;
    for (std::int64_t d = 8; d <= 1024; d *= 2) {
        for (std::int64_t r = 2; r <= d / 4; ++r) {
            if (delta_flops(d, r) <= 0) {
                return {"crossover-sign", false,
                        "delta(d=" + std::to_string(d) + ", r=" + std::to_string(r) +
                            ") = " + std::to_string(delta_flops(d, r)) + " is not positive"};
            }
            ++checked;
        }
    }
    return {"crossover-sign", true,
            "delta(4,1) = " + std::to_string(delta_flops(4, 1)) +
                " < 0, delta(4,2) = 0, and " + std::to_string(checked) +
                " (d, r) points with d in {8..1024}, 2 <= r <= d/4 are all positive"};
}

PropertyResult check_identity_at_init(std::uint64_t seed) {
    const std::size_t d = 16;
    TransformerBlock frozen(BlockWeights::random(d, mix_seed(seed, 21000)));
    TransformerBlock adapted(frozen.base());
    for (WeightTarget t : kAllTargets) {
        adapted.attach_hut(t, 2, 0.0, mix_seed(seed, 22000 + static_cast<std::uint64_t>(t)));
    }
    const Matrix x = gaussian_matrix(6, d, 0.0, 1.0, mix_seed(seed, 23000));
    const double gap = max_rel_err(adapted.forward(x), frozen.forward(x));
    const bool ok = gap <= 1e-12;
    return {"identity-at-init", ok,
            fmt("all six weights adapted with zero jitter: output gap %.3e (bound 1e-12)", gap)};
}

PropertyResult check_merged_block(std::uint64_t seed) {
    const std::size_t d = 16;
    TransformerBlock model(BlockWeights::random(d, mix_seed(seed, 24000)));
    // Live, non-identity adapters on every weight: multiplicative with
    // randomized gamma/beta on half, additive with nonzero WB on the rest.
    int n = 0;
    for (WeightTarget t : kAllTargets) {
        const auto ts = static_cast<std::uint64_t>(t);
        if (n++ % 2 == 0) {
            model.attach_hut(t, 3, 0.4, mix_seed(seed, 25000 + ts));
            HutAdapter& a = model.hut_mut_at(t);
            seeded_fill(a.gamma, Dist::Gaussian, 1.0, 0.3, mix_seed(seed, 26000 + ts));
            seeded_fill(a.beta, Dist::Gaussian, 0.0, 0.4, mix_seed(seed, 27000 + ts));
        } else {
            model.attach_lora(t, 3, 1.5, mix_seed(seed, 28000 + ts));
            LoraAdapter& a = model.lora_mut_at(t);
            seeded_fill(a.wb, Dist::Gaussian, 0.0, 0.2, mix_seed(seed, 29000 + ts));
        }
    }
    const Matrix x = gaussian_matrix(6, d, 0.0, 1.0, mix_seed(seed, 30000));
    const double gap = max_rel_err(model.merged().forward(x), model.forward(x));
    const bool ok = gap <= 1e-9;
    return {"merged-block-consistency", ok,
            fmt("collapsed block vs training forward on mixed live adapters: gap %.3e "
                "(bound 1e-9)",
                gap)};
}

PropertyResult check_checkpoint_roundtrip(std::uint64_t seed, const std::string& scratch_dir) {
    namespace fs = std::filesystem;
    fs::path dir = scratch_dir.empty() ? fs::temp_directory_path() : fs::path(scratch_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path path = dir / "verify_roundtrip.ckpt";

    Checkpoint ck;
    ck.seed = seed;
    ck.config = {{"method", "hut"}, {"rank", "3"}};
    Matrix awkward(2, 3);
    awkward.at(0, 0) = -0.0;
    awkward.at(0, 1) = 5e-324;        // smallest subnormal
    awkward.at(0, 2) = 1.7976931348623157e308;
    awkward.at(1, 0) = -1.0 / 3.0;
    awkward.at(1, 1) = 0.0;
    awkward.at(1, 2) = 1.0 + 1e-15;
    ck.tensors.emplace_back("awkward", awkward);
    ck.tensors.emplace_back("bulk", gaussian_matrix(7, 5, 0.0, 2.0, mix_seed(seed, 31000)));

    save_checkpoint(ck, path.string());
    const Checkpoint back = load_checkpoint(path.string());
    fs::remove(path, ec);

    if (back.seed != ck.seed || back.tensors.size() != ck.tensors.size()) {
        return {"checkpoint-roundtrip", false, "header changed across save/load"};
    }
    for (std::size_t i = 0; i < ck.tensors.size(); ++i) {
        const Matrix& a = ck.tensors[i].second;
        const Matrix& b = back.tensors[i].second;
        if (back.tensors[i].first != ck.tensors[i].first || !a.same_shape(b) ||
            std::memcmp(a.data(), b.data(), a.size() * 8) != 0) {
            return {"checkpoint-roundtrip", false,
                    "tensor '" + ck.tensors[i].first + "' not bitwise identical after reload"};
        }
    }
    return {"checkpoint-roundtrip", true,
            "signed zero, subnormal, max-double and bulk tensors all bitwise identical"};
}

TrainConfig tiny_train_config(std::uint64_t seed) {
    TrainConfig cfg;
    cfg.method = Method::Hut;
    cfg.targets = {WeightTarget::Wq, WeightTarget::Wv};
    cfg.rank = 4;
    cfg.steps = 12;
    cfg.batch_size = 2;
    cfg.lr = 0.02;
    cfg.seed = seed;
    cfg.task.d = 16;
    cfg.task.seq_len = 4;
    cfg.task.train_size = 8;
    cfg.task.eval_size = 4;
    return cfg;
}

PropertyResult check_train_determinism(std::uint64_t seed) {
    const TrainConfig cfg = tiny_train_config(seed);
    const TrainRun a = finetune(cfg);
    const TrainRun b = finetune(cfg);
    if (a.step_loss != b.step_loss || a.final_train_loss != b.final_train_loss ||
        a.final_eval_loss != b.final_eval_loss || a.eval_metric != b.eval_metric) {
        return {"train-determinism", false,
                "two identical (config, seed) runs diverged in their loss traces"};
    }
    return {"train-determinism", true,
            "two 12-step runs: loss traces and final metrics bitwise identical"};
}

PropertyResult check_frozen_base(std::uint64_t seed) {
    const TrainConfig cfg = tiny_train_config(mix_seed(seed, 32000));
    TrainRun run = finetune(cfg);
    const SyntheticTask task(cfg.task, mix_seed(cfg.seed, 1));
    for (WeightTarget t : kAllTargets) {
        const Matrix& trained = run.model.base().get(t);
        const Matrix& orig = task.student_base().get(t);
        if (!trained.same_shape(orig) ||
            std::memcmp(trained.data(), orig.data(), orig.size() * 8) != 0) {
            return {"frozen-base-invariance", false,
                    std::string("base weight ") + target_name(t) + " changed during training"};
        }
    }
    return {"frozen-base-invariance", true,
            "after a 12-step run every base weight is bitwise unchanged"};
}

}  // namespace

std::vector<PropertyResult> run_validation(const ValidateOptions& opt) {
    std::vector<PropertyResult> out;
    out.push_back(check_counter_charges(mix_seed(opt.seed, 1)));
    out.push_back(check_implicit_ones(mix_seed(opt.seed, 2)));
    out.push_back(check_kernel_equivalence(mix_seed(opt.seed, 3)));
    out.push_back(check_merge_hut(mix_seed(opt.seed, 4)));
    out.push_back(check_merge_lora(mix_seed(opt.seed, 5)));
    out.push_back(check_reduced_form(mix_seed(opt.seed, 6)));
    out.push_back(check_modulation_structure(mix_seed(opt.seed, 7)));
    out.push_back(check_gradcheck_hut(mix_seed(opt.seed, 8)));
    out.push_back(check_gradcheck_lora(mix_seed(opt.seed, 9)));
    out.push_back(check_flops_exactness(mix_seed(opt.seed, 10), opt.inject_counter_skew));
    out.push_back(check_crossover_sign());
    out.push_back(check_identity_at_init(mix_seed(opt.seed, 11)));
    out.push_back(check_merged_block(mix_seed(opt.seed, 12)));
    out.push_back(check_checkpoint_roundtrip(mix_seed(opt.seed, 13), opt.scratch_dir));
    out.push_back(check_train_determinism(mix_seed(opt.seed, 14)));
    out.push_back(check_frozen_base(mix_seed(opt.seed, 15)));
    return out;
}

}  // namespace hut
