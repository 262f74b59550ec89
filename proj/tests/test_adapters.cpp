#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "hut/hut_adapter.hpp"
#include "hut/lora_adapter.hpp"
#include "hut/ops.hpp"
#include "hut/rng.hpp"
#include "hut/verify.hpp"
#include "test_util.hpp"

using namespace hut;
using testutil::check_matrix_eq;
using testutil::check_matrix_near;

TEST_CASE("multiplicative update against a hand-worked example") {
    HutAdapter st;
    st.w0 = Matrix::ones(2, 2);
    st.ma = Matrix::from_rows({{2}, {4}});   // row means: 2, 4
    st.mb = Matrix::from_rows({{3, 5}});     // column means: 3, 5
    st.gamma = Matrix::ones(1, 2);
    st.beta = Matrix::zeros(1, 2);

    // rank-one modulation (2,4) x (3,5) applied to an all-ones base
    check_matrix_eq(hut_updated_weight(st), Matrix::from_rows({{6, 10}, {12, 20}}));

    const Matrix x = Matrix::from_rows({{1, 1}});
    check_matrix_eq(hut_forward(st, x), Matrix::from_rows({{18, 30}}));

    // base entries scale individually
    st.w0 = Matrix::from_rows({{0.5, 2}, {-1, 3}});
    check_matrix_eq(hut_updated_weight(st), Matrix::from_rows({{3, 20}, {-12, 60}}));

    // output scale-and-shift acts per column
    st.w0 = Matrix::ones(2, 2);
    st.gamma = Matrix::from_rows({{2, 0.5}});
    st.beta = Matrix::from_rows({{1, -1}});
    check_matrix_eq(hut_forward(st, x), Matrix::from_rows({{37, 14}}));
}

TEST_CASE("zero jitter initialization is an exact identity") {
    const Matrix w0 = gaussian_matrix(5, 4, 0.0, 1.0, 31);
    const HutAdapter st = hut_init(w0, 2, 0.0, 77);
    check_matrix_eq(st.gamma, Matrix::ones(1, 4));
    check_matrix_eq(st.beta, Matrix::zeros(1, 4));
    check_matrix_eq(hut_updated_weight(st), w0);

    const Matrix x = gaussian_matrix(3, 5, 0.0, 1.0, 32);
    check_matrix_eq(hut_forward(st, x), matmul(x, w0));
}

TEST_CASE("initialization validates rank and jitter") {
    const Matrix w0 = Matrix::ones(4, 6);
    try {
        (void)hut_init(w0, 0, 0.0, 1);
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("rank") != std::string::npos);
    }
    CHECK_THROWS_AS(hut_init(w0, 5, 0.0, 1), std::invalid_argument);  // > min(d,k)
    CHECK_THROWS_AS(hut_init(w0, 1, -0.1, 1), std::invalid_argument);
    CHECK_NOTHROW(hut_init(w0, 4, 0.0, 1));
}

TEST_CASE("only the factor means matter, not the inner width") {
    // Two states whose factors have bitwise-identical row/column means but
    // different inner widths (1 vs 2).  Values are picked so the means are
    // exact in floating point.
    const Matrix w0 = gaussian_matrix(2, 2, 0.0, 1.0, 51);
    HutAdapter narrow;
    narrow.w0 = w0;
    narrow.ma = Matrix::from_rows({{1.5}, {1.0}});
    narrow.mb = Matrix::from_rows({{3, 5}});
    narrow.gamma = Matrix::from_rows({{1.25, 0.75}});
    narrow.beta = Matrix::from_rows({{0.5, -0.25}});

    HutAdapter wide = narrow;
    wide.ma = Matrix::from_rows({{1.75, 1.25}, {0.5, 1.5}});  // means 1.5, 1.0
    wide.mb = Matrix::from_rows({{3, 5}, {3, 5}});            // means 3, 5
    CHECK(narrow.rank() == 1);
    CHECK(wide.rank() == 2);

    check_matrix_eq(hut_updated_weight(wide), hut_updated_weight(narrow));
    const Matrix x = gaussian_matrix(3, 2, 0.0, 1.0, 52);
    check_matrix_eq(hut_forward(wide, x), hut_forward(narrow, x));
}

TEST_CASE("update preserves the base sparsity pattern") {
    HutAdapter st = random_hut_state(5, 6, 3, 61);
    st.w0.at(0, 1) = 0.0;
    st.w0.at(4, 0) = 0.0;
    const Matrix w = hut_updated_weight(st);
    CHECK(w.at(0, 1) == 0.0);
    CHECK(w.at(4, 0) == 0.0);
}

TEST_CASE("merge packs the folded weight and the shift") {
    const HutAdapter st = random_hut_state(6, 5, 2, 71);
    const MergedLinear merged = hut_merge(st);
    check_matrix_eq(merged.weight, hut_effective_weight(st));
    check_matrix_eq(merged.bias, st.beta);

    const Matrix x = gaussian_matrix(4, 6, 0.0, 1.0, 72);
    check_matrix_near(merged.forward(x), hut_forward(st, x), 1e-10);
    check_matrix_near(hut_forward_reduced(st, x), hut_forward(st, x), 1e-10);
}

TEST_CASE("backward: zero input sends the factor gradients to zero") {
    const HutAdapter st = random_hut_state(4, 3, 2, 81);
    const Matrix x = Matrix::zeros(2, 4);
    const Matrix g = gaussian_matrix(2, 3, 0.0, 1.0, 82);
    const HutGradients grads = hut_backward(st, x, g);
    check_matrix_eq(grads.ma, Matrix::zeros(4, 2));
    check_matrix_eq(grads.mb, Matrix::zeros(2, 3));
    check_matrix_eq(grads.gamma, Matrix::zeros(1, 3));  // output was all zero
    check_matrix_eq(grads.beta, col_sum(g));            // shift sees raw upstream
}

TEST_CASE("backward matches central differences") {
    for (int i = 0; i < 3; ++i) {
        const HutAdapter st = random_hut_state(5, 4, 2, 91 + i);
        const Matrix x = gaussian_matrix(3, 5, 0.0, 1.0, 95 + i);
        const Matrix up = gaussian_matrix(3, 4, 0.0, 1.0, 99 + i);
        const GradCheckReport rep = gradcheck_hut(st, x, up);
        INFO("instance ", i, " worst ", rep.worst);
        CHECK(rep.worst <= 1e-5);
        CHECK(rep.checked == 5 * 2 + 2 * 4 + 4 + 4);
    }
}

TEST_CASE("input gradient matches central differences") {
    const HutAdapter st = random_hut_state(4, 3, 2, 111);
    Matrix x = gaussian_matrix(2, 4, 0.0, 1.0, 112);
    const Matrix up = gaussian_matrix(2, 3, 0.0, 1.0, 113);
    const Matrix dx = hut_input_grad(st, up);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x.mutable_data()[i];
        auto probe = [&](double v) {
            x.mutable_data()[i] = v;
            const Matrix h = hut_forward(st, x);
            double s = 0.0;
            for (std::size_t e = 0; e < h.size(); ++e) s += up.values()[e] * h.values()[e];
            return s;
        };
        const double fd = (probe(orig + 1e-6) - probe(orig - 1e-6)) / 2e-6;
        x.mutable_data()[i] = orig;
        worst = std::max(worst, rel_err(dx.values()[i], fd, 1e-2));
    }
    CHECK(worst <= 1e-5);
}

// ---------------------------------------------------------------------------
// additive (low-rank increment) baseline
// ---------------------------------------------------------------------------

TEST_CASE("additive adapter against a hand-worked example") {
    LoraAdapter st;
    st.w0 = Matrix::from_rows({{1, 0}, {0, 1}});
    st.wa = Matrix::from_rows({{1}, {1}});
    st.wb = Matrix::from_rows({{1, 1}});
    st.s = 1.0;
    const Matrix x = Matrix::from_rows({{1, 1}});
    check_matrix_eq(lora_forward(st, x), Matrix::from_rows({{3, 3}}));

    st.s = 2.0;
    check_matrix_eq(lora_forward(st, x), Matrix::from_rows({{5, 5}}));
}

TEST_CASE("additive adapter starts as an exact identity") {
    const Matrix w0 = gaussian_matrix(4, 5, 0.0, 1.0, 121);
    const LoraAdapter st = lora_init(w0, 2, 1.0, 122);
    check_matrix_eq(st.wb, Matrix::zeros(2, 5));
    const Matrix x = gaussian_matrix(3, 4, 0.0, 1.0, 123);
    check_matrix_eq(lora_forward(st, x), matmul(x, w0));

    // same seed, same factors
    const LoraAdapter st2 = lora_init(w0, 2, 1.0, 122);
    check_matrix_eq(st2.wa, st.wa);
}

TEST_CASE("doubling s while halving a factor changes nothing, bitwise") {
    LoraAdapter a = random_lora_state(5, 4, 2, 1.0, 131);
    LoraAdapter b = a;
    b.s = 2.0;
    b.wa = scale(a.wa, 0.5);  // power-of-two scaling is exact
    const Matrix x = gaussian_matrix(3, 5, 0.0, 1.0, 132);
    check_matrix_eq(lora_forward(b, x), lora_forward(a, x));
}

TEST_CASE("additive merge folds the increment into one dense weight") {
    const LoraAdapter st = random_lora_state(6, 5, 2, 1.5, 141);
    const MergedLinear merged = lora_merge(st);
    check_matrix_eq(merged.weight, lora_effective_weight(st));
    check_matrix_eq(merged.bias, Matrix::zeros(1, 5));
    const Matrix x = gaussian_matrix(4, 6, 0.0, 1.0, 142);
    check_matrix_near(merged.forward(x), lora_forward(st, x), 1e-10);
}

TEST_CASE("additive backward: zero input zeroes both factor gradients") {
    const LoraAdapter st = random_lora_state(4, 3, 2, 1.0, 151);
    const Matrix x = Matrix::zeros(2, 4);
    const Matrix g = gaussian_matrix(2, 3, 0.0, 1.0, 152);
    const LoraGradients grads = lora_backward(st, x, g);
    check_matrix_eq(grads.wa, Matrix::zeros(4, 2));
    check_matrix_eq(grads.wb, Matrix::zeros(2, 3));
}

TEST_CASE("additive backward matches central differences") {
    for (int i = 0; i < 3; ++i) {
        const LoraAdapter st = random_lora_state(5, 4, 2, 1.0 + i, 161 + i);
        const Matrix x = gaussian_matrix(3, 5, 0.0, 1.0, 165 + i);
        const Matrix up = gaussian_matrix(3, 4, 0.0, 1.0, 169 + i);
        const GradCheckReport rep = gradcheck_lora(st, x, up);
        INFO("instance ", i, " worst ", rep.worst);
        CHECK(rep.worst <= 1e-5);
    }
}

TEST_CASE("additive init validates rank and scale") {
    const Matrix w0 = Matrix::ones(4, 6);
    CHECK_THROWS_AS(lora_init(w0, 0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(lora_init(w0, 7, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(lora_init(w0, 2, 0.5, 1), std::invalid_argument);  // s >= 1
}
