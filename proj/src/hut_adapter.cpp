#include "hut/hut_adapter.hpp"

#include <stdexcept>
#include <string>

#include "hut/ops.hpp"
#include "hut/rng.hpp"

namespace hut {

HutAdapter hut_init(const Matrix& w0, std::size_t rank, double noise_std, std::uint64_t seed) {
    const std::size_t d = w0.rows();
    const std::size_t k = w0.cols();
    if (rank < 1 || rank > d || rank > k) {
        throw std::invalid_argument("hut_init: rank " + std::to_string(rank) +
                                    " outside [1, min(d,k)] for W0 " + w0.shape_str());
    }
    if (noise_std < 0.0) {
        throw std::invalid_argument("hut_init: negative noise_std");
    }
    HutAdapter st;
    st.w0 = w0;
    st.ma = gaussian_matrix(d, rank, 1.0, noise_std, mix_seed(seed, 0));
    st.mb = gaussian_matrix(rank, k, 1.0, noise_std, mix_seed(seed, 1));
    st.gamma = Matrix::ones(1, k);
    st.beta = Matrix::zeros(1, k);
    return st;
}

Matrix hut_updated_weight(const HutAdapter& st) {
    return hadamard(outer(row_mean(st.ma), col_mean(st.mb)), st.w0);
}

Matrix hut_effective_weight(const HutAdapter& st) {
    // Kept as four explicit d*k passes (outer, two hadamards, gamma
    // broadcast); the FLOP meter's 4dk weight-construction figure is the
    // literal cost of this sequence, not a separately maintained formula.
    const Matrix modulation = outer(row_mean(st.ma), col_mean(st.mb));
    const Matrix updated = hadamard(modulation, st.w0);
    const Matrix gamma_rows = broadcast_rows(st.gamma, st.w0.rows());
    return hadamard(gamma_rows, updated);
}

Matrix hut_forward(const HutAdapter& st, const Matrix& x) {
    if (x.cols() != st.w0.rows()) {
        throw ShapeError("hut_forward: x " + x.shape_str() + " does not feed W0 " +
                         st.w0.shape_str());
    }
    return scale_shift(matmul(x, hut_updated_weight(st)), st.gamma, st.beta);
}

Matrix hut_forward_reduced(const HutAdapter& st, const Matrix& x) {
    if (x.cols() != st.w0.rows()) {
        throw ShapeError("hut_forward_reduced: x " + x.shape_str() + " does not feed W0 " +
                         st.w0.shape_str());
    }
    return add_row_vector(matmul(x, hut_effective_weight(st)), st.beta);
}

MergedLinear hut_merge(const HutAdapter& st) {
    return MergedLinear{hut_effective_weight(st), st.beta};
}

HutGradients hut_backward(const HutAdapter& st, const Matrix& x, const Matrix& upstream) {
    const std::size_t k = st.w0.cols();
    const std::size_t r = st.rank();
    if (x.cols() != st.w0.rows()) {
        throw ShapeError("hut_backward: x " + x.shape_str() + " does not feed W0 " +
                         st.w0.shape_str());
    }
    require_shape(upstream, x.rows(), k, "hut_backward upstream");

    const Matrix a = row_mean(st.ma);
    const Matrix b = col_mean(st.mb);
    const Matrix w_updated = hadamard(outer(a, b), st.w0);
    const Matrix y = matmul(x, w_updated);

    HutGradients g;
    g.beta = col_sum(upstream);
    g.gamma = col_sum(hadamard(upstream, y));

    // d/dY of gamma .* Y + beta: broadcast gamma over the rows of upstream.
    const Matrix dy = scale_shift(upstream, st.gamma, Matrix::zeros(1, k));
    const Matrix dw = matmul(transpose(x), dy);

    // W_updated[i][j] = a[i]*b[j]*W0[i][j], so the mean vectors see the
    // W0-weighted contractions of dW over the opposite axis.
    const Matrix h = hadamard(dw, st.w0);
    const Matrix da = matmul(h, transpose(b));  // d x 1
    const Matrix db = matmul(transpose(a), h);  // 1 x k

    // Each entry of MA enters only through its row mean, so the gradient
    // spreads da/r uniformly across the row; columns of dMA are identical.
    const double inv_r = 1.0 / static_cast<double>(r);
    g.ma = outer(scale(da, inv_r), Matrix::ones(1, r));
    g.mb = broadcast_rows(scale(db, inv_r), r);
    return g;
}

Matrix hut_input_grad(const HutAdapter& st, const Matrix& upstream) {
    const Matrix dy = scale_shift(upstream, st.gamma, Matrix::zeros(1, st.w0.cols()));
    return matmul(dy, transpose(hut_updated_weight(st)));
}

}  // namespace hut
