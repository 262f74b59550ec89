#include "hut/lora_adapter.hpp"

#include <stdexcept>
#include <string>

#include "hut/ops.hpp"
#include "hut/rng.hpp"

namespace hut {

LoraAdapter lora_init(const Matrix& w0, std::size_t rank, double s, std::uint64_t seed) {
    const std::size_t d = w0.rows();
    const std::size_t k = w0.cols();
    if (rank < 1 || rank > d || rank > k) {
        throw std::invalid_argument("lora_init: rank " + std::to_string(rank) +
                                    " outside [1, min(d,k)] for W0 " + w0.shape_str());
    }
    if (s < 1.0) {
        throw std::invalid_argument("lora_init: scale s must be >= 1, got " + std::to_string(s));
    }
    LoraAdapter st;
    st.w0 = w0;
    st.wa = gaussian_matrix(d, rank, 0.0, 0.02, mix_seed(seed, 0));
    st.wb = Matrix::zeros(rank, k);
    st.s = s;
    return st;
}

Matrix lora_forward(const LoraAdapter& st, const Matrix& x) {
    if (x.cols() != st.w0.rows()) {
        throw ShapeError("lora_forward: x " + x.shape_str() + " does not feed W0 " +
                         st.w0.shape_str());
    }
    const Matrix base = matmul(x, st.w0);
    const Matrix low_rank = matmul(matmul(x, st.wa), st.wb);
    return add(base, scale(low_rank, st.s));
}

Matrix lora_effective_weight(const LoraAdapter& st) {
    return add(st.w0, scale(matmul(st.wa, st.wb), st.s));
}

MergedLinear lora_merge(const LoraAdapter& st) {
    return MergedLinear{lora_effective_weight(st), Matrix::zeros(1, st.w0.cols())};
}

LoraGradients lora_backward(const LoraAdapter& st, const Matrix& x, const Matrix& upstream) {
    if (x.cols() != st.w0.rows()) {
        throw ShapeError("lora_backward: x " + x.shape_str() + " does not feed W0 " +
                         st.w0.shape_str());
    }
    require_shape(upstream, x.rows(), st.w0.cols(), "lora_backward upstream");
    LoraGradients g;
    g.wb = scale(matmul(transpose(matmul(x, st.wa)), upstream), st.s);
    g.wa = scale(matmul(transpose(x), matmul(upstream, transpose(st.wb))), st.s);
    return g;
}

Matrix lora_input_grad(const LoraAdapter& st, const Matrix& upstream) {
    const Matrix through_base = matmul(upstream, transpose(st.w0));
    const Matrix through_adapter = matmul(matmul(upstream, transpose(st.wb)), transpose(st.wa));
    return add(through_base, scale(through_adapter, st.s));
}

}  // namespace hut
