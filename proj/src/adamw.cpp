#include "hut/adamw.hpp"

#include <cmath>
#include <stdexcept>

#include "hut/kernels.hpp"

namespace hut {

void AdamW::step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads) {
    if (params.size() != grads.size()) {
        throw std::invalid_argument("AdamW::step: " + std::to_string(params.size()) +
                                    " params vs " + std::to_string(grads.size()) + " grads");
    }
    if (m_.empty()) {
        m_.reserve(params.size());
        v_.reserve(params.size());
        for (const Matrix* p : params) {
            m_.push_back(Matrix::zeros(p->rows(), p->cols()));
            v_.push_back(Matrix::zeros(p->rows(), p->cols()));
        }
    } else if (m_.size() != params.size()) {
        throw std::invalid_argument("AdamW::step: parameter list changed size");
    }

    ++t_;
    kernels::AdamStep s;
    s.lr = cfg_.lr;
    s.beta1 = cfg_.beta1;
    s.beta2 = cfg_.beta2;
    s.eps = cfg_.eps;
    s.decay_factor = 1.0 - cfg_.lr * cfg_.weight_decay;
    s.bias_corr1_inv = 1.0 / (1.0 - std::pow(cfg_.beta1, static_cast<double>(t_)));
    s.bias_corr2_inv = 1.0 / (1.0 - std::pow(cfg_.beta2, static_cast<double>(t_)));

    const auto& kt = kernels::active();
    for (std::size_t i = 0; i < params.size(); ++i) {
        Matrix& p = *params[i];
        if (!p.same_shape(grads[i]) || !p.same_shape(m_[i])) {
            throw ShapeError("AdamW::step: shape mismatch at parameter " + std::to_string(i) +
                             ": param " + p.shape_str() + ", grad " + grads[i].shape_str());
        }
        kt.adamw_update(p.mutable_data(), m_[i].mutable_data(), v_[i].mutable_data(),
                        grads[i].data(), p.size(), s);
    }
}

}  // namespace hut
