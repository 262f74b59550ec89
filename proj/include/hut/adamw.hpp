#pragma once

#include <cstdint>
#include <vector>

#include "hut/matrix.hpp"

namespace hut {

// Adam with decoupled weight decay.  Decay multiplies the parameter by
// (1 - lr*weight_decay) each step, separate from the gradient-moment update,
// so with a zero gradient and zero moments a parameter shrinks by exactly
// that factor and nothing else moves.
struct AdamWConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
};

class AdamW {
public:
    explicit AdamW(AdamWConfig cfg) : cfg_(cfg) {}

    // One update over a fixed parameter list.  The list's order and shapes
    // must be identical on every call (moment buffers are keyed by index);
    // grads[i] must match params[i]'s shape.  Deterministic: same sequence
    // of (params, grads) in, same parameters out.
    void step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads);

    std::uint64_t steps_taken() const { return t_; }
    const AdamWConfig& config() const { return cfg_; }

private:
    AdamWConfig cfg_;
    std::uint64_t t_ = 0;
    std::vector<Matrix> m_;
    std::vector<Matrix> v_;
};

}  // namespace hut
