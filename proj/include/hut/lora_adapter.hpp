#pragma once

#include <cstdint>

#include "hut/matrix.hpp"
#include "hut/merged_linear.hpp"

namespace hut {

// Additive low-rank adapter baseline around a frozen W0 [d x k]:
//
//     h = x W0 + s * (x WA) WB,    WA [d x r], WB [r x k], scalar s >= 1
//
// WB starts at zero so the adapted layer is exactly the frozen layer at
// initialization.  The training forward keeps the (x WA) WB association
// (N x r intermediate); the merged/deployment form folds s*WA*WB into W0.
struct LoraAdapter {
    Matrix w0;  // frozen, d x k
    Matrix wa;  // trainable, d x r
    Matrix wb;  // trainable, r x k
    double s = 1.0;

    std::size_t rank() const { return wa.cols(); }
};

struct LoraGradients {
    Matrix wa;  // d x r
    Matrix wb;  // r x k
};

// WA ~ gaussian(0, 0.02), WB = 0.  Requires 1 <= rank <= min(d, k), s >= 1.
LoraAdapter lora_init(const Matrix& w0, std::size_t rank, double s, std::uint64_t seed);

// Training-form forward: x W0 + s*(x WA) WB, in exactly that association.
Matrix lora_forward(const LoraAdapter& st, const Matrix& x);

// W0 + s*(WA WB): the dense weight the adapter collapses to.  Costs
// (2r+1)*d*k on the FLOP counter ((2r-1)dk for WA*WB, dk for the s scale,
// dk for the add), which is the adapter's weight-side work per forward.
Matrix lora_effective_weight(const LoraAdapter& st);

// MergedLinear with weight = lora_effective_weight and zero bias.
MergedLinear lora_merge(const LoraAdapter& st);

// Gradients of L = sum(upstream .* lora_forward(st, x)):
//   dWB = s * (x WA)T upstream
//   dWA = s * xT (upstream WBT)
LoraGradients lora_backward(const LoraAdapter& st, const Matrix& x, const Matrix& upstream);

// Gradient with respect to x: upstream W0T + s*(upstream WBT) WAT.
Matrix lora_input_grad(const LoraAdapter& st, const Matrix& upstream);

}  // namespace hut
