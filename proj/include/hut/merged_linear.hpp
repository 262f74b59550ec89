#pragma once

#include "hut/matrix.hpp"

namespace hut {

// Deployment form of an adapted linear layer: a single dense weight plus a
// bias row.  Inference through this form costs exactly one matmul and one
// bias add, (2d-1)*N*k + N*k, independent of the adapter rank it came from.
struct MergedLinear {
    Matrix weight;  // d x k
    Matrix bias;    // 1 x k

    // x[N x d] -> x*weight + bias
    Matrix forward(const Matrix& x) const;
};

}  // namespace hut
