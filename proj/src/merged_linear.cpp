#include "hut/merged_linear.hpp"

#include "hut/ops.hpp"

namespace hut {

Matrix MergedLinear::forward(const Matrix& x) const {
    return add_row_vector(matmul(x, weight), bias);
}

}  // namespace hut
