#pragma once

#include "hut/matrix.hpp"

namespace hut {

// Instrumented matrix operations.
//
// Each operation validates shapes, charges the FLOP counter by the shape
// formula in its comment, and runs the active kernel (see kernels.hpp).
// Charges follow the convention in flops.hpp: mul = add = div = 1.

// [n x m] * [m x p] -> [n x p].  Cost (2m-1)*n*p: each output is a length-m
// dot product.
Matrix matmul(const Matrix& a, const Matrix& b);

// Elementwise product, same shape.  Cost rows*cols.
Matrix hadamard(const Matrix& a, const Matrix& b);

// Elementwise sum / difference, same shape.  Cost rows*cols each.
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);

// s * a.  Cost rows*cols.
Matrix scale(const Matrix& a, double s);

// [d x 1] outer [1 x k] -> [d x k], out[i][j] = col[i]*row[j].  Cost d*k.
Matrix outer(const Matrix& col, const Matrix& row);

// Mean over each row: [d x r] -> [d x 1].  Equivalent to multiplying on the
// right by an all-ones [r x 1] column and dividing by r; never materializes
// the ones.  Cost r per entry (r-1 adds + 1 divide), r*d total.
Matrix row_mean(const Matrix& m);

// Mean over each column: [r x k] -> [1 x k].  All-ones [1 x r] row against m,
// divided by r, without materializing the ones.  Cost r*k.
Matrix col_mean(const Matrix& m);

// Row/column sums (no divide).  Cost (cols-1)*rows and (rows-1)*cols.
Matrix row_sum(const Matrix& m);
Matrix col_sum(const Matrix& m);

// gamma[1 x k] * y[N x k] + beta[1 x k], broadcast over rows.  Cost 2*N*k
// (one multiply and one add per entry).
Matrix scale_shift(const Matrix& y, const Matrix& gamma, const Matrix& beta);

// y[N x k] + v[1 x k], broadcast over rows.  Cost N*k adds.
Matrix add_row_vector(const Matrix& y, const Matrix& v);

// Materializes the product of an all-ones [d x 1] column with v[1 x k]:
// d copies of v stacked as rows.  Counted like any other outer product
// (d*k multiplies, each against 1.0), which is exactly how the reduced
// adapter path accounts for broadcasting a row vector to matrix shape.
Matrix broadcast_rows(const Matrix& v, std::size_t d);

// [n x m] -> [m x n].  Pure data movement, cost 0.
Matrix transpose(const Matrix& m);

// True when every entry is finite.
bool all_finite(const Matrix& m);

// Largest |a-b| over all entries, for test assertions.  Shapes must match.
double max_abs_diff(const Matrix& a, const Matrix& b);

// Relative error helper used throughout the tests: |a-b| scaled by
// max(|a|, |b|, floor).  The floor keeps comparisons of near-zero values
// judged on absolute error instead of exploding.
double rel_err(double a, double b, double floor = 1e-12);

// Largest entrywise rel_err over two equal-shaped matrices.
double max_rel_err(const Matrix& a, const Matrix& b, double floor = 1e-12);

}  // namespace hut
