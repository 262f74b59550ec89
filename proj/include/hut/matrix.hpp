#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hut {

// Dense row-major matrix of IEEE-754 binary64 values.
//
// This is the only tensor type in the library: adapters, optimizer state and
// the toy block are all built from it.  Shapes are fixed at construction
// (rows >= 1, cols >= 1); operations that combine matrices validate shapes
// and throw hut::ShapeError naming both operands on mismatch.
//
// The type has plain value semantics.  Library operations never mutate their
// inputs; in-place writes happen only through mutable_data()/at() by code
// that exclusively owns the matrix (optimizer updates, RNG fills), which
// keeps read-only sharing across sweep worker threads safe.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols, 0.0); }
    static Matrix ones(std::size_t rows, std::size_t cols) { return Matrix(rows, cols, 1.0); }
    // Row-major initializers for small literal matrices in tests and docs.
    static Matrix from_rows(std::size_t rows, std::size_t cols, std::initializer_list<double> values);
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

    const double* data() const { return data_.data(); }
    double* mutable_data() { return data_.data(); }
    std::span<const double> values() const { return data_; }

    bool same_shape(const Matrix& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }
    std::string shape_str() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Thrown on dimension mismatches; the message names both shapes involved.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Fails with ShapeError unless `m` has exactly the given shape; `what` names
// the operation and operand for the error message.
void require_shape(const Matrix& m, std::size_t rows, std::size_t cols, const char* what);

}  // namespace hut
