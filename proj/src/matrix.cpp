#include "hut/matrix.hpp"

#include <stdexcept>

namespace hut {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0) {
        throw ShapeError("Matrix: dimensions must be positive, got " + std::to_string(rows) +
                         "x" + std::to_string(cols));
    }
}

Matrix Matrix::from_rows(std::size_t rows, std::size_t cols, std::initializer_list<double> values) {
    Matrix m(rows, cols);
    if (values.size() != rows * cols) {
        throw ShapeError("Matrix::from_rows: " + std::to_string(values.size()) +
                         " values for shape " + m.shape_str());
    }
    std::size_t i = 0;
    for (double v : values) m.data_[i++] = v;
    return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    if (rows.size() == 0 || rows.begin()->size() == 0) {
        throw ShapeError("Matrix::from_rows: need at least one row and one column");
    }
    Matrix m(rows.size(), rows.begin()->size());
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != m.cols_) {
            throw ShapeError("Matrix::from_rows: row " + std::to_string(i) + " has " +
                             std::to_string(row.size()) + " values, want " +
                             std::to_string(m.cols_));
        }
        for (double v : row) m.data_[i++] = v;
    }
    return m;
}

std::string Matrix::shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void require_shape(const Matrix& m, std::size_t rows, std::size_t cols, const char* what) {
    if (m.rows() != rows || m.cols() != cols) {
        throw ShapeError(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                         std::to_string(cols) + ", got " + m.shape_str());
    }
}

}  // namespace hut
