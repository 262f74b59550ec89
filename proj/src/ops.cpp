#include "hut/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "hut/flops.hpp"
#include "hut/kernels.hpp"

namespace hut {

namespace {

using kernels::active;

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(what) + ": shape mismatch " + a.shape_str() + " vs " +
                         b.shape_str());
    }
}

std::uint64_t u64(std::size_t v) { return static_cast<std::uint64_t>(v); }

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dimensions differ, " + a.shape_str() + " vs " +
                         b.shape_str());
    }
    Matrix c(a.rows(), b.cols());
    flops::add((2 * u64(a.cols()) - 1) * u64(a.rows()) * u64(b.cols()));
    active().matmul(a.data(), b.data(), c.mutable_data(), a.rows(), a.cols(), b.cols());
    return c;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "hadamard");
    Matrix out(a.rows(), a.cols());
    flops::add(u64(a.size()));
    active().hadamard(a.data(), b.data(), out.mutable_data(), a.size());
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "add");
    Matrix out(a.rows(), a.cols());
    flops::add(u64(a.size()));
    active().add(a.data(), b.data(), out.mutable_data(), a.size());
    return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "sub");
    Matrix out(a.rows(), a.cols());
    flops::add(u64(a.size()));
    active().sub(a.data(), b.data(), out.mutable_data(), a.size());
    return out;
}

Matrix scale(const Matrix& a, double s) {
    Matrix out(a.rows(), a.cols());
    flops::add(u64(a.size()));
    active().scale(a.data(), s, out.mutable_data(), a.size());
    return out;
}

Matrix outer(const Matrix& col, const Matrix& row) {
    if (col.cols() != 1 || row.rows() != 1) {
        throw ShapeError("outer: want column x row, got " + col.shape_str() + " and " +
                         row.shape_str());
    }
    Matrix out(col.rows(), row.cols());
    flops::add(u64(col.rows()) * u64(row.cols()));
    active().outer(col.data(), row.data(), out.mutable_data(), col.rows(), row.cols());
    return out;
}

Matrix row_mean(const Matrix& m) {
    Matrix out(m.rows(), 1);
    // Charged cols per entry: cols-1 adds plus the divide.
    flops::add(u64(m.cols()) * u64(m.rows()));
    const double r = static_cast<double>(m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) s += m.at(i, j);
        out.at(i, 0) = s / r;
    }
    return out;
}

Matrix col_mean(const Matrix& m) {
    Matrix out(1, m.cols());
    flops::add(u64(m.rows()) * u64(m.cols()));
    const double r = static_cast<double>(m.rows());
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) s += m.at(i, j);
        out.at(0, j) = s / r;
    }
    return out;
}

Matrix row_sum(const Matrix& m) {
    Matrix out(m.rows(), 1);
    flops::add(u64(m.cols() - 1) * u64(m.rows()));
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) s += m.at(i, j);
        out.at(i, 0) = s;
    }
    return out;
}

Matrix col_sum(const Matrix& m) {
    Matrix out(1, m.cols());
    flops::add(u64(m.rows() - 1) * u64(m.cols()));
    active().col_sum(m.data(), out.mutable_data(), m.rows(), m.cols());
    return out;
}

Matrix scale_shift(const Matrix& y, const Matrix& gamma, const Matrix& beta) {
    require_shape(gamma, 1, y.cols(), "scale_shift gamma");
    require_shape(beta, 1, y.cols(), "scale_shift beta");
    Matrix out(y.rows(), y.cols());
    flops::add(2 * u64(y.size()));
    active().scale_shift(y.data(), gamma.data(), beta.data(), out.mutable_data(), y.rows(),
                         y.cols());
    return out;
}

Matrix add_row_vector(const Matrix& y, const Matrix& v) {
    require_shape(v, 1, y.cols(), "add_row_vector vector");
    Matrix out(y.rows(), y.cols());
    flops::add(u64(y.size()));
    active().add_rowvec(y.data(), v.data(), out.mutable_data(), y.rows(), y.cols());
    return out;
}

Matrix broadcast_rows(const Matrix& v, std::size_t d) {
    if (v.rows() != 1) {
        throw ShapeError("broadcast_rows: want a 1xk row vector, got " + v.shape_str());
    }
    // Implemented literally as the outer product of an all-ones column with
    // v, so the d*k charge corresponds to d*k real multiplies.
    Matrix ones_col(d, 1, 1.0);
    flops::add(u64(d) * u64(v.cols()));
    Matrix out(d, v.cols());
    active().outer(ones_col.data(), v.data(), out.mutable_data(), d, v.cols());
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) out.at(j, i) = m.at(i, j);
    }
    return out;
}

bool all_finite(const Matrix& m) {
    for (double v : m.values()) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "max_abs_diff");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
    }
    return worst;
}

double rel_err(double a, double b, double floor) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

double max_rel_err(const Matrix& a, const Matrix& b, double floor) {
    require_same_shape(a, b, "max_rel_err");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, rel_err(a.values()[i], b.values()[i], floor));
    }
    return worst;
}

}  // namespace hut
