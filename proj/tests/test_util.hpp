#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "hut/matrix.hpp"
#include "hut/ops.hpp"

namespace hut::testutil {

// Exact equality, entry by entry (== also accepts -0.0 vs +0.0).
inline void check_matrix_eq(const Matrix& got, const Matrix& want) {
    REQUIRE(got.same_shape(want));
    for (std::size_t i = 0; i < got.rows(); ++i) {
        for (std::size_t j = 0; j < got.cols(); ++j) {
            INFO("entry (", i, ",", j, ")");
            CHECK(got.at(i, j) == want.at(i, j));
        }
    }
}

inline void check_matrix_near(const Matrix& got, const Matrix& want, double tol) {
    REQUIRE(got.same_shape(want));
    const double err = max_rel_err(got, want);
    INFO("max relative error ", err, " vs tolerance ", tol);
    CHECK(err <= tol);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(bool(in), "cannot open ", path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace hut::testutil
