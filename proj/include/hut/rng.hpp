#pragma once

#include <cstdint>

#include "hut/matrix.hpp"

namespace hut {

enum class Dist {
    Gaussian,  // params: mean, stddev (stddev >= 0; 0 fills the constant mean)
    Uniform,   // params: lo, hi
};

// Overwrites every entry of `m` with draws from the given distribution.
// Deterministic: a fixed (shape, distribution, params, seed) tuple always
// produces the same values within a build, which is what seeds every
// reproducibility guarantee upstream (identical CSVs, bitwise checkpoints).
void seeded_fill(Matrix& m, Dist dist, double p0, double p1, std::uint64_t seed);

// Convenience for the common case.
Matrix gaussian_matrix(std::size_t rows, std::size_t cols, double mean, double stddev,
                       std::uint64_t seed);

// Derives a decorrelated child seed from a base seed and a stream index, so
// each tensor/batch gets its own stream without manual bookkeeping.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace hut
