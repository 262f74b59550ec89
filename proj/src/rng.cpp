#include "hut/rng.hpp"

#include <random>
#include <stdexcept>

namespace hut {

void seeded_fill(Matrix& m, Dist dist, double p0, double p1, std::uint64_t seed) {
    std::mt19937_64 engine(seed);
    switch (dist) {
        case Dist::Gaussian: {
            if (p1 < 0.0) throw std::invalid_argument("seeded_fill: negative stddev");
            if (p1 == 0.0) {
                // normal_distribution requires stddev > 0; a zero-width
                // Gaussian is just the constant mean.
                for (std::size_t i = 0; i < m.size(); ++i) m.mutable_data()[i] = p0;
                return;
            }
            std::normal_distribution<double> d(p0, p1);
            for (std::size_t i = 0; i < m.size(); ++i) m.mutable_data()[i] = d(engine);
            return;
        }
        case Dist::Uniform: {
            if (p1 < p0) throw std::invalid_argument("seeded_fill: uniform bounds reversed");
            std::uniform_real_distribution<double> d(p0, p1);
            for (std::size_t i = 0; i < m.size(); ++i) m.mutable_data()[i] = d(engine);
            return;
        }
    }
    throw std::logic_error("seeded_fill: unknown distribution");
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, double mean, double stddev,
                       std::uint64_t seed) {
    Matrix m(rows, cols);
    seeded_fill(m, Dist::Gaussian, mean, stddev, seed);
    return m;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over the pair; cheap and well-scattered.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace hut
