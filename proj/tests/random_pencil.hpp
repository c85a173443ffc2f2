#pragma once

#include <cstdint>
#include <random>

#include "confspec/banded.hpp"

namespace confspec::fixtures {

struct RandomPencil {
    BandedSymmetric<double> a, b;
};

/// Seeded banded pencil with B strictly diagonally dominant, hence positive definite.
inline RandomPencil random_pencil(Eigen::Index m, Eigen::Index bw, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    RandomPencil p{BandedSymmetric<double>(m, bw), BandedSymmetric<double>(m, bw)};
    for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index k = 0; k <= bw && j + k < m; ++k) {
            p.a.coeffRef(j + k, j) = u(rng);
            p.b.coeffRef(j + k, j) = 0.2 * u(rng);
        }
        p.b.coeffRef(j, j) = 1.0 + 2.0 * static_cast<double>(bw) * 0.2 + 0.5 * (1.0 + u(rng));
    }
    return p;
}

}  // namespace confspec::fixtures
