#pragma once

// Random model generators shared by the unit and acceptance suites.

#include <random>

#include "gsbr/model.hpp"

namespace gsbr::testing {

inline CMatrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    CMatrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = cplx(n(rng), n(rng));
    return m;
}

inline CVector random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
    return random_matrix(rng, n, 1, scale).col(0);
}

inline CMatrix random_hermitian(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
    const CMatrix x = random_matrix(rng, n, n, scale);
    return 0.5 * (x + x.adjoint());
}

inline CMatrix random_unitary(std::mt19937_64& rng, Eigen::Index n) {
    Eigen::HouseholderQR<CMatrix> qr(random_matrix(rng, n, n));
    return qr.householderQ() * CMatrix::Identity(n, n);
}

/// Commuting normal family U0 diag(d_j) U0^* with nonzero eigenvalue tables.
struct NormalFamily {
    CMatrix u0;
    std::vector<CVector> diagonals;
    std::vector<CMatrix> matrices;
};

inline NormalFamily random_normal_family(std::mt19937_64& rng, Eigen::Index d, std::size_t n) {
    NormalFamily fam{random_unitary(rng, d), {}, {}};
    for (std::size_t j = 0; j < n; ++j) {
        CVector diag = random_vector(rng, d);
        fam.matrices.push_back(fam.u0 * diag.asDiagonal() * fam.u0.adjoint());
        fam.diagonals.push_back(std::move(diag));
    }
    return fam;
}

inline modes::FormFactor random_factor(std::mt19937_64& rng, const modes::ModeGrid& g, double scale = 1.0,
                                       std::string label = "rand") {
    return {random_vector(rng, static_cast<Eigen::Index>(g.size()), scale), modes::TailSpec{-0.25, 1.0},
            std::move(label)};
}

/// Random positive-weight grid with omega >= 1.
inline modes::ModeGrid random_grid(std::mt19937_64& rng, std::size_t m) {
    std::uniform_real_distribution<double> u(0.2, 1.5);
    std::vector<double> k, w, om;
    double pos = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        pos += u(rng);
        k.push_back(pos);
        w.push_back(u(rng));
        om.push_back(std::sqrt(pos * pos + 1.0));
    }
    return modes::ModeGrid(k, w, om, 1.0, "relativistic");
}

/// Small random model with a commuting normal coupling family; K has spectrum inside (-0.5, 0.5).
inline model::ModelSpec random_spec(std::mt19937_64& rng, double coupling = 0.4) {
    std::uniform_int_distribution<int> dd(1, 3), nn(1, 2), mm(1, 3), nm(1, 3);
    const Eigen::Index d = dd(rng);
    const std::size_t n = static_cast<std::size_t>(nn(rng));
    const auto grid = random_grid(rng, static_cast<std::size_t>(mm(rng)));
    const auto basis = fock::build_basis(grid.size(), static_cast<std::size_t>(nm(rng)));
    CMatrix k = random_hermitian(rng, d);
    const double kn = linalg::op_norm(k);
    if (kn > 0) k *= 0.45 / kn;
    std::vector<modes::FormFactor> factors;
    for (std::size_t j = 0; j < n; ++j) factors.push_back(random_factor(rng, grid, coupling, "f" + std::to_string(j + 1)));
    auto fam = random_normal_family(rng, d, n);
    return {model::SpinSystem(k, fam.matrices), grid, std::move(factors), basis, "random"};
}

} // namespace gsbr::testing
