#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "gsbr/error.hpp"
#include "gsbr/model.hpp"
#include "support.hpp"

using namespace gsbr;
using model::ModelSpec;
using model::SpinSystem;
namespace pauli = model::pauli;

namespace {

modes::ModeGrid small_grid(std::size_t nodes = 2) {
    return modes::ModeGrid::uniform(0.0, 4.0, nodes, modes::Dispersion::relativistic(1.0));
}

CMatrix block(const CMatrix& m, Eigen::Index i, Eigen::Index j, Eigen::Index n) { return m.block(i * n, j * n, n, n); }

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

CMatrix a_of(const modes::FormFactor& f, const ModelSpec& spec) {
    return fock::annihilator(f, spec.basis, spec.grid).matrix;
}

modes::FormFactor combine(const modes::FormFactor& f, cplx a, const modes::FormFactor& g, cplx b) {
    modes::FormFactor out = f;
    out.values = a * f.values + b * g.values;
    return out;
}

} // namespace

TEST_CASE("Pauli matrices and embedding") {
    CHECK(max_abs(pauli::x() * pauli::x() - CMatrix::Identity(2, 2)) == 0.0);
    CHECK(max_abs(pauli::x() * pauli::y() - cplx(0, 1) * pauli::z()) == 0.0);
    CHECK(max_abs(pauli::plus() + pauli::minus() - pauli::x()) == 0.0);
    const CMatrix zi = pauli::embed(pauli::z(), 0, 2);
    CHECK(max_abs(zi - linalg::kron(pauli::z(), CMatrix::Identity(2, 2))) == 0.0);
    CHECK_THROWS_AS(pauli::embed(pauli::z(), 2, 2), PreconditionError);
}

TEST_CASE("SpinSystem shape and self-adjointness checks") {
    CHECK_THROWS_AS(SpinSystem(pauli::plus(), {pauli::x()}), PreconditionError);
    CHECK_THROWS_AS(SpinSystem(pauli::z(), {CMatrix::Identity(3, 3)}), StructuralError);
    const SpinSystem ok(pauli::z(), {pauli::x()});
    CHECK(ok.dim == 2);
}

TEST_CASE("interaction assumption validator") {
    const auto sx = model::validate_interaction(SpinSystem(pauli::z(), {pauli::x()}));
    CHECK(sx.verdict);
    CHECK(sx.failures().empty());

    const auto rwa = model::validate_interaction(SpinSystem(pauli::z(), {pauli::plus()}));
    CHECK_FALSE(rwa.verdict);
    CHECK_FALSE(rwa.normal[0]);
    CHECK(rwa.normal_residual[0] == doctest::Approx(1.0));
    CHECK_FALSE(rwa.joint_kernel_trivial);
    CHECK(rwa.failures().find("normality") != std::string::npos);
    CHECK(rwa.failures().find("joint kernel") != std::string::npos);

    const CMatrix zero = CMatrix::Zero(2, 2);
    const auto zz = model::validate_interaction(SpinSystem(pauli::z(), {zero, zero}));
    CHECK_FALSE(zz.joint_kernel_trivial);
    CHECK(zz.stacked_min_singular == 0.0);
    CHECK_FALSE(zz.verdict);

    const auto nc = model::validate_interaction(SpinSystem(pauli::z(), {pauli::x(), pauli::z()}));
    CHECK_FALSE(nc.commuting);
    REQUIRE(nc.commutators.size() == 1);
    CHECK(nc.commutators[0].residual == doctest::Approx(2.0));
}

TEST_CASE("common eigenbasis") {
    SUBCASE("single sigma_z") {
        const auto eig = model::common_eigenbasis(SpinSystem(pauli::z(), {pauli::z()}));
        CHECK(max_abs(eig.unitary - CMatrix::Identity(2, 2)) < 1e-12);
        CHECK(std::abs(eig.eigvals(0, 0) - 1.0) < 1e-12);
        CHECK(std::abs(eig.eigvals(0, 1) + 1.0) < 1e-12);
    }
    SUBCASE("two commuting sigma_z factors give the product basis") {
        const SpinSystem s(CMatrix::Zero(4, 4), {pauli::embed(pauli::z(), 0, 2), pauli::embed(pauli::z(), 1, 2)});
        const auto eig = model::common_eigenbasis(s);
        CHECK(max_abs(eig.unitary.cwiseAbs() - CMatrix::Identity(4, 4)) < 1e-12);
        const double table[2][4] = {{1, 1, -1, -1}, {1, -1, 1, -1}};
        for (int j = 0; j < 2; ++j)
            for (int a = 0; a < 4; ++a) CHECK(std::abs(eig.eigvals(j, a) - table[j][a]) < 1e-12);
    }
    SUBCASE("random commuting normal families round-trip") {
        std::mt19937_64 rng(31);
        for (int trial = 0; trial < 10; ++trial) {
            const auto fam = testing::random_normal_family(rng, 4, 2);
            const SpinSystem s(testing::random_hermitian(rng, 4), fam.matrices);
            const auto eig = model::common_eigenbasis(s);
            CHECK(max_abs(eig.unitary.adjoint() * eig.unitary - CMatrix::Identity(4, 4)) < 1e-10);
            // every generator eigen-tuple is recovered by exactly one column
            for (Eigen::Index a = 0; a < 4; ++a) {
                int matches = 0;
                for (Eigen::Index c = 0; c < 4; ++c) {
                    double dev = 0.0;
                    for (std::size_t j = 0; j < 2; ++j)
                        dev = std::max(dev, std::abs(eig.eigvals(static_cast<Eigen::Index>(j), c) - fam.diagonals[j](a)));
                    if (dev < 1e-9) ++matches;
                }
                CHECK(matches == 1);
            }
            for (std::size_t j = 0; j < 2; ++j) {
                const CMatrix lhs = fam.matrices[j] * eig.unitary;
                const CMatrix rhs = eig.unitary * eig.eigvals.row(static_cast<Eigen::Index>(j)).transpose().asDiagonal();
                CHECK(linalg::op_norm(lhs - rhs) < 1e-9);
            }
        }
    }
    SUBCASE("deterministic for a fixed seed") {
        const SpinSystem s(CMatrix::Zero(4, 4), {pauli::embed(pauli::z(), 0, 2)});
        const auto e1 = model::common_eigenbasis(s, 99), e2 = model::common_eigenbasis(s, 99);
        CHECK(max_abs(e1.unitary - e2.unitary) == 0.0);
    }
    CHECK_THROWS_AS(model::common_eigenbasis(SpinSystem(pauli::z(), {pauli::plus()})), PreconditionError);
}

TEST_CASE("free Hamiltonian") {
    const auto grid = small_grid();
    const auto basis = fock::build_basis(2, 2);
    const auto nf = static_cast<Eigen::Index>(basis.size());
    const CMatrix dgamma = fock::second_quantize(grid, basis).matrix;

    SUBCASE("K = 0: vacuum eigenvalue 0 with multiplicity D") {
        ModelSpec spec{SpinSystem(CMatrix::Zero(3, 3), {CMatrix::Identity(3, 3)}), grid,
                       {modes::FormFactor::zero(grid)}, basis, "custom"};
        const auto ev = linalg::hermitian_eigen(model::assemble_free(spec).matrix).values;
        CHECK(std::count_if(ev.begin(), ev.end(), [](double v) { return std::abs(v) < 1e-14; }) == 3);
    }
    SUBCASE("sigma_x preset: diagonal blocks dGamma +- eta/2") {
        model::PresetParams p;
        p.eta = {0.7};
        const auto spec = model::make_preset("sigma_x", p, grid, basis);
        const CMatrix h = model::assemble_free(spec).matrix;
        CHECK(max_abs(block(h, 0, 0, nf) - (dgamma + 0.35 * CMatrix::Identity(nf, nf))) < 1e-15);
        CHECK(max_abs(block(h, 1, 1, nf) - (dgamma - 0.35 * CMatrix::Identity(nf, nf))) < 1e-15);
        CHECK(max_abs(block(h, 0, 1, nf)) == 0.0);
    }
    SUBCASE("spectrum is the set-sum of spec K and spec dGamma") {
        std::mt19937_64 rng(32);
        for (int trial = 0; trial < 5; ++trial) {
            const auto spec = testing::random_spec(rng);
            RVector direct = linalg::hermitian_eigen(model::assemble_free(spec).matrix).values;
            const RVector kev = linalg::hermitian_eigen(spec.spin.energy).values;
            const RVector field = fock::field_energies(spec.grid, spec.basis);
            std::vector<double> sums;
            for (double k : kev) for (double e : field) sums.push_back(k + e);
            std::sort(sums.begin(), sums.end());
            REQUIRE(static_cast<Eigen::Index>(sums.size()) == direct.size());
            for (std::size_t i = 0; i < sums.size(); ++i) CHECK(std::abs(sums[i] - direct(static_cast<Eigen::Index>(i))) < 1e-12);

            const auto fe = model::free_eigen(spec);
            const CMatrix rebuilt = linalg::spectral_function(fe, [](double l) { return cplx(l); });
            CHECK(linalg::op_norm(rebuilt - model::assemble_free(spec).matrix) < 1e-12);
        }
    }
}

TEST_CASE("interaction part A") {
    const auto grid = small_grid(3);
    const auto basis = fock::build_basis(3, 2);
    const auto nf = static_cast<Eigen::Index>(basis.size());

    SUBCASE("zero form factors give A = 0") {
        auto spec = model::make_preset("sigma_x", {}, grid, basis);
        spec = model::with_factors(spec, {modes::FormFactor::zero(grid)});
        CHECK(max_abs(model::assemble_A(spec).matrix) == 0.0);
    }
    SUBCASE("sigma_x: off-diagonal blocks a(f)") {
        const auto spec = model::make_preset("sigma_x", {}, grid, basis);
        const CMatrix a = model::assemble_A(spec).matrix;
        const CMatrix af = a_of(spec.factors[0], spec);
        CHECK(max_abs(block(a, 0, 1, nf) - af) == 0.0);
        CHECK(max_abs(block(a, 1, 0, nf) - af) == 0.0);
        CHECK(max_abs(block(a, 0, 0, nf)) == 0.0);
        const CMatrix h = model::assemble_hamiltonian(spec).matrix;
        CHECK(max_abs(h - h.adjoint()) == 0.0);
    }
    SUBCASE("two-atom sigma_x: tensor-factor couplings with zero anti-diagonal blocks") {
        model::PresetParams two;
        two.atoms = 2;
        const auto spec = model::make_preset("sigma_x_multi", two, grid, basis);
        const CMatrix a = model::assemble_A(spec).matrix;
        const CMatrix a1 = a_of(spec.factors[0], spec), a2 = a_of(spec.factors[1], spec);
        // rows/cols: ++, +-, -+, --
        CHECK(max_abs(block(a, 0, 1, nf) - a2) == 0.0);
        CHECK(max_abs(block(a, 0, 2, nf) - a1) == 0.0);
        CHECK(max_abs(block(a, 1, 3, nf) - a1) == 0.0);
        CHECK(max_abs(block(a, 2, 3, nf) - a2) == 0.0);
        CHECK(max_abs(block(a, 0, 3, nf)) == 0.0);
        CHECK(max_abs(block(a, 1, 2, nf)) == 0.0);
        for (Eigen::Index i = 0; i < 4; ++i) CHECK(max_abs(block(a, i, i, nf)) == 0.0);
    }
    SUBCASE("two-atom sigma_z: diagonal blocks a(+-f_+), a(+-f_-)") {
        model::PresetParams two;
        two.atoms = 2;
        const auto spec = model::make_preset("sigma_z_multi", two, grid, basis);
        const CMatrix a = model::assemble_A(spec).matrix;
        const auto& f1 = spec.factors[0];
        const auto& f2 = spec.factors[1];
        const auto fp = combine(f1, 1.0, f2, 1.0), fm = combine(f1, 1.0, f2, -1.0);
        const CMatrix ap = a_of(fp, spec), am = a_of(fm, spec);
        CHECK(max_abs(block(a, 0, 0, nf) - ap) < 1e-15);
        CHECK(max_abs(block(a, 1, 1, nf) - am) < 1e-15);
        CHECK(max_abs(block(a, 2, 2, nf) + am) < 1e-15);
        CHECK(max_abs(block(a, 3, 3, nf) + ap) < 1e-15);
        const CMatrix h = model::assemble_hamiltonian(spec).matrix;
        for (Eigen::Index i = 0; i < 4; ++i)
            for (Eigen::Index j = 0; j < 4; ++j)
                if (i != j) CHECK(max_abs(block(h, i, j, nf)) == 0.0);
    }
    SUBCASE("single sigma_z: block diagonal, two van Hove models") {
        const auto spec = model::make_preset("sigma_z", {}, grid, basis);
        const CMatrix h = model::assemble_hamiltonian(spec).matrix;
        CHECK(max_abs(block(h, 0, 1, nf)) == 0.0);
        const auto blocks = model::block_decompose(spec, model::common_eigenbasis(spec.spin));
        REQUIRE(blocks.size() == 2);
        CHECK(max_abs(blocks[0].matrix - a_of(spec.factors[0], spec)) < 1e-15);
        CHECK(max_abs(blocks[1].matrix + a_of(spec.factors[0], spec)) < 1e-15);
    }
}

TEST_CASE("block decomposition of random commuting normal families") {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 5; ++trial) {
        const auto grid = testing::random_grid(rng, 2);
        const auto basis = fock::build_basis(2, 2);
        const auto fam = testing::random_normal_family(rng, 3, 2);
        ModelSpec spec{SpinSystem(testing::random_hermitian(rng, 3), fam.matrices), grid,
                       {testing::random_factor(rng, grid), testing::random_factor(rng, grid)}, basis, "custom"};
        const auto eig = model::common_eigenbasis(spec.spin);
        const auto blocks = model::block_decompose(spec, eig);
        const auto nf = static_cast<Eigen::Index>(basis.size());
        const CMatrix u = linalg::kron(eig.unitary, CMatrix::Identity(nf, nf));
        CMatrix sum = CMatrix::Zero(3 * nf, 3 * nf);
        for (Eigen::Index a = 0; a < 3; ++a) sum.block(a * nf, a * nf, nf, nf) = blocks[static_cast<std::size_t>(a)].matrix;
        CHECK(linalg::op_norm(u.adjoint() * model::assemble_A(spec).matrix * u - sum) < 1e-10);
    }
}

TEST_CASE("rearrangement: a dependent coupling folds into the other form factors") {
    std::mt19937_64 rng(34);
    const auto grid = testing::random_grid(rng, 2);
    const auto basis = fock::build_basis(2, 2);
    const auto fam = testing::random_normal_family(rng, 3, 2);
    const cplx a1(0.3, -0.8), a2(-1.1, 0.4);
    const CMatrix b3 = a1 * fam.matrices[0] + a2 * fam.matrices[1];
    const CMatrix k = testing::random_hermitian(rng, 3);
    const auto f1 = testing::random_factor(rng, grid), f2 = testing::random_factor(rng, grid),
               f3 = testing::random_factor(rng, grid);
    const ModelSpec three{SpinSystem(k, {fam.matrices[0], fam.matrices[1], b3}), grid, {f1, f2, f3}, basis, "custom"};
    const ModelSpec two{SpinSystem(k, {fam.matrices[0], fam.matrices[1]}), grid,
                        {combine(f1, 1.0, f3, a1), combine(f2, 1.0, f3, a2)}, basis, "custom"};
    const CMatrix lhs = model::assemble_A(three).matrix;
    CHECK(max_abs(lhs - model::assemble_A(two).matrix) < 1e-12 * std::max(1.0, max_abs(lhs)));
}

TEST_CASE("kernel and range constructions on the safe sector") {
    const auto grid = small_grid(3);
    const auto basis = fock::build_basis(3, 3);
    const auto spec = model::make_preset("sigma_x", {}, grid, basis);
    const auto& f = spec.factors[0];
    const RVector safe = fock::safe_sector_mask(basis);

    // g orthogonal to f: remove the f-component of a fixed vector
    std::mt19937_64 rng(35);
    auto g = testing::random_factor(rng, grid, 0.5);
    g.values -= (modes::pairing(f, g, grid) / modes::pairing(f, f, grid)) * f.values;
    CHECK(std::abs(modes::pairing(f, g, grid)) < 1e-14);
    const CVector eps = fock::coherent_vector(g, basis, grid).amps;
    const CVector u = testing::random_vector(rng, 2);
    CVector psi(2 * eps.size());
    psi << u(0) * eps, u(1) * eps;
    const CVector image = model::assemble_A(spec).matrix * psi;
    CVector mask(2 * eps.size());
    mask << safe.cast<cplx>(), safe.cast<cplx>();
    CHECK(image.cwiseProduct(mask).norm() < 1e-11);

    auto h = testing::random_factor(rng, grid, 0.5);
    const cplx fh = modes::pairing(f, h, grid);
    REQUIRE(std::abs(fh) > 1e-3);
    const CVector eh = fock::coherent_vector(h, basis, grid).amps;
    const CVector back = fock::annihilator(f, basis, grid).matrix * (eh / fh);
    CHECK((back - eh).cwiseProduct(safe.cast<cplx>()).norm() < 1e-11);
}

TEST_CASE("presets and model validation") {
    const auto grid = small_grid();
    const auto basis = fock::build_basis(2, 2);
    for (const auto& name : model::preset_names()) {
        model::PresetParams p;
        if (name.find("multi") != std::string::npos) p.atoms = 2;
        const auto spec = model::make_preset(name, p, grid, basis);
        CHECK(spec.factors.size() == spec.spin.couplings.size());
        CHECK(spec.preset == name);
    }
    CHECK_THROWS_AS(model::make_preset("nonsense", {}, grid, basis), PreconditionError);
    model::PresetParams bad;
    bad.atoms = 2;
    bad.eta = {1.0};
    CHECK_THROWS_AS(model::make_preset("sigma_x_multi", bad, grid, basis), PreconditionError);
    model::PresetParams two;
    two.atoms = 2;
    CHECK_THROWS_AS(model::make_preset("sigma_x", two, grid, basis), PreconditionError);

    auto spec = model::make_preset("sigma_x", {}, grid, basis);
    CHECK_THROWS_AS(model::with_factors(spec, {}), StructuralError);
    spec.basis = fock::build_basis(3, 2);
    CHECK_THROWS_AS(spec.validate(), StructuralError);

    // the factor follows coupling * omega^p * exp(i k x)
    model::PresetParams p;
    p.coupling = 0.5;
    p.factor_exponent = -0.5;
    p.positions = {2.0};
    const auto s = model::make_preset("sigma_x", p, grid, basis);
    const double k1 = grid.nodes()[1], w1 = grid.omega()[1];
    CHECK(std::abs(s.factors[0].values(1) - 0.5 / std::sqrt(w1) * std::polar(1.0, 2.0 * k1)) < 1e-15);
}
