#include "gsbr/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "gsbr/error.hpp"

namespace gsbr::model {

namespace pauli {
CMatrix x() { return (CMatrix(2, 2) << 0, 1, 1, 0).finished(); }
CMatrix y() { return (CMatrix(2, 2) << 0, cplx(0, -1), cplx(0, 1), 0).finished(); }
CMatrix z() { return (CMatrix(2, 2) << 1, 0, 0, -1).finished(); }
CMatrix plus() { return (CMatrix(2, 2) << 0, 1, 0, 0).finished(); }
CMatrix minus() { return (CMatrix(2, 2) << 0, 0, 1, 0).finished(); }

CMatrix embed(const CMatrix& op, std::size_t site, std::size_t sites) {
    if (site >= sites) throw PreconditionError("pauli::embed: site out of range");
    CMatrix out = CMatrix::Identity(1, 1);
    for (std::size_t s = 0; s < sites; ++s)
        out = linalg::kron(out, s == site ? op : CMatrix::Identity(op.rows(), op.cols()));
    return out;
}
} // namespace pauli

SpinSystem::SpinSystem(CMatrix k, std::vector<CMatrix> b, std::vector<std::string> lbl)
    : dim(static_cast<std::size_t>(k.rows())), energy(std::move(k)), couplings(std::move(b)), labels(std::move(lbl)) {
    if (energy.rows() == 0 || energy.rows() != energy.cols()) throw StructuralError("SpinSystem: K must be square, D >= 1");
    if ((energy - energy.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw PreconditionError("SpinSystem: K is not self-adjoint");
    for (const auto& bj : couplings)
        if (bj.rows() != energy.rows() || bj.cols() != energy.cols())
            throw StructuralError("SpinSystem: coupling matrix shape differs from K");
    if (labels.empty())
        for (std::size_t j = 0; j < couplings.size(); ++j) labels.push_back("B" + std::to_string(j + 1));
    if (labels.size() != couplings.size()) throw StructuralError("SpinSystem: one label per coupling");
}

std::string AssumptionReport::failures() const {
    std::ostringstream os;
    for (std::size_t j = 0; j < normal.size(); ++j)
        if (!normal[j]) os << "normality: coupling " << j + 1 << " is not normal (residual " << normal_residual[j] << "); ";
    for (const auto& c : commutators)
        if (c.residual >= kAssumptionTol)
            os << "commutation: couplings " << c.j + 1 << " and " << c.l + 1 << " do not commute (residual "
               << c.residual << "); ";
    if (!joint_kernel_trivial)
        os << "joint kernel: couplings share a nontrivial kernel (smallest stacked singular value "
           << stacked_min_singular << "); ";
    std::string s = os.str();
    if (s.size() >= 2) s.resize(s.size() - 2);
    return s;
}

AssumptionReport validate_interaction(const SpinSystem& spin) {
    AssumptionReport rep;
    const auto& b = spin.couplings;
    for (const auto& bj : b) {
        const double r = linalg::op_norm(bj.adjoint() * bj - bj * bj.adjoint());
        rep.normal_residual.push_back(r);
        rep.normal.push_back(r < kAssumptionTol);
    }
    for (std::size_t j = 0; j < b.size(); ++j)
        for (std::size_t l = j + 1; l < b.size(); ++l) {
            const double r = linalg::op_norm(b[j] * b[l] - b[l] * b[j]);
            rep.commutators.push_back({j, l, r});
            rep.commuting = rep.commuting && r < kAssumptionTol;
        }
    if (!b.empty()) {
        const auto d = static_cast<Eigen::Index>(spin.dim);
        CMatrix stacked(d * static_cast<Eigen::Index>(b.size()), d);
        for (std::size_t j = 0; j < b.size(); ++j) stacked.block(static_cast<Eigen::Index>(j) * d, 0, d, d) = b[j];
        rep.stacked_min_singular = linalg::min_singular_value(stacked);
    }
    rep.joint_kernel_trivial = rep.stacked_min_singular > kAssumptionTol;
    const bool all_normal = std::all_of(rep.normal.begin(), rep.normal.end(), [](bool v) { return v; });
    rep.verdict = all_normal && rep.commuting && rep.joint_kernel_trivial;
    return rep;
}

namespace {

// first index whose magnitude is within rounding of the maximum
Eigen::Index pivot_of(const CVector& u) {
    const double top = u.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < u.size(); ++i)
        if (std::abs(u(i)) >= top - 1e-10) return i;
    return 0;
}

void fix_phase(CVector& u) {
    const cplx p = u(pivot_of(u));
    u *= std::conj(p) / std::abs(p);
}

// orthonormal basis of span(V_c) built from projected standard basis vectors, in order
CMatrix canonical_cluster_basis(const CMatrix& vc) {
    const Eigen::Index n = vc.rows(), m = vc.cols();
    CMatrix out(n, m);
    Eigen::Index found = 0;
    const CMatrix proj = vc * vc.adjoint();
    for (Eigen::Index e = 0; e < n && found < m; ++e) {
        CVector v = proj.col(e);
        for (Eigen::Index k = 0; k < found; ++k) v -= out.col(k).dot(v) * out.col(k);
        for (Eigen::Index k = 0; k < found; ++k) v -= out.col(k).dot(v) * out.col(k);
        const double nv = v.norm();
        if (nv > 1e-8) out.col(found++) = v / nv;
    }
    if (found != m) throw NumericalError("common_eigenbasis: could not complete a degenerate cluster basis");
    return out;
}

} // namespace

EigStructure common_eigenbasis(const SpinSystem& spin, std::uint64_t seed) {
    const AssumptionReport rep = validate_interaction(spin);
    if (!rep.verdict) throw PreconditionError("common_eigenbasis: " + rep.failures());

    const auto d = static_cast<Eigen::Index>(spin.dim);
    const auto& b = spin.couplings;
    double scale = 1.0;
    for (const auto& bj : b) scale = std::max(scale, bj.cwiseAbs().maxCoeff());

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    constexpr int kAttempts = 32;

    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        CMatrix combo = CMatrix::Zero(d, d);
        for (const auto& bj : b) {
            combo += coef(rng) * (bj + bj.adjoint());
            combo += coef(rng) * cplx(0, 1) * (bj - bj.adjoint());
        }
        const auto eig = linalg::hermitian_eigen(combo, 1e-9);

        // group (nearly) equal eigenvalues; couplings must act as scalars on each group
        std::vector<CVector> columns;
        bool consistent = true;
        Eigen::Index start = 0;
        const double ctol = 1e-8 * std::max(1.0, eig.values.cwiseAbs().maxCoeff());
        while (start < d && consistent) {
            Eigen::Index end = start + 1;
            while (end < d && eig.values(end) - eig.values(end - 1) < ctol) ++end;
            CMatrix vc = eig.vectors.middleCols(start, end - start);
            for (const auto& bj : b) {
                const CMatrix p = vc.adjoint() * bj * vc;
                const cplx mean = p.trace() / static_cast<double>(p.rows());
                const CMatrix dev = p - mean * CMatrix::Identity(p.rows(), p.cols());
                if (dev.cwiseAbs().maxCoeff() > 1e-9 * scale) consistent = false;
            }
            if (end - start > 1) vc = canonical_cluster_basis(vc);
            for (Eigen::Index k = 0; k < vc.cols(); ++k) columns.emplace_back(vc.col(k));
            start = end;
        }
        if (!consistent) continue;

        for (auto& u : columns) fix_phase(u);

        const auto n_coup = static_cast<Eigen::Index>(b.size());
        std::vector<std::vector<cplx>> vals(columns.size());
        for (std::size_t a = 0; a < columns.size(); ++a)
            for (const auto& bj : b) vals[a].push_back(columns[a].dot(bj * columns[a]));

        std::vector<std::size_t> order(columns.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            const auto px = pivot_of(columns[x]), py = pivot_of(columns[y]);
            if (px != py) return px < py;
            for (std::size_t j = 0; j < vals[x].size(); ++j) {
                if (std::abs(vals[x][j].real() - vals[y][j].real()) > 1e-9) return vals[x][j].real() > vals[y][j].real();
                if (std::abs(vals[x][j].imag() - vals[y][j].imag()) > 1e-9) return vals[x][j].imag() > vals[y][j].imag();
            }
            return false;
        });

        EigStructure out{CMatrix(d, d), CMatrix(n_coup, d)};
        for (std::size_t a = 0; a < order.size(); ++a) {
            out.unitary.col(static_cast<Eigen::Index>(a)) = columns[order[a]];
            for (Eigen::Index j = 0; j < n_coup; ++j)
                out.eigvals(j, static_cast<Eigen::Index>(a)) = vals[order[a]][static_cast<std::size_t>(j)];
        }

        if (linalg::op_norm(out.unitary.adjoint() * out.unitary - CMatrix::Identity(d, d)) >= 1e-10)
            throw NumericalError("common_eigenbasis: eigenbasis is not unitary to 1e-10");
        for (Eigen::Index j = 0; j < n_coup; ++j) {
            const CMatrix resid = b[static_cast<std::size_t>(j)] * out.unitary -
                                  out.unitary * out.eigvals.row(j).transpose().asDiagonal();
            if (linalg::op_norm(resid) >= 1e-9)
                throw NumericalError("common_eigenbasis: diagonalization residual above 1e-9 for coupling " +
                                     std::to_string(j + 1));
        }
        return out;
    }
    throw NumericalError("common_eigenbasis: no separating combination found after repeated attempts");
}

void ModelSpec::validate() const {
    if (factors.size() != spin.couplings.size())
        throw StructuralError("ModelSpec: " + std::to_string(factors.size()) + " form factors for " +
                              std::to_string(spin.couplings.size()) + " couplings");
    if (basis.mode_count() != grid.size()) throw StructuralError("ModelSpec: basis and grid mode counts differ");
    for (const auto& f : factors) modes::check_on_grid(f, grid, "ModelSpec");
}

ModelSpec with_factors(const ModelSpec& spec, std::vector<modes::FormFactor> factors) {
    ModelSpec out = spec;
    out.factors = std::move(factors);
    out.validate();
    return out;
}

LinOp assemble_free(const ModelSpec& spec) {
    spec.validate();
    const auto nf = static_cast<Eigen::Index>(spec.basis.size());
    const LinOp dgamma = fock::second_quantize(spec.grid, spec.basis);
    CMatrix h = linalg::kron(spec.spin.energy, CMatrix::Identity(nf, nf)) +
                linalg::kron(CMatrix::Identity(spec.spin.energy.rows(), spec.spin.energy.cols()), dgamma.matrix);
    return {std::move(h), 2.0, 0.0};
}

LinOp assemble_A(const ModelSpec& spec) {
    spec.validate();
    const auto total = static_cast<Eigen::Index>(spec.total_dim());
    LinOp out{CMatrix::Zero(total, total), 0.0, 0.0};
    for (std::size_t j = 0; j < spec.factors.size(); ++j) {
        const LinOp a = fock::annihilator(spec.factors[j], spec.basis, spec.grid);
        out.matrix += linalg::kron(spec.spin.couplings[j].adjoint(), a.matrix);
        out.src_scale = std::max(out.src_scale, a.src_scale);
    }
    return out;
}

LinOp assemble_hamiltonian(const ModelSpec& spec) {
    const LinOp a = assemble_A(spec);
    LinOp h = assemble_free(spec);
    h.matrix += a.matrix + a.matrix.adjoint();
    h.src_scale = std::max(h.src_scale, a.src_scale);
    return h;
}

std::vector<LinOp> block_decompose(const ModelSpec& spec, const EigStructure& eig) {
    spec.validate();
    if (!validate_interaction(spec.spin).verdict)
        throw PreconditionError("block_decompose: couplings fail the interaction assumption");
    if (eig.unitary.rows() != static_cast<Eigen::Index>(spec.spin.dim) ||
        eig.eigvals.rows() != static_cast<Eigen::Index>(spec.factors.size()))
        throw StructuralError("block_decompose: eigen structure does not match the model");
    std::vector<LinOp> blocks;
    for (Eigen::Index a = 0; a < eig.unitary.cols(); ++a) {
        modes::FormFactor combined = modes::FormFactor::zero(spec.grid, "block" + std::to_string(a));
        combined.tail = spec.factors.empty() ? combined.tail : spec.factors.front().tail;
        for (std::size_t j = 0; j < spec.factors.size(); ++j)
            combined.values += eig.eigvals(static_cast<Eigen::Index>(j), a) * spec.factors[j].values;
        blocks.push_back(fock::annihilator(combined, spec.basis, spec.grid));
    }
    return blocks;
}

linalg::HermitianEigen free_eigen(const ModelSpec& spec) {
    spec.validate();
    const auto ke = linalg::hermitian_eigen(spec.spin.energy, 1e-12);
    const RVector field = fock::field_energies(spec.grid, spec.basis);
    const auto nf = field.size();
    const auto d = ke.values.size();
    linalg::HermitianEigen out{RVector(d * nf), linalg::kron(ke.vectors, CMatrix::Identity(nf, nf))};
    for (Eigen::Index a = 0; a < d; ++a) out.values.segment(a * nf, nf) = field.array() + ke.values(a);
    return out;
}

std::vector<std::string> preset_names() {
    return {"sigma_x", "sigma_x_multi", "sigma_z", "sigma_z_multi", "rwa", "van_hove"};
}

ModelSpec make_preset(std::string_view name, const PresetParams& params, const modes::ModeGrid& grid,
                      const fock::FockBasis& basis) {
    const bool multi = name == "sigma_x_multi" || name == "sigma_z_multi";
    const bool single_two_level = name == "sigma_x" || name == "sigma_z" || name == "rwa";
    const bool van_hove = name == "van_hove";
    if (!multi && !single_two_level && !van_hove) throw PreconditionError("unknown preset '" + std::string(name) + "'");

    const std::size_t atoms = params.atoms;
    if (atoms == 0) throw PreconditionError("preset: need at least one atom");
    if ((single_two_level || van_hove) && atoms != 1)
        throw PreconditionError("preset '" + std::string(name) + "' takes exactly one atom");
    if (!params.eta.empty() && params.eta.size() != atoms)
        throw PreconditionError("preset: " + std::to_string(params.eta.size()) + " splittings for " +
                                std::to_string(atoms) + " atoms");
    if (!params.positions.empty() && params.positions.size() != atoms)
        throw PreconditionError("preset: " + std::to_string(params.positions.size()) + " positions for " +
                                std::to_string(atoms) + " atoms");

    std::vector<double> eta = params.eta;
    if (eta.empty()) eta.assign(atoms, van_hove ? 0.0 : 1.0);
    std::vector<double> pos = params.positions;
    if (pos.empty())
        for (std::size_t j = 0; j < atoms; ++j) pos.push_back(static_cast<double>(j));

    std::vector<modes::FormFactor> factors;
    const double growth = grid.omega_growth();
    for (std::size_t j = 0; j < atoms; ++j) {
        const double x = pos[j], p = params.factor_exponent, g = params.coupling;
        factors.push_back(modes::FormFactor::from_function(
            grid, [=](double k, double om) { return g * std::pow(om, p) * std::exp(cplx(0, k * x)); },
            modes::TailSpec{p * growth, growth}, "f" + std::to_string(j + 1)));
    }

    CMatrix k;
    std::vector<CMatrix> b;
    if (van_hove) {
        k = CMatrix::Constant(1, 1, eta[0]);
        b.push_back(CMatrix::Identity(1, 1));
    } else if (single_two_level) {
        k = 0.5 * eta[0] * pauli::z();
        b.push_back(name == "sigma_x" ? pauli::x() : name == "sigma_z" ? pauli::z() : pauli::minus());
    } else {
        const CMatrix site_op = name == "sigma_x_multi" ? pauli::x() : pauli::z();
        const auto d = static_cast<Eigen::Index>(1) << atoms;
        k = CMatrix::Zero(d, d);
        for (std::size_t j = 0; j < atoms; ++j) {
            k += 0.5 * eta[j] * pauli::embed(pauli::z(), j, atoms);
            b.push_back(pauli::embed(site_op, j, atoms));
        }
    }
    ModelSpec spec{SpinSystem(std::move(k), std::move(b)), grid, std::move(factors), basis, std::string(name)};
    spec.validate();
    return spec;
}

} // namespace gsbr::model
