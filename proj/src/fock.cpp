#include "gsbr/fock.hpp"

#include <cmath>
#include <string>

#include "gsbr/error.hpp"

namespace gsbr::fock {

std::size_t basis_dimension(std::size_t modes, std::size_t n_max) {
    // binomial(modes + n_max, n_max), saturating
    long double acc = 1.0L;
    for (std::size_t i = 1; i <= n_max; ++i) acc = acc * static_cast<long double>(modes + i) / static_cast<long double>(i);
    if (acc > 1e18L) return static_cast<std::size_t>(-1);
    return static_cast<std::size_t>(std::llround(static_cast<double>(acc)));
}

namespace {

void enumerate(std::size_t mode, std::size_t remaining, Occupation& cur, std::vector<Occupation>& out) {
    if (mode == cur.size()) {
        out.push_back(cur);
        return;
    }
    for (std::size_t n = 0; n <= remaining; ++n) {
        cur[mode] = static_cast<std::uint16_t>(n);
        enumerate(mode + 1, remaining - n, cur, out);
    }
    cur[mode] = 0;
}

void check_pair(const FockBasis& b, const modes::ModeGrid& g, const char* where) {
    if (b.mode_count() != g.size())
        throw StructuralError(std::string(where) + ": basis has " + std::to_string(b.mode_count()) +
                              " modes but the grid has " + std::to_string(g.size()) + " nodes");
}

double scale_for(const modes::FormFactor& f) {
    // a(f) is bounded from F_{+s} to F once f is in H_{-s}, s >= 1
    switch (modes::analytic_case(f.tail)) {
    case modes::CaseLabel::Case0:
    case modes::CaseLabel::Case1: return 1.0;
    case modes::CaseLabel::Case2: return 2.0;
    case modes::CaseLabel::Case3: return 3.0;
    }
    return 1.0;
}

template <typename Emit>
void for_each_lowering(const modes::FormFactor& f, const FockBasis& b, const modes::ModeGrid& g, Emit&& emit) {
    Occupation lowered;
    for (std::size_t col = 0; col < b.size(); ++col) {
        const Occupation& occ = b.state(col);
        for (std::size_t i = 0; i < occ.size(); ++i) {
            if (occ[i] == 0) continue;
            lowered = occ;
            --lowered[i];
            const auto row = b.find(lowered);
            const cplx amp = std::conj(f.values(static_cast<Eigen::Index>(i))) * std::sqrt(g.weights()[i]) *
                             std::sqrt(static_cast<double>(occ[i]));
            emit(*row, col, amp);
        }
    }
}

} // namespace

std::optional<std::size_t> FockBasis::find(const Occupation& occ) const {
    const auto it = data_->index.find(occ);
    if (it == data_->index.end()) return std::nullopt;
    return it->second;
}

FockBasis build_basis(std::size_t modes, std::size_t n_max, std::size_t size_cap) {
    if (modes == 0) throw PreconditionError("build_basis: need at least one mode");
    const std::size_t dim = basis_dimension(modes, n_max);
    if (dim > size_cap)
        throw PreconditionError("build_basis: " + std::to_string(dim) + " states exceed the size cap " +
                                std::to_string(size_cap));
    auto d = std::make_shared<FockBasis::Data>();
    d->modes = modes;
    d->n_max = n_max;
    d->states.reserve(dim);
    Occupation cur(modes, 0);
    enumerate(0, n_max, cur, d->states);
    d->totals.reserve(d->states.size());
    for (std::size_t i = 0; i < d->states.size(); ++i) {
        std::size_t t = 0;
        for (auto n : d->states[i]) t += n;
        d->totals.push_back(t);
        d->index.emplace(d->states[i], i);
    }
    return FockBasis(std::move(d));
}

LinOp annihilator(const modes::FormFactor& f, const FockBasis& b, const modes::ModeGrid& g) {
    modes::check_on_grid(f, g, "annihilator");
    check_pair(b, g, "annihilator");
    const auto n = static_cast<Eigen::Index>(b.size());
    LinOp op{CMatrix::Zero(n, n), scale_for(f), 0.0};
    for_each_lowering(f, b, g, [&](std::size_t row, std::size_t col, cplx amp) {
        op.matrix(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) += amp;
    });
    return op;
}

LinOp creator(const modes::FormFactor& f, const FockBasis& b, const modes::ModeGrid& g) {
    return annihilator(f, b, g).adjoint();
}

Eigen::SparseMatrix<cplx> annihilator_sparse(const modes::FormFactor& f, const FockBasis& b,
                                             const modes::ModeGrid& g) {
    modes::check_on_grid(f, g, "annihilator_sparse");
    check_pair(b, g, "annihilator_sparse");
    std::vector<Eigen::Triplet<cplx>> trip;
    for_each_lowering(f, b, g, [&](std::size_t row, std::size_t col, cplx amp) {
        trip.emplace_back(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col), amp);
    });
    const auto n = static_cast<Eigen::Index>(b.size());
    Eigen::SparseMatrix<cplx> m(n, n);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

RVector field_energies(const modes::ModeGrid& g, const FockBasis& b) {
    check_pair(b, g, "second_quantize");
    RVector d(static_cast<Eigen::Index>(b.size()));
    for (std::size_t s = 0; s < b.size(); ++s) {
        double e = 0.0;
        const Occupation& occ = b.state(s);
        for (std::size_t i = 0; i < occ.size(); ++i) e += occ[i] * g.omega()[i];
        d(static_cast<Eigen::Index>(s)) = e;
    }
    return d;
}

LinOp second_quantize(const modes::ModeGrid& g, const FockBasis& b) {
    return {field_energies(g, b).cast<cplx>().asDiagonal(), 2.0, 0.0};
}

LinOp number_op(const FockBasis& b) {
    RVector d(static_cast<Eigen::Index>(b.size()));
    for (std::size_t s = 0; s < b.size(); ++s) d(static_cast<Eigen::Index>(s)) = static_cast<double>(b.total(s));
    return {d.cast<cplx>().asDiagonal(), 0.0, 0.0};
}

FockVec coherent_vector(const modes::FormFactor& h, const FockBasis& b, const modes::ModeGrid& g) {
    modes::check_on_grid(h, g, "coherent_vector");
    check_pair(b, g, "coherent_vector");
    std::vector<cplx> scaled(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) scaled[i] = std::sqrt(g.weights()[i]) * h.values(static_cast<Eigen::Index>(i));

    FockVec out{b, CVector(static_cast<Eigen::Index>(b.size()))};
    for (std::size_t s = 0; s < b.size(); ++s) {
        cplx amp = 1.0;
        const Occupation& occ = b.state(s);
        for (std::size_t i = 0; i < occ.size(); ++i)
            for (std::uint16_t k = 1; k <= occ[i]; ++k) amp *= scaled[i] / std::sqrt(static_cast<double>(k));
        out.amps(static_cast<Eigen::Index>(s)) = amp;
    }
    return out;
}

double fock_scale_norm(const FockVec& psi, double s, const modes::ModeGrid& g) {
    if (psi.amps.size() != static_cast<Eigen::Index>(psi.basis.size()))
        throw StructuralError("fock_scale_norm: amplitude count does not match the basis");
    const RVector e = field_energies(g, psi.basis);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) acc += std::pow(1.0 + e(i), s) * std::norm(psi.amps(i));
    return std::sqrt(acc);
}

RVector sector_mask(const FockBasis& b, std::size_t max_total) {
    RVector m(static_cast<Eigen::Index>(b.size()));
    for (std::size_t s = 0; s < b.size(); ++s) m(static_cast<Eigen::Index>(s)) = b.total(s) <= max_total ? 1.0 : 0.0;
    return m;
}

} // namespace gsbr::fock
