#include "gsbr/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gsbr/error.hpp"

namespace gsbr::renorm {

model::ModelSpec cut_spec(const model::ModelSpec& spec, double cutoff) {
    std::vector<modes::FormFactor> cut;
    cut.reserve(spec.factors.size());
    for (const auto& f : spec.factors) {
        if (cutoff < spec.grid.nodes().front()) {
            modes::FormFactor z = modes::FormFactor::zero(spec.grid, f.label + "|none");
            z.tail = f.tail;
            cut.push_back(std::move(z));
        } else {
            cut.push_back(modes::truncate(f, cutoff, spec.grid));
        }
    }
    return model::with_factors(spec, std::move(cut));
}

std::vector<LinOp> ladder(const model::ModelSpec& spec, std::span<const double> cutoffs) {
    std::vector<LinOp> out;
    out.reserve(cutoffs.size());
    for (double c : cutoffs) out.push_back(model::assemble_hamiltonian(cut_spec(spec, c)));
    return out;
}

double h_minus1_distance(const model::ModelSpec& a, const model::ModelSpec& b) {
    if (a.factors.size() != b.factors.size()) throw StructuralError("h_minus1_distance: factor counts differ");
    double acc = 0.0;
    for (std::size_t j = 0; j < a.factors.size(); ++j) {
        modes::FormFactor d = a.factors[j];
        modes::check_on_grid(b.factors[j], a.grid, "h_minus1_distance");
        d.values -= b.factors[j].values;
        const double n = modes::scale_norm(d, -1.0, a.grid);
        acc += n * n;
    }
    return std::sqrt(acc);
}

double norm_resolvent_distance(const CMatrix& ha, const CMatrix& hb, cplx z) {
    if (ha.rows() != hb.rows() || ha.cols() != hb.cols())
        throw StructuralError("norm_resolvent_distance: operators have different sizes");
    return linalg::op_norm(resolvent::resolvent_direct(ha, z) - resolvent::resolvent_direct(hb, z));
}

std::vector<cplx> default_z_set() { return {cplx(-3, 0), cplx(-10, 0), cplx(-30, 0), cplx(-1, 5)}; }

ConvergenceReport convergence_study(const model::ModelSpec& spec, std::span<const double> cutoffs,
                                    std::span<const cplx> zs, std::optional<double> reference_cutoff_opt,
                                    std::optional<double> z0) {
    if (cutoffs.empty()) throw PreconditionError("convergence_study: empty cutoff schedule");
    if (zs.empty()) throw PreconditionError("convergence_study: empty z set");
    for (std::size_t n = 1; n < cutoffs.size(); ++n)
        if (!(cutoffs[n] > cutoffs[n - 1])) throw PreconditionError("convergence_study: cutoffs must increase");
    const double reference_cutoff = reference_cutoff_opt.value_or(spec.grid.extent());
    if (cutoffs.back() > reference_cutoff)
        throw PreconditionError("convergence_study: cutoffs exceed the reference cutoff");

    ConvergenceReport rep;
    rep.zs.assign(zs.begin(), zs.end());
    rep.reference_cutoff = reference_cutoff;

    const model::ModelSpec ref_spec = cut_spec(spec, reference_cutoff);
    const auto ref_ctx = resolvent::make_context(ref_spec, z0.value_or(resolvent::suggest_z0(ref_spec)));
    const CMatrix ref_h = model::assemble_hamiltonian(ref_spec).matrix;
    std::vector<CMatrix> ref_res;
    for (const cplx z : zs) {
        ref_res.push_back(resolvent::krein_resolvent(ref_ctx, z));
        const CMatrix direct = resolvent::resolvent_direct(ref_h, z);
        rep.reference_krein_error = std::max(rep.reference_krein_error,
                                             linalg::op_norm(ref_res.back() - direct) / linalg::op_norm(direct));
    }
    const CMatrix& r = ref_ctx.r;
    const CMatrix ref_t = ref_ctx.a.matrix * r * ref_ctx.a.matrix.adjoint();

    for (double c : cutoffs) {
        const model::ModelSpec s = cut_spec(spec, c);
        const LinOp a = model::assemble_A(s);
        const CMatrix h = model::assemble_free(s).matrix + a.matrix + a.matrix.adjoint();
        ConvergenceRung rung;
        rung.cutoff = c;
        rung.h_minus1_dist = h_minus1_distance(s, ref_spec);
        for (std::size_t iz = 0; iz < zs.size(); ++iz)
            rung.resolvent_dist.push_back(linalg::op_norm(resolvent::resolvent_direct(h, zs[iz]) - ref_res[iz]));
        rung.t_dist = linalg::op_norm(a.matrix * r * a.matrix.adjoint() - ref_t);
        rep.rungs.push_back(std::move(rung));
    }

    bool all_zero = true;
    rep.strictly_decreasing = true;
    rep.t_decreasing = true;
    for (std::size_t n = 0; n < rep.rungs.size(); ++n) {
        const auto& cur = rep.rungs[n];
        for (double d : cur.resolvent_dist) all_zero = all_zero && d <= 1e-14;
        if (n == 0) continue;
        const auto& prev = rep.rungs[n - 1];
        for (std::size_t iz = 0; iz < zs.size(); ++iz)
            rep.strictly_decreasing = rep.strictly_decreasing && cur.resolvent_dist[iz] < prev.resolvent_dist[iz];
        rep.t_decreasing = rep.t_decreasing && cur.t_dist <= prev.t_dist;
    }

    bool spread_ok = true;
    for (std::size_t iz = 0; iz < zs.size(); ++iz) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const auto& rung : rep.rungs) {
            if (rung.h_minus1_dist <= 0.0) continue;
            const double ratio = rung.resolvent_dist[iz] / rung.h_minus1_dist;
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
        const double spread = (hi > 0.0 && lo > 0.0) ? hi / lo : (hi == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
        rep.fitted_constant.push_back(hi);
        rep.ratio_spread.push_back(spread);
        spread_ok = spread_ok && spread < kRatioSpreadLimit;
    }
    if (all_zero) rep.strictly_decreasing = true; // A = 0: nothing to converge
    rep.verdict = all_zero || (rep.strictly_decreasing && spread_ok);
    return rep;
}

double self_energy(const modes::FormFactor& f, const modes::ModeGrid& grid) {
    const double n = modes::scale_norm(f, -1.0, grid);
    return -n * n;
}

CMatrix dressing_operator(const modes::FormFactor& f, const modes::ModeGrid& grid, const fock::FockBasis& basis) {
    modes::FormFactor h = f;
    for (std::size_t i = 0; i < grid.size(); ++i) h.values(static_cast<Eigen::Index>(i)) /= grid.omega()[i];
    const CMatrix a = fock::annihilator(h, basis, grid).matrix;
    // generator G = a(h) - a^*(h) is anti-Hermitian; W = exp(G) = exp(-i (iG))
    const CMatrix ig = cplx(0, 1) * (a - a.adjoint());
    const auto eig = linalg::hermitian_eigen(0.5 * (ig + ig.adjoint()), 1e-12);
    return linalg::spectral_function(eig, [](double l) { return std::exp(cplx(0, -l)); });
}

namespace {

double one_sided(const RVector& from, const RVector& to) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < from.size(); ++i) worst = std::max(worst, (to.array() - from(i)).abs().minCoeff());
    return worst;
}

} // namespace

DressingReport van_hove_dressing(const model::ModelSpec& spec) {
    if (spec.spin.dim != 1 || spec.spin.couplings.size() != 1)
        throw PreconditionError("van_hove_dressing: needs a single-level model with one coupling (D = N = 1)");
    spec.validate();
    const auto& f = spec.factors.front();
    const cplx b = spec.spin.couplings.front()(0, 0);
    // A = conj(b) a(f) = a(b f): fold the scalar coupling into the form factor
    modes::FormFactor bf = f;
    bf.values *= b;

    DressingReport rep;
    rep.self_energy = self_energy(bf, spec.grid);
    rep.low_sector_max = spec.basis.n_max() / 2;

    const CMatrix h = model::assemble_hamiltonian(spec).matrix;
    const CMatrix h_free = model::assemble_free(spec).matrix;
    const CMatrix w = dressing_operator(bf, spec.grid, spec.basis);
    const auto n = h.rows();

    rep.unitarity_residual = linalg::op_norm(w.adjoint() * w - CMatrix::Identity(n, n));
    const RVector mask = fock::sector_mask(spec.basis, rep.low_sector_max);
    const CMatrix diff = w.adjoint() * h * w - h_free - rep.self_energy * CMatrix::Identity(n, n);
    rep.conjugation_residual = linalg::op_norm(mask.cast<cplx>().asDiagonal() * diff * mask.cast<cplx>().asDiagonal());

    const RVector spec_h = linalg::hermitian_eigen(h, 1e-10).values;
    RVector shifted = linalg::hermitian_eigen(h_free, 1e-10).values.array() + rep.self_energy;
    std::sort(shifted.begin(), shifted.end());
    rep.ground_energy = spec_h(0);
    const Eigen::Index quart = std::max<Eigen::Index>(1, n / 4);
    rep.spectral_distance = std::max(one_sided(spec_h.head(quart), shifted.head(quart)),
                                     one_sided(shifted.head(quart), spec_h.head(quart)));
    return rep;
}

std::vector<ApproximationRung> annihilator_approximation(const modes::FormFactor& f, std::span<const double> cutoffs,
                                                         const modes::ModeGrid& grid, const fock::FockBasis& basis) {
    const CMatrix full = fock::annihilator(f, basis, grid).matrix;
    const RVector e = fock::field_energies(grid, basis);
    const CVector inv_sqrt = (e.array() + 1.0).rsqrt().cast<cplx>().matrix();
    std::vector<ApproximationRung> out;
    for (double c : cutoffs) {
        const modes::FormFactor cut = modes::truncate(f, c, grid);
        modes::FormFactor d = cut;
        d.values -= f.values;
        ApproximationRung r;
        r.cutoff = c;
        r.h_minus1_dist = modes::scale_norm(d, -1.0, grid);
        r.op_dist = linalg::op_norm((fock::annihilator(cut, basis, grid).matrix - full) * inv_sqrt.asDiagonal());
        out.push_back(r);
    }
    return out;
}

} // namespace gsbr::renorm
