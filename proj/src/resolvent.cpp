#include "gsbr/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gsbr/error.hpp"

namespace gsbr::resolvent {

namespace {

constexpr double kSpectrumGap = 1e-8;
constexpr double kMaxCondition = 1e12;

CMatrix identity(Eigen::Index n) { return CMatrix::Identity(n, n); }

} // namespace

ResolventContext make_context(const LinOp& h_free, const LinOp& a, double z0) {
    if (h_free.rows() != h_free.cols() || a.rows() != h_free.rows() || a.cols() != h_free.cols())
        throw StructuralError("make_context: H_free and A must be square and of equal size");
    ResolventContext ctx{h_free, a, z0, {}, {}, linalg::hermitian_eigen(h_free.matrix, 1e-12)};
    const double dist = (ctx.free_eig.values.array() - z0).abs().minCoeff();
    if (!(dist > kSpectrumGap))
        throw PreconditionError("make_context: z0 = " + std::to_string(z0) + " lies on the spectrum of H_free");
    ctx.r = free_resolvent(ctx, z0);
    ctx.t = t_min(ctx);
    return ctx;
}

ResolventContext make_context(const model::ModelSpec& spec, double z0) {
    return make_context(model::assemble_free(spec), model::assemble_A(spec), z0);
}

double suggest_z0(const model::ModelSpec& spec) {
    const double bottom = model::free_eigen(spec).values.minCoeff();
    return bottom > -1.0 + 1e-6 ? -1.0 : bottom - 1.0;
}

ResolventContext with_t(ResolventContext ctx, CMatrix t) {
    if (t.rows() != ctx.r.rows() || t.cols() != ctx.r.cols()) throw StructuralError("with_t: T has the wrong shape");
    if ((t - t.adjoint()).cwiseAbs().maxCoeff() > 1e-10) throw PreconditionError("with_t: T is not self-adjoint");
    ctx.t = std::move(t);
    return ctx;
}

CMatrix resolvent_direct(const CMatrix& h, cplx z) {
    if (h.rows() != h.cols()) throw StructuralError("resolvent_direct: matrix is not square");
    const CMatrix shifted = h - z * identity(h.rows());
    double dist;
    if (linalg::hermitian_residual(h) < 1e-12) {
        const RVector ev = Eigen::SelfAdjointEigenSolver<CMatrix>(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly)
                               .eigenvalues();
        dist = (ev.cast<cplx>().array() - z).abs().minCoeff();
    } else {
        // for normal H this is the distance to the spectrum; in general a lower bound on it
        dist = linalg::min_singular_value(shifted);
    }
    if (!(dist > kSpectrumGap)) throw PreconditionError("resolvent_direct: z is within 1e-8 of the spectrum");
    Eigen::PartialPivLU<CMatrix> lu(shifted);
    CMatrix res = lu.solve(identity(h.rows()));
    // Frobenius norm bounds the operator norm from above
    const double resid = (shifted * res - identity(h.rows())).norm();
    if (!(resid < 1e-9)) throw NumericalError("resolvent_direct: residual " + std::to_string(resid) + " above 1e-9");
    return res;
}

double free_distance(const ResolventContext& ctx, cplx z) {
    return (ctx.free_eig.values.cast<cplx>().array() - z).abs().minCoeff();
}

CMatrix free_resolvent(const ResolventContext& ctx, cplx z) {
    if (!(free_distance(ctx, z) > kSpectrumGap))
        throw PreconditionError("free_resolvent: z is within 1e-8 of the spectrum of H_free");
    return linalg::spectral_function(ctx.free_eig, [z](double l) { return 1.0 / (cplx(l) - z); });
}

CMatrix scale_power(const ResolventContext& ctx, double s) {
    if (!(ctx.free_eig.values.minCoeff() > -1.0))
        throw PreconditionError("scale_power: H_free + 1 is not positive");
    return linalg::spectral_function(ctx.free_eig, [s](double l) { return cplx(std::pow(l + 1.0, 0.5 * s)); });
}

CMatrix t_min(const ResolventContext& ctx) {
    CMatrix t = -(ctx.a.matrix * ctx.r * ctx.a.matrix.adjoint());
    return 0.5 * (t + t.adjoint()); // exact for real z0 up to rounding
}

CMatrix m_op(const ResolventContext& ctx, cplx z) {
    return ctx.a.matrix * (free_resolvent(ctx, z) - ctx.r) * ctx.a.matrix.adjoint();
}

Margin invertibility_margin(const ResolventContext& ctx, cplx z) {
    const CMatrix d = m_op(ctx, z) - ctx.t;
    Margin m;
    m.value = linalg::min_singular_value(d);
    m.certified = m.value > 1e-12 * std::max(1.0, linalg::op_norm(d));
    return m;
}

CMatrix krein_resolvent(const ResolventContext& ctx, cplx z) {
    const Eigen::Index n = ctx.r.rows();
    const CMatrix rz = free_resolvent(ctx, z);
    const CMatrix& a = ctx.a.matrix;
    const CMatrix a_rz = a * rz;
    const CMatrix rz_as = rz * a.adjoint();

    CMatrix block(2 * n, 2 * n);
    block.topLeftCorner(n, n) = a * (rz - ctx.r) * a.adjoint() - ctx.t;
    block.topRightCorner(n, n) = a_rz + identity(n);
    block.bottomLeftCorner(n, n) = rz_as + identity(n);
    block.bottomRightCorner(n, n) = rz;

    Eigen::PartialPivLU<CMatrix> lu(block);
    const double rcond = lu.rcond();
    const double cond = rcond > 0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    if (!(cond <= kMaxCondition))
        throw SingularFormula("krein_resolvent: block operator condition number " + std::to_string(cond) +
                                  " exceeds 1e12",
                              cond);

    CMatrix rhs(2 * n, n);
    rhs.topRows(n) = a_rz;
    rhs.bottomRows(n) = rz;
    const CMatrix x = lu.solve(rhs);
    return rz - rz_as * x.topRows(n) - rz * x.bottomRows(n);
}

CVector apply_h(const ResolventContext& ctx, const CVector& psi) {
    const CMatrix& a = ctx.a.matrix;
    const CVector as_psi = a.adjoint() * psi;
    return ctx.h_free.matrix * psi + as_psi + a * (psi + ctx.r * as_psi) + ctx.t * psi;
}

CMatrix interacting_matrix(const ResolventContext& ctx) {
    const CMatrix& a = ctx.a.matrix;
    return ctx.h_free.matrix + a.adjoint() + a + a * ctx.r * a.adjoint() + ctx.t;
}

double g_norm(const ResolventContext& ctx, cplx z) {
    return linalg::op_norm(free_resolvent(ctx, z) * ctx.a.matrix.adjoint());
}

DomainVerdict domain_membership(std::span<const LadderRung> ladder,
                                const std::function<CVector(const ResolventContext&, std::size_t)>& psi_of) {
    if (ladder.size() < 4)
        throw PreconditionError("domain_membership: ladder has " + std::to_string(ladder.size()) +
                                " rungs, need at least 4");
    DomainVerdict v;
    std::vector<double> ext, norms;
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        const auto& ctx = ladder[i].ctx;
        const CVector psi = psi_of(ctx, i);
        if (psi.size() != ctx.r.rows()) throw StructuralError("domain_membership: vector has the wrong size");
        const CVector lifted = psi + ctx.r * (ctx.a.matrix.adjoint() * psi);
        const CVector image = ctx.h_free.matrix * lifted + lifted;
        const double nrm = image.norm();
        v.diagnostics.emplace_back(ladder[i].extent, nrm);
        ext.push_back(ladder[i].extent);
        norms.push_back(nrm);
    }
    const bool all_zero = std::all_of(norms.begin(), norms.end(), [](double x) { return x == 0.0; });
    v.fitted_exponent = all_zero ? 0.0 : linalg::log_log_slope(ext, norms);
    v.conclusive = ladder.size() >= kMembershipRungs;
    v.member = v.fitted_exponent < kMembershipExponent;
    return v;
}

VanishingReport resolvent_vanishing_study(const ResolventContext& ctx, double s, std::span<const cplx> zs) {
    if (!(s >= 0.0 && s < 2.0)) throw PreconditionError("resolvent_vanishing_study: s must lie in [0, 2)");
    if (zs.size() < 2) throw PreconditionError("resolvent_vanishing_study: need at least two points");
    VanishingReport rep;
    rep.s = s;
    rep.expected_exponent = -1.0 + 0.5 * s;
    const CMatrix lift = scale_power(ctx, s);
    double prev_dist = -1.0;
    for (const cplx z : zs) {
        if (z.imag() > 0) throw PreconditionError("resolvent_vanishing_study: points must satisfy Im z <= 0");
        VanishingRow row{z, free_distance(ctx, z), 0.0, 0.0};
        if (!(row.dist > prev_dist))
            throw PreconditionError("resolvent_vanishing_study: distance to the spectrum must increase");
        prev_dist = row.dist;
        row.measured = linalg::op_norm(free_resolvent(ctx, z) * lift);
        for (Eigen::Index i = 0; i < ctx.free_eig.values.size(); ++i) {
            const double l = ctx.free_eig.values(i);
            row.bound = std::max(row.bound, std::pow(l + 1.0, 0.5 * s) / std::abs(cplx(l) - z));
        }
        rep.rows.push_back(row);
    }
    std::vector<double> d, m;
    rep.bounded = true;
    rep.decaying = true;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        d.push_back(rep.rows[i].dist);
        m.push_back(rep.rows[i].measured);
        rep.bounded = rep.bounded && rep.rows[i].measured <= rep.rows[i].bound * (1.0 + 1e-10);
        if (i > 0) rep.decaying = rep.decaying && rep.rows[i].measured < rep.rows[i - 1].measured;
    }
    rep.fitted_exponent = linalg::log_log_slope(d, m);
    return rep;
}

} // namespace gsbr::resolvent
