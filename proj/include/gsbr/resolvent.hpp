#pragma once

// Free and interacting resolvents, the regularizing operator T, M(z) and the block
// (Krein-type) resolvent formula for H = H_free + A^* + A + (A R A^* + T).

#include <functional>
#include <span>
#include <vector>

#include "gsbr/model.hpp"

namespace gsbr::resolvent {

using fock::LinOp;

struct ResolventContext {
    LinOp h_free;
    LinOp a;
    double z0 = -1.0;
    CMatrix r;                       // (H_free - z0)^{-1}
    CMatrix t;                       // defaults to -A R A^*
    linalg::HermitianEigen free_eig; // spectral decomposition of H_free
};

/// -1 when H_free > -1 + 1e-6, otherwise one unit below the bottom of spec(H_free).
double suggest_z0(const model::ModelSpec& spec);

/// Builds H_free, A and R from a model. T defaults to T_min = -A R A^*.
ResolventContext make_context(const model::ModelSpec& spec, double z0 = -1.0);
/// Generic context from explicit operators; H_free must be Hermitian.
ResolventContext make_context(const LinOp& h_free, const LinOp& a, double z0 = -1.0);
/// Same context with a custom bounded T (Hermitian to 1e-10).
ResolventContext with_t(ResolventContext ctx, CMatrix t);

/// (H - z)^{-1} by dense LU. Requires dist(z, spec H) > 1e-8 and checks the residual < 1e-9.
CMatrix resolvent_direct(const CMatrix& h, cplx z);

/// distance from z to the spectrum of H_free
double free_distance(const ResolventContext& ctx, cplx z);
/// R_z = (H_free - z)^{-1} through the exact eigendecomposition
CMatrix free_resolvent(const ResolventContext& ctx, cplx z);
/// (H_free + 1)^{s/2}; requires H_free > -1
CMatrix scale_power(const ResolventContext& ctx, double s);

CMatrix t_min(const ResolventContext& ctx);
/// M(z) = A (R_z - R) A^*
CMatrix m_op(const ResolventContext& ctx, cplx z);

struct Margin {
    double value = 0.0;     // smallest singular value of M(z) - T
    bool certified = false; // value clearly above rounding
};
Margin invertibility_margin(const ResolventContext& ctx, cplx z);

/// R_z - [R_z A^*, R_z] B^{-1} [A R_z; R_z] with B = [[M(z) - T, A R_z + 1], [R_z A^* + 1, R_z]].
/// Throws SingularFormula when the condition number of B exceeds 1e12.
CMatrix krein_resolvent(const ResolventContext& ctx, cplx z);

/// (H_free + A^*) psi + A (psi + R A^* psi) + T psi
CVector apply_h(const ResolventContext& ctx, const CVector& psi);

/// Dense matrix of the interacting operator H_free + A^* + A + A R A^* + T
CMatrix interacting_matrix(const ResolventContext& ctx);

/// ||R_z A^*|| as a map on the full space
double g_norm(const ResolventContext& ctx, cplx z);

inline constexpr double kMembershipExponent = 0.05;
inline constexpr std::size_t kMembershipRungs = 6;

struct DomainVerdict {
    bool member = false;
    bool conclusive = false;                              // at least kMembershipRungs rungs
    std::vector<std::pair<double, double>> diagnostics;   // (grid extent, ||(H_free+1)(1+RA^*)psi||)
    double fitted_exponent = 0.0;
};

/// One rung: a context over a grid with the given extent.
struct LadderRung {
    ResolventContext ctx;
    double extent;
};

/// psi_of(ctx, rung index) builds the test vector on that rung. Throws PreconditionError for < 4 rungs.
DomainVerdict domain_membership(std::span<const LadderRung> ladder,
                                const std::function<CVector(const ResolventContext&, std::size_t)>& psi_of);

struct VanishingRow {
    cplx z;
    double dist = 0.0;
    double measured = 0.0; // largest singular value of R_z (H_free+1)^{s/2}
    double bound = 0.0;    // sup over eigenvalues of |(lambda+1)^{s/2} / (lambda - z)|
};

struct VanishingReport {
    double s = 0.0;
    std::vector<VanishingRow> rows;
    double fitted_exponent = 0.0;  // log-log slope of measured against dist
    double expected_exponent = 0.0; // -1 + s/2
    bool bounded = false;          // measured <= bound (1e-10 relative slack) at every point
    bool decaying = false;         // measured strictly decreasing
};

/// Requires 0 <= s < 2, Im z <= 0 and increasing distance to the spectrum along zs.
VanishingReport resolvent_vanishing_study(const ResolventContext& ctx, double s, std::span<const cplx> zs);

} // namespace gsbr::resolvent
