#pragma once

// Cutoff ladders, norm-resolvent convergence and the van Hove self-energy / dressing identities.

#include <optional>
#include <span>
#include <vector>

#include "gsbr/model.hpp"
#include "gsbr/resolvent.hpp"

namespace gsbr::renorm {

using fock::LinOp;

/// The model with every form factor cut at k <= cutoff. Cutoffs below the first node give A = 0.
model::ModelSpec cut_spec(const model::ModelSpec& spec, double cutoff);

/// H_n = H_free + A_n^* + A_n for each cutoff.
std::vector<LinOp> ladder(const model::ModelSpec& spec, std::span<const double> cutoffs);

/// sqrt(sum_j ||f_j - g_j||_{H_-1}^2) between two models on the same grid
double h_minus1_distance(const model::ModelSpec& a, const model::ModelSpec& b);

/// ||(H_a - z)^{-1} - (H_b - z)^{-1}||
double norm_resolvent_distance(const CMatrix& ha, const CMatrix& hb, cplx z);

/// Default evaluation points: three below the spectrum and one off the real axis.
std::vector<cplx> default_z_set();

struct ConvergenceRung {
    double cutoff = 0.0;
    double h_minus1_dist = 0.0;
    std::vector<double> resolvent_dist; // one per z
    double t_dist = 0.0;                // ||A_n R A_n^* - A_ref R A_ref^*||
};

struct ConvergenceReport {
    std::vector<cplx> zs;
    double reference_cutoff = 0.0;
    double reference_krein_error = 0.0;  // Krein vs dense inverse for the reference, max over z
    std::vector<ConvergenceRung> rungs;  // ordered by cutoff
    std::vector<double> fitted_constant; // per z: max of resolvent_dist / h_minus1_dist
    std::vector<double> ratio_spread;    // per z: max ratio / min ratio
    bool strictly_decreasing = false;
    bool t_decreasing = false;
    bool verdict = false;
};

inline constexpr double kRatioSpreadLimit = 3.0;

/// Reference = the model cut at `reference_cutoff` (default: the grid's last node), resolved with the
/// block formula around z0 (default: resolvent::suggest_z0). Cutoffs must increase and stay below the reference.
ConvergenceReport convergence_study(const model::ModelSpec& spec, std::span<const double> cutoffs,
                                    std::span<const cplx> zs, std::optional<double> reference_cutoff = {},
                                    std::optional<double> z0 = {});

/// E = -sum_i w_i |f_i|^2 / omega_i
double self_energy(const modes::FormFactor& f, const modes::ModeGrid& grid);

struct DressingReport {
    double self_energy = 0.0;
    double ground_energy = 0.0;        // lowest eigenvalue of H
    double unitarity_residual = 0.0;   // ||W^* W - 1||
    double conjugation_residual = 0.0; // ||P (W^* H W - H_free - E) P||, P: total occupation <= n_max/2
    double spectral_distance = 0.0;    // Hausdorff distance of the lowest quartiles of spec H and spec H_free + E
    std::size_t low_sector_max = 0;
};

/// Requires a single-level, single-coupling model (D = N = 1).
DressingReport van_hove_dressing(const model::ModelSpec& spec);

/// W = exp(a(h) - a^*(h)) with h = f / omega
CMatrix dressing_operator(const modes::FormFactor& f, const modes::ModeGrid& grid, const fock::FockBasis& basis);

struct ApproximationRung {
    double cutoff = 0.0;
    double h_minus1_dist = 0.0;
    double op_dist = 0.0; // ||(a(f_cut) - a(f)) (dΓ + 1)^{-1/2}||
};

/// Annihilators of truncated factors approach a(f) in the F_1 -> F norm.
std::vector<ApproximationRung> annihilator_approximation(const modes::FormFactor& f, std::span<const double> cutoffs,
                                                         const modes::ModeGrid& grid, const fock::FockBasis& basis);

} // namespace gsbr::renorm
