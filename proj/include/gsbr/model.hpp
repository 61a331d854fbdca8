#pragma once

// Generalized spin-boson Hamiltonians on C^D (x) F_trunc.
//
// Tensor order: the atom index is the slow one, i.e. basis position = a * |F| + s, so that
// a vector reads as D stacked Fock-space blocks (excited first for the two-level presets).

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gsbr/fock.hpp"
#include "gsbr/modes.hpp"

namespace gsbr::model {

using fock::LinOp;

struct SpinSystem {
    std::size_t dim = 1;
    CMatrix energy;                  // K, self-adjoint D x D
    std::vector<CMatrix> couplings;  // B_1 ... B_N
    std::vector<std::string> labels;

    /// Validates shapes and K = K^* to 1e-12.
    SpinSystem(CMatrix k, std::vector<CMatrix> b, std::vector<std::string> labels = {});
};

struct AssumptionReport {
    std::vector<double> normal_residual;   // ||B_j^* B_j - B_j B_j^*||
    std::vector<bool> normal;
    struct PairResidual {
        std::size_t j, l;
        double residual;                    // ||[B_j, B_l]||
    };
    std::vector<PairResidual> commutators;
    bool commuting = true;
    double stacked_min_singular = 0.0;     // smallest singular value of [B_1; ...; B_N]
    bool joint_kernel_trivial = false;
    bool verdict = false;

    /// Human-readable list of failed conditions; empty when the verdict holds.
    std::string failures() const;
};

inline constexpr double kAssumptionTol = 1e-10;

AssumptionReport validate_interaction(const SpinSystem& spin);

struct EigStructure {
    CMatrix unitary;   // columns u^(a)
    CMatrix eigvals;   // N x D table, B_j u^(a) = eigvals(j, a) u^(a)
};

/// Simultaneous unitary diagonalization of the couplings. Requires a passing assumption report.
EigStructure common_eigenbasis(const SpinSystem& spin, std::uint64_t seed = 0x5eedULL);

struct ModelSpec {
    SpinSystem spin;
    modes::ModeGrid grid;
    std::vector<modes::FormFactor> factors;
    fock::FockBasis basis;
    std::string preset;

    /// Checks factor count, grid/basis compatibility.
    void validate() const;
    std::size_t total_dim() const { return spin.dim * basis.size(); }
};

/// Same model with the form factors replaced.
ModelSpec with_factors(const ModelSpec& spec, std::vector<modes::FormFactor> factors);

LinOp assemble_free(const ModelSpec& spec);
LinOp assemble_A(const ModelSpec& spec);
/// H_free + A^* + A
LinOp assemble_hamiltonian(const ModelSpec& spec);

/// Per-eigenvector annihilators a(sum_j b_j^(a) f_j), a = 0..D-1.
std::vector<LinOp> block_decompose(const ModelSpec& spec, const EigStructure& eig);

/// Spectral decomposition of H_free built from the eigendecomposition of K and the diagonal dΓ(omega).
linalg::HermitianEigen free_eigen(const ModelSpec& spec);

struct PresetParams {
    std::size_t atoms = 1;
    std::vector<double> eta;        // per-atom level splittings; empty means all 1.0
    double coupling = 1.0;
    double factor_exponent = -0.25; // f_j = coupling * omega^p * exp(i k x_j)
    std::vector<double> positions;  // x_j; empty means x_j = j
};

/// Known presets: sigma_x, sigma_x_multi, sigma_z, sigma_z_multi, rwa, van_hove.
ModelSpec make_preset(std::string_view name, const PresetParams& params, const modes::ModeGrid& grid,
                      const fock::FockBasis& basis);

std::vector<std::string> preset_names();

namespace pauli {
CMatrix x();
CMatrix y();
CMatrix z();
CMatrix plus();   // [[0,1],[0,0]]
CMatrix minus();  // [[0,0],[1,0]]
/// I (x) ... (x) op (x) ... (x) I with `op` on factor `site` of `sites`
CMatrix embed(const CMatrix& op, std::size_t site, std::size_t sites);
} // namespace pauli

} // namespace gsbr::model
