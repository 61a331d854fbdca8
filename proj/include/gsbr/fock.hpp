#pragma once

// Truncated symmetric Fock space over a ModeGrid in the occupation-number representation.
//
// Operator amplitudes carry sqrt(w_i) per mode so that the discrete CCR reproduce the
// quadrature pairing exactly: [a(f), a*(g)] = sum_i w_i conj(f_i) g_i on states whose
// total occupation is at most n_max - 1 (the "safe sector").

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "gsbr/linalg.hpp"
#include "gsbr/modes.hpp"

namespace gsbr::fock {

inline constexpr std::size_t kDefaultSizeCap = 20000;
inline constexpr std::size_t kSparseThreshold = 5000;

using Occupation = std::vector<std::uint16_t>;

/// Lexicographically ordered occupation tuples with total particle number <= n_max.
/// Cheap to copy: the enumeration is shared.
class FockBasis {
public:
    std::size_t mode_count() const noexcept { return data_->modes; }
    std::size_t n_max() const noexcept { return data_->n_max; }
    std::size_t size() const noexcept { return data_->states.size(); }

    const Occupation& state(std::size_t i) const { return data_->states.at(i); }
    std::size_t total(std::size_t i) const { return data_->totals.at(i); }
    std::optional<std::size_t> find(const Occupation& occ) const;

    bool same_as(const FockBasis& other) const noexcept {
        return data_ == other.data_ || (mode_count() == other.mode_count() && n_max() == other.n_max());
    }

private:
    struct Data {
        std::size_t modes = 0;
        std::size_t n_max = 0;
        std::vector<Occupation> states;
        std::vector<std::size_t> totals;
        std::map<Occupation, std::size_t> index;
    };
    explicit FockBasis(std::shared_ptr<const Data> d) : data_(std::move(d)) {}
    std::shared_ptr<const Data> data_;

    friend FockBasis build_basis(std::size_t, std::size_t, std::size_t);
};

/// Throws PreconditionError for modes == 0 and when binomial(modes + n_max, modes) exceeds size_cap.
FockBasis build_basis(std::size_t modes, std::size_t n_max, std::size_t size_cap = kDefaultSizeCap);

std::size_t basis_dimension(std::size_t modes, std::size_t n_max);

/// Dense matrix plus the Hilbert-scale exponents of the spaces it is read as mapping between.
struct LinOp {
    CMatrix matrix;
    double src_scale = 0.0;
    double dst_scale = 0.0;

    Eigen::Index rows() const { return matrix.rows(); }
    Eigen::Index cols() const { return matrix.cols(); }
    LinOp adjoint() const { return {matrix.adjoint(), -dst_scale, -src_scale}; }
    bool finite() const { return matrix.allFinite(); }
};

struct FockVec {
    FockBasis basis;
    CVector amps;
};

LinOp annihilator(const modes::FormFactor& f, const FockBasis& b, const modes::ModeGrid& g);
LinOp creator(const modes::FormFactor& f, const FockBasis& b, const modes::ModeGrid& g);
Eigen::SparseMatrix<cplx> annihilator_sparse(const modes::FormFactor& f, const FockBasis& b,
                                             const modes::ModeGrid& g);

/// dΓ(omega): diagonal with sum_i n_i omega_i.
LinOp second_quantize(const modes::ModeGrid& g, const FockBasis& b);
/// dΓ(1)
LinOp number_op(const FockBasis& b);
/// Diagonal of dΓ(omega) as a real vector.
RVector field_energies(const modes::ModeGrid& g, const FockBasis& b);

/// Non-normalized coherent vector: amplitude prod_i (sqrt(w_i) g_i)^{n_i} / sqrt(n_i!).
FockVec coherent_vector(const modes::FormFactor& h, const FockBasis& b, const modes::ModeGrid& g);

/// sqrt(sum (1 + sum_i n_i omega_i)^s |amp|^2)
double fock_scale_norm(const FockVec& psi, double s, const modes::ModeGrid& g);

/// Diagonal projector onto states with total occupation <= max_total.
RVector sector_mask(const FockBasis& b, std::size_t max_total);

/// Mask of the safe sector (total occupation <= n_max - 1); empty when n_max == 0.
inline RVector safe_sector_mask(const FockBasis& b) {
    return b.n_max() == 0 ? RVector::Zero(static_cast<Eigen::Index>(b.size())) : sector_mask(b, b.n_max() - 1);
}

} // namespace gsbr::fock
