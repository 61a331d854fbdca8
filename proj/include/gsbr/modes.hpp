#pragma once

// Single-particle space: a 1-D momentum half-line discretized by a quadrature rule,
// the dispersion relation, form factors and the omega-weighted Hilbert-scale norms.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gsbr/linalg.hpp"

namespace gsbr::modes {

enum class Quadrature { trapezoid, midpoint };

/// Dispersion relation k -> omega(k). `growth` is the asymptotic exponent beta in omega ~ k^beta.
struct Dispersion {
    std::string name;
    std::function<double(double)> omega;
    double growth = 1.0;

    /// omega(k) = sqrt(k^2 + m^2)
    static Dispersion relativistic(double mass);
    /// omega(k) = k (only valid on grids bounded away from zero)
    static Dispersion linear();
    /// omega(k) = value, for single-mode toy models
    static Dispersion constant(double value);
};

class ModeGrid {
public:
    ModeGrid(std::vector<double> nodes, std::vector<double> weights, std::vector<double> omega,
             double mass_floor, std::string dispersion_name = "custom", double omega_growth = 1.0);

    /// count nodes uniformly spaced on [k_min, k_max]
    static ModeGrid uniform(double k_min, double k_max, std::size_t count, const Dispersion& disp,
                            Quadrature rule = Quadrature::trapezoid);
    /// count nodes geometrically spaced on [k_min, k_max] (k_min > 0), trapezoid weights
    static ModeGrid geometric(double k_min, double k_max, std::size_t count, const Dispersion& disp);

    std::size_t size() const noexcept { return nodes_.size(); }
    std::span<const double> nodes() const noexcept { return nodes_; }
    std::span<const double> weights() const noexcept { return weights_; }
    std::span<const double> omega() const noexcept { return omega_; }
    double mass_floor() const noexcept { return mass_floor_; }
    double extent() const noexcept { return nodes_.back(); }
    const std::string& dispersion_name() const noexcept { return dispersion_name_; }
    /// asymptotic exponent beta in omega ~ k^beta
    double omega_growth() const noexcept { return omega_growth_; }

    /// First `count` nodes with their weights unchanged.
    ModeGrid prefix(std::size_t count) const;
    /// Number of nodes with k <= cutoff.
    std::size_t count_below(double cutoff) const;
    /// True when this grid's nodes are a leading subsequence of `other`'s nodes.
    bool is_prefix_of(const ModeGrid& other) const;

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::vector<double> omega_;
    double mass_floor_;
    std::string dispersion_name_;
    double omega_growth_;
};

/// Declared asymptotics |f(k)| ~ k^f_exponent, omega(k) ~ k^omega_exponent.
struct TailSpec {
    double f_exponent = 0.0;
    double omega_exponent = 1.0;
};

struct FormFactor {
    CVector values;
    TailSpec tail;
    std::string label;

    std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }

    static FormFactor from_function(const ModeGrid& grid, const std::function<cplx(double k, double omega)>& fn,
                                    TailSpec tail, std::string label);
    /// coupling * omega^power
    static FormFactor omega_power(const ModeGrid& grid, double power, double omega_growth = 1.0,
                                  cplx coupling = 1.0, std::string label = {});
    /// coupling * k^power
    static FormFactor k_power(const ModeGrid& grid, double power, double omega_growth = 1.0,
                              cplx coupling = 1.0, std::string label = {});
    static FormFactor zero(const ModeGrid& grid, std::string label = "zero");
};

enum class CaseLabel { Case0, Case1, Case2, Case3 };
const char* to_string(CaseLabel c);

/// ||f||_{H_s} = sqrt(sum_i w_i omega_i^s |f_i|^2)
double scale_norm(const FormFactor& f, double s, const ModeGrid& grid);

/// <f, g> = sum_i w_i conj(f_i) g_i
cplx pairing(const FormFactor& f, const FormFactor& g, const ModeGrid& grid);

/// Divergence case implied by the declared tail alone.
CaseLabel analytic_case(const TailSpec& tail);

struct DivergenceOptions {
    std::size_t rungs = 8;             // nested sub-grids at k_max * 2^-(rungs-1-r)
    double divergent_exponent = 0.05;  // fitted power-law exponent above which a partial integral diverges
    double convergent_relative = 1e-3; // last relative increment below which it converges
};

struct PartialIntegralFit {
    int omega_power = 0;              // integral of |f|^2 omega^-p
    std::vector<double> cutoffs;
    std::vector<double> values;
    double fitted_exponent = 0.0;
    double last_relative_increment = 0.0;
    enum class Verdict { convergent, divergent, inconclusive } verdict = Verdict::inconclusive;
    bool analytic_convergent = false;
};

struct DivergenceReport {
    CaseLabel analytic;
    CaseLabel empirical;
    std::vector<PartialIntegralFit> fits; // p = 0, 1, 2
};

/// Measures growth of int |f|^2 omega^-p over nested sub-grids and compares with the declared tail.
DivergenceReport divergence_report(const FormFactor& f, const ModeGrid& grid, const DivergenceOptions& opts = {});

/// Throws ClassificationConflict when the declared tail and the measurement disagree.
CaseLabel classify_divergence(const FormFactor& f, const ModeGrid& grid, const DivergenceOptions& opts = {});

/// f restricted to k <= cutoff (closed cutoff). Throws PreconditionError for cutoff below the first node.
FormFactor truncate(const FormFactor& f, double cutoff, const ModeGrid& grid);

struct CutoffFamily {
    FormFactor base;
    std::vector<double> cutoffs;
    std::vector<FormFactor> realized;
};

CutoffFamily make_cutoff_family(const FormFactor& base, std::vector<double> cutoffs, const ModeGrid& grid);

struct IndependenceReport {
    std::vector<double> extents;
    std::vector<double> min_eigenvalues;
    double fitted_exponent = 0.0;
    bool independent = false;
};

/// Gram-matrix growth surrogate for H-independence. `factors` live on the last (largest) grid;
/// every grid must be a node-prefix of the next.
IndependenceReport h_independence_margin(std::span<const FormFactor> factors, std::span<const ModeGrid> grids,
                                         double growth_threshold = 0.05);

void check_on_grid(const FormFactor& f, const ModeGrid& grid, const char* where);

} // namespace gsbr::modes
