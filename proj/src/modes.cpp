#include "gsbr/modes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gsbr/error.hpp"

namespace gsbr::modes {

Dispersion Dispersion::relativistic(double mass) {
    if (!(mass > 0)) throw PreconditionError("relativistic dispersion needs a positive mass");
    return {"relativistic", [mass](double k) { return std::sqrt(k * k + mass * mass); }, 1.0};
}

Dispersion Dispersion::linear() {
    return {"linear", [](double k) { return k; }, 1.0};
}

Dispersion Dispersion::constant(double value) {
    return {"constant", [value](double) { return value; }, 0.0};
}

ModeGrid::ModeGrid(std::vector<double> nodes, std::vector<double> weights, std::vector<double> omega,
                   double mass_floor, std::string dispersion_name, double omega_growth)
    : nodes_(std::move(nodes)),
      weights_(std::move(weights)),
      omega_(std::move(omega)),
      mass_floor_(mass_floor),
      dispersion_name_(std::move(dispersion_name)),
      omega_growth_(omega_growth) {
    if (nodes_.empty()) throw StructuralError("ModeGrid: no nodes");
    if (weights_.size() != nodes_.size() || omega_.size() != nodes_.size())
        throw StructuralError("ModeGrid: nodes, weights and omega differ in length");
    if (!(mass_floor_ > 0)) throw PreconditionError("ModeGrid: mass floor must be positive");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!std::isfinite(nodes_[i]) || !std::isfinite(omega_[i]) || !std::isfinite(weights_[i]))
            throw PreconditionError("ModeGrid: non-finite entry");
        if (i > 0 && !(nodes_[i] > nodes_[i - 1])) throw PreconditionError("ModeGrid: nodes not strictly increasing");
        if (!(weights_[i] > 0)) throw PreconditionError("ModeGrid: weights must be strictly positive");
        if (omega_[i] < mass_floor_)
            throw PreconditionError("ModeGrid: omega(k) = " + std::to_string(omega_[i]) + " below mass floor");
    }
}

namespace {

std::vector<double> trapezoid_weights(const std::vector<double>& k) {
    std::vector<double> w(k.size(), 0.0);
    if (k.size() == 1) {
        w[0] = 1.0;
        return w;
    }
    for (std::size_t i = 0; i + 1 < k.size(); ++i) {
        const double h = k[i + 1] - k[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    return w;
}

ModeGrid assemble(std::vector<double> k, std::vector<double> w, const Dispersion& disp) {
    std::vector<double> om(k.size());
    std::transform(k.begin(), k.end(), om.begin(), disp.omega);
    const double floor = *std::min_element(om.begin(), om.end());
    return ModeGrid(std::move(k), std::move(w), std::move(om), floor, disp.name, disp.growth);
}

} // namespace

ModeGrid ModeGrid::uniform(double k_min, double k_max, std::size_t count, const Dispersion& disp, Quadrature rule) {
    if (count == 0) throw PreconditionError("uniform grid: count must be >= 1");
    if (count > 1 && !(k_max > k_min)) throw PreconditionError("uniform grid: k_max must exceed k_min");
    std::vector<double> k(count);
    std::vector<double> w;
    if (rule == Quadrature::trapezoid) {
        const double h = count > 1 ? (k_max - k_min) / static_cast<double>(count - 1) : 1.0;
        for (std::size_t i = 0; i < count; ++i) k[i] = k_min + h * static_cast<double>(i);
        if (count > 1) k.back() = k_max;
        w = trapezoid_weights(k);
    } else {
        const double h = (count > 1 || k_max > k_min) ? (k_max - k_min) / static_cast<double>(count) : 1.0;
        for (std::size_t i = 0; i < count; ++i) k[i] = k_min + h * (static_cast<double>(i) + 0.5);
        w.assign(count, h);
    }
    return assemble(std::move(k), std::move(w), disp);
}

ModeGrid ModeGrid::geometric(double k_min, double k_max, std::size_t count, const Dispersion& disp) {
    if (!(k_min > 0) || !(k_max > k_min) || count < 2)
        throw PreconditionError("geometric grid: need 0 < k_min < k_max and count >= 2");
    std::vector<double> k(count);
    const double ratio = std::log(k_max / k_min) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) k[i] = k_min * std::exp(ratio * static_cast<double>(i));
    k.front() = k_min;
    k.back() = k_max;
    auto w = trapezoid_weights(k);
    return assemble(std::move(k), std::move(w), disp);
}

ModeGrid ModeGrid::prefix(std::size_t count) const {
    if (count == 0 || count > size()) throw PreconditionError("ModeGrid::prefix: count out of range");
    std::vector<double> k(nodes_.begin(), nodes_.begin() + static_cast<std::ptrdiff_t>(count));
    std::vector<double> w(weights_.begin(), weights_.begin() + static_cast<std::ptrdiff_t>(count));
    std::vector<double> om(omega_.begin(), omega_.begin() + static_cast<std::ptrdiff_t>(count));
    return ModeGrid(std::move(k), std::move(w), std::move(om), mass_floor_, dispersion_name_, omega_growth_);
}

std::size_t ModeGrid::count_below(double cutoff) const {
    return static_cast<std::size_t>(std::upper_bound(nodes_.begin(), nodes_.end(), cutoff) - nodes_.begin());
}

bool ModeGrid::is_prefix_of(const ModeGrid& other) const {
    if (size() > other.size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
        const double tol = 1e-12 * std::max(1.0, std::abs(nodes_[i]));
        if (std::abs(nodes_[i] - other.nodes_[i]) > tol) return false;
    }
    return true;
}

FormFactor FormFactor::from_function(const ModeGrid& grid, const std::function<cplx(double, double)>& fn,
                                     TailSpec tail, std::string label) {
    FormFactor f{CVector(static_cast<Eigen::Index>(grid.size())), tail, std::move(label)};
    for (std::size_t i = 0; i < grid.size(); ++i)
        f.values(static_cast<Eigen::Index>(i)) = fn(grid.nodes()[i], grid.omega()[i]);
    return f;
}

FormFactor FormFactor::omega_power(const ModeGrid& grid, double power, double omega_growth, cplx coupling,
                                   std::string label) {
    if (label.empty()) label = "omega^" + std::to_string(power);
    return from_function(
        grid, [&](double, double om) { return coupling * std::pow(om, power); },
        TailSpec{power * omega_growth, omega_growth}, std::move(label));
}

FormFactor FormFactor::k_power(const ModeGrid& grid, double power, double omega_growth, cplx coupling,
                               std::string label) {
    if (label.empty()) label = "k^" + std::to_string(power);
    return from_function(
        grid, [&](double k, double) { return coupling * std::pow(k, power); }, TailSpec{power, omega_growth},
        std::move(label));
}

FormFactor FormFactor::zero(const ModeGrid& grid, std::string label) {
    return FormFactor{CVector::Zero(static_cast<Eigen::Index>(grid.size())), TailSpec{-1e9, 1.0}, std::move(label)};
}

const char* to_string(CaseLabel c) {
    switch (c) {
    case CaseLabel::Case0: return "Case0";
    case CaseLabel::Case1: return "Case1";
    case CaseLabel::Case2: return "Case2";
    case CaseLabel::Case3: return "Case3";
    }
    return "?";
}

void check_on_grid(const FormFactor& f, const ModeGrid& grid, const char* where) {
    if (f.size() != grid.size())
        throw StructuralError(std::string(where) + ": form factor '" + f.label + "' has " + std::to_string(f.size()) +
                              " values but the grid has " + std::to_string(grid.size()) + " nodes");
}

double scale_norm(const FormFactor& f, double s, const ModeGrid& grid) {
    check_on_grid(f, grid, "scale_norm");
    double acc = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        acc += grid.weights()[i] * std::pow(grid.omega()[i], s) * std::norm(f.values(static_cast<Eigen::Index>(i)));
    return std::sqrt(acc);
}

cplx pairing(const FormFactor& f, const FormFactor& g, const ModeGrid& grid) {
    check_on_grid(f, grid, "pairing");
    check_on_grid(g, grid, "pairing");
    cplx acc = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        acc += grid.weights()[i] * std::conj(f.values(ii)) * g.values(ii);
    }
    return acc;
}

namespace {

// int |f|^2 omega^-p converges at infinity iff 2 alpha - p beta < -1
bool tail_converges(const TailSpec& t, int p) { return 2.0 * t.f_exponent - p * t.omega_exponent < -1.0; }

CaseLabel case_from(const bool conv[3]) {
    if (conv[0]) return CaseLabel::Case0;
    if (conv[1]) return CaseLabel::Case1;
    if (conv[2]) return CaseLabel::Case2;
    return CaseLabel::Case3;
}

} // namespace

CaseLabel analytic_case(const TailSpec& tail) {
    const bool conv[3] = {tail_converges(tail, 0), tail_converges(tail, 1), tail_converges(tail, 2)};
    return case_from(conv);
}

DivergenceReport divergence_report(const FormFactor& f, const ModeGrid& grid, const DivergenceOptions& opts) {
    check_on_grid(f, grid, "classify_divergence");
    if (opts.rungs < 3) throw PreconditionError("classify_divergence: need at least 3 ladder rungs");

    std::vector<double> cutoffs(opts.rungs);
    for (std::size_t r = 0; r < opts.rungs; ++r)
        cutoffs[r] = grid.extent() * std::ldexp(1.0, -static_cast<int>(opts.rungs - 1 - r));
    if (grid.count_below(cutoffs.front()) < 2)
        throw PreconditionError("classify_divergence: grid too short for the nested sub-grid ladder");

    DivergenceReport rep{analytic_case(f.tail), CaseLabel::Case3, {}};
    bool conv[3] = {false, false, false};
    for (int p = 0; p < 3; ++p) {
        PartialIntegralFit fit;
        fit.omega_power = p;
        fit.cutoffs = cutoffs;
        fit.analytic_convergent = tail_converges(f.tail, p);

        // running partial sums along the nodes, sampled at each cutoff
        std::size_t i = 0;
        double acc = 0.0;
        for (double c : cutoffs) {
            const std::size_t end = grid.count_below(c);
            for (; i < end; ++i)
                acc += grid.weights()[i] * std::norm(f.values(static_cast<Eigen::Index>(i))) *
                       std::pow(grid.omega()[i], -p);
            fit.values.push_back(acc);
        }

        const double last = fit.values.back();
        const double prev = fit.values[fit.values.size() - 2];
        if (last == 0.0) {
            fit.last_relative_increment = 0.0;
            fit.verdict = PartialIntegralFit::Verdict::convergent;
        } else {
            fit.last_relative_increment = std::abs(last - prev) / std::abs(last);
            fit.fitted_exponent = linalg::log_log_slope(fit.cutoffs, fit.values);
            if (fit.last_relative_increment < opts.convergent_relative)
                fit.verdict = PartialIntegralFit::Verdict::convergent;
            else if (fit.fitted_exponent > opts.divergent_exponent)
                fit.verdict = PartialIntegralFit::Verdict::divergent;
            else
                fit.verdict = PartialIntegralFit::Verdict::inconclusive;
        }
        conv[p] = fit.verdict == PartialIntegralFit::Verdict::convergent;
        rep.fits.push_back(std::move(fit));
    }
    rep.empirical = case_from(conv);
    return rep;
}

CaseLabel classify_divergence(const FormFactor& f, const ModeGrid& grid, const DivergenceOptions& opts) {
    const DivergenceReport rep = divergence_report(f, grid, opts);
    for (const auto& fit : rep.fits) {
        const bool measured_conv = fit.verdict == PartialIntegralFit::Verdict::convergent;
        const bool measured_div = fit.verdict == PartialIntegralFit::Verdict::divergent;
        if ((fit.analytic_convergent && !measured_conv) || (!fit.analytic_convergent && !measured_div)) {
            throw ClassificationConflict("classify_divergence: '" + f.label + "' integral of |f|^2 omega^-" +
                                         std::to_string(fit.omega_power) + " declared " +
                                         (fit.analytic_convergent ? "convergent" : "divergent") +
                                         " but measured exponent " + std::to_string(fit.fitted_exponent) +
                                         ", last relative increment " + std::to_string(fit.last_relative_increment));
        }
    }
    return rep.analytic;
}

FormFactor truncate(const FormFactor& f, double cutoff, const ModeGrid& grid) {
    check_on_grid(f, grid, "truncate");
    if (cutoff < grid.nodes().front())
        throw PreconditionError("truncate: cutoff " + std::to_string(cutoff) + " below the first node");
    FormFactor out = f;
    for (std::size_t i = grid.count_below(cutoff); i < grid.size(); ++i) out.values(static_cast<Eigen::Index>(i)) = 0.0;
    out.label = f.label + "|<=" + std::to_string(cutoff);
    return out;
}

CutoffFamily make_cutoff_family(const FormFactor& base, std::vector<double> cutoffs, const ModeGrid& grid) {
    for (std::size_t n = 1; n < cutoffs.size(); ++n)
        if (!(cutoffs[n] > cutoffs[n - 1])) throw PreconditionError("cutoff family: cutoffs must increase");
    CutoffFamily fam{base, std::move(cutoffs), {}};
    fam.realized.reserve(fam.cutoffs.size());
    for (double c : fam.cutoffs) fam.realized.push_back(truncate(base, c, grid));
    return fam;
}

IndependenceReport h_independence_margin(std::span<const FormFactor> factors, std::span<const ModeGrid> grids,
                                         double growth_threshold) {
    if (factors.empty()) throw PreconditionError("h_independence_margin: need at least one form factor");
    if (grids.empty()) throw PreconditionError("h_independence_margin: need at least one grid");
    for (std::size_t r = 1; r < grids.size(); ++r)
        if (grids[r].size() <= grids[r - 1].size() || !grids[r - 1].is_prefix_of(grids[r]))
            throw PreconditionError("h_independence_margin: grids are not nested");
    for (const auto& f : factors) check_on_grid(f, grids.back(), "h_independence_margin");

    IndependenceReport rep;
    const auto n = static_cast<Eigen::Index>(factors.size());
    for (const auto& g : grids) {
        CMatrix gram(n, n);
        const auto m = static_cast<Eigen::Index>(g.size());
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index l = 0; l < n; ++l) {
                cplx acc = 0.0;
                for (Eigen::Index i = 0; i < m; ++i)
                    acc += g.weights()[static_cast<std::size_t>(i)] * std::conj(factors[j].values(i)) * factors[l].values(i);
                gram(j, l) = acc;
            }
        const auto eig = linalg::hermitian_eigen(gram, 1e-9);
        rep.extents.push_back(g.extent());
        // rank-deficient Gram matrices come out at rounding level, not exactly zero
        const double top = eig.values(eig.values.size() - 1);
        rep.min_eigenvalues.push_back(eig.values(0) <= 1e-12 * std::max(top, 0.0) ? 0.0 : eig.values(0));
    }

    bool increasing = rep.min_eigenvalues.front() > 0.0;
    for (std::size_t r = 1; r < rep.min_eigenvalues.size(); ++r)
        increasing = increasing && rep.min_eigenvalues[r] > rep.min_eigenvalues[r - 1];
    if (increasing && rep.extents.size() >= 2 && rep.extents.front() > 0) {
        rep.fitted_exponent = linalg::log_log_slope(rep.extents, rep.min_eigenvalues);
        rep.independent = rep.fitted_exponent > growth_threshold;
    }
    return rep;
}

} // namespace gsbr::modes
