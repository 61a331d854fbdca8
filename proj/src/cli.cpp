#include "gsbr/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gsbr/error.hpp"
#include "gsbr/model.hpp"
#include "gsbr/renorm.hpp"
#include "gsbr/resolvent.hpp"

namespace gsbr::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------- parsing

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, _] : obj.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
        if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <typename T>
void read(const json& obj, const char* key, const std::string& where, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

cplx parse_complex(const json& v, const std::string& where) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw ConfigError(where + ": complex numbers are written as a number or [re, im]");
}

std::vector<cplx> parse_complex_list(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where + ": expected a list");
    std::vector<cplx> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(parse_complex(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

void require(bool cond, const std::string& msg) {
    if (!cond) throw ConfigError(msg);
}

void check_ranges(const RunConfig& c) {
    const auto presets = model::preset_names();
    require(std::find(presets.begin(), presets.end(), c.model.preset) != presets.end(),
            "model.preset: unknown preset '" + c.model.preset + "'");
    require(c.model.atoms >= 1 && c.model.atoms <= 6, "model.atoms must lie in [1, 6]");
    require(std::isfinite(c.model.coupling) && std::isfinite(c.model.factor_exponent),
            "model: coupling and factor_exponent must be finite");
    require(c.grid.nodes >= 1 && c.grid.nodes <= 4096, "grid.nodes must lie in [1, 4096]");
    require(std::isfinite(c.grid.k_min) && std::isfinite(c.grid.k_max) && c.grid.k_min >= 0.0,
            "grid: k_min must be >= 0 and finite");
    require(c.grid.nodes == 1 || c.grid.k_max > c.grid.k_min, "grid: k_max must exceed k_min");
    require(c.grid.spacing == "uniform" || c.grid.spacing == "geometric", "grid.spacing: uniform | geometric");
    require(c.grid.dispersion == "relativistic" || c.grid.dispersion == "linear" || c.grid.dispersion == "constant",
            "grid.dispersion: relativistic | linear | constant");
    require(c.grid.quadrature == "trapezoid" || c.grid.quadrature == "midpoint", "grid.quadrature: trapezoid | midpoint");
    require(c.grid.mass > 0.0 && std::isfinite(c.grid.mass), "grid.mass must be positive");
    require(c.truncation.n_max >= 1 && c.truncation.n_max <= 200, "truncation.n_max must lie in [1, 200]");
    require(c.truncation.size_cap >= 1 && c.truncation.size_cap <= 200000, "truncation.size_cap must lie in [1, 200000]");
    for (std::size_t i = 1; i < c.cutoffs.size(); ++i)
        require(c.cutoffs[i] > c.cutoffs[i - 1], "cutoffs must be strictly increasing");
    require(!c.z.empty(), "z: need at least one evaluation point");
    for (cplx z : c.z) require(std::isfinite(z.real()) && std::isfinite(z.imag()), "z: values must be finite");
    if (c.z0) require(std::isfinite(*c.z0), "z0 must be finite");
    std::set<std::string> seen;
    for (const auto& s : c.studies) {
        const auto& names = study_names();
        require(std::find(names.begin(), names.end(), s) != names.end(), "studies: unknown study '" + s + "'");
        require(seen.insert(s).second, "studies: '" + s + "' listed twice");
    }
    require(!c.output.empty(), "output must be a non-empty path");
    for (std::size_t n : c.dress.n_max) require(n >= 1 && n <= 200, "dress.n_max entries must lie in [1, 200]");
    for (std::size_t i = 1; i < c.dress.n_max.size(); ++i)
        require(c.dress.n_max[i] > c.dress.n_max[i - 1], "dress.n_max must be strictly increasing");
    for (double s : c.vanish.s) require(s >= 0.0 && s < 2.0, "vanish.s entries must lie in [0, 2)");
    for (cplx z : c.vanish.z) require(z.imag() <= 0.0, "vanish.z: points must satisfy Im z <= 0");
    if (std::find(c.studies.begin(), c.studies.end(), "dress") != c.studies.end())
        require(c.model.preset == "van_hove", "studies: 'dress' needs the van_hove preset");
}

// ---------------------------------------------------------------- formatting

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

void write_csv(const std::filesystem::path& p, const Table& t) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << num(r[i]);
        os << '\n';
    }
}

ordered_json jnum(double x) {
    if (std::isfinite(x)) return x;
    return std::isnan(x) ? ordered_json("nan") : ordered_json(x > 0 ? "inf" : "-inf");
}

// ---------------------------------------------------------------- model construction

struct Built {
    model::ModelSpec spec;
    double z0;
};

modes::ModeGrid build_grid(const GridSection& g) {
    const modes::Dispersion disp = g.dispersion == "relativistic" ? modes::Dispersion::relativistic(g.mass)
                                   : g.dispersion == "linear"     ? modes::Dispersion::linear()
                                                                  : modes::Dispersion::constant(g.mass);
    if (g.spacing == "geometric") return modes::ModeGrid::geometric(g.k_min, g.k_max, g.nodes, disp);
    return modes::ModeGrid::uniform(g.k_min, g.k_max, g.nodes, disp,
                                    g.quadrature == "midpoint" ? modes::Quadrature::midpoint
                                                               : modes::Quadrature::trapezoid);
}

model::PresetParams preset_params(const ModelSection& m) {
    model::PresetParams p;
    p.atoms = m.atoms;
    p.eta = m.eta;
    p.coupling = m.coupling;
    p.factor_exponent = m.factor_exponent;
    p.positions = m.positions;
    return p;
}

Built build(const RunConfig& c, std::size_t n_max) {
    try {
        const auto grid = build_grid(c.grid);
        const auto basis = fock::build_basis(grid.size(), n_max, c.truncation.size_cap);
        auto spec = model::make_preset(c.model.preset, preset_params(c.model), grid, basis);
        if (spec.total_dim() > c.truncation.size_cap)
            throw PreconditionError("total dimension " + std::to_string(spec.total_dim()) + " exceeds size_cap");
        const double z0 = c.z0.value_or(resolvent::suggest_z0(spec));
        return {std::move(spec), z0};
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("model construction: ") + e.what());
    }
}

// ---------------------------------------------------------------- studies

struct StudyOutput {
    StudyResult result;
    Table table;
    ordered_json metrics = ordered_json::object();
};

StudyOutput make_output(const std::string& study) {
    StudyOutput o;
    o.result.study = study;
    o.table.columns = csv_columns(study);
    return o;
}

using StudyFn = std::function<StudyOutput(const RunConfig&, const Built&)>;

void fail(StudyOutput& out, std::string why) {
    out.result.pass = false;
    out.result.failures.push_back(std::move(why));
}

StudyOutput study_validate(const RunConfig& c, const Built& b) {
    StudyOutput out = make_output("validate");
    const auto rep = model::validate_interaction(b.spec.spin);
    for (std::size_t j = 0; j < rep.normal_residual.size(); ++j)
        out.table.rows.push_back({0.0, static_cast<double>(j + 1), 0.0, rep.normal_residual[j], model::kAssumptionTol,
                                  rep.normal[j] ? 1.0 : 0.0});
    for (const auto& pr : rep.commutators)
        out.table.rows.push_back({1.0, static_cast<double>(pr.j + 1), static_cast<double>(pr.l + 1), pr.residual,
                                  model::kAssumptionTol, pr.residual < model::kAssumptionTol ? 1.0 : 0.0});
    out.table.rows.push_back({2.0, 0.0, 0.0, rep.stacked_min_singular, model::kAssumptionTol,
                              rep.joint_kernel_trivial ? 1.0 : 0.0});
    out.metrics["verdict"] = rep.verdict;
    out.metrics["failures"] = rep.failures();
    ordered_json cases = ordered_json::array();
    for (const auto& f : b.spec.factors) cases.push_back(modes::to_string(modes::analytic_case(f.tail)));
    out.metrics["analytic_cases"] = cases;
    if (rep.verdict) {
        const auto eig = model::common_eigenbasis(b.spec.spin, c.seed);
        const auto d = eig.unitary.rows();
        out.metrics["eigenbasis_unitarity_residual"] =
            jnum(linalg::op_norm(eig.unitary.adjoint() * eig.unitary - CMatrix::Identity(d, d)));
    }
    if (c.require_assumption && !rep.verdict) fail(out, "interaction assumption: " + rep.failures());
    return out;
}

StudyOutput study_spectrum(const RunConfig&, const Built& b) {
    StudyOutput out = make_output("spectrum");
    const CMatrix h = model::assemble_hamiltonian(b.spec).matrix;
    const double herm = (h - h.adjoint()).cwiseAbs().maxCoeff();
    const RVector ev = linalg::hermitian_eigen(h, 1e-12).values;
    RVector fe = model::free_eigen(b.spec).values;
    std::sort(fe.begin(), fe.end());
    for (Eigen::Index i = 0; i < ev.size(); ++i) out.table.rows.push_back({static_cast<double>(i), ev(i), fe(i)});
    out.metrics["dimension"] = ev.size();
    out.metrics["ground_energy"] = jnum(ev(0));
    out.metrics["free_ground_energy"] = jnum(fe(0));
    out.metrics["hermiticity_residual"] = jnum(herm);
    if (herm != 0.0) fail(out, "hermiticity: assembled H differs from its adjoint by " + num(herm));
    return out;
}

StudyOutput study_resolvent_check(const RunConfig& c, const Built& b) {
    StudyOutput out = make_output("resolvent-check");
    const auto ctx = resolvent::make_context(b.spec, b.z0);
    const CMatrix h = model::assemble_hamiltonian(b.spec).matrix;
    const auto n = h.rows();
    double worst_rel = 0.0, worst_adj = 0.0, worst_id = 0.0;
    std::vector<CMatrix> res;
    for (cplx z : c.z) res.push_back(resolvent::krein_resolvent(ctx, z));
    for (std::size_t i = 0; i < c.z.size(); ++i) {
        const cplx z = c.z[i];
        const CMatrix direct = resolvent::resolvent_direct(h, z);
        const double rel = linalg::op_norm(res[i] - direct) / linalg::op_norm(direct);
        const double adj = linalg::op_norm(res[i].adjoint() - resolvent::krein_resolvent(ctx, std::conj(z)));
        double ident = 0.0;
        if (c.z.size() > 1) {
            const std::size_t j = (i + 1) % c.z.size();
            ident = linalg::op_norm(res[i] - res[j] - (z - c.z[j]) * res[i] * res[j]);
        }
        const auto margin = resolvent::invertibility_margin(ctx, z);
        out.table.rows.push_back({z.real(), z.imag(), rel, adj, ident, margin.value, resolvent::g_norm(ctx, z)});
        worst_rel = std::max(worst_rel, rel);
        worst_adj = std::max(worst_adj, adj);
        worst_id = std::max(worst_id, ident);
    }
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> nd;
    CVector psi(n);
    for (Eigen::Index i = 0; i < n; ++i) psi(i) = cplx(nd(rng), nd(rng));
    const double apply_err = (resolvent::apply_h(ctx, psi) - h * psi).norm() / std::max(1.0, (h * psi).norm());

    out.metrics["z0"] = jnum(b.z0);
    out.metrics["max_krein_direct_rel_error"] = jnum(worst_rel);
    out.metrics["max_adjoint_residual"] = jnum(worst_adj);
    out.metrics["max_resolvent_identity_residual"] = jnum(worst_id);
    out.metrics["apply_h_rel_error"] = jnum(apply_err);
    if (!(worst_rel < 1e-8)) fail(out, "block resolvent formula: relative error " + num(worst_rel) + " >= 1e-8");
    if (!(worst_adj < 1e-10)) fail(out, "self-adjointness: ||R_z* - R_conj(z)|| = " + num(worst_adj) + " >= 1e-10");
    if (!(worst_id < 1e-10)) fail(out, "first resolvent identity: residual " + num(worst_id) + " >= 1e-10");
    if (!(apply_err < 1e-11)) fail(out, "operator application: relative error " + num(apply_err) + " >= 1e-11");
    return out;
}

std::vector<double> cutoff_schedule(const RunConfig& c, const modes::ModeGrid& grid) {
    if (!c.cutoffs.empty()) return c.cutoffs;
    const std::size_t count = std::min<std::size_t>(8, grid.size() > 1 ? grid.size() - 1 : 0);
    return {grid.nodes().begin(), grid.nodes().begin() + static_cast<std::ptrdiff_t>(count)};
}

StudyOutput study_converge(const RunConfig& c, const Built& b) {
    StudyOutput out = make_output("converge");
    const auto cutoffs = cutoff_schedule(c, b.spec.grid);
    if (cutoffs.empty()) {
        fail(out, "cutoff schedule: grid has a single node, nothing to compare");
        return out;
    }
    const auto rep = renorm::convergence_study(b.spec, cutoffs, c.z, c.reference_cutoff, b.z0);
    for (const auto& r : rep.rungs)
        for (std::size_t iz = 0; iz < rep.zs.size(); ++iz) {
            const double ratio = r.h_minus1_dist > 0 ? r.resolvent_dist[iz] / r.h_minus1_dist : 0.0;
            out.table.rows.push_back({r.cutoff, rep.zs[iz].real(), rep.zs[iz].imag(), r.h_minus1_dist,
                                      r.resolvent_dist[iz], r.t_dist, ratio});
        }
    out.metrics["reference_cutoff"] = jnum(rep.reference_cutoff);
    out.metrics["reference_krein_error"] = jnum(rep.reference_krein_error);
    out.metrics["strictly_decreasing"] = rep.strictly_decreasing;
    out.metrics["t_decreasing"] = rep.t_decreasing;
    ordered_json spreads = ordered_json::array(), consts = ordered_json::array();
    for (double s : rep.ratio_spread) spreads.push_back(jnum(s));
    for (double k : rep.fitted_constant) consts.push_back(jnum(k));
    out.metrics["ratio_spread"] = spreads;
    out.metrics["fitted_constant"] = consts;
    out.metrics["verdict"] = rep.verdict;
    if (!rep.strictly_decreasing) fail(out, "norm-resolvent convergence: distances are not strictly decreasing");
    for (std::size_t iz = 0; iz < rep.ratio_spread.size(); ++iz)
        if (!(rep.ratio_spread[iz] < renorm::kRatioSpreadLimit))
            fail(out, "norm-resolvent convergence: ratio spread " + num(rep.ratio_spread[iz]) + " >= 3 at z #" +
                          std::to_string(iz + 1));
    if (!(rep.reference_krein_error < 1e-8)) fail(out, "block resolvent formula: reference error " + num(rep.reference_krein_error));
    return out;
}

StudyOutput study_dress(const RunConfig& c, const Built&) {
    StudyOutput out = make_output("dress");
    std::vector<double> residuals;
    for (std::size_t n : c.dress.n_max) {
        const auto b = build(c, n);
        const auto rep = renorm::van_hove_dressing(b.spec);
        out.table.rows.push_back({static_cast<double>(n), rep.self_energy, rep.ground_energy, rep.unitarity_residual,
                                  rep.conjugation_residual, rep.spectral_distance});
        residuals.push_back(rep.conjugation_residual);
        out.metrics["self_energy"] = jnum(rep.self_energy);
        if (!(rep.unitarity_residual < 1e-12))
            fail(out, "dressing unitarity: residual " + num(rep.unitarity_residual) + " at n_max " + std::to_string(n));
    }
    bool mono = true;
    for (std::size_t i = 1; i < residuals.size(); ++i) mono = mono && residuals[i] < residuals[i - 1];
    out.metrics["conjugation_monotone"] = mono;
    if (!mono) fail(out, "dressing: low-sector conjugation residual does not decrease with n_max");
    return out;
}

StudyOutput study_vanish(const RunConfig& c, const Built& b) {
    StudyOutput out = make_output("vanish");
    std::vector<cplx> zs = c.vanish.z;
    if (zs.empty())
        for (int n = 3; n <= 10; ++n) zs.emplace_back(-std::ldexp(1.0, n), 0.0);
    const auto ctx = resolvent::make_context(b.spec, b.z0);
    ordered_json fits = ordered_json::array();
    for (double s : c.vanish.s) {
        const auto rep = resolvent::resolvent_vanishing_study(ctx, s, zs);
        for (const auto& r : rep.rows)
            out.table.rows.push_back({s, r.z.real(), r.z.imag(), r.dist, r.measured, r.bound});
        fits.push_back({{"s", jnum(s)},
                        {"fitted_exponent", jnum(rep.fitted_exponent)},
                        {"expected_exponent", jnum(rep.expected_exponent)},
                        {"bounded", rep.bounded},
                        {"decaying", rep.decaying}});
        if (!rep.bounded) fail(out, "resolvent vanishing: measured norm exceeds the spectral bound at s = " + num(s));
        if (!rep.decaying) fail(out, "resolvent vanishing: norms do not decrease at s = " + num(s));
    }
    out.metrics["fits"] = fits;
    return out;
}

const std::map<std::string, StudyFn>& registry() {
    static const std::map<std::string, StudyFn> r{
        {"converge", study_converge},   {"dress", study_dress},   {"resolvent-check", study_resolvent_check},
        {"spectrum", study_spectrum},   {"validate", study_validate}, {"vanish", study_vanish},
    };
    return r;
}

const std::map<std::string, std::vector<std::string>>& columns_table() {
    static const std::map<std::string, std::vector<std::string>> t{
        {"validate", {"check", "index_j", "index_l", "value", "threshold", "pass"}},
        {"spectrum", {"index", "eigenvalue", "free_eigenvalue"}},
        {"resolvent-check",
         {"z_re", "z_im", "krein_direct_rel_error", "adjoint_residual", "resolvent_identity_residual",
          "invertibility_margin", "g_norm"}},
        {"converge", {"Lambda", "z_re", "z_im", "h_minus1_dist", "resolvent_dist", "t_dist", "ratio"}},
        {"dress", {"n_max", "self_energy", "ground_energy", "unitarity_residual", "conjugation_residual",
                   "spectral_distance"}},
        {"vanish", {"s", "z_re", "z_im", "dist", "norm_measured", "norm_bound"}},
    };
    return t;
}

const std::map<std::string, std::vector<std::string>>& metric_keys() {
    static const std::map<std::string, std::vector<std::string>> t{
        {"validate", {"verdict", "failures", "analytic_cases", "eigenbasis_unitarity_residual (when verdict holds)"}},
        {"spectrum", {"dimension", "ground_energy", "free_ground_energy", "hermiticity_residual"}},
        {"resolvent-check",
         {"z0", "max_krein_direct_rel_error", "max_adjoint_residual", "max_resolvent_identity_residual",
          "apply_h_rel_error"}},
        {"converge", {"reference_cutoff", "reference_krein_error", "strictly_decreasing", "t_decreasing",
                      "ratio_spread", "fitted_constant", "verdict"}},
        {"dress", {"self_energy", "conjugation_monotone"}},
        {"vanish", {"fits[{s, fitted_exponent, expected_exponent, bounded, decaying}]"}},
    };
    return t;
}

ordered_json complex_json(cplx z) { return ordered_json::array({jnum(z.real()), jnum(z.imag())}); }

ordered_json complex_list_json(const std::vector<cplx>& zs) {
    ordered_json a = ordered_json::array();
    for (cplx z : zs) a.push_back(complex_json(z));
    return a;
}

} // namespace

const std::vector<std::string>& study_names() {
    static const std::vector<std::string> names{"validate", "spectrum", "resolvent-check", "converge", "dress", "vanish"};
    return names;
}

const std::vector<std::string>& csv_columns(const std::string& study) {
    const auto& t = columns_table();
    const auto it = t.find(study);
    if (it == t.end()) throw ConfigError("unknown study '" + study + "'");
    return it->second;
}

RunConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    reject_unknown(root, "config",
                   {"model", "grid", "truncation", "cutoffs", "reference_cutoff", "z", "z0", "studies",
                    "require_assumption", "output", "seed", "dress", "vanish"});
    RunConfig c;
    if (root.contains("model")) {
        const auto& m = root["model"];
        reject_unknown(m, "model", {"preset", "atoms", "eta", "coupling", "factor_exponent", "positions"});
        read(m, "preset", "model", c.model.preset);
        read(m, "atoms", "model", c.model.atoms);
        read(m, "eta", "model", c.model.eta);
        read(m, "coupling", "model", c.model.coupling);
        read(m, "factor_exponent", "model", c.model.factor_exponent);
        read(m, "positions", "model", c.model.positions);
    }
    if (root.contains("grid")) {
        const auto& g = root["grid"];
        reject_unknown(g, "grid", {"k_min", "k_max", "nodes", "spacing", "dispersion", "mass", "quadrature"});
        read(g, "k_min", "grid", c.grid.k_min);
        read(g, "k_max", "grid", c.grid.k_max);
        read(g, "nodes", "grid", c.grid.nodes);
        read(g, "spacing", "grid", c.grid.spacing);
        read(g, "dispersion", "grid", c.grid.dispersion);
        read(g, "mass", "grid", c.grid.mass);
        read(g, "quadrature", "grid", c.grid.quadrature);
    }
    if (root.contains("truncation")) {
        const auto& t = root["truncation"];
        reject_unknown(t, "truncation", {"n_max", "size_cap"});
        read(t, "n_max", "truncation", c.truncation.n_max);
        read(t, "size_cap", "truncation", c.truncation.size_cap);
    }
    read(root, "cutoffs", "config", c.cutoffs);
    if (root.contains("reference_cutoff") && !root["reference_cutoff"].is_null()) {
        double r = 0;
        read(root, "reference_cutoff", "config", r);
        c.reference_cutoff = r;
    }
    if (root.contains("z")) c.z = parse_complex_list(root["z"], "z");
    if (root.contains("z0") && !root["z0"].is_null()) {
        double z0 = 0;
        read(root, "z0", "config", z0);
        c.z0 = z0;
    }
    read(root, "studies", "config", c.studies);
    read(root, "require_assumption", "config", c.require_assumption);
    read(root, "output", "config", c.output);
    read(root, "seed", "config", c.seed);
    if (root.contains("dress")) {
        const auto& d = root["dress"];
        reject_unknown(d, "dress", {"n_max"});
        read(d, "n_max", "dress", c.dress.n_max);
    }
    if (root.contains("vanish")) {
        const auto& v = root["vanish"];
        reject_unknown(v, "vanish", {"s", "z"});
        read(v, "s", "vanish", c.vanish.s);
        if (v.contains("z")) c.vanish.z = parse_complex_list(v["z"], "vanish.z");
    }
    check_ranges(c);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

std::string to_json_text(const RunConfig& c) {
    ordered_json j;
    j["model"] = {{"preset", c.model.preset},     {"atoms", c.model.atoms},
                  {"eta", c.model.eta},           {"coupling", c.model.coupling},
                  {"factor_exponent", c.model.factor_exponent}, {"positions", c.model.positions}};
    j["grid"] = {{"k_min", c.grid.k_min},           {"k_max", c.grid.k_max},   {"nodes", c.grid.nodes},
                 {"spacing", c.grid.spacing},       {"dispersion", c.grid.dispersion},
                 {"mass", c.grid.mass},             {"quadrature", c.grid.quadrature}};
    j["truncation"] = {{"n_max", c.truncation.n_max}, {"size_cap", c.truncation.size_cap}};
    j["cutoffs"] = c.cutoffs;
    j["reference_cutoff"] = c.reference_cutoff ? ordered_json(*c.reference_cutoff) : ordered_json(nullptr);
    j["z"] = complex_list_json(c.z);
    j["z0"] = c.z0 ? ordered_json(*c.z0) : ordered_json(nullptr);
    j["studies"] = c.studies;
    j["require_assumption"] = c.require_assumption;
    j["output"] = c.output;
    j["seed"] = c.seed;
    j["dress"] = {{"n_max", c.dress.n_max}};
    j["vanish"] = {{"s", c.vanish.s}, {"z", complex_list_json(c.vanish.z)}};
    return j.dump(2) + "\n";
}

RunResult run(const RunConfig& cfg) {
    RunResult out;
    if (cfg.studies.empty()) return out;

    std::vector<std::string> studies = cfg.studies;
    std::sort(studies.begin(), studies.end());

    std::optional<Built> built_opt;
    try {
        check_ranges(cfg);
        built_opt = build(cfg, cfg.truncation.n_max);
    } catch (const ConfigError& e) {
        out.exit_code = kExitConfigError;
        out.message = e.what();
        return out;
    }

    std::error_code ec;
    std::filesystem::create_directories(cfg.output, ec);
    if (ec) {
        out.exit_code = kExitConfigError;
        out.message = "cannot create output directory " + cfg.output + ": " + ec.message();
        return out;
    }
    const std::filesystem::path dir(cfg.output);
    const Built& built = *built_opt;

    // a required assumption gates every study
    const auto assumption = model::validate_interaction(built.spec.spin);
    const bool gated = cfg.require_assumption && !assumption.verdict;

    for (const auto& name : studies) {
        StudyOutput so = make_output(name);
        if (gated && name != "validate") {
            fail(so, "interaction assumption: " + assumption.failures());
        } else {
            try {
                so = registry().at(name)(cfg, built);
            } catch (const ConfigError& e) {
                out.exit_code = kExitConfigError;
                out.message = e.what();
                return out;
            } catch (const std::exception& e) {
                fail(so, std::string("numerical failure: ") + e.what());
            }
        }
        write_csv(dir / (name + ".csv"), so.table);
        ordered_json report;
        report["study"] = name;
        report["pass"] = so.result.pass;
        report["failures"] = so.result.failures;
        report["metrics"] = so.metrics;
        std::ofstream(dir / (name + ".json"), std::ios::binary) << report.dump(2) << '\n';
        out.studies.push_back(so.result);
    }

    std::ofstream summary(dir / "summary.txt", std::ios::binary);
    summary << "gsbr run summary\n";
    summary << "preset: " << cfg.model.preset << ", modes: " << built.spec.grid.size()
            << ", n_max: " << cfg.truncation.n_max << ", dimension: " << built.spec.total_dim() << "\n";
    for (const auto& s : out.studies) {
        summary << (s.pass ? "PASS " : "FAIL ") << s.study;
        for (const auto& f : s.failures) summary << "\n  - " << f;
        summary << "\n";
        if (!s.pass) out.exit_code = kExitCheckFailed;
    }
    return out;
}

std::string report_schema() {
    std::ostringstream os;
    os << "gsbr report schema, version 1\n\n";
    os << "exit codes: 0 all selected checks pass; 1 a check failed (the failing invariant is named);"
          " 2 usage or configuration error\n";
    os << "artifacts per study: <study>.csv, <study>.json; one summary.txt per run\n";
    os << "numbers are written with 17 significant digits; complex z as z_re, z_im\n\n";
    for (const auto& name : study_names()) {
        os << "[" << name << "]\n  csv: ";
        const auto& cols = csv_columns(name);
        for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
        os << "\n  json: study, pass, failures[], metrics{";
        const auto& keys = metric_keys().at(name);
        for (std::size_t i = 0; i < keys.size(); ++i) os << (i ? ", " : "") << keys[i];
        os << "}\n";
    }
    os << "\nvalidate.check codes: 0 normality of B_j, 1 commutator of B_j and B_l, 2 joint kernel"
          " (smallest singular value of the stacked couplings)\n";
    return os.str();
}

} // namespace gsbr::cli
