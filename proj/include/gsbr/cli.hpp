#pragma once

// Declarative run configuration, study orchestration and report emission.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsbr/linalg.hpp"

namespace gsbr::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;

/// Thrown for malformed or out-of-range configuration; maps to exit status 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModelSection {
    std::string preset = "sigma_x";
    std::size_t atoms = 1;
    std::vector<double> eta;
    double coupling = 1.0;
    double factor_exponent = -0.25;
    std::vector<double> positions;
    bool operator==(const ModelSection&) const = default;
};

struct GridSection {
    double k_min = 0.0;
    double k_max = 16.0;
    std::size_t nodes = 9;
    std::string spacing = "uniform";          // uniform | geometric
    std::string dispersion = "relativistic";  // relativistic | linear | constant
    double mass = 1.0;                        // relativistic mass, or the constant value
    std::string quadrature = "trapezoid";     // trapezoid | midpoint (uniform spacing only)
    bool operator==(const GridSection&) const = default;
};

struct TruncationSection {
    std::size_t n_max = 3;
    std::size_t size_cap = 20000;
    bool operator==(const TruncationSection&) const = default;
};

struct DressSection {
    std::vector<std::size_t> n_max{10, 20, 40};
    bool operator==(const DressSection&) const = default;
};

struct VanishSection {
    std::vector<double> s{0.5, 1.0};
    std::vector<cplx> z; // empty: -2^n, n = 3..10
    bool operator==(const VanishSection&) const = default;
};

struct RunConfig {
    ModelSection model;
    GridSection grid;
    TruncationSection truncation;
    std::vector<double> cutoffs;             // empty: first min(8, nodes - 1) grid nodes
    std::optional<double> reference_cutoff;  // empty: last grid node
    std::vector<cplx> z{{-3, 0}, {-10, 0}, {-30, 0}, {-1, 5}};
    std::optional<double> z0;                // empty: -1, or below the spectrum of H_free
    std::vector<std::string> studies;
    bool require_assumption = false;
    std::string output = "gsbr_out";
    std::uint64_t seed = 0;
    DressSection dress;
    VanishSection vanish;
    bool operator==(const RunConfig&) const = default;
};

const std::vector<std::string>& study_names();

/// Parses JSON text; unknown keys at any level and out-of-range values raise ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
/// Canonical JSON form (every field explicit); parse_config(to_json_text(c)) == c.
std::string to_json_text(const RunConfig& cfg);

struct StudyResult {
    std::string study;
    bool pass = true;
    std::vector<std::string> failures; // names of violated invariants
};

struct RunResult {
    int exit_code = kExitPass;
    std::vector<StudyResult> studies;
    std::string message; // config error text when exit_code == 2
};

/// Executes the selected studies and writes <study>.csv, <study>.json and summary.txt under cfg.output.
RunResult run(const RunConfig& cfg);

/// Column contracts of every CSV artifact and the keys of every JSON report.
std::string report_schema();
/// CSV header columns for a study (the first non-comment line of <study>.csv).
const std::vector<std::string>& csv_columns(const std::string& study);

} // namespace gsbr::cli
