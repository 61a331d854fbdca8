// gsbr: run configured studies or print the report schema.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "gsbr/cli.hpp"

int main(int argc, char** argv) {
    using namespace gsbr::cli;
    CLI::App app{"Generalized spin-boson toolkit: truncated Fock-space studies"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "execute the studies selected in a JSON config");
    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    std::vector<std::string> studies;
    run_cmd->add_option("config", config_path, "run configuration (JSON)")->required();
    run_cmd->add_option("--out", out_dir, "output directory (overrides 'output')");
    auto* seed_opt = run_cmd->add_option("--seed", seed, "seed for randomized checks (overrides 'seed')");
    run_cmd->add_option("--study", studies, "study to run, repeatable (overrides 'studies')")
        ->check(CLI::IsMember(study_names()));

    auto* schema_cmd = app.add_subcommand("schema", "print CSV column contracts and JSON report keys");
    auto* dump_cmd = app.add_subcommand("config", "print the canonical form of a config with defaults filled in");
    std::string dump_path;
    dump_cmd->add_option("config", dump_path, "run configuration (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfigError;
    }

    if (schema_cmd->parsed()) {
        std::cout << report_schema();
        return kExitPass;
    }

    try {
        if (dump_cmd->parsed()) {
            std::cout << to_json_text(load_config(dump_path));
            return kExitPass;
        }
        RunConfig cfg = load_config(config_path);
        if (!out_dir.empty()) cfg.output = out_dir;
        if (seed_opt->count() > 0) cfg.seed = seed;
        if (!studies.empty()) cfg.studies = studies;

        const RunResult res = run(cfg);
        if (res.exit_code == kExitConfigError) {
            std::cerr << "gsbr: " << res.message << "\n";
            return res.exit_code;
        }
        for (const auto& s : res.studies) {
            std::cout << (s.pass ? "PASS " : "FAIL ") << s.study << "\n";
            for (const auto& f : s.failures) std::cout << "  - " << f << "\n";
        }
        if (res.studies.empty()) std::cout << "no studies selected\n";
        return res.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "gsbr: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "gsbr: " << e.what() << "\n";
        return kExitCheckFailed;
    }
}
