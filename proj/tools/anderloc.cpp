#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "anderloc/config.hpp"
#include "anderloc/experiment.hpp"
#include "anderloc/oracles.hpp"

using anderloc::experiment::fmt_double;

int main(int argc, char** argv) {
    CLI::App app{"anderloc - finite-volume localization laboratory"};
    app.require_subcommand(1);

    std::string spec_path;
    int threads = 0;
    std::int64_t seed = -1;

    auto* run_cmd = app.add_subcommand("run", "execute an experiment spec");
    run_cmd->add_option("spec", spec_path, "spec file")->required();
    run_cmd->add_option("--threads", threads, "worker pool cap (overrides spec and env)");
    run_cmd->add_option("--seed", seed, "master seed override");

    auto* val_cmd = app.add_subcommand("validate", "static validation without running");
    val_cmd->add_option("spec", spec_path, "spec file")->required();

    auto* oracle_cmd = app.add_subcommand("oracle", "independent reference computations");
    std::string oracle_kind;
    double o_energy = 2.0, o_eta = 1.0;
    long o_length = 100000;
    int o_replicas = 8;
    std::uint64_t o_seed = 1;
    int o_m = 10;
    std::string o_x, o_y, o_density = "uniform";
    oracle_cmd->add_option("kind", oracle_kind, "lyapunov | free-chain | hausdorff")->required();
    oracle_cmd->add_option("--energy", o_energy, "energy E");
    oracle_cmd->add_option("--eta-max", o_eta, "disorder coupling scale");
    oracle_cmd->add_option("--density", o_density, "uniform | trunc-exp");
    oracle_cmd->add_option("--length", o_length, "chain length");
    oracle_cmd->add_option("--replicas", o_replicas, "replica chains");
    oracle_cmd->add_option("--seed", o_seed, "seed");
    oracle_cmd->add_option("--m", o_m, "chain length for free-chain eigenvalues");
    oracle_cmd->add_option("--x", o_x, "configuration JSON");
    oracle_cmd->add_option("--y", o_y, "configuration JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            anderloc::experiment::Overrides ov;
            if (threads > 0) ov.threads = threads;
            if (seed >= 0) ov.seed = static_cast<std::uint64_t>(seed);
            auto res = anderloc::experiment::run(spec_path, ov);
            if (res.exit_code == 0) {
                std::cerr << "wrote " << res.csv_path << " and " << res.json_path << "\n";
            } else {
                std::cerr << "error class " << res.exit_code << ": " << res.message << "\n";
                if (!res.csv_path.empty())
                    std::cerr << "partial results in " << res.csv_path << "\n";
            }
            return res.exit_code;
        }
        if (val_cmd->parsed()) {
            auto findings = anderloc::experiment::validate(spec_path);
            bool hard = false;
            for (const auto& f : findings) {
                std::cout << (f.hard ? "ERROR: " : "WARNING: ") << f.message << "\n";
                hard = hard || f.hard;
            }
            if (findings.empty()) std::cout << "spec is valid\n";
            return hard ? anderloc::experiment::kExitConfig : 0;
        }
        if (oracle_cmd->parsed()) {
            if (oracle_kind == "lyapunov") {
                anderloc::model::DisorderDistribution dd;
                dd.kind = o_density == "trunc-exp"
                              ? anderloc::model::DisorderDistribution::Kind::TruncExp
                              : anderloc::model::DisorderDistribution::Kind::Uniform;
                dd.eta_max = o_eta;
                auto res = anderloc::oracles::transfer_matrix_lyapunov(dd, o_energy, o_length,
                                                                       o_replicas, o_seed);
                std::cout << "E," << fmt_double(res.energy) << "\n"
                          << "gamma," << fmt_double(res.gamma) << "\n"
                          << "stderr," << fmt_double(res.stderr_) << "\n";
                return 0;
            }
            if (oracle_kind == "free-chain") {
                auto ev = anderloc::oracles::dirichlet_chain_eigenvalues(o_m);
                std::cout << "k,eigenvalue\n";
                for (std::size_t k = 0; k < ev.size(); ++k)
                    std::cout << k + 1 << "," << fmt_double(ev[k]) << "\n";
                return 0;
            }
            if (oracle_kind == "hausdorff") {
                auto cx = anderloc::config::configuration_from_json(o_x);
                auto cy = anderloc::config::configuration_from_json(o_y);
                std::cout << fmt_double(anderloc::geometry::hausdorff_dist(cx, cy)) << "\n";
                return 0;
            }
            std::cerr << "unknown oracle kind: " << oracle_kind << "\n";
            return anderloc::experiment::kExitConfig;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error class 2: " << e.what() << "\n";
        return anderloc::experiment::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error class 3: " << e.what() << "\n";
        return anderloc::experiment::kExitNumerical;
    }
    return 0;
}
