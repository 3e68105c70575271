// Command-line front end for the ensemble protocol simulator: reproducible
// Monte Carlo runs of the Bell analyzer, the chi resource preparation, the
// teleported C-NOT and the Deutsch-Jozsa algorithm, plus detector-parameter
// sweeps.
//
// Exit codes: 0 success, 2 invalid configuration, 3 self-check failure.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ensq/harness.hpp"

namespace {

struct CliOptions {
    std::string state;
    std::string oracle = "f1";
    std::string backend = "physical";
    std::string config = "psi";
    double eta = 1.0;
    double dark = 0.0;
    long trials = 1000;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string format = "json";
    std::string out;
    bool self_check = false;
    bool no_timing = false;

    // sweep only
    std::string protocol = "bell";
    std::string param = "eta";
    double from = 0.0;
    double to = 0.0;
    double step = 0.1;
};

ensq::Protocol protocol_from_name(const std::string& name) {
    if (name == "bell") return ensq::Protocol::bell;
    if (name == "chi") return ensq::Protocol::chi;
    if (name == "cnot") return ensq::Protocol::cnot;
    if (name == "dj") return ensq::Protocol::dj;
    throw ensq::ConfigError("unknown protocol '" + name + "'");
}

ensq::ExperimentSpec build_spec(ensq::Protocol protocol, const CliOptions& opt) {
    ensq::ExperimentSpec spec;
    spec.protocol = protocol;
    spec.state = opt.state;
    if (spec.state.empty()) {
        // per-protocol defaults: the psi+ pair, and the plus/minus C-NOT inputs
        spec.state = protocol == ensq::Protocol::cnot ? "plus,minus" : "psi+";
    }
    auto oracle = ensq::oracle_from_string(opt.oracle);
    if (!oracle) throw ensq::ConfigError("unknown oracle '" + opt.oracle + "'");
    spec.oracle = *oracle;
    spec.physical = opt.backend == "physical";
    spec.config = opt.config == "phi" ? ensq::BasisConfig::phi_discriminating
                                      : ensq::BasisConfig::psi_discriminating;
    spec.detectors.efficiency = opt.eta;
    spec.detectors.dark_count_prob = opt.dark;
    spec.trials = opt.trials;
    spec.seed = opt.seed;
    spec.threads = opt.threads;
    return spec;
}

int run_single(ensq::Protocol protocol, const CliOptions& opt) {
    ensq::ExperimentSpec spec = build_spec(protocol, opt);
    ensq::TrialStats stats = ensq::run_trials(spec);
    if (opt.no_timing) stats.wall_time_seconds = 0.0;
    const std::string text = opt.format == "csv" ? ensq::to_csv(spec, stats) : ensq::to_json(spec, stats);
    ensq::write_output(text, opt.out);
    return 0;
}

int run_sweep_cmd(const CliOptions& opt) {
    ensq::ExperimentSpec base = build_spec(protocol_from_name(opt.protocol), opt);
    const ensq::SweepParameter param = opt.param == "dark" ? ensq::SweepParameter::dark_count_prob
                                                           : ensq::SweepParameter::efficiency;
    auto rows = ensq::run_sweep(base, param, opt.from, opt.to, opt.step);
    if (opt.no_timing) {
        for (auto& row : rows) row.stats.wall_time_seconds = 0.0;
    }
    const std::string text =
        opt.format == "csv" ? ensq::to_csv(base, param, rows) : ensq::to_json(base, param, rows);
    ensq::write_output(text, opt.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Atomic-ensemble protocol simulator: dual-rail qubits, two-round Bell analysis,\n"
                 "teleported C-NOT and the two-qubit Deutsch-Jozsa algorithm"};
    app.require_subcommand(1);

    CliOptions opt;
    // Shared options live on the top-level app; subcommands fall through to
    // them, and the flat key = value config file maps onto them directly.
    app.add_option("--state", opt.state, "input state (bell: psi+/psi-/phi+/phi-; cnot: control,target)");
    app.add_option("--oracle", opt.oracle, "oracle id f1..f4 (dj protocol)");
    app.add_option("--backend", opt.backend, "ideal | physical")->check(CLI::IsMember({"ideal", "physical"}));
    app.add_option("--config", opt.config, "bell analyzer basis: psi | phi")
        ->check(CLI::IsMember({"psi", "phi"}));
    app.add_option("--eta", opt.eta, "detector efficiency per photon");
    app.add_option("--dark", opt.dark, "dark count probability per detector per round");
    app.add_option("--trials", opt.trials, "number of Monte Carlo trials");
    // Seeds are always explicit (flag or config file); there is no
    // environment fallback.
    app.add_option("--seed", opt.seed, "master seed (per-trial streams derive from it)")->required();
    app.add_option("--threads", opt.threads, "worker threads (results are thread-count independent)");
    app.add_option("--format", opt.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--out", opt.out, "output path (stdout when omitted)");
    app.add_flag("--self-check", opt.self_check, "run the bell oracle-agreement suite first");
    app.add_flag("--no-timing", opt.no_timing, "report wall_time_seconds as 0 for bit-exact comparisons");
    app.set_config("--config-file", "", "flat key = value file; command-line flags take precedence");

    CLI::App* bell = app.add_subcommand("bell", "Bell-basis analyzer on one entangled pair");
    CLI::App* chi = app.add_subcommand("chi", "chi resource preparation from two GHZ states");
    CLI::App* cnot = app.add_subcommand("cnot", "teleported C-NOT on named control/target inputs");
    CLI::App* dj = app.add_subcommand("dj", "two-qubit Deutsch-Jozsa run");
    CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep of a base experiment");
    for (CLI::App* cmd : {bell, chi, cnot, dj, sweep}) cmd->fallthrough();
    sweep->add_option("--protocol", opt.protocol, "bell | chi | cnot | dj")
        ->check(CLI::IsMember({"bell", "chi", "cnot", "dj"}));
    sweep->add_option("--param", opt.param, "eta | dark")->check(CLI::IsMember({"eta", "dark"}));
    sweep->add_option("--from", opt.from, "grid start")->required();
    sweep->add_option("--to", opt.to, "grid end (inclusive)")->required();
    sweep->add_option("--step", opt.step, "grid step");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (opt.self_check) {
            std::string detail;
            if (!ensq::run_self_check(&detail)) {
                std::cerr << "self-check FAILED: " << detail << "\n";
                return 3;
            }
            std::cerr << "self-check passed: " << detail << "\n";
        }
        if (sweep->parsed()) return run_sweep_cmd(opt);
        if (bell->parsed()) return run_single(ensq::Protocol::bell, opt);
        if (chi->parsed()) return run_single(ensq::Protocol::chi, opt);
        if (cnot->parsed()) return run_single(ensq::Protocol::cnot, opt);
        return run_single(ensq::Protocol::dj, opt);
    } catch (const ensq::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
