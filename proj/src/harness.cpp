#include "ensq/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

namespace ensq {

namespace {

constexpr double kSqrtHalf = 0.70710678118654752440;

struct TrialOutcome {
    bool accepted = false;
    int verdict = 0;  // index into the protocol's verdict key set
    double fid = 0.0;
};

const std::vector<std::string>& verdict_keys(Protocol p) {
    static const std::vector<std::string> bell = {"PhiPlus", "PhiMinus", "PsiPlus",
                                                  "PsiMinus", "PhiSubspace", "Discard"};
    static const std::vector<std::string> pair = {"Accepted", "Discard"};
    static const std::vector<std::string> dj = {"Constant", "Balanced", "Discard"};
    switch (p) {
        case Protocol::bell:
        case Protocol::chi: return bell;
        case Protocol::cnot: return pair;
        case Protocol::dj: return dj;
    }
    return bell;
}

int key_index(Protocol p, const std::string& key) {
    const auto& keys = verdict_keys(p);
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (keys[i] == key) return static_cast<int>(i);
    }
    throw std::logic_error("unknown verdict key " + key);
}

std::optional<BellOutcome> bell_state_from_name(const std::string& name) {
    if (name == "phi+") return BellOutcome::phi_plus;
    if (name == "phi-") return BellOutcome::phi_minus;
    if (name == "psi+") return BellOutcome::psi_plus;
    if (name == "psi-") return BellOutcome::psi_minus;
    return std::nullopt;
}

std::optional<Eigen::Vector2cd> qubit_from_name(const std::string& name) {
    if (name == "zero") return Eigen::Vector2cd(1.0, 0.0);
    if (name == "one") return Eigen::Vector2cd(0.0, 1.0);
    if (name == "plus") return Eigen::Vector2cd(kSqrtHalf, kSqrtHalf);
    if (name == "minus") return Eigen::Vector2cd(kSqrtHalf, -kSqrtHalf);
    return std::nullopt;
}

std::pair<std::string, std::string> split_pair(const std::string& s) {
    auto comma = s.find(',');
    if (comma == std::string::npos) return {s, ""};
    return {s.substr(0, comma), s.substr(comma + 1)};
}

TrialOutcome run_bell_trial(const ExperimentSpec& spec, RngStream& rng) {
    RegisterPtr reg = ModeRegister::make({1, 2});
    FockState input = bell_pair(vacuum_state(reg), 1, 2, *bell_state_from_name(spec.state));
    TrialOutcome out;
    if (spec.physical) {
        BellProtocolResult r = physical_bell_protocol(input, 1, 2, spec.config, spec.detectors, rng);
        out.accepted = r.outcome.has_value();
        if (out.accepted) {
            out.verdict = key_index(Protocol::bell, to_string(*r.outcome));
            out.fid = fidelity(ideal_bell_project(input, 1, 2, *r.outcome).post, r.post);
        } else {
            out.verdict = key_index(Protocol::bell, to_string(r.verdict));
        }
    } else {
        BellSample m = ideal_bell_measure(input, 1, 2, rng);
        out.accepted = m.outcome.has_value();
        out.verdict = key_index(Protocol::bell, out.accepted ? to_string(*m.outcome) : "Discard");
        if (out.accepted) out.fid = fidelity(ideal_bell_project(input, 1, 2, *m.outcome).post, m.post);
    }
    return out;
}

TrialOutcome run_chi_trial(const ExperimentSpec& spec, RngStream& rng) {
    RegisterPtr reg = ModeRegister::make({1, 2, 3, 4, 5, 6});
    FockState s = vacuum_state(reg);
    s = prepare_ghz(s, 1, 2, 3);
    s = prepare_ghz(s, 4, 5, 6);
    MeasurementBackend backend =
        spec.physical ? MeasurementBackend::make_physical(spec.config, spec.detectors) : MeasurementBackend::ideal();
    ChiResult r = prepare_chi(s, {1, 2, 3, 4, 5, 6}, backend, rng);
    TrialOutcome out;
    out.accepted = r.log.accepted;
    if (out.accepted) {
        out.verdict = key_index(Protocol::chi, to_string(*r.log.measurements[0].outcome));
        out.fid = fidelity(r.state, chi_target(r.state.reg(), {1, 2, 5, 6}));
    } else {
        const auto& rec = r.log.measurements[0];
        out.verdict = key_index(Protocol::chi, rec.verdict ? to_string(*rec.verdict) : "Discard");
    }
    return out;
}

TrialOutcome run_cnot_trial(const ExperimentSpec& spec, RngStream& rng) {
    auto [control_name, target_name] = split_pair(spec.state);
    const Eigen::Vector2cd control = *qubit_from_name(control_name);
    const Eigen::Vector2cd target = *qubit_from_name(target_name);

    RegisterPtr reg = ModeRegister::make({1, 2, 3, 4, 5, 6, 7, 8});
    FockState s = vacuum_state(reg);
    s = prepare_ghz(s, 1, 2, 3);
    s = prepare_ghz(s, 4, 5, 6);
    s = prepare_logical(s, 7, control(0), control(1));
    s = prepare_logical(s, 8, target(0), target(1));

    MeasurementBackend backend =
        spec.physical ? MeasurementBackend::make_physical(spec.config, spec.detectors) : MeasurementBackend::ideal();
    TrialOutcome out;
    out.verdict = key_index(Protocol::cnot, "Discard");
    ChiResult chi = prepare_chi(s, {1, 2, 3, 4, 5, 6}, backend, rng);
    if (!chi.log.accepted) return out;
    CnotResult r = teleported_cnot(chi.state, 7, 8, {1, 2, 5, 6}, backend, rng);
    if (!r.log.accepted) return out;
    out.accepted = true;
    out.verdict = key_index(Protocol::cnot, "Accepted");
    auto [vec, leak] = two_qubit_view(r.state, r.control_out, r.target_out);
    out.fid = std::norm(matrix_cnot_reference(control, target).dot(vec));
    return out;
}

TrialOutcome run_dj_trial(const ExperimentSpec& spec, RngStream& rng) {
    DJConfig config;
    config.form = OracleForm::decomposed;
    if (spec.physical) {
        config.cnot = {true, MeasurementBackend::make_physical(spec.config, spec.detectors)};
        config.readout = {true, spec.detectors};
    }
    DJResult r = run_dj(spec.oracle, config, rng);
    TrialOutcome out;
    out.accepted = r.answer.has_value();
    out.verdict = key_index(Protocol::dj, out.accepted ? to_string(*r.answer) : "Discard");
    if (out.accepted) {
        const int flip = oracle_value(spec.oracle, 0) ^ oracle_value(spec.oracle, 1);
        Eigen::Vector2cd query = flip ? Eigen::Vector2cd(0.0, 1.0) : Eigen::Vector2cd(1.0, 0.0);
        Eigen::Vector2cd aux(kSqrtHalf, -kSqrtHalf);
        Eigen::Vector4cd want;
        want << query(0) * aux(0), query(0) * aux(1), query(1) * aux(0), query(1) * aux(1);
        auto [vec, leak] = two_qubit_view(r.pre_readout, r.wires.query, r.wires.aux);
        out.fid = std::norm(want.dot(vec));
    }
    return out;
}

TrialOutcome run_one(const ExperimentSpec& spec, RngStream& rng) {
    switch (spec.protocol) {
        case Protocol::bell: return run_bell_trial(spec, rng);
        case Protocol::chi: return run_chi_trial(spec, rng);
        case Protocol::cnot: return run_cnot_trial(spec, rng);
        case Protocol::dj: return run_dj_trial(spec, rng);
    }
    throw std::logic_error("unknown protocol");
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void json_body(std::ostringstream& os, const ExperimentSpec& spec, const TrialStats& stats) {
    os << "{\"spec\": {\"protocol\": \"" << to_string(spec.protocol) << "\", \"state\": \"" << spec.state
       << "\", \"oracle\": \"" << to_string(spec.oracle) << "\", \"backend\": \""
       << (spec.physical ? "physical" : "ideal") << "\", \"config\": \"" << to_string(spec.config)
       << "\", \"eta\": " << fmt(spec.detectors.efficiency) << ", \"dark\": " << fmt(spec.detectors.dark_count_prob)
       << ", \"trials\": " << spec.trials << ", \"seed\": " << spec.seed << "}";
    os << ", \"n_trials\": " << stats.n_trials;
    os << ", \"n_accepted\": " << stats.n_accepted;
    os << ", \"acceptance_rate\": " << fmt(stats.acceptance_rate);
    os << ", \"acceptance_halfwidth\": " << fmt(stats.acceptance_halfwidth);
    os << ", \"verdicts\": {";
    for (std::size_t i = 0; i < stats.verdicts.size(); ++i) {
        if (i) os << ", ";
        os << "\"" << stats.verdicts[i].first << "\": " << stats.verdicts[i].second;
    }
    os << "}";
    os << ", \"conditional_fidelity_mean\": " << fmt(stats.conditional_fidelity_mean);
    os << ", \"conditional_fidelity_min\": " << fmt(stats.conditional_fidelity_min);
    os << ", \"wall_time_seconds\": " << fmt(stats.wall_time_seconds);
    os << "}";
}

void csv_header(std::ostringstream& os, const ExperimentSpec& spec) {
    os << "protocol,state,oracle,backend,config,eta,dark,trials,seed,n_trials,n_accepted,acceptance_rate,"
          "acceptance_halfwidth";
    for (const auto& key : verdict_keys(spec.protocol)) os << ",verdict_" << key;
    os << ",conditional_fidelity_mean,conditional_fidelity_min,wall_time_seconds\n";
}

// The cnot input state carries a comma ("control,target"); quote it.
std::string csv_field(const std::string& s) {
    if (s.find(',') == std::string::npos) return s;
    return "\"" + s + "\"";
}

void csv_row(std::ostringstream& os, const ExperimentSpec& spec, const TrialStats& stats) {
    os << to_string(spec.protocol) << "," << csv_field(spec.state) << "," << to_string(spec.oracle) << ","
       << (spec.physical ? "physical" : "ideal") << "," << to_string(spec.config) << ","
       << fmt(spec.detectors.efficiency) << "," << fmt(spec.detectors.dark_count_prob) << "," << spec.trials << ","
       << spec.seed << "," << stats.n_trials << "," << stats.n_accepted << "," << fmt(stats.acceptance_rate) << ","
       << fmt(stats.acceptance_halfwidth);
    for (const auto& [key, count] : stats.verdicts) os << "," << count;
    os << "," << fmt(stats.conditional_fidelity_mean) << "," << fmt(stats.conditional_fidelity_min) << ","
       << fmt(stats.wall_time_seconds) << "\n";
}

}  // namespace

const char* to_string(Protocol p) {
    switch (p) {
        case Protocol::bell: return "bell";
        case Protocol::chi: return "chi";
        case Protocol::cnot: return "cnot";
        case Protocol::dj: return "dj";
    }
    return "?";
}

const char* to_string(SweepParameter p) {
    return p == SweepParameter::efficiency ? "efficiency" : "dark_count_prob";
}

void validate(const ExperimentSpec& spec) {
    if (spec.trials < 1) throw ConfigError("trials must be >= 1");
    if (spec.threads < 1) throw ConfigError("threads must be >= 1");
    try {
        spec.detectors.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (spec.protocol == Protocol::bell && !bell_state_from_name(spec.state)) {
        throw ConfigError("unknown bell input state '" + spec.state + "' (want psi+, psi-, phi+ or phi-)");
    }
    if (spec.protocol == Protocol::cnot) {
        auto [c, t] = split_pair(spec.state);
        if (!qubit_from_name(c) || !qubit_from_name(t)) {
            throw ConfigError("cnot input must be 'control,target' with names from zero/one/plus/minus");
        }
    }
}

double binomial_halfwidth(long successes, long n) {
    if (n <= 0) return 0.0;
    const double p = static_cast<double>(successes) / static_cast<double>(n);
    return 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

TrialStats run_trials(const ExperimentSpec& spec) {
    validate(spec);
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<TrialOutcome> results(static_cast<std::size_t>(spec.trials));
    auto worker = [&](long lo, long hi) {
        for (long i = lo; i < hi; ++i) {
            RngStream rng(spec.seed, static_cast<std::uint64_t>(i));
            results[static_cast<std::size_t>(i)] = run_one(spec, rng);
        }
    };
    const int n_threads = static_cast<int>(std::min<long>(spec.threads, spec.trials));
    if (n_threads <= 1) {
        worker(0, spec.trials);
    } else {
        std::vector<std::thread> pool;
        const long chunk = (spec.trials + n_threads - 1) / n_threads;
        for (int t = 0; t < n_threads; ++t) {
            const long lo = t * chunk;
            const long hi = std::min(spec.trials, lo + chunk);
            if (lo < hi) pool.emplace_back(worker, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    TrialStats stats;
    stats.n_trials = spec.trials;
    const auto& keys = verdict_keys(spec.protocol);
    std::vector<long> counts(keys.size(), 0);
    double fid_sum = 0.0;
    double fid_min = 0.0;
    bool have_fid = false;
    for (const TrialOutcome& r : results) {
        counts[static_cast<std::size_t>(r.verdict)] += 1;
        if (r.accepted) {
            stats.n_accepted += 1;
            fid_sum += r.fid;
            fid_min = have_fid ? std::min(fid_min, r.fid) : r.fid;
            have_fid = true;
        }
    }
    for (std::size_t i = 0; i < keys.size(); ++i) stats.verdicts.emplace_back(keys[i], counts[i]);
    stats.acceptance_rate = static_cast<double>(stats.n_accepted) / static_cast<double>(stats.n_trials);
    stats.acceptance_halfwidth = binomial_halfwidth(stats.n_accepted, stats.n_trials);
    stats.conditional_fidelity_mean = have_fid ? fid_sum / static_cast<double>(stats.n_accepted) : 0.0;
    stats.conditional_fidelity_min = have_fid ? fid_min : 0.0;
    stats.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return stats;
}

std::vector<SweepRow> run_sweep(const ExperimentSpec& base, SweepParameter parameter, double from, double to,
                                double step) {
    if (step <= 0.0) throw ConfigError("sweep step must be positive");
    if (to < from) throw ConfigError("sweep range is empty");
    std::vector<SweepRow> rows;
    for (int i = 0;; ++i) {
        const double v = from + i * step;  // no accumulated drift across the grid
        if (v > to + 1e-12) break;
        ExperimentSpec spec = base;
        if (parameter == SweepParameter::efficiency) {
            spec.detectors.efficiency = v;
        } else {
            spec.detectors.dark_count_prob = v;
        }
        validate(spec);  // rejects out-of-range grid values
        rows.push_back({v, run_trials(spec)});
    }
    return rows;
}

std::string to_json(const ExperimentSpec& spec, const TrialStats& stats) {
    std::ostringstream os;
    json_body(os, spec, stats);
    os << "\n";
    return os.str();
}

std::string to_json(const ExperimentSpec& base, SweepParameter parameter, const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "{\"parameter\": \"" << to_string(parameter) << "\", \"rows\": [";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i) os << ", ";
        ExperimentSpec spec = base;
        if (parameter == SweepParameter::efficiency) {
            spec.detectors.efficiency = rows[i].value;
        } else {
            spec.detectors.dark_count_prob = rows[i].value;
        }
        json_body(os, spec, rows[i].stats);
    }
    os << "]}\n";
    return os.str();
}

std::string to_csv(const ExperimentSpec& spec, const TrialStats& stats) {
    std::ostringstream os;
    csv_header(os, spec);
    csv_row(os, spec, stats);
    return os.str();
}

std::string to_csv(const ExperimentSpec& base, SweepParameter parameter, const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    csv_header(os, base);
    for (const SweepRow& row : rows) {
        ExperimentSpec spec = base;
        if (parameter == SweepParameter::efficiency) {
            spec.detectors.efficiency = row.value;
        } else {
            spec.detectors.dark_count_prob = row.value;
        }
        csv_row(os, spec, row.stats);
    }
    return os.str();
}

void write_output(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path);
}

bool run_self_check(std::string* detail) {
    for (BellOutcome input : kBellOutcomes) {
        for (BasisConfig config : {BasisConfig::psi_discriminating, BasisConfig::phi_discriminating}) {
            const double expect_rate = acceptance_probability(input, config, DetectorModel{});
            long accepted = 0;
            for (long i = 0; i < 500; ++i) {
                RngStream rng(0xC0FFEEULL, static_cast<std::uint64_t>(i));
                RegisterPtr reg = ModeRegister::make({1, 2});
                FockState s = bell_pair(vacuum_state(reg), 1, 2, input);
                BellProtocolResult r = physical_bell_protocol(s, 1, 2, config, DetectorModel{}, rng);
                if (!r.outcome) continue;
                ++accepted;
                if (std::abs(ideal_bell_project(s, 1, 2, *r.outcome).prob - 1.0) > 1e-9) {
                    if (detail) {
                        *detail = std::string("certified ") + to_string(*r.outcome) + " for input " +
                                  to_string(input) + " in " + to_string(config) + " config";
                    }
                    return false;
                }
            }
            if (accepted != static_cast<long>(expect_rate * 500.0 + 0.5)) {
                if (detail) {
                    *detail = std::string("acceptance rate mismatch for ") + to_string(input) + " in " +
                              to_string(config) + " config";
                }
                return false;
            }
        }
    }
    if (detail) *detail = "oracle agreement holds for 4 Bell inputs x 2 configs";
    return true;
}

}  // namespace ensq
