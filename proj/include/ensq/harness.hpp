#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ensq/dj.hpp"

namespace ensq {

enum class Protocol { bell, chi, cnot, dj };

const char* to_string(Protocol p);

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One reproducible Monte Carlo experiment. `state` names the bell-protocol
/// input (psi+, psi-, phi+, phi-) or, for the cnot protocol, the
/// "control,target" pair from {zero, one, plus, minus}.
struct ExperimentSpec {
    Protocol protocol = Protocol::bell;
    std::string state = "psi+";
    OracleId oracle = OracleId::f1;
    bool physical = true;  // physical click protocol vs ideal projections
    BasisConfig config = BasisConfig::psi_discriminating;
    DetectorModel detectors{};
    long trials = 1;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct TrialStats {
    long n_trials = 0;
    long n_accepted = 0;
    double acceptance_rate = 0.0;
    double acceptance_halfwidth = 0.0;
    std::vector<std::pair<std::string, long>> verdicts;  // stable key set per protocol
    double conditional_fidelity_mean = 0.0;
    double conditional_fidelity_min = 0.0;
    double wall_time_seconds = 0.0;
};

void validate(const ExperimentSpec& spec);

/// Runs the experiment. Trial i draws from the stream derived from
/// (seed, i), so the aggregate is identical across runs and thread counts.
TrialStats run_trials(const ExperimentSpec& spec);

enum class SweepParameter { efficiency, dark_count_prob };

const char* to_string(SweepParameter p);

struct SweepRow {
    double value = 0.0;
    TrialStats stats;
};

/// One run_trials row per grid point, with the detector parameter swept and
/// the same seeding at every point.
std::vector<SweepRow> run_sweep(const ExperimentSpec& base, SweepParameter parameter, double from, double to,
                                double step);

/// 95% binomial half-width by the normal approximation,
/// 1.96 * sqrt(p(1-p)/n).
double binomial_halfwidth(long successes, long n);

// Machine-readable output. Numbers carry 17 significant digits so doubles
// round-trip exactly.
std::string to_json(const ExperimentSpec& spec, const TrialStats& stats);
std::string to_json(const ExperimentSpec& base, SweepParameter parameter, const std::vector<SweepRow>& rows);
std::string to_csv(const ExperimentSpec& spec, const TrialStats& stats);
std::string to_csv(const ExperimentSpec& base, SweepParameter parameter, const std::vector<SweepRow>& rows);

/// Writes to the path, or to stdout when the path is empty. I/O failures
/// surface with the path in the message.
void write_output(const std::string& text, const std::string& path);

/// Quick oracle-agreement self check (4 Bell inputs x 2 configs, ideal
/// detectors): every certified physical verdict must name the projective
/// outcome the input is an eigenstate of.
bool run_self_check(std::string* detail = nullptr);

}  // namespace ensq
