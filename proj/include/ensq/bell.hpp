#pragma once

#include <array>
#include <optional>
#include <string>

#include "ensq/ensemble.hpp"
#include "ensq/fock.hpp"
#include "ensq/rng.hpp"

namespace ensq {

enum class BellOutcome { phi_plus, phi_minus, psi_plus, psi_minus };

inline constexpr std::array<BellOutcome, 4> kBellOutcomes = {
    BellOutcome::phi_plus, BellOutcome::phi_minus, BellOutcome::psi_plus, BellOutcome::psi_minus};

const char* to_string(BellOutcome o);

/// Basis choice for the physical analyzer. psi_discriminating runs the bare
/// two-round protocol and certifies psi+/psi-. phi_discriminating applies a
/// Hadamard to both ensembles first, under which phi- arrives as psi+ and
/// psi- stays psi-, so it certifies phi- and psi-. phi+ is never certified
/// by a single run.
enum class BasisConfig { psi_discriminating, phi_discriminating };

const char* to_string(BasisConfig c);

struct DetectorModel {
    double efficiency = 1.0;       // per-photon detection probability
    double dark_count_prob = 0.0;  // per detector per round
    bool number_resolving = false;

    void validate() const;
};

/// Click counts per detection round at detectors D1 and D2. With
/// non-number-resolving detectors each entry collapses to 0/1.
struct ClickRecord {
    std::array<std::array<int, 2>, 2> counts{};  // [round][detector]
};

enum class Verdict { psi_plus, psi_minus, phi_subspace, discard };

const char* to_string(Verdict v);

/// Prepares the named Bell state on two ensembles currently in vacuum.
FockState bell_pair(const FockState& state, int a, int b, BellOutcome which);

struct BellProjection {
    double prob = 0.0;
    FockState post;
    /// Weight outside the one-excitation-per-ensemble subspace; counts
    /// toward no outcome (post-selection failure mass).
    double failure_weight = 0.0;
};

/// Projects ensembles (a, b) onto one Bell state. The post state has both
/// ensembles reset to vacuum (and retired) with the remainder renormalized.
BellProjection ideal_bell_project(const FockState& state, int a, int b, BellOutcome outcome);

struct BellSample {
    std::optional<BellOutcome> outcome;  // empty when no single-excitation support
    double prob = 0.0;
    FockState post;
};

/// Samples a Bell outcome by the Born rule and projects.
BellSample ideal_bell_measure(const FockState& state, int a, int b, RngStream& rng);

/// Click rules: one detector firing once in each round means psi+ if
/// it is the same detector twice and psi- if the rounds disagree; clicks
/// confined to a single detector in a single round are the two-photon
/// bunching signature (phi subspace); anything else is discarded.
Verdict classify_clicks(const ClickRecord& clicks);

/// Maps an analyzer verdict back to the Bell outcome the configured frame
/// certifies, when it certifies one.
std::optional<BellOutcome> certified_outcome(Verdict v, BasisConfig config);

struct BellProtocolResult {
    ClickRecord clicks;
    Verdict verdict = Verdict::discard;
    std::optional<BellOutcome> outcome;
    FockState post;
};

/// Runs the full two-round analyzer on ensembles (a, b): optional basis
/// pre-rotation, anti-pump of both ensembles, 50/50 beam splitter, detector
/// sampling, pi pulse, second round, click classification. Detector
/// outcomes are sampled trajectory-style: photon numbers collapse by the
/// Born rule, then losses and dark counts act classically. Measured
/// ensembles end in vacuum and are retired.
BellProtocolResult physical_bell_protocol(const FockState& state, int a, int b, BasisConfig config,
                                          const DetectorModel& detectors, RngStream& rng);

/// Analytic probability that the protocol certifies some outcome for a
/// given Bell-state input. Cross-checked against Monte Carlo rates.
double acceptance_probability(BellOutcome input, BasisConfig config, const DetectorModel& detectors);

/// Beam splitter convention d1 = (a_A + a_B)/sqrt2, d2 = (a_A - a_B)/sqrt2.
Eigen::Matrix2cd splitter_50_50();

}  // namespace ensq
