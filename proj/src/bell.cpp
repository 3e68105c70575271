#include "ensq/bell.hpp"

#include <cmath>
#include <stdexcept>

namespace ensq {

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

constexpr double kSqrtHalf = 0.70710678118654752440;

struct BellTerm {
    // occupations (h_a, v_a, h_b, v_b) and amplitude
    std::array<int, 4> occ;
    double amp;
};

// The four Bell states over (a, b) in the (h_a, v_a, h_b, v_b) occupation basis.
std::array<BellTerm, 2> bell_terms(BellOutcome which) {
    switch (which) {
        case BellOutcome::phi_plus:
            return {BellTerm{{1, 0, 1, 0}, kSqrtHalf}, BellTerm{{0, 1, 0, 1}, kSqrtHalf}};
        case BellOutcome::phi_minus:
            return {BellTerm{{1, 0, 1, 0}, kSqrtHalf}, BellTerm{{0, 1, 0, 1}, -kSqrtHalf}};
        case BellOutcome::psi_plus:
            return {BellTerm{{1, 0, 0, 1}, kSqrtHalf}, BellTerm{{0, 1, 1, 0}, kSqrtHalf}};
        case BellOutcome::psi_minus:
            return {BellTerm{{1, 0, 0, 1}, kSqrtHalf}, BellTerm{{0, 1, 1, 0}, -kSqrtHalf}};
    }
    fail("invalid BellOutcome");
}

}  // namespace

const char* to_string(BellOutcome o) {
    switch (o) {
        case BellOutcome::phi_plus: return "PhiPlus";
        case BellOutcome::phi_minus: return "PhiMinus";
        case BellOutcome::psi_plus: return "PsiPlus";
        case BellOutcome::psi_minus: return "PsiMinus";
    }
    return "?";
}

const char* to_string(BasisConfig c) {
    return c == BasisConfig::psi_discriminating ? "psi" : "phi";
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::psi_plus: return "PsiPlus";
        case Verdict::psi_minus: return "PsiMinus";
        case Verdict::phi_subspace: return "PhiSubspace";
        case Verdict::discard: return "Discard";
    }
    return "?";
}

void DetectorModel::validate() const {
    if (!(efficiency >= 0.0 && efficiency <= 1.0)) fail("detector efficiency must be in [0, 1]");
    if (!(dark_count_prob >= 0.0 && dark_count_prob < 1.0)) fail("dark count probability must be in [0, 1)");
}

Eigen::Matrix2cd splitter_50_50() {
    Eigen::Matrix2cd m;
    m << kSqrtHalf, kSqrtHalf, kSqrtHalf, -kSqrtHalf;
    return m;
}

FockState bell_pair(const FockState& state, int a, int b, BellOutcome which) {
    if (!ensemble_in_vacuum(state, a) || !ensemble_in_vacuum(state, b)) {
        fail("bell_pair requires both ensembles in vacuum");
    }
    const auto& reg = *state.reg();
    const std::array<std::size_t, 4> idx = {reg.h_index(a), reg.v_index(a), reg.h_index(b), reg.v_index(b)};
    FockState::AmpMap out;
    for (const auto& [occ, amp] : state.amplitudes()) {
        for (const BellTerm& t : bell_terms(which)) {
            FockState::OccVec o = occ;
            for (int i = 0; i < 4; ++i) o[idx[i]] = static_cast<std::uint8_t>(t.occ[i]);
            out[std::move(o)] += amp * t.amp;
        }
    }
    return FockState::make(state.reg(), std::move(out), state.is_normalized(), state.lost_weight());
}

BellProjection ideal_bell_project(const FockState& state, int a, int b, BellOutcome outcome) {
    FockState s = state.normalized();
    const auto& reg = *s.reg();
    const std::array<std::size_t, 4> idx = {reg.h_index(a), reg.v_index(a), reg.h_index(b), reg.v_index(b)};
    const auto terms = bell_terms(outcome);

    FockState::AmpMap reduced;
    double failure = 0.0;
    for (const auto& [occ, amp] : s.amplitudes()) {
        const int ea = occ[idx[0]] + occ[idx[1]];
        const int eb = occ[idx[2]] + occ[idx[3]];
        if (ea != 1 || eb != 1) {
            failure += std::norm(amp);
            continue;
        }
        for (const BellTerm& t : terms) {
            if (occ[idx[0]] == t.occ[0] && occ[idx[1]] == t.occ[1] && occ[idx[2]] == t.occ[2] &&
                occ[idx[3]] == t.occ[3]) {
                FockState::OccVec o = occ;
                for (int i = 0; i < 4; ++i) o[idx[i]] = 0;
                reduced[std::move(o)] += t.amp * amp;  // Bell amplitudes are real
                break;
            }
        }
    }
    double prob = 0.0;
    for (const auto& [occ, amp] : reduced) prob += std::norm(amp);

    RegisterPtr reg2 = s.reg()->with_retired(a)->with_retired(b);
    if (prob <= 0.0) {
        return {0.0, FockState::make(std::move(reg2), {}, false, s.lost_weight()), failure};
    }
    const double scale = 1.0 / std::sqrt(prob);
    for (auto& [occ, amp] : reduced) amp *= scale;
    return {prob, FockState::make(std::move(reg2), std::move(reduced), true, s.lost_weight()), failure};
}

BellSample ideal_bell_measure(const FockState& state, int a, int b, RngStream& rng) {
    FockState s = state.normalized();
    std::array<BellProjection, 4> proj = {
        ideal_bell_project(s, a, b, kBellOutcomes[0]), ideal_bell_project(s, a, b, kBellOutcomes[1]),
        ideal_bell_project(s, a, b, kBellOutcomes[2]), ideal_bell_project(s, a, b, kBellOutcomes[3])};
    const double u = rng.uniform();
    double cum = 0.0;
    for (int i = 0; i < 4; ++i) {
        cum += proj[i].prob;
        if (u < cum) {
            return {kBellOutcomes[i], proj[i].prob, std::move(proj[i].post)};
        }
    }
    // Leftover mass lies outside the single-excitation subspace.
    return {std::nullopt, 0.0, std::move(s)};
}

Verdict classify_clicks(const ClickRecord& clicks) {
    auto single_at = [](const std::array<int, 2>& c) -> int {
        if (c[0] == 1 && c[1] == 0) return 0;
        if (c[0] == 0 && c[1] == 1) return 1;
        return -1;
    };
    const int s1 = single_at(clicks.counts[0]);
    const int s2 = single_at(clicks.counts[1]);
    if (s1 >= 0 && s2 >= 0) {
        return s1 == s2 ? Verdict::psi_plus : Verdict::psi_minus;
    }
    const bool any1 = clicks.counts[0][0] + clicks.counts[0][1] > 0;
    const bool any2 = clicks.counts[1][0] + clicks.counts[1][1] > 0;
    if (any1 != any2) {
        const auto& c = any1 ? clicks.counts[0] : clicks.counts[1];
        if (c[0] == 0 || c[1] == 0) return Verdict::phi_subspace;  // all clicks at one detector
    }
    return Verdict::discard;
}

std::optional<BellOutcome> certified_outcome(Verdict v, BasisConfig config) {
    if (config == BasisConfig::psi_discriminating) {
        if (v == Verdict::psi_plus) return BellOutcome::psi_plus;
        if (v == Verdict::psi_minus) return BellOutcome::psi_minus;
    } else {
        // In the rotated frame phi- shows up as psi+ and psi- as psi-.
        if (v == Verdict::psi_plus) return BellOutcome::phi_minus;
        if (v == Verdict::psi_minus) return BellOutcome::psi_minus;
    }
    return std::nullopt;
}

BellProtocolResult physical_bell_protocol(const FockState& state, int a, int b, BasisConfig config,
                                          const DetectorModel& detectors, RngStream& rng) {
    detectors.validate();
    FockState s = state.normalized();
    if (config == BasisConfig::phi_discriminating) {
        s = raman_rotation(s, a, hadamard());
        s = raman_rotation(s, b, hadamard());
    }

    ClickRecord record;
    for (int round = 0; round < 2; ++round) {
        if (round == 1) {
            s = raman_rotation(s, a, pi_swap());
            s = raman_rotation(s, b, pi_swap());
        }
        AntiPumpResult pa = anti_pump(s, a);
        AntiPumpResult pb = anti_pump(pa.state, b);
        s = apply_mode_unitary(pb.state, {pa.photon_mode, pb.photon_mode}, splitter_50_50());

        // Collapse the photon numbers at the two detector ports, then thin
        // classically by the detection efficiency and add dark counts.
        auto dist = joint_occupation_distribution(s, {pa.photon_mode, pb.photon_mode});
        const double u = rng.uniform();
        double cum = 0.0;
        std::vector<int> sampled = dist.rbegin()->first;
        for (const auto& [occ, p] : dist) {
            cum += p;
            if (u < cum) {
                sampled = occ;
                break;
            }
        }
        s = project_occupation(s, pa.photon_mode, sampled[0]).post;
        s = project_occupation(s, pb.photon_mode, sampled[1]).post;
        for (int det = 0; det < 2; ++det) {
            int hits = rng.binomial(sampled[det], detectors.efficiency);
            if (rng.bernoulli(detectors.dark_count_prob)) hits += 1;
            record.counts[round][det] = detectors.number_resolving ? hits : (hits > 0 ? 1 : 0);
        }
        s = remove_mode(s, pb.photon_mode);
        s = remove_mode(s, pa.photon_mode);
    }

    const Verdict verdict = classify_clicks(record);
    s = retire_ensemble(retire_ensemble(s, a), b);
    return {record, verdict, certified_outcome(verdict, config), std::move(s)};
}

double acceptance_probability(BellOutcome input, BasisConfig config, const DetectorModel& detectors) {
    detectors.validate();
    const double eta = detectors.efficiency;
    const double d = detectors.dark_count_prob;

    // Under the phi config's pre-rotation, phi- enters the analyzer as a psi
    // state and psi+ as a phi state; phi+ and psi- keep their character.
    bool psi_like;
    if (config == BasisConfig::psi_discriminating) {
        psi_like = input == BellOutcome::psi_plus || input == BellOutcome::psi_minus;
    } else {
        psi_like = input == BellOutcome::phi_minus || input == BellOutcome::psi_minus;
    }

    if (psi_like) {
        // One photon per round; a certified verdict needs exactly one click
        // in each round.
        const double single = (1.0 - d) * (1.0 - (1.0 - eta) * (1.0 - d)) + d * (1.0 - eta) * (1.0 - d);
        return single * single;
    }
    // Both photons bunch into one round; the other round can click only on
    // darks.
    const double loss2 = (1.0 - eta) * (1.0 - eta);
    const double photon_round = (1.0 - d) * (1.0 - loss2 * (1.0 - d)) + d * loss2 * (1.0 - d);
    const double empty_round = 2.0 * d * (1.0 - d);
    return photon_round * empty_round;
}

}  // namespace ensq
