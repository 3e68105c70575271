#include "ensq/teleport.hpp"

#include <cmath>
#include <stdexcept>

namespace ensq {

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

constexpr double kSqrtHalf = 0.70710678118654752440;

constexpr std::array<PauliOp, 4> kFrame = {PauliOp::identity, PauliOp::bit_flip, PauliOp::phase_flip,
                                           PauliOp::bit_phase_flip};

int outcome_index(BellOutcome o) { return static_cast<int>(o); }

// ---------------------------------------------------------------------------
// Correction-table search. The protocols need outcome-conditioned
// single-qubit corrections; rather than hard-coding them, the tables are
// found by exhaustive search over the Pauli frame and cached.

struct ChiTables {
    std::array<std::vector<CorrectionOp>, 4> by_outcome;
};

// Fresh six-ensemble workspace holding the two GHZ states with the role-1..3
// Hadamards applied, i.e. the state right before the (3,4) measurement.
FockState chi_premeasure_state() {
    RegisterPtr reg = ModeRegister::make({1, 2, 3, 4, 5, 6});
    FockState s = vacuum_state(reg);
    s = prepare_ghz(s, 1, 2, 3);
    s = prepare_ghz(s, 4, 5, 6);
    for (int e : {1, 2, 3}) s = raman_rotation(s, e, hadamard());
    return s;
}

const ChiTables& chi_tables() {
    static const ChiTables tables = [] {
        ChiTables t;
        const FockState pre = chi_premeasure_state();
        const std::array<int, 4> roles = {1, 2, 5, 6};
        for (BellOutcome outcome : kBellOutcomes) {
            BellProjection proj = ideal_bell_project(pre, 3, 4, outcome);
            if (proj.prob <= 0.0) fail("chi search: outcome has zero probability");
            const FockState target = chi_target(proj.post.reg(), roles);
            bool found = false;
            // Lexicographic enumeration, identity first, so the minimal
            // correction is picked (PhiPlus resolves to no correction).
            for (int c = 0; c < 256 && !found; ++c) {
                std::array<PauliOp, 4> ops = {kFrame[c >> 6 & 3], kFrame[c >> 4 & 3], kFrame[c >> 2 & 3],
                                              kFrame[c & 3]};
                FockState corrected = proj.post;
                for (int i = 0; i < 4; ++i) {
                    if (ops[i] != PauliOp::identity) {
                        corrected = apply_correction(corrected, {roles[i], ops[i]});
                    }
                }
                if (fidelity(corrected, target) >= 1.0 - 1e-10) {
                    std::vector<CorrectionOp>& entry = t.by_outcome[outcome_index(outcome)];
                    for (int i = 0; i < 4; ++i) {
                        if (ops[i] != PauliOp::identity) entry.push_back({roles[i], ops[i]});
                    }
                    found = true;
                }
            }
            if (!found) fail("chi search: no Pauli correction reaches the chi state");
        }
        return t;
    }();
    return tables;
}

struct CnotTables {
    // [outcome_18][outcome_67] -> ops on roles 2 and 5
    std::array<std::array<std::vector<CorrectionOp>, 4>, 4> entries;
};

// Workspace with an exact chi resource on roles (1,2,5,6) and the given
// control/target qubits on ensembles 7 and 8.
FockState cnot_probe_state(const Eigen::Vector2cd& control, const Eigen::Vector2cd& target) {
    RegisterPtr reg = ModeRegister::make({1, 2, 5, 6, 7, 8});
    FockState s = chi_target(reg, {1, 2, 5, 6});
    s = prepare_logical(s, 7, control(0), control(1));
    s = prepare_logical(s, 8, target(0), target(1));
    return s;
}

const CnotTables& cnot_tables() {
    static const CnotTables tables = [] {
        // Probe inputs spanning the two-qubit space; the superposition and
        // complex entries pin the relative phases a basis-state check misses.
        const Eigen::Vector2cd zero(1.0, 0.0), one(0.0, 1.0);
        const Eigen::Vector2cd plus(kSqrtHalf, kSqrtHalf), minus(kSqrtHalf, -kSqrtHalf);
        const Eigen::Vector2cd probe_c(cx(0.6, 0.0), cx(0.0, 0.8));
        const Eigen::Vector2cd probe_t(cx(0.48, 0.36), cx(-0.8, 0.0));
        const std::vector<std::pair<Eigen::Vector2cd, Eigen::Vector2cd>> probes = {
            {zero, zero}, {zero, one}, {one, zero}, {one, one},
            {plus, plus}, {plus, minus}, {probe_c, probe_t}};

        CnotTables t;
        for (BellOutcome o18 : kBellOutcomes) {
            for (BellOutcome o67 : kBellOutcomes) {
                int n_valid = 0;
                for (int c = 0; c < 16; ++c) {
                    const PauliOp op2 = kFrame[c >> 2 & 3];
                    const PauliOp op5 = kFrame[c & 3];
                    bool ok = true;
                    for (const auto& [ctrl, tgt] : probes) {
                        FockState s = cnot_probe_state(ctrl, tgt);
                        ForcedCnot forced = teleported_cnot_forced(s, 7, 8, {1, 2, 5, 6}, o18, o67);
                        FockState corrected = forced.state;
                        if (op2 != PauliOp::identity) corrected = apply_correction(corrected, {2, op2});
                        if (op5 != PauliOp::identity) corrected = apply_correction(corrected, {5, op5});
                        auto [vec, leak] = two_qubit_view(corrected, 5, 2);  // (control_out, target_out)
                        Eigen::Vector4cd want = matrix_cnot_reference(ctrl, tgt);
                        if (leak > 1e-10 || std::norm(want.dot(vec)) < 1.0 - 1e-10) {
                            ok = false;
                            break;
                        }
                    }
                    if (ok) {
                        ++n_valid;
                        auto& entry = t.entries[outcome_index(o18)][outcome_index(o67)];
                        entry.clear();
                        if (op2 != PauliOp::identity) entry.push_back({2, op2});
                        if (op5 != PauliOp::identity) entry.push_back({5, op5});
                    }
                }
                if (n_valid != 1) fail("cnot search: correction entry not unique");
            }
        }
        return t;
    }();
    return tables;
}

// One Bell measurement through the selected backend. Returns nullopt outcome
// when the run is not certified.
struct BackendMeasurement {
    MeasurementRecord record;
    FockState post;
};

BackendMeasurement measure_pair(const FockState& state, int a, int b, const MeasurementBackend& backend,
                                RngStream& rng) {
    if (!backend.physical) {
        BellSample sample = ideal_bell_measure(state, a, b, rng);
        MeasurementRecord rec{a, b, std::nullopt, sample.outcome};
        return {rec, sample.outcome ? std::move(sample.post) : state};
    }
    BellProtocolResult run = physical_bell_protocol(state, a, b, backend.config, backend.detectors, rng);
    MeasurementRecord rec{a, b, run.verdict, run.outcome};
    return {rec, run.outcome ? std::move(run.post) : state};
}

}  // namespace

const char* to_string(PauliOp op) {
    switch (op) {
        case PauliOp::identity: return "I";
        case PauliOp::bit_flip: return "X";
        case PauliOp::phase_flip: return "Z";
        case PauliOp::bit_phase_flip: return "XZ";
    }
    return "?";
}

Eigen::Matrix2cd pauli_matrix(PauliOp op) {
    Eigen::Matrix2cd m;
    switch (op) {
        case PauliOp::identity: m << 1, 0, 0, 1; break;
        case PauliOp::bit_flip: m << 0, 1, 1, 0; break;
        case PauliOp::phase_flip: m << 1, 0, 0, -1; break;
        case PauliOp::bit_phase_flip: m << 0, -1, 1, 0; break;
    }
    return m;
}

FockState apply_correction(const FockState& state, const CorrectionOp& op) {
    return raman_rotation(state, op.ensemble, pauli_matrix(op.op));
}

FockState prepare_ghz(const FockState& state, int e1, int e2, int e3) {
    for (int e : {e1, e2, e3}) {
        if (!ensemble_in_vacuum(state, e)) fail("prepare_ghz: ensemble " + std::to_string(e) + " not in vacuum");
    }
    const auto& reg = *state.reg();
    const std::array<std::size_t, 3> h = {reg.h_index(e1), reg.h_index(e2), reg.h_index(e3)};
    const std::array<std::size_t, 3> v = {reg.v_index(e1), reg.v_index(e2), reg.v_index(e3)};
    FockState::AmpMap out;
    for (const auto& [occ, amp] : state.amplitudes()) {
        FockState::OccVec oh = occ, ov = occ;
        for (int i = 0; i < 3; ++i) {
            oh[h[i]] = 1;
            ov[v[i]] = 1;
        }
        out[std::move(oh)] += amp * kSqrtHalf;
        out[std::move(ov)] += amp * kSqrtHalf;
    }
    return FockState::make(state.reg(), std::move(out), state.is_normalized(), state.lost_weight());
}

FockState chi_target(const RegisterPtr& reg, const std::array<int, 4>& roles_1256) {
    const int e1 = roles_1256[0], e2 = roles_1256[1], e5 = roles_1256[2], e6 = roles_1256[3];
    auto term = [&](bool v1, bool v2, bool v56) {
        FockState::OccVec occ(reg->size(), 0);
        occ[v1 ? reg->v_index(e1) : reg->h_index(e1)] = 1;
        occ[v2 ? reg->v_index(e2) : reg->h_index(e2)] = 1;
        occ[v56 ? reg->v_index(e5) : reg->h_index(e5)] = 1;
        occ[v56 ? reg->v_index(e6) : reg->h_index(e6)] = 1;
        return occ;
    };
    std::vector<std::pair<FockState::OccVec, cx>> terms = {
        {term(false, false, false), 0.5},  // h1 h2 h5 h6
        {term(true, true, false), 0.5},    // v1 v2 h5 h6
        {term(false, true, true), 0.5},    // h1 v2 v5 v6
        {term(true, false, true), 0.5},    // v1 h2 v5 v6
    };
    return FockState::from_terms(reg, terms);
}

std::vector<CorrectionOp> chi_correction(BellOutcome outcome) {
    return chi_tables().by_outcome[outcome_index(outcome)];
}

ChiResult prepare_chi(const FockState& state, const std::array<int, 6>& roles, const MeasurementBackend& backend,
                      RngStream& rng) {
    FockState s = state;
    for (int i = 0; i < 3; ++i) s = raman_rotation(s, roles[i], hadamard());

    BackendMeasurement m = measure_pair(s, roles[2], roles[3], backend, rng);
    TeleportationLog log;
    log.measurements.push_back(m.record);
    if (!m.record.outcome) {
        log.accepted = false;
        return {state, std::move(log)};  // retry-from-scratch semantics
    }
    FockState post = std::move(m.post);
    for (const CorrectionOp& op : chi_correction(*m.record.outcome)) {
        // Table roles 1,2,5,6 map onto the caller's ensembles.
        static constexpr std::array<int, 7> kRoleSlot = {-1, 0, 1, -1, -1, 4, 5};
        CorrectionOp mapped{roles[kRoleSlot[op.ensemble]], op.op};
        post = apply_correction(post, mapped);
        log.corrections.push_back(mapped);
    }
    return {std::move(post), std::move(log)};
}

ForcedCnot teleported_cnot_forced(const FockState& state, int control, int target,
                                  const std::array<int, 4>& chi_roles_1256, BellOutcome outcome_18,
                                  BellOutcome outcome_67) {
    BellProjection p1 = ideal_bell_project(state, chi_roles_1256[0], target, outcome_18);
    if (p1.prob <= 0.0) return {0.0, p1.post};
    BellProjection p2 = ideal_bell_project(p1.post, chi_roles_1256[3], control, outcome_67);
    return {p1.prob * p2.prob, p2.post};
}

std::vector<CorrectionOp> cnot_correction(BellOutcome outcome_18, BellOutcome outcome_67) {
    return cnot_tables().entries[outcome_index(outcome_18)][outcome_index(outcome_67)];
}

CnotResult teleported_cnot(const FockState& state, int control, int target,
                           const std::array<int, 4>& chi_roles_1256, const MeasurementBackend& backend,
                           RngStream& rng) {
    const int role1 = chi_roles_1256[0];
    const int role2 = chi_roles_1256[1];
    const int role5 = chi_roles_1256[2];
    const int role6 = chi_roles_1256[3];

    TeleportationLog log;
    BackendMeasurement m1 = measure_pair(state, role1, target, backend, rng);
    log.measurements.push_back(m1.record);
    if (!m1.record.outcome) {
        log.accepted = false;
        return {state, std::move(log), role5, role2};
    }
    BackendMeasurement m2 = measure_pair(m1.post, role6, control, backend, rng);
    log.measurements.push_back(m2.record);
    if (!m2.record.outcome) {
        log.accepted = false;
        return {state, std::move(log), role5, role2};
    }

    FockState post = std::move(m2.post);
    for (const CorrectionOp& op : cnot_correction(*m1.record.outcome, *m2.record.outcome)) {
        CorrectionOp mapped{op.ensemble == 2 ? role2 : role5, op.op};
        post = apply_correction(post, mapped);
        log.corrections.push_back(mapped);
    }
    return {std::move(post), std::move(log), role5, role2};
}

Eigen::Matrix4cd cnot_matrix() {
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m(0, 0) = 1;
    m(1, 1) = 1;
    m(3, 2) = 1;
    m(2, 3) = 1;
    return m;
}

Eigen::Vector4cd matrix_cnot_reference(const Eigen::Vector2cd& control, const Eigen::Vector2cd& target) {
    Eigen::Vector4cd in;
    in << control(0) * target(0), control(0) * target(1), control(1) * target(0), control(1) * target(1);
    return matrix_cnot_reference(in);
}

Eigen::Vector4cd matrix_cnot_reference(const Eigen::Vector4cd& joint_input) {
    return cnot_matrix() * joint_input;
}

}  // namespace ensq
