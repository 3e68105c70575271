#include "ensq/dj.hpp"

#include <cmath>
#include <stdexcept>

namespace ensq {

namespace {

constexpr double kSqrtHalf = 0.70710678118654752440;

Eigen::Matrix4cd kron2(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
    Eigen::Matrix4cd m;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            m.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
        }
    }
    return m;
}

struct CnotStep {
    FockState state;
    DJWires wires;
    bool accepted = true;
};

CnotStep run_cnot(const FockState& state, DJWires wires, const CnotBackend& backend, RngStream& rng,
                  TeleportationLog& log) {
    if (!backend.teleported) {
        return {apply_two_qubit_unitary(state, wires.query, wires.aux, cnot_matrix()), wires, true};
    }
    // Fresh resource ensembles for this invocation; measured ones retire.
    const int base = state.reg()->next_ensemble_id();
    std::array<int, 6> roles;
    std::vector<int> ids;
    for (int i = 0; i < 6; ++i) {
        roles[i] = base + i;
        ids.push_back(base + i);
    }
    FockState s = add_ensembles(state, ids);
    s = prepare_ghz(s, roles[0], roles[1], roles[2]);
    s = prepare_ghz(s, roles[3], roles[4], roles[5]);

    ChiResult chi = prepare_chi(s, roles, backend.bell, rng);
    log.measurements.insert(log.measurements.end(), chi.log.measurements.begin(), chi.log.measurements.end());
    log.corrections.insert(log.corrections.end(), chi.log.corrections.begin(), chi.log.corrections.end());
    if (!chi.log.accepted) return {state, wires, false};

    CnotResult cnot = teleported_cnot(chi.state, wires.query, wires.aux, {roles[0], roles[1], roles[4], roles[5]},
                                      backend.bell, rng);
    log.measurements.insert(log.measurements.end(), cnot.log.measurements.begin(), cnot.log.measurements.end());
    log.corrections.insert(log.corrections.end(), cnot.log.corrections.begin(), cnot.log.corrections.end());
    if (!cnot.log.accepted) return {state, wires, false};

    return {cnot.state, DJWires{cnot.control_out, cnot.target_out}, true};
}

}  // namespace

const char* to_string(OracleId id) {
    switch (id) {
        case OracleId::f1: return "f1";
        case OracleId::f2: return "f2";
        case OracleId::f3: return "f3";
        case OracleId::f4: return "f4";
    }
    return "?";
}

std::optional<OracleId> oracle_from_string(const std::string& name) {
    if (name == "f1" || name == "F1" || name == "1") return OracleId::f1;
    if (name == "f2" || name == "F2" || name == "2") return OracleId::f2;
    if (name == "f3" || name == "F3" || name == "3") return OracleId::f3;
    if (name == "f4" || name == "F4" || name == "4") return OracleId::f4;
    return std::nullopt;
}

int oracle_value(OracleId id, int x) {
    switch (id) {
        case OracleId::f1: return 0;
        case OracleId::f2: return 1;
        case OracleId::f3: return x;
        case OracleId::f4: return 1 - x;
    }
    return 0;
}

const char* to_string(DJAnswer a) { return a == DJAnswer::constant ? "Constant" : "Balanced"; }

FockState prepare_dj_input(const FockState& state, int e9, int e10) {
    FockState s = prepare_logical(state, e9, kSqrtHalf, kSqrtHalf);
    return prepare_logical(s, e10, kSqrtHalf, -kSqrtHalf);
}

Eigen::Matrix4cd oracle_unitary(OracleId id) {
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) {
            const int in = 2 * x + y;
            const int out = 2 * x + (y ^ oracle_value(id, x));
            m(out, in) = 1.0;
        }
    }
    return m;
}

OracleApplication apply_oracle_decomposed(const FockState& state, DJWires wires, OracleId id,
                                          const CnotBackend& backend, RngStream& rng) {
    TeleportationLog log;
    FockState s = state;
    auto cnot = [&](bool& ok) {
        CnotStep step = run_cnot(s, wires, backend, rng, log);
        ok = step.accepted;
        if (ok) {
            s = std::move(step.state);
            wires = step.wires;
        }
    };
    bool ok = true;
    switch (id) {
        case OracleId::f1:
            break;
        case OracleId::f2:
            cnot(ok);
            if (!ok) break;
            s = raman_rotation(s, wires.query, r_plus());
            cnot(ok);
            if (!ok) break;
            s = raman_rotation(s, wires.query, r_minus());
            break;
        case OracleId::f3:
            cnot(ok);
            break;
        case OracleId::f4:
            s = raman_rotation(s, wires.query, r_plus());
            cnot(ok);
            if (!ok) break;
            s = raman_rotation(s, wires.query, r_minus());
            break;
    }
    if (!ok) {
        log.accepted = false;
        return {state, wires, std::move(log)};
    }
    return {std::move(s), wires, std::move(log)};
}

FockState apply_oracle_direct(const FockState& state, DJWires wires, OracleId id) {
    return apply_two_qubit_unitary(state, wires.query, wires.aux, oracle_unitary(id));
}

DJResult run_dj(OracleId id, const DJConfig& config, RngStream& rng) {
    RegisterPtr reg = ModeRegister::make({9, 10});
    FockState s = prepare_dj_input(vacuum_state(reg), 9, 10);
    DJWires wires{9, 10};

    TeleportationLog log;
    if (config.form == OracleForm::direct) {
        s = apply_oracle_direct(s, wires, id);
    } else {
        OracleApplication run = apply_oracle_decomposed(s, wires, id, config.cnot, rng);
        log = run.log;
        if (!log.accepted) {
            return {std::nullopt, LogicalQubitView{}, run.wires, std::move(run.state), std::move(log)};
        }
        s = std::move(run.state);
        wires = run.wires;
    }

    s = raman_rotation(s, wires.query, hadamard());
    LogicalQubitView view = logical_view(s, wires.query);

    std::optional<DJAnswer> answer;
    if (!config.readout.physical) {
        // Ideal readout: project the query wire onto its h/v excitation.
        const auto& reg2 = *s.reg();
        std::vector<std::string> modes = {reg2.mode(reg2.h_index(wires.query)).label,
                                          reg2.mode(reg2.v_index(wires.query)).label};
        auto dist = joint_occupation_distribution(s, modes);
        const double p_h = dist.count({1, 0}) ? dist.at({1, 0}) : 0.0;
        const double p_v = dist.count({0, 1}) ? dist.at({0, 1}) : 0.0;
        const double u = rng.uniform();
        if (u < p_h) {
            answer = DJAnswer::constant;
        } else if (u < p_h + p_v) {
            answer = DJAnswer::balanced;
        }
    } else {
        // Anti-pump the h excitation, detect, then rotate v into h and
        // repeat. Exactly one click across the two rounds gives a verdict.
        config.readout.detectors.validate();
        FockState work = s;
        std::array<bool, 2> click{false, false};
        for (int round = 0; round < 2; ++round) {
            if (round == 1) work = raman_rotation(work, wires.query, pi_swap());
            AntiPumpResult ap = anti_pump(work, wires.query);
            work = ap.state;
            auto dist = joint_occupation_distribution(work, {ap.photon_mode});
            const double u = rng.uniform();
            double cum = 0.0;
            int n = dist.rbegin()->first[0];
            for (const auto& [occ, p] : dist) {
                cum += p;
                if (u < cum) {
                    n = occ[0];
                    break;
                }
            }
            work = project_occupation(work, ap.photon_mode, n).post;
            int hits = rng.binomial(n, config.readout.detectors.efficiency);
            if (rng.bernoulli(config.readout.detectors.dark_count_prob)) hits += 1;
            click[round] = hits > 0;
            work = remove_mode(work, ap.photon_mode);
        }
        if (click[0] && !click[1]) answer = DJAnswer::constant;
        if (!click[0] && click[1]) answer = DJAnswer::balanced;
    }

    if (!answer) log.accepted = false;
    return {answer, view, wires, std::move(s), std::move(log)};
}

OracleEquivalence verify_oracle_equivalence(OracleId id) {
    const Eigen::Matrix4cd eye = Eigen::Matrix4cd::Identity();
    const Eigen::Matrix4cd cn = cnot_matrix();
    const Eigen::Matrix4cd rp = kron2(r_plus(), Eigen::Matrix2cd::Identity());
    const Eigen::Matrix4cd rm = kron2(r_minus(), Eigen::Matrix2cd::Identity());

    Eigen::Matrix4cd seq = eye;
    switch (id) {
        case OracleId::f1: break;
        case OracleId::f2: seq = rm * cn * rp * cn; break;
        case OracleId::f3: seq = cn; break;
        case OracleId::f4: seq = rm * cn * rp; break;
    }
    const Eigen::Matrix4cd direct = oracle_unitary(id);

    OracleEquivalence result;
    result.phase = (direct.adjoint() * seq).trace() / 4.0;
    if (std::abs(std::abs(result.phase) - 1.0) > 1e-12) {
        result.matches = false;
        result.max_abs_diff = (seq - direct).cwiseAbs().maxCoeff();
        return result;
    }
    result.max_abs_diff = (seq - result.phase * direct).cwiseAbs().maxCoeff();
    result.matches = result.max_abs_diff <= 1e-12;
    return result;
}

}  // namespace ensq
