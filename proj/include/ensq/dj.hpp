#pragma once

#include <optional>

#include "ensq/teleport.hpp"

namespace ensq {

/// The four two-qubit oracles |x, y> -> |x, y xor f(x)>:
/// f1: f = 0, f2: f = 1, f3: f(x) = x, f4: f(x) = 1 - x.
enum class OracleId { f1, f2, f3, f4 };

const char* to_string(OracleId id);
std::optional<OracleId> oracle_from_string(const std::string& name);
int oracle_value(OracleId id, int x);

enum class DJAnswer { constant, balanced };

const char* to_string(DJAnswer a);

/// Where the logical qubits currently live. Teleported C-NOTs move them to
/// fresh ensembles, so the wires travel.
struct DJWires {
    int query = 9;
    int aux = 10;
};

struct CnotBackend {
    bool teleported = false;
    MeasurementBackend bell{};  // backend for the teleportation measurements
};

enum class OracleForm { decomposed, direct };

struct ReadoutModel {
    bool physical = false;
    DetectorModel detectors{};
};

struct DJConfig {
    OracleForm form = OracleForm::decomposed;
    CnotBackend cnot{};
    ReadoutModel readout{};
};

/// (h9 + v9)(h10 - v10)|vac>/2 on two vacuum ensembles.
FockState prepare_dj_input(const FockState& state, int e9, int e10);

/// Direct 4x4 oracle unitary, basis (query, aux).
Eigen::Matrix4cd oracle_unitary(OracleId id);

struct OracleApplication {
    FockState state;
    DJWires wires;
    TeleportationLog log;
};

/// The pulse/C-NOT sequences realizing each oracle: f1 does nothing, f3 is
/// one C-NOT, f2 is C-NOT, r_plus on the query, C-NOT, r_minus, and f4 is
/// r_plus, C-NOT, r_minus. C-NOTs run either as direct two-qubit unitaries
/// or as full teleportation rounds on fresh resource ensembles.
OracleApplication apply_oracle_decomposed(const FockState& state, DJWires wires, OracleId id,
                                          const CnotBackend& backend, RngStream& rng);

FockState apply_oracle_direct(const FockState& state, DJWires wires, OracleId id);

struct DJResult {
    std::optional<DJAnswer> answer;  // empty when the run was discarded
    LogicalQubitView query_view;     // query wire after the final Hadamard
    DJWires wires;
    FockState pre_readout;
    TeleportationLog log;
};

/// Full single-query run: input preparation on ensembles 9 and 10, oracle,
/// Hadamard on the query wire, readout. Lost readout photons and unaccepted
/// teleportations discard the run; they never produce a verdict.
DJResult run_dj(OracleId id, const DJConfig& config, RngStream& rng);

struct OracleEquivalence {
    bool matches = false;
    cx phase{1.0, 0.0};
    double max_abs_diff = 0.0;
};

/// Checks that the decomposed pulse sequence, composed as a 4x4 matrix,
/// equals the direct oracle unitary up to a global phase.
OracleEquivalence verify_oracle_equivalence(OracleId id);

}  // namespace ensq
