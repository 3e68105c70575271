#pragma once

#include <array>
#include <optional>
#include <vector>

#include "ensq/bell.hpp"
#include "ensq/ensemble.hpp"
#include "ensq/fock.hpp"
#include "ensq/rng.hpp"

namespace ensq {

/// The Pauli frame available for outcome corrections.
enum class PauliOp { identity, bit_flip, phase_flip, bit_phase_flip };

const char* to_string(PauliOp op);
Eigen::Matrix2cd pauli_matrix(PauliOp op);

struct CorrectionOp {
    int ensemble = 0;
    PauliOp op = PauliOp::identity;
};

struct MeasurementRecord {
    int ensemble_a = 0;
    int ensemble_b = 0;
    std::optional<Verdict> verdict;  // click verdict; empty on the ideal backend
    std::optional<BellOutcome> outcome;
};

struct TeleportationLog {
    std::vector<MeasurementRecord> measurements;
    std::vector<CorrectionOp> corrections;
    bool accepted = true;
};

/// Which Bell analyzer the teleportation steps use. The ideal backend
/// projects onto all four Bell states; the physical backend runs the
/// two-round click protocol and certifies only what its config can.
struct MeasurementBackend {
    bool physical = false;
    BasisConfig config = BasisConfig::psi_discriminating;
    DetectorModel detectors{};

    static MeasurementBackend ideal() { return {}; }
    static MeasurementBackend make_physical(BasisConfig c, DetectorModel d) { return {true, c, d}; }
};

/// (h1 h2 h3 + v1 v2 v3)|vac>/sqrt2 on three vacuum ensembles.
FockState prepare_ghz(const FockState& state, int e1, int e2, int e3);

/// The unified four-party resource
/// [(h1 h2 + v1 v2) h5 h6 + (h1 v2 + v1 h2) v5 v6]|vac>/2
/// on the ensembles playing roles (1, 2, 5, 6).
FockState chi_target(const RegisterPtr& reg, const std::array<int, 4>& roles_1256);

struct ChiResult {
    FockState state;
    TeleportationLog log;
};

/// Forms the chi resource from two GHZ states on roles (1..6): Hadamard on
/// roles 1-3, Bell measurement of roles (3, 4), outcome-conditioned
/// correction. Unaccepted physical runs return the input state flagged.
ChiResult prepare_chi(const FockState& state, const std::array<int, 6>& roles, const MeasurementBackend& backend,
                      RngStream& rng);

/// Correction mapping each (3,4) outcome onto the unified chi state, found
/// once by exhaustive search over the Pauli frame of roles (1, 2, 5, 6).
/// Entries name canonical roles; callers remap to their ensembles.
std::vector<CorrectionOp> chi_correction(BellOutcome outcome);

struct CnotResult {
    FockState state;
    TeleportationLog log;
    int control_out = 0;  // role-5 ensemble
    int target_out = 0;   // role-2 ensemble
};

/// Teleported C-NOT: consumes the chi resource on roles (1, 2, 5, 6) plus
/// the control and target input ensembles via Bell measurements of
/// (role 1, target) and (role 6, control), then applies the searched
/// correction. The control wire comes out on role 5 and the target wire on
/// role 2.
CnotResult teleported_cnot(const FockState& state, int control, int target,
                           const std::array<int, 4>& chi_roles_1256, const MeasurementBackend& backend,
                           RngStream& rng);

/// The 16-entry correction table for the two teleportation measurements,
/// derived by brute-force search; ops address canonical roles 2 and 5.
std::vector<CorrectionOp> cnot_correction(BellOutcome outcome_18, BellOutcome outcome_67);

/// Deterministic variant used by the table search and the branch-exhaustive
/// tests: forces both ideal measurement outcomes instead of sampling.
/// No correction is applied.
struct ForcedCnot {
    double prob = 0.0;
    FockState state;
};
ForcedCnot teleported_cnot_forced(const FockState& state, int control, int target,
                                  const std::array<int, 4>& chi_roles_1256, BellOutcome outcome_18,
                                  BellOutcome outcome_67);

FockState apply_correction(const FockState& state, const CorrectionOp& op);

Eigen::Matrix4cd cnot_matrix();

/// Independent oracle: plain 4-vector C-NOT, no Fock machinery. Basis order
/// (control, target) = (00, 01, 10, 11).
Eigen::Vector4cd matrix_cnot_reference(const Eigen::Vector2cd& control, const Eigen::Vector2cd& target);
Eigen::Vector4cd matrix_cnot_reference(const Eigen::Vector4cd& joint_input);

}  // namespace ensq
