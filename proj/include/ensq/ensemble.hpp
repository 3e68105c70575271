#pragma once

#include <string>
#include <utility>

#include "ensq/fock.hpp"

namespace ensq {

/// Readback of one ensemble's dual-rail qubit: alpha on h+|vac>, beta on
/// v+|vac>, leakage outside the single-excitation subspace. When the
/// ensemble is entangled with the rest of the register the view is not
/// defined and `factorizable` is false (leakage reads 1).
struct LogicalQubitView {
    cx alpha{0.0, 0.0};
    cx beta{0.0, 0.0};
    double leakage = 1.0;
    bool factorizable = false;
};

// Named Raman pulses, as 2x2 unitaries on (h, v).
Eigen::Matrix2cd hadamard();  // h -> (h+v)/sqrt2, v -> (h-v)/sqrt2
Eigen::Matrix2cd r_plus();    // |0> -> |1>,  |1> -> -|0>
Eigen::Matrix2cd r_minus();   // |0> -> -|1>, |1> -> |0>
Eigen::Matrix2cd pi_swap();   // the pi pulse exchanging the v and h modes

/// Loads alpha*h+ + beta*v+ onto an ensemble that is currently in vacuum.
FockState prepare_logical(const FockState& state, int ensemble, cx alpha, cx beta);

/// Single-ensemble rotation: h+ -> u00 h+ + u10 v+, v+ -> u01 h+ + u11 v+.
FockState raman_rotation(const FockState& state, int ensemble, const Eigen::Matrix2cd& u);

struct AntiPumpResult {
    FockState state;
    std::string photon_mode;
};

/// Transfers the full h occupation of an ensemble into a freshly appended
/// photonic mode (the anti-Stokes emission); the h mode ends empty in every
/// term. The transfer is taken phase-free.
AntiPumpResult anti_pump(const FockState& state, int ensemble);

/// Formal inverse of anti_pump: moves the photon occupation back into the
/// ensemble's h mode and drops the photonic mode.
FockState pump_back(const FockState& state, int ensemble, const std::string& photon_mode);

LogicalQubitView logical_view(const FockState& state, int ensemble);

/// Applies a 4x4 unitary to the joint single-excitation subspace of two
/// ensembles, basis order (hh, hv, vh, vv) with `ensemble_a` major. Terms
/// outside that subspace pass through unchanged.
FockState apply_two_qubit_unitary(const FockState& state, int ensemble_a, int ensemble_b,
                                  const Eigen::Matrix4cd& u);

/// Amplitudes on (hh, hv, vh, vv) of two ensembles for terms where every
/// other mode is empty, plus the leftover weight.
std::pair<Eigen::Vector4cd, double> two_qubit_view(const FockState& state, int a, int b);

/// Marks an ensemble as consumed; later operations addressing it throw.
FockState retire_ensemble(const FockState& state, int ensemble);

bool ensemble_in_vacuum(const FockState& state, int ensemble);

}  // namespace ensq
