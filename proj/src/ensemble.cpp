#include "ensq/ensemble.hpp"

#include <cmath>
#include <stdexcept>

namespace ensq {

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

constexpr double kSqrtHalf = 0.70710678118654752440;

}  // namespace

Eigen::Matrix2cd hadamard() {
    Eigen::Matrix2cd m;
    m << kSqrtHalf, kSqrtHalf, kSqrtHalf, -kSqrtHalf;
    return m;
}

Eigen::Matrix2cd r_plus() {
    Eigen::Matrix2cd m;
    m << 0, -1, 1, 0;
    return m;
}

Eigen::Matrix2cd r_minus() {
    Eigen::Matrix2cd m;
    m << 0, 1, -1, 0;
    return m;
}

Eigen::Matrix2cd pi_swap() {
    Eigen::Matrix2cd m;
    m << 0, 1, 1, 0;
    return m;
}

bool ensemble_in_vacuum(const FockState& state, int ensemble) {
    const std::size_t h = state.reg()->h_index(ensemble);
    const std::size_t v = state.reg()->v_index(ensemble);
    for (const auto& [occ, amp] : state.amplitudes()) {
        if (occ[h] != 0 || occ[v] != 0) return false;
    }
    return true;
}

FockState prepare_logical(const FockState& state, int ensemble, cx alpha, cx beta) {
    if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > 1e-10) {
        fail("logical coefficients are not normalized");
    }
    if (!ensemble_in_vacuum(state, ensemble)) {
        fail("ensemble " + std::to_string(ensemble) + " is not in vacuum");
    }
    const std::size_t h = state.reg()->h_index(ensemble);
    const std::size_t v = state.reg()->v_index(ensemble);
    FockState::AmpMap out;
    for (const auto& [occ, amp] : state.amplitudes()) {
        if (std::abs(alpha) >= kPruneThreshold) {
            FockState::OccVec o = occ;
            o[h] = 1;
            out.emplace(std::move(o), alpha * amp);
        }
        if (std::abs(beta) >= kPruneThreshold) {
            FockState::OccVec o = occ;
            o[v] = 1;
            out.emplace(std::move(o), beta * amp);
        }
    }
    return FockState::make(state.reg(), std::move(out), state.is_normalized(), state.lost_weight());
}

FockState raman_rotation(const FockState& state, int ensemble, const Eigen::Matrix2cd& u) {
    const auto& reg = *state.reg();
    std::vector<std::string> modes = {reg.mode(reg.h_index(ensemble)).label,
                                      reg.mode(reg.v_index(ensemble)).label};
    return apply_mode_unitary(state, modes, u);
}

AntiPumpResult anti_pump(const FockState& state, int ensemble) {
    const std::size_t h = state.reg()->h_index(ensemble);
    std::string photon_label;
    RegisterPtr reg2 = state.reg()->with_photon_mode(&photon_label);
    FockState::AmpMap out;
    for (const auto& [occ, amp] : state.amplitudes()) {
        FockState::OccVec o = occ;
        o.push_back(occ[h]);  // photon mode takes the stored h excitation
        o[h] = 0;
        out.emplace(std::move(o), amp);
    }
    FockState s = FockState::make(std::move(reg2), std::move(out), state.is_normalized(), state.lost_weight());
    return {std::move(s), std::move(photon_label)};
}

FockState pump_back(const FockState& state, int ensemble, const std::string& photon_mode) {
    const std::size_t h = state.reg()->h_index(ensemble);
    const std::size_t p = state.reg()->index_of(photon_mode);
    FockState::AmpMap out;
    for (const auto& [occ, amp] : state.amplitudes()) {
        if (occ[h] != 0) fail("pump_back target h mode is occupied");
        FockState::OccVec o = occ;
        o[h] = occ[p];
        o[p] = 0;
        out.emplace(std::move(o), amp);
    }
    FockState s = FockState::make(state.reg(), std::move(out), state.is_normalized(), state.lost_weight());
    return remove_mode(s, photon_mode);
}

LogicalQubitView logical_view(const FockState& state, int ensemble) {
    if (state.is_zero()) return {};
    FockState s = state.normalized();
    const std::size_t h = s.reg()->h_index(ensemble);
    const std::size_t v = s.reg()->v_index(ensemble);

    // Amplitude maps over the rest of the register, conditioned on the
    // ensemble holding exactly the h (resp. v) excitation.
    FockState::AmpMap rest_h, rest_v;
    for (const auto& [occ, amp] : s.amplitudes()) {
        const int nh = occ[h];
        const int nv = occ[v];
        FockState::OccVec rest = occ;
        rest[h] = 0;
        rest[v] = 0;
        if (nh == 1 && nv == 0) {
            rest_h[std::move(rest)] += amp;
        } else if (nh == 0 && nv == 1) {
            rest_v[std::move(rest)] += amp;
        }
    }
    double wh = 0.0, wv = 0.0;
    for (const auto& [occ, amp] : rest_h) wh += std::norm(amp);
    for (const auto& [occ, amp] : rest_v) wv += std::norm(amp);

    LogicalQubitView view;
    if (wh + wv < 1e-24) {
        view.leakage = 1.0;
        view.factorizable = true;  // nothing in the single-excitation subspace
        return view;
    }
    const FockState::AmpMap& pivot = (wh >= wv) ? rest_h : rest_v;
    const double pivot_norm = std::sqrt(wh >= wv ? wh : wv);
    auto overlap = [&](const FockState::AmpMap& branch) {
        cx sum(0.0, 0.0);
        for (const auto& [occ, amp] : pivot) {
            auto it = branch.find(occ);
            if (it != branch.end()) sum += std::conj(amp) * it->second;
        }
        return sum / pivot_norm;
    };
    view.alpha = overlap(rest_h);
    view.beta = overlap(rest_v);
    double residual = (wh - std::norm(view.alpha)) + (wv - std::norm(view.beta));
    if (residual > 1e-10) {
        return {};  // entangled with the rest: no single-qubit description
    }
    view.leakage = std::max(0.0, 1.0 - std::norm(view.alpha) - std::norm(view.beta));
    view.factorizable = true;
    return view;
}

FockState apply_two_qubit_unitary(const FockState& state, int ensemble_a, int ensemble_b,
                                  const Eigen::Matrix4cd& u) {
    Eigen::MatrixXcd delta = u.adjoint() * u - Eigen::Matrix4cd::Identity();
    if (delta.cwiseAbs().maxCoeff() > kUnitaryTol) fail("two-qubit matrix is not unitary");
    const auto& reg = *state.reg();
    const std::size_t ha = reg.h_index(ensemble_a), va = reg.v_index(ensemble_a);
    const std::size_t hb = reg.h_index(ensemble_b), vb = reg.v_index(ensemble_b);
    const std::array<std::pair<std::size_t, std::size_t>, 4> basis = {
        std::pair{ha, hb}, {ha, vb}, {va, hb}, {va, vb}};

    FockState::AmpMap out;
    for (const auto& [occ, amp] : state.amplitudes()) {
        int k = -1;
        if (occ[ha] + occ[va] == 1 && occ[hb] + occ[vb] == 1) {
            k = (occ[va] << 1) | occ[vb];
        }
        if (k < 0) {
            out[occ] += amp;
            continue;
        }
        for (int j = 0; j < 4; ++j) {
            cx ujk = u(j, k);
            if (ujk == cx(0.0, 0.0)) continue;
            FockState::OccVec o = occ;
            o[ha] = o[va] = o[hb] = o[vb] = 0;
            o[basis[j].first] = 1;
            o[basis[j].second] = 1;
            out[std::move(o)] += amp * ujk;
        }
    }
    for (auto it = out.begin(); it != out.end();) {
        it = (std::abs(it->second) < kPruneThreshold) ? out.erase(it) : std::next(it);
    }
    return FockState::make(state.reg(), std::move(out), state.is_normalized(), state.lost_weight());
}

std::pair<Eigen::Vector4cd, double> two_qubit_view(const FockState& state, int a, int b) {
    FockState s = state.normalized();
    const auto& reg = *s.reg();
    const std::size_t ha = reg.h_index(a), va = reg.v_index(a);
    const std::size_t hb = reg.h_index(b), vb = reg.v_index(b);
    Eigen::Vector4cd vec = Eigen::Vector4cd::Zero();
    for (const auto& [occ, amp] : s.amplitudes()) {
        bool rest_empty = true;
        for (std::size_t i = 0; i < occ.size() && rest_empty; ++i) {
            if (i == ha || i == va || i == hb || i == vb) continue;
            rest_empty = occ[i] == 0;
        }
        if (!rest_empty) continue;
        if (occ[ha] + occ[va] == 1 && occ[hb] + occ[vb] == 1) {
            vec[(occ[va] << 1) | occ[vb]] = amp;
        }
    }
    double leakage = std::max(0.0, 1.0 - vec.squaredNorm());
    return {vec, leakage};
}

FockState retire_ensemble(const FockState& state, int ensemble) {
    return state.with_register(state.reg()->with_retired(ensemble));
}

}  // namespace ensq
