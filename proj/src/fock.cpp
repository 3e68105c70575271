#include "ensq/fock.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ensq {

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

void accumulate(FockState::AmpMap& map, const FockState::OccVec& occ, cx amp) {
    auto it = map.find(occ);
    if (it == map.end()) {
        map.emplace(occ, amp);
    } else {
        it->second += amp;
    }
}

void prune(FockState::AmpMap& map) {
    for (auto it = map.begin(); it != map.end();) {
        if (std::abs(it->second) < kPruneThreshold) {
            it = map.erase(it);
        } else {
            ++it;
        }
    }
}

double map_norm_squared(const FockState::AmpMap& map) {
    double s = 0.0;
    for (const auto& [occ, amp] : map) s += std::norm(amp);
    return s;
}

void check_unitary(const Eigen::MatrixXcd& u) {
    Eigen::MatrixXcd delta = u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols());
    if (delta.cwiseAbs().maxCoeff() > kUnitaryTol) fail("matrix is not unitary within tolerance");
}

}  // namespace

// ---------------------------------------------------------------------------
// ModeRegister

RegisterPtr ModeRegister::make(const std::vector<int>& ensemble_ids, int cutoff) {
    if (cutoff < 2) fail("mode cutoff must be >= 2");
    auto reg = std::shared_ptr<ModeRegister>(new ModeRegister());
    reg->cutoff_ = cutoff;
    for (int id : ensemble_ids) {
        if (reg->ensemble_modes_.count(id)) fail("duplicate ensemble id " + std::to_string(id));
        reg->modes_.push_back({"h" + std::to_string(id), ModeKind::atomic_h, id});
        reg->modes_.push_back({"v" + std::to_string(id), ModeKind::atomic_v, id});
        reg->ensemble_modes_[id] = {reg->modes_.size() - 2, reg->modes_.size() - 1};
    }
    reg->rebuild_lookup();
    return reg;
}

void ModeRegister::rebuild_lookup() {
    by_label_.clear();
    ensemble_modes_.clear();
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        if (by_label_.count(modes_[i].label)) fail("duplicate mode label " + modes_[i].label);
        by_label_[modes_[i].label] = i;
        if (modes_[i].kind == ModeKind::atomic_h) ensemble_modes_[modes_[i].owner].first = i;
        if (modes_[i].kind == ModeKind::atomic_v) ensemble_modes_[modes_[i].owner].second = i;
    }
}

RegisterPtr ModeRegister::with_photon_mode(std::string* label_out) const {
    auto reg = std::shared_ptr<ModeRegister>(new ModeRegister(*this));
    reg->photon_seq_ += 1;
    std::string label = "p" + std::to_string(reg->photon_seq_);
    reg->modes_.push_back({label, ModeKind::photonic, -1});
    reg->rebuild_lookup();
    if (label_out) *label_out = label;
    return reg;
}

RegisterPtr ModeRegister::without_mode(std::size_t index) const {
    if (index >= modes_.size()) fail("mode index out of range");
    auto reg = std::shared_ptr<ModeRegister>(new ModeRegister(*this));
    reg->modes_.erase(reg->modes_.begin() + static_cast<std::ptrdiff_t>(index));
    reg->rebuild_lookup();
    return reg;
}

RegisterPtr ModeRegister::with_ensembles(const std::vector<int>& ids) const {
    auto reg = std::shared_ptr<ModeRegister>(new ModeRegister(*this));
    for (int id : ids) {
        if (reg->ensemble_modes_.count(id)) fail("ensemble id already present: " + std::to_string(id));
        reg->modes_.push_back({"h" + std::to_string(id), ModeKind::atomic_h, id});
        reg->modes_.push_back({"v" + std::to_string(id), ModeKind::atomic_v, id});
    }
    reg->rebuild_lookup();
    return reg;
}

RegisterPtr ModeRegister::with_retired(int ensemble_id) const {
    if (!has_ensemble(ensemble_id)) fail("unknown ensemble " + std::to_string(ensemble_id));
    auto reg = std::shared_ptr<ModeRegister>(new ModeRegister(*this));
    reg->retired_.insert(ensemble_id);
    return reg;
}

bool ModeRegister::has_mode(const std::string& label) const { return by_label_.count(label) != 0; }

std::size_t ModeRegister::index_of(const std::string& label) const {
    auto it = by_label_.find(label);
    if (it == by_label_.end()) fail("unknown mode label " + label);
    return it->second;
}

bool ModeRegister::has_ensemble(int id) const { return ensemble_modes_.count(id) != 0; }

bool ModeRegister::retired(int id) const { return retired_.count(id) != 0; }

std::size_t ModeRegister::h_index(int ensemble_id) const {
    auto it = ensemble_modes_.find(ensemble_id);
    if (it == ensemble_modes_.end()) fail("unknown ensemble " + std::to_string(ensemble_id));
    if (retired_.count(ensemble_id)) fail("ensemble " + std::to_string(ensemble_id) + " has been measured and retired");
    return it->second.first;
}

std::size_t ModeRegister::v_index(int ensemble_id) const {
    auto it = ensemble_modes_.find(ensemble_id);
    if (it == ensemble_modes_.end()) fail("unknown ensemble " + std::to_string(ensemble_id));
    if (retired_.count(ensemble_id)) fail("ensemble " + std::to_string(ensemble_id) + " has been measured and retired");
    return it->second.second;
}

std::vector<int> ModeRegister::ensemble_ids() const {
    std::vector<int> ids;
    ids.reserve(ensemble_modes_.size());
    for (const auto& [id, unused] : ensemble_modes_) ids.push_back(id);
    return ids;
}

int ModeRegister::next_ensemble_id() const {
    int next = 1;
    for (const auto& [id, unused] : ensemble_modes_) next = std::max(next, id + 1);
    return next;
}

bool ModeRegister::same_layout(const ModeRegister& other) const {
    if (cutoff_ != other.cutoff_ || modes_.size() != other.modes_.size()) return false;
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        const ModeDesc& a = modes_[i];
        const ModeDesc& b = other.modes_[i];
        if (a.label != b.label || a.kind != b.kind || a.owner != b.owner) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// FockState

FockState FockState::vacuum(RegisterPtr reg) {
    AmpMap amps;
    amps.emplace(OccVec(reg->size(), 0), cx(1.0, 0.0));
    return FockState(std::move(reg), std::move(amps), true, 0.0);
}

FockState FockState::make(RegisterPtr reg, AmpMap amps, bool normalized_tag, double lost_weight) {
    for (const auto& [occ, amp] : amps) {
        if (occ.size() != reg->size()) fail("occupation vector length does not match register");
        if (!std::isfinite(amp.real()) || !std::isfinite(amp.imag())) fail("non-finite amplitude");
        for (std::uint8_t n : occ) {
            if (n > reg->cutoff()) fail("occupation exceeds cutoff");
        }
    }
    prune(amps);
    return FockState(std::move(reg), std::move(amps), normalized_tag, lost_weight);
}

FockState FockState::from_terms(RegisterPtr reg, const std::vector<std::pair<OccVec, cx>>& terms,
                                bool renormalize) {
    AmpMap amps;
    for (const auto& [occ, amp] : terms) accumulate(amps, occ, amp);
    FockState s = make(std::move(reg), std::move(amps), false, 0.0);
    if (renormalize) return s.normalized();
    double n2 = s.norm_squared();
    return FockState(s.reg_, s.amps_, std::abs(n2 - 1.0) <= 1e-12, 0.0);
}

double FockState::norm_squared() const { return map_norm_squared(amps_); }

double FockState::norm() const { return std::sqrt(norm_squared()); }

cx FockState::amplitude(const OccVec& occ) const {
    auto it = amps_.find(occ);
    return it == amps_.end() ? cx(0.0, 0.0) : it->second;
}

FockState FockState::normalized() const {
    double n = norm();
    if (n <= 0.0) fail("cannot normalize the zero state");
    if (normalized_ && std::abs(n - 1.0) <= 1e-12) return *this;
    AmpMap amps = amps_;
    for (auto& [occ, amp] : amps) amp /= n;
    return FockState(reg_, std::move(amps), true, lost_weight_);
}

FockState FockState::with_register(RegisterPtr reg) const {
    if (!reg->same_layout(*reg_)) fail("register layout mismatch");
    return FockState(std::move(reg), amps_, normalized_, lost_weight_);
}

// ---------------------------------------------------------------------------
// Operations

FockState::OccVec occupation(const ModeRegister& reg,
                             std::initializer_list<std::pair<const char*, int>> occs) {
    FockState::OccVec occ(reg.size(), 0);
    for (const auto& [label, n] : occs) {
        if (n < 0 || n > reg.cutoff()) fail("occupation out of range");
        occ[reg.index_of(label)] = static_cast<std::uint8_t>(n);
    }
    return occ;
}

FockState vacuum_state(RegisterPtr reg) { return FockState::vacuum(std::move(reg)); }

FockState apply_creation(const FockState& state, const std::string& mode) {
    const std::size_t idx = state.reg()->index_of(mode);
    const int cutoff = state.reg()->cutoff();
    FockState::AmpMap out;
    double lost = 0.0;
    for (const auto& [occ, amp] : state.amplitudes()) {
        int n = occ[idx];
        if (n + 1 > cutoff) {
            lost += std::norm(amp);
            continue;
        }
        FockState::OccVec occ2 = occ;
        occ2[idx] = static_cast<std::uint8_t>(n + 1);
        accumulate(out, occ2, amp * std::sqrt(static_cast<double>(n + 1)));
    }
    prune(out);
    return FockState::make(state.reg(), std::move(out), false, state.lost_weight() + lost);
}

FockState apply_annihilation(const FockState& state, const std::string& mode) {
    const std::size_t idx = state.reg()->index_of(mode);
    FockState::AmpMap out;
    for (const auto& [occ, amp] : state.amplitudes()) {
        int n = occ[idx];
        if (n == 0) continue;
        FockState::OccVec occ2 = occ;
        occ2[idx] = static_cast<std::uint8_t>(n - 1);
        accumulate(out, occ2, amp * std::sqrt(static_cast<double>(n)));
    }
    prune(out);
    return FockState::make(state.reg(), std::move(out), false, state.lost_weight());
}

FockState apply_mode_unitary(const FockState& state, const std::vector<std::string>& modes,
                             const Eigen::MatrixXcd& u) {
    const auto& reg = *state.reg();
    const std::size_t m = modes.size();
    if (static_cast<std::size_t>(u.rows()) != m || static_cast<std::size_t>(u.cols()) != m) {
        fail("matrix dimension does not match mode count");
    }
    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = reg.index_of(modes[i]);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            if (idx[i] == idx[j]) fail("repeated mode label " + modes[i]);
        }
    }
    check_unitary(u);

    const int cutoff = reg.cutoff();
    FockState::AmpMap out;
    FockState::AmpMap dropped;  // over-cutoff contributions, kept separate so they can interfere
    using Mono = std::vector<std::uint8_t>;

    for (const auto& [occ, amp] : state.amplitudes()) {
        std::vector<int> n(m);
        int total = 0;
        for (std::size_t i = 0; i < m; ++i) {
            n[i] = occ[idx[i]];
            total += n[i];
        }
        if (total == 0) {
            accumulate(out, occ, amp);
            continue;
        }
        // Expand prod_i (sum_j U(j,i) b_j^dag)^{n_i} into monomials.
        std::map<Mono, cx> poly;
        poly.emplace(Mono(m, 0), cx(1.0, 0.0));
        for (std::size_t i = 0; i < m; ++i) {
            for (int rep = 0; rep < n[i]; ++rep) {
                std::map<Mono, cx> next;
                for (const auto& [mono, coeff] : poly) {
                    for (std::size_t j = 0; j < m; ++j) {
                        cx uji = u(static_cast<long>(j), static_cast<long>(i));
                        if (uji == cx(0.0, 0.0)) continue;
                        Mono mono2 = mono;
                        mono2[j] += 1;
                        auto it = next.find(mono2);
                        if (it == next.end()) {
                            next.emplace(std::move(mono2), coeff * uji);
                        } else {
                            it->second += coeff * uji;
                        }
                    }
                }
                poly.swap(next);
            }
        }
        double fact_in = 1.0;
        for (std::size_t i = 0; i < m; ++i) fact_in *= factorial(n[i]);
        for (const auto& [mono, coeff] : poly) {
            double fact_out = 1.0;
            bool over = false;
            for (std::size_t j = 0; j < m; ++j) {
                fact_out *= factorial(mono[j]);
                if (mono[j] > cutoff) over = true;
            }
            cx contrib = amp * coeff * std::sqrt(fact_out / fact_in);
            FockState::OccVec occ2 = occ;
            for (std::size_t j = 0; j < m; ++j) occ2[idx[j]] = mono[j];
            accumulate(over ? dropped : out, occ2, contrib);
        }
    }
    prune(out);
    prune(dropped);
    double lost = map_norm_squared(dropped);
    bool tag = state.is_normalized() && lost == 0.0;
    return FockState::make(state.reg(), std::move(out), tag, state.lost_weight() + lost);
}

cx inner_product(const FockState& a, const FockState& b) {
    if (!a.reg()->same_layout(*b.reg())) fail("inner product between states on different registers");
    const auto& small = a.term_count() <= b.term_count() ? a : b;
    const auto& large = a.term_count() <= b.term_count() ? b : a;
    cx sum(0.0, 0.0);
    for (const auto& [occ, amp] : small.amplitudes()) {
        auto it = large.amplitudes().find(occ);
        if (it == large.amplitudes().end()) continue;
        // conjugate-linear in the first argument
        sum += (&small == &a) ? std::conj(amp) * it->second : std::conj(it->second) * amp;
    }
    return sum;
}

double fidelity(const FockState& a, const FockState& b) {
    double na = a.norm();
    double nb = b.norm();
    if (na <= 0.0 || nb <= 0.0) return 0.0;
    return std::norm(inner_product(a, b)) / (na * na * nb * nb);
}

ProjectionResult project_occupation(const FockState& state, const std::string& mode, int n) {
    if (n < 0 || n > state.reg()->cutoff()) fail("projection occupation out of range");
    FockState s = state.normalized();
    const std::size_t idx = s.reg()->index_of(mode);
    FockState::AmpMap kept;
    double prob = 0.0;
    for (const auto& [occ, amp] : s.amplitudes()) {
        if (occ[idx] == n) {
            prob += std::norm(amp);
            kept.emplace(occ, amp);
        }
    }
    if (prob <= 0.0 || kept.empty()) {
        return {0.0, FockState::make(s.reg(), {}, false, s.lost_weight())};
    }
    double scale = 1.0 / std::sqrt(prob);
    for (auto& [occ, amp] : kept) amp *= scale;
    return {prob, FockState::make(s.reg(), std::move(kept), true, s.lost_weight())};
}

std::map<int, double> total_excitation(const FockState& state, const std::vector<std::string>& modes) {
    if (modes.empty()) fail("total_excitation needs a nonempty mode subset");
    FockState s = state.normalized();
    std::vector<std::size_t> idx;
    idx.reserve(modes.size());
    for (const auto& label : modes) idx.push_back(s.reg()->index_of(label));
    std::map<int, double> pmf;
    for (const auto& [occ, amp] : s.amplitudes()) {
        int total = 0;
        for (std::size_t i : idx) total += occ[i];
        pmf[total] += std::norm(amp);
    }
    return pmf;
}

std::map<std::vector<int>, double> joint_occupation_distribution(const FockState& state,
                                                                 const std::vector<std::string>& modes) {
    FockState s = state.normalized();
    std::vector<std::size_t> idx;
    idx.reserve(modes.size());
    for (const auto& label : modes) idx.push_back(s.reg()->index_of(label));
    std::map<std::vector<int>, double> dist;
    for (const auto& [occ, amp] : s.amplitudes()) {
        std::vector<int> key(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) key[i] = occ[idx[i]];
        dist[key] += std::norm(amp);
    }
    return dist;
}

FockState remove_mode(const FockState& state, const std::string& mode) {
    const std::size_t idx = state.reg()->index_of(mode);
    int value = -1;
    for (const auto& [occ, amp] : state.amplitudes()) {
        if (value < 0) value = occ[idx];
        if (occ[idx] != value) fail("cannot remove mode " + mode + " with indefinite occupation");
    }
    RegisterPtr reg2 = state.reg()->without_mode(idx);
    FockState::AmpMap out;
    for (const auto& [occ, amp] : state.amplitudes()) {
        FockState::OccVec occ2;
        occ2.reserve(occ.size() - 1);
        for (std::size_t i = 0; i < occ.size(); ++i) {
            if (i != idx) occ2.push_back(occ[i]);
        }
        out.emplace(std::move(occ2), amp);
    }
    return FockState::make(std::move(reg2), std::move(out), state.is_normalized(), state.lost_weight());
}

FockState add_ensembles(const FockState& state, const std::vector<int>& ids) {
    RegisterPtr reg2 = state.reg()->with_ensembles(ids);
    FockState::AmpMap out;
    for (const auto& [occ, amp] : state.amplitudes()) {
        FockState::OccVec o = occ;
        o.resize(reg2->size(), 0);
        out.emplace(std::move(o), amp);
    }
    return FockState::make(std::move(reg2), std::move(out), state.is_normalized(), state.lost_weight());
}

FockState linear_combination(const std::vector<FockState>& states, const std::vector<cx>& coeffs) {
    if (states.empty() || states.size() != coeffs.size()) fail("linear_combination size mismatch");
    FockState::AmpMap out;
    double lost = 0.0;
    for (std::size_t k = 0; k < states.size(); ++k) {
        if (!states[k].reg()->same_layout(*states[0].reg())) fail("register layout mismatch");
        lost += std::norm(coeffs[k]) * states[k].lost_weight();
        for (const auto& [occ, amp] : states[k].amplitudes()) accumulate(out, occ, coeffs[k] * amp);
    }
    prune(out);
    return FockState::make(states[0].reg(), std::move(out), false, lost);
}

}  // namespace ensq
