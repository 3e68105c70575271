#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ensq {

using cx = std::complex<double>;

/// Stored amplitudes below this magnitude are pruned.
inline constexpr double kPruneThreshold = 1e-14;
/// Tolerance for the unitarity check of mode/qubit matrices.
inline constexpr double kUnitaryTol = 1e-10;

enum class ModeKind { atomic_h, atomic_v, photonic };

struct ModeDesc {
    std::string label;
    ModeKind kind = ModeKind::photonic;
    int owner = -1;  // owning ensemble id for atomic modes, -1 for photonic
};

class ModeRegister;
using RegisterPtr = std::shared_ptr<const ModeRegister>;

/// Immutable declaration of the mode layout a FockState lives on: one h and
/// one v collective mode per atomic ensemble, plus photonic modes appended
/// on the fly by anti-pump pulses. Derived layouts (extra photon mode,
/// retired ensemble, ...) are fresh instances, so states sharing a register
/// never observe a change.
class ModeRegister {
public:
    /// Register with an h/v mode pair per ensemble id. Cutoff is the maximum
    /// occupation representable per mode; two-photon events require >= 2.
    static RegisterPtr make(const std::vector<int>& ensemble_ids, int cutoff = 2);

    RegisterPtr with_photon_mode(std::string* label_out) const;
    RegisterPtr without_mode(std::size_t index) const;
    RegisterPtr with_ensembles(const std::vector<int>& ids) const;
    RegisterPtr with_retired(int ensemble_id) const;

    std::size_t size() const { return modes_.size(); }
    int cutoff() const { return cutoff_; }
    const ModeDesc& mode(std::size_t i) const { return modes_[i]; }
    bool has_mode(const std::string& label) const;
    std::size_t index_of(const std::string& label) const;
    bool has_ensemble(int id) const;
    bool retired(int id) const;
    /// Index of the h (v) mode of an ensemble; throws for unknown or retired
    /// ensembles — measured ensembles must not be reused.
    std::size_t h_index(int ensemble_id) const;
    std::size_t v_index(int ensemble_id) const;
    std::vector<int> ensemble_ids() const;
    int next_ensemble_id() const;

    /// Structural equality of the mode list and cutoff (retirement marks are
    /// bookkeeping and do not affect amplitudes).
    bool same_layout(const ModeRegister& other) const;

private:
    ModeRegister() = default;
    void rebuild_lookup();

    std::vector<ModeDesc> modes_;
    int cutoff_ = 2;
    std::set<int> retired_;
    std::uint64_t photon_seq_ = 0;  // monotonic, so photon labels never collide
    std::map<std::string, std::size_t> by_label_;
    std::map<int, std::pair<std::size_t, std::size_t>> ensemble_modes_;  // id -> (h, v)
};

/// Sparse state over the occupation-number basis of a ModeRegister. Values
/// are immutable: every operation returns a new state. Truncation losses at
/// the mode cutoff accumulate in lost_weight() so any protocol that silently
/// leaks probability is detectable.
class FockState {
public:
    using OccVec = std::vector<std::uint8_t>;
    using AmpMap = std::map<OccVec, cx>;

    static FockState vacuum(RegisterPtr reg);
    static FockState from_terms(RegisterPtr reg, const std::vector<std::pair<OccVec, cx>>& terms,
                                bool renormalize = false);
    /// Internal/advanced constructor; prunes tiny amplitudes and rejects
    /// non-finite ones.
    static FockState make(RegisterPtr reg, AmpMap amps, bool normalized_tag, double lost_weight);

    const RegisterPtr& reg() const { return reg_; }
    const AmpMap& amplitudes() const { return amps_; }
    std::size_t term_count() const { return amps_.size(); }
    bool is_zero() const { return amps_.empty(); }
    bool is_normalized() const { return normalized_; }
    double lost_weight() const { return lost_weight_; }

    double norm_squared() const;
    double norm() const;
    cx amplitude(const OccVec& occ) const;
    /// Rescaled copy with unit norm; throws on the zero state.
    FockState normalized() const;
    FockState with_register(RegisterPtr reg) const;

private:
    FockState(RegisterPtr reg, AmpMap amps, bool normalized_tag, double lost_weight)
        : reg_(std::move(reg)), amps_(std::move(amps)), normalized_(normalized_tag), lost_weight_(lost_weight) {}

    RegisterPtr reg_;
    AmpMap amps_;
    bool normalized_ = false;
    double lost_weight_ = 0.0;
};

/// Occupation vector with the listed modes set, all others zero.
FockState::OccVec occupation(const ModeRegister& reg,
                             std::initializer_list<std::pair<const char*, int>> occs);

FockState vacuum_state(RegisterPtr reg);

/// Ladder operators. Creation drops components that would exceed the cutoff
/// and records the dropped weight; both return unnormalized states.
FockState apply_creation(const FockState& state, const std::string& mode);
FockState apply_annihilation(const FockState& state, const std::string& mode);

/// Passive linear transformation of the listed modes: creation operators map
/// as a^dag_i -> sum_j U(j,i) a^dag_j, with the bosonic combinatorics for
/// multi-photon terms. U must be unitary within kUnitaryTol.
FockState apply_mode_unitary(const FockState& state, const std::vector<std::string>& modes,
                             const Eigen::MatrixXcd& u);

cx inner_product(const FockState& a, const FockState& b);

/// |<a|b>|^2 of the normalized states; global phase drops out. Zero if
/// either state is zero.
double fidelity(const FockState& a, const FockState& b);

struct ProjectionResult {
    double prob = 0.0;
    FockState post;
};

/// Projective measurement of one mode's occupation on the normalized input.
ProjectionResult project_occupation(const FockState& state, const std::string& mode, int n);

/// Probability mass function of the total occupation over a subset of modes.
std::map<int, double> total_excitation(const FockState& state, const std::vector<std::string>& modes);

/// Joint occupation distribution over the listed modes (used for detector
/// sampling). Keys are occupation tuples in mode-list order.
std::map<std::vector<int>, double> joint_occupation_distribution(const FockState& state,
                                                                 const std::vector<std::string>& modes);

/// Drops a mode whose occupation is identical in every stored term (e.g. a
/// photon mode after detection has collapsed it).
FockState remove_mode(const FockState& state, const std::string& mode);

/// Appends fresh ensembles (h/v mode pairs) in vacuum.
FockState add_ensembles(const FockState& state, const std::vector<int>& ids);

/// Same-layout linear combination sum_i coeffs[i] * states[i] (unnormalized).
FockState linear_combination(const std::vector<FockState>& states, const std::vector<cx>& coeffs);

}  // namespace ensq
