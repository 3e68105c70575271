#include <doctest.h>

#include <cmath>
#include <map>

#include "ensq/rng.hpp"
#include "ensq/teleport.hpp"

using namespace ensq;

namespace {

constexpr double kSqrtHalf = 0.70710678118654752440;

// Loads a joint (possibly entangled) two-qubit amplitude vector onto two
// vacuum ensembles, basis order (hh, hv, vh, vv) with `a` major.
FockState prepare_joint(const FockState& state, int a, int b, const Eigen::Vector4cd& amps) {
    const auto& reg = *state.reg();
    const std::array<std::pair<std::size_t, std::size_t>, 4> basis = {
        std::pair{reg.h_index(a), reg.h_index(b)},
        {reg.h_index(a), reg.v_index(b)},
        {reg.v_index(a), reg.h_index(b)},
        {reg.v_index(a), reg.v_index(b)}};
    std::vector<std::pair<FockState::OccVec, cx>> terms;
    for (const auto& [occ, amp] : state.amplitudes()) {
        for (int k = 0; k < 4; ++k) {
            if (std::abs(amps[k]) < kPruneThreshold) continue;
            FockState::OccVec o = occ;
            o[basis[k].first] = 1;
            o[basis[k].second] = 1;
            terms.push_back({std::move(o), amp * amps[k]});
        }
    }
    return FockState::from_terms(state.reg(), terms);
}

// chi resource terms overlaid on four vacuum ensembles of an existing state.
FockState inject_chi(const FockState& state, const std::array<int, 4>& roles) {
    const auto& reg = *state.reg();
    const int e1 = roles[0], e2 = roles[1], e5 = roles[2], e6 = roles[3];
    struct Branch {
        bool v1, v2, v56;
    };
    const std::array<Branch, 4> branches = {Branch{false, false, false}, {true, true, false},
                                            {false, true, true}, {true, false, true}};
    std::vector<std::pair<FockState::OccVec, cx>> terms;
    for (const auto& [occ, amp] : state.amplitudes()) {
        for (const Branch& br : branches) {
            FockState::OccVec o = occ;
            o[br.v1 ? reg.v_index(e1) : reg.h_index(e1)] = 1;
            o[br.v2 ? reg.v_index(e2) : reg.h_index(e2)] = 1;
            o[br.v56 ? reg.v_index(e5) : reg.h_index(e5)] = 1;
            o[br.v56 ? reg.v_index(e6) : reg.h_index(e6)] = 1;
            terms.push_back({std::move(o), amp * 0.5});
        }
    }
    return FockState::from_terms(state.reg(), terms);
}

FockState chi_with_inputs(const Eigen::Vector4cd& joint) {
    RegisterPtr reg = ModeRegister::make({1, 2, 5, 6, 7, 8});
    FockState s = chi_target(reg, {1, 2, 5, 6});
    return prepare_joint(s, 7, 8, joint);
}

Eigen::Vector4cd product_input(const Eigen::Vector2cd& c, const Eigen::Vector2cd& t) {
    Eigen::Vector4cd v;
    v << c(0) * t(0), c(0) * t(1), c(1) * t(0), c(1) * t(1);
    return v;
}

// Forced ideal run of both teleportation measurements plus the table
// correction; returns the output two-qubit vector on (control_out, target_out).
Eigen::Vector4cd corrected_forced_output(const Eigen::Vector4cd& joint, BellOutcome o18, BellOutcome o67) {
    FockState s = chi_with_inputs(joint);
    ForcedCnot forced = teleported_cnot_forced(s, 7, 8, {1, 2, 5, 6}, o18, o67);
    REQUIRE(forced.prob > 0.0);
    FockState post = forced.state;
    for (const CorrectionOp& op : cnot_correction(o18, o67)) post = apply_correction(post, op);
    auto [vec, leak] = two_qubit_view(post, 5, 2);
    CHECK(leak < 1e-10);
    return vec;
}

Eigen::Vector4cd random_joint(RngStream& rng) {
    Eigen::Vector4cd v;
    for (int i = 0; i < 4; ++i) v(i) = cx(rng.uniform() - 0.5, rng.uniform() - 0.5);
    v.normalize();
    return v;
}

Eigen::Vector2cd random_qubit(RngStream& rng) {
    Eigen::Vector2cd v(cx(rng.uniform() - 0.5, rng.uniform() - 0.5), cx(rng.uniform() - 0.5, rng.uniform() - 0.5));
    v.normalize();
    return v;
}

}  // namespace

TEST_CASE("prepare_ghz") {
    auto reg = ModeRegister::make({1, 2, 3});
    FockState ghz = prepare_ghz(vacuum_state(reg), 1, 2, 3);
    CHECK(ghz.term_count() == 2);
    CHECK(ghz.amplitude(occupation(*reg, {{"h1", 1}, {"h2", 1}, {"h3", 1}})).real() ==
          doctest::Approx(kSqrtHalf));
    CHECK(ghz.amplitude(occupation(*reg, {{"v1", 1}, {"v2", 1}, {"v3", 1}})).real() ==
          doctest::Approx(kSqrtHalf));
    FockState target = FockState::from_terms(
        reg, {{occupation(*reg, {{"h1", 1}, {"h2", 1}, {"h3", 1}}), kSqrtHalf},
              {occupation(*reg, {{"v1", 1}, {"v2", 1}, {"v3", 1}}), kSqrtHalf}});
    CHECK(fidelity(ghz, target) == doctest::Approx(1.0));
    CHECK_THROWS_AS(prepare_ghz(ghz, 1, 2, 3), std::invalid_argument);
}

TEST_CASE("chi preparation reaches the unified state for every ideal outcome") {
    // sampled outcomes
    std::map<std::string, int> outcome_counts;
    for (int i = 0; i < 400; ++i) {
        RngStream rng(42, i);
        RegisterPtr reg = ModeRegister::make({1, 2, 3, 4, 5, 6});
        FockState s = vacuum_state(reg);
        s = prepare_ghz(s, 1, 2, 3);
        s = prepare_ghz(s, 4, 5, 6);
        ChiResult r = prepare_chi(s, {1, 2, 3, 4, 5, 6}, MeasurementBackend::ideal(), rng);
        REQUIRE(r.log.accepted);
        REQUIRE(r.log.measurements.size() == 1);
        outcome_counts[to_string(*r.log.measurements[0].outcome)] += 1;
        CHECK(fidelity(r.state, chi_target(r.state.reg(), {1, 2, 5, 6})) > 1.0 - 1e-10);
        CHECK(r.state.lost_weight() == 0.0);  // nothing truncated at the cutoff
    }
    CHECK(outcome_counts.size() == 4);  // all four outcomes occur and all unify

    CHECK(chi_correction(BellOutcome::phi_plus).empty());  // the phi+ collapse is already chi
    for (BellOutcome o : kBellOutcomes) {
        for (const CorrectionOp& op : chi_correction(o)) {
            CHECK((op.ensemble == 1 || op.ensemble == 2 || op.ensemble == 5 || op.ensemble == 6));
        }
    }
}

TEST_CASE("physical chi preparation: accepted runs unify, acceptance near 1/2") {
    int accepted = 0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
        RngStream rng(43, i);
        RegisterPtr reg = ModeRegister::make({1, 2, 3, 4, 5, 6});
        FockState s = vacuum_state(reg);
        s = prepare_ghz(s, 1, 2, 3);
        s = prepare_ghz(s, 4, 5, 6);
        ChiResult r = prepare_chi(s, {1, 2, 3, 4, 5, 6},
                                  MeasurementBackend::make_physical(BasisConfig::psi_discriminating, {}), rng);
        if (!r.log.accepted) {
            CHECK(fidelity(r.state, s) == doctest::Approx(1.0));  // input returned unchanged
            continue;
        }
        ++accepted;
        CHECK(fidelity(r.state, chi_target(r.state.reg(), {1, 2, 5, 6})) > 1.0 - 1e-10);
    }
    const double sigma = std::sqrt(n * 0.25);
    CHECK(std::abs(accepted - n / 2.0) < 4.0 * sigma);
}

TEST_CASE("matrix C-NOT oracle") {
    Eigen::Vector2cd zero(1, 0), one(0, 1), plus(kSqrtHalf, kSqrtHalf), minus(kSqrtHalf, -kSqrtHalf);
    Eigen::Vector4cd out = matrix_cnot_reference(one, zero);
    CHECK(out(3).real() == doctest::Approx(1.0));  // |10> -> |11>
    out = matrix_cnot_reference(zero, zero);
    CHECK(out(0).real() == doctest::Approx(1.0));  // |00> -> |00>
    // |+>|-> -> |->|-> (phase kickback)
    out = matrix_cnot_reference(plus, minus);
    CHECK(std::norm(out.dot(product_input(minus, minus))) == doctest::Approx(1.0));
}

TEST_CASE("teleported C-NOT collapse classes for |+> control and |-> target") {
    const Eigen::Vector2cd plus(kSqrtHalf, kSqrtHalf), minus(kSqrtHalf, -kSqrtHalf);
    const Eigen::Vector4cd joint = product_input(plus, minus);

    // Every outcome of the (1,8) measurement leaves (2,5,6) in one of the
    // two collapse classes (h2 +/- v2)(h5h6 +/- v5v6)/2, and the (6,7)
    // measurement then lands in (h2 - v2)(h5 +/- v5)/2 before correction.
    int class_a = 0, class_b = 0;
    for (BellOutcome o18 : kBellOutcomes) {
        FockState s = chi_with_inputs(joint);
        BellProjection p1 = ideal_bell_project(s, 1, 8, o18);
        CHECK(p1.prob == doctest::Approx(0.25));
        const auto& reg = *p1.post.reg();
        auto three_state = [&](double sign2, double sign56) {
            std::vector<std::pair<FockState::OccVec, cx>> terms;
            for (int b2 = 0; b2 < 2; ++b2) {
                for (int b56 = 0; b56 < 2; ++b56) {
                    FockState::OccVec occ(reg.size(), 0);
                    occ[b2 ? reg.v_index(2) : reg.h_index(2)] = 1;
                    occ[b56 ? reg.v_index(5) : reg.h_index(5)] = 1;
                    occ[b56 ? reg.v_index(6) : reg.h_index(6)] = 1;
                    terms.push_back({occ, 0.5 * (b2 ? sign2 : 1.0) * (b56 ? sign56 : 1.0)});
                }
            }
            // (2,5,6) collapse class times the untouched control on 7
            return prepare_logical(FockState::from_terms(p1.post.reg(), terms), 7, kSqrtHalf, kSqrtHalf);
        };
        const double fid_a = fidelity(p1.post, three_state(1.0, 1.0));    // (h2+v2)(h5h6+v5v6)/2
        const double fid_b = fidelity(p1.post, three_state(-1.0, -1.0));  // (h2-v2)(h5h6-v5v6)/2
        if (fid_a > 1.0 - 1e-10) ++class_a;
        if (fid_b > 1.0 - 1e-10) ++class_b;
        CHECK(fid_a + fid_b > 1.0 - 1e-10);
    }
    CHECK(class_a == 2);
    CHECK(class_b == 2);

    // Corrected output equals (h2 - v2)(h5 - v5)/2 for all 16 outcome pairs.
    const Eigen::Vector4cd want = product_input(minus, minus);
    for (BellOutcome o18 : kBellOutcomes) {
        for (BellOutcome o67 : kBellOutcomes) {
            Eigen::Vector4cd got = corrected_forced_output(joint, o18, o67);
            CHECK(std::norm(want.dot(got)) > 1.0 - 1e-10);
        }
    }
}

TEST_CASE("basis inputs map correctly") {
    const Eigen::Vector2cd zero(1, 0), one(0, 1);
    RngStream rng(7);
    struct Case {
        Eigen::Vector2cd c, t;
    };
    for (const Case& k : {Case{zero, zero}, Case{one, zero}, Case{zero, one}, Case{one, one}}) {
        FockState s = chi_with_inputs(product_input(k.c, k.t));
        CnotResult r = teleported_cnot(s, 7, 8, {1, 2, 5, 6}, MeasurementBackend::ideal(), rng);
        REQUIRE(r.log.accepted);
        CHECK(r.control_out == 5);
        CHECK(r.target_out == 2);
        auto [vec, leak] = two_qubit_view(r.state, r.control_out, r.target_out);
        CHECK(std::norm(matrix_cnot_reference(k.c, k.t).dot(vec)) > 1.0 - 1e-10);
    }
}

TEST_CASE("correction table is valid and input independent") {
    RngStream rng(99);
    // 50 random input pairs re-verify every entry of the 16-pair table.
    for (int rep = 0; rep < 50; ++rep) {
        const Eigen::Vector2cd c = random_qubit(rng);
        const Eigen::Vector2cd t = random_qubit(rng);
        const Eigen::Vector4cd want = matrix_cnot_reference(c, t);
        for (BellOutcome o18 : kBellOutcomes) {
            for (BellOutcome o67 : kBellOutcomes) {
                Eigen::Vector4cd got = corrected_forced_output(product_input(c, t), o18, o67);
                CHECK(std::norm(want.dot(got)) > 1.0 - 1e-10);
            }
        }
        // corrections stay within the Pauli frame of wires 2 and 5
        for (BellOutcome o18 : kBellOutcomes) {
            for (BellOutcome o67 : kBellOutcomes) {
                for (const CorrectionOp& op : cnot_correction(o18, o67)) {
                    CHECK((op.ensemble == 2 || op.ensemble == 5));
                }
            }
        }
    }
}

TEST_CASE("entangled inputs teleport correctly") {
    RngStream rng(111);
    for (int rep = 0; rep < 5; ++rep) {
        const Eigen::Vector4cd joint = random_joint(rng);
        const Eigen::Vector4cd want = matrix_cnot_reference(joint);
        for (BellOutcome o18 : kBellOutcomes) {
            for (BellOutcome o67 : kBellOutcomes) {
                Eigen::Vector4cd got = corrected_forced_output(joint, o18, o67);
                CHECK(std::norm(want.dot(got)) > 1.0 - 1e-10);
            }
        }
    }
}

TEST_CASE("the 16 ideal outcome pairs are uniform on |+>|+>") {
    const Eigen::Vector2cd plus(kSqrtHalf, kSqrtHalf);
    std::map<std::pair<int, int>, int> counts;
    const int n = 3200;
    for (int i = 0; i < n; ++i) {
        RngStream rng(55, i);
        FockState s = chi_with_inputs(product_input(plus, plus));
        CnotResult r = teleported_cnot(s, 7, 8, {1, 2, 5, 6}, MeasurementBackend::ideal(), rng);
        REQUIRE(r.log.accepted);
        counts[{static_cast<int>(*r.log.measurements[0].outcome),
                static_cast<int>(*r.log.measurements[1].outcome)}] += 1;
    }
    REQUIRE(counts.size() == 16);
    const double expect = n / 16.0;
    const double sigma = std::sqrt(n * (1.0 / 16.0) * (15.0 / 16.0));
    for (const auto& [pair, count] : counts) {
        CHECK(std::abs(count - expect) < 4.0 * sigma);
    }
}

TEST_CASE("two teleported C-NOTs compose to the identity") {
    RngStream rng(77);
    for (int rep = 0; rep < 10; ++rep) {
        const Eigen::Vector4cd joint = random_joint(rng);
        FockState s = chi_with_inputs(joint);
        CnotResult first = teleported_cnot(s, 7, 8, {1, 2, 5, 6}, MeasurementBackend::ideal(), rng);
        REQUIRE(first.log.accepted);

        // Fresh resource, second pass on the output wires (control 5, target 2).
        FockState grown = add_ensembles(first.state, {11, 12, 15, 16});
        grown = inject_chi(grown, {11, 12, 15, 16});
        CnotResult second =
            teleported_cnot(grown, first.control_out, first.target_out, {11, 12, 15, 16},
                            MeasurementBackend::ideal(), rng);
        REQUIRE(second.log.accepted);
        auto [vec, leak] = two_qubit_view(second.state, second.control_out, second.target_out);
        CHECK(std::norm(joint.dot(vec)) > 1.0 - 1e-9);
    }
}

TEST_CASE("accepted physical runs match the ideal backend with the same outcomes") {
    RngStream rng(31);
    int compared = 0;
    for (int rep = 0; rep < 600 && compared < 40; ++rep) {
        RegisterPtr reg = ModeRegister::make({1, 2, 3, 4, 5, 6, 7, 8});
        FockState s = vacuum_state(reg);
        s = prepare_ghz(s, 1, 2, 3);
        s = prepare_ghz(s, 4, 5, 6);
        const Eigen::Vector2cd c = random_qubit(rng);
        const Eigen::Vector2cd t = random_qubit(rng);
        s = prepare_logical(s, 7, c(0), c(1));
        s = prepare_logical(s, 8, t(0), t(1));

        MeasurementBackend physical = MeasurementBackend::make_physical(BasisConfig::psi_discriminating, {});
        ChiResult chi = prepare_chi(s, {1, 2, 3, 4, 5, 6}, physical, rng);
        if (!chi.log.accepted) continue;
        CnotResult r = teleported_cnot(chi.state, 7, 8, {1, 2, 5, 6}, physical, rng);
        if (!r.log.accepted) continue;

        // Ideal pipeline forced to the same certified outcomes.
        FockState ideal = vacuum_state(ModeRegister::make({1, 2, 3, 4, 5, 6, 7, 8}));
        ideal = prepare_ghz(ideal, 1, 2, 3);
        ideal = prepare_ghz(ideal, 4, 5, 6);
        ideal = prepare_logical(ideal, 7, c(0), c(1));
        ideal = prepare_logical(ideal, 8, t(0), t(1));
        for (int e : {1, 2, 3}) ideal = raman_rotation(ideal, e, hadamard());
        ideal = ideal_bell_project(ideal, 3, 4, *chi.log.measurements[0].outcome).post;
        for (const CorrectionOp& op : chi.log.corrections) ideal = apply_correction(ideal, op);
        ForcedCnot forced = teleported_cnot_forced(ideal, 7, 8, {1, 2, 5, 6},
                                                   *r.log.measurements[0].outcome,
                                                   *r.log.measurements[1].outcome);
        FockState ideal_post = forced.state;
        for (const CorrectionOp& op : cnot_correction(*r.log.measurements[0].outcome,
                                                      *r.log.measurements[1].outcome)) {
            ideal_post = apply_correction(ideal_post, op);
        }
        CHECK(fidelity(r.state, ideal_post) > 1.0 - 1e-9);
        ++compared;
    }
    CHECK(compared >= 30);
}
