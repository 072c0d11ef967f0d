#include <doctest.h>

#include <cmath>
#include <random>

#include "qrnn/statevector.hpp"

using namespace qrnn;

namespace {

constexpr double kPi = 3.14159265358979323846;

StateVector random_state(std::uint32_t lanes, std::uint64_t seed) {
    StateVector state = StateVector::zero(lanes);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& a : state.raw())
        a = normal(rng);
    state.renormalize();
    return state;
}

double distance(const StateVector& a, const StateVector& b) {
    double sq = 0.0;
    for (std::size_t i = 0; i < a.dimension(); ++i) {
        const double d = a.amplitudes()[i] - b.amplitudes()[i];
        sq += d * d;
    }
    return std::sqrt(sq);
}

} // namespace

TEST_CASE("basis states put the unit amplitude at the encoded index") {
    const StateVector one_lane = StateVector::basis(1, 0);
    CHECK(one_lane.amplitude(0) == 1.0);
    CHECK(one_lane.amplitude(1) == 0.0);

    // Bits [1, 0]: lane 0 set, lane 1 clear -> index 1.
    const StateVector two_lanes = StateVector::basis(2, 0b01);
    CHECK(two_lanes.amplitude(1) == 1.0);

    const StateVector three_lanes = StateVector::basis(3, 0b111);
    CHECK(three_lanes.amplitude(7) == 1.0);
}

TEST_CASE("lane capacity is enforced") {
    CHECK_THROWS_AS(StateVector::basis(0, 0), CapacityError);
    CHECK_THROWS_AS(StateVector::basis(kMaxLanes + 1, 0), CapacityError);
}

TEST_CASE("rotation convention R(theta)|0> = cos|0> + sin|1>") {
    StateVector state = StateVector::zero(1);
    state.apply_rotation(0, 0.0);
    CHECK(state.amplitude(0) == 1.0);

    state.apply_rotation(0, kPi / 2);
    CHECK(state.amplitude(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(state.amplitude(1) == doctest::Approx(1.0));

    StateVector diag = StateVector::zero(1);
    diag.apply_rotation(0, kPi / 4);
    CHECK(diag.amplitude(0) == doctest::Approx(std::sqrt(0.5)));
    CHECK(diag.amplitude(1) == doctest::Approx(std::sqrt(0.5)));

    CHECK_THROWS_AS(diag.apply_rotation(3, 0.1), LaneError);
}

TEST_CASE("bitflip swaps the target-lane branches") {
    StateVector state = StateVector::zero(1);
    state.apply_bitflip(0);
    CHECK(state.amplitude(1) == 1.0);

    StateVector two = StateVector::zero(2);
    two.apply_bitflip(1);
    CHECK(two.amplitude(2) == 1.0);

    StateVector random = random_state(3, 7);
    StateVector copy = random;
    copy.apply_bitflip(2);
    copy.apply_bitflip(2);
    CHECK(distance(random, copy) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("branchwise rotation applies the per-branch map") {
    SUBCASE("constant identity map") {
        StateVector state = random_state(3, 11);
        const StateVector before = state;
        state.apply_branchwise_rotation(0, LaneSet{1, 2},
                                        [](Word) {
                                            return BranchRotation{1.0, 0.0};
                                        });
        CHECK(distance(before, state) == doctest::Approx(0.0));
    }
    SUBCASE("controlled pi/2 rotation entangles the pair") {
        // (|00> + |10>)/sqrt(2) with the control on lane 1.
        StateVector state = StateVector::zero(2);
        state.apply_rotation(1, kPi / 4);
        state.apply_branchwise_rotation(
            0, LaneSet{1}, [](Word x) {
                return BranchRotation{1.0, x ? kPi / 2 : 0.0};
            });
        CHECK(state.amplitude(0) == doctest::Approx(std::sqrt(0.5)));
        CHECK(state.amplitude(3) == doctest::Approx(std::sqrt(0.5)));
        CHECK(state.amplitude(1) == doctest::Approx(0.0));
        CHECK(state.amplitude(2) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("constant scale halves every amplitude") {
        StateVector state = random_state(2, 3);
        const StateVector before = state;
        state.apply_branchwise_rotation(1, LaneSet{0},
                                        [](Word) {
                                            return BranchRotation{0.5, 0.0};
                                        });
        CHECK(state.norm() == doctest::Approx(0.5));
        for (std::size_t i = 0; i < state.dimension(); ++i)
            CHECK(state.amplitudes()[i] ==
                  doctest::Approx(0.5 * before.amplitudes()[i]));
    }
    SUBCASE("invalid inputs") {
        StateVector state = StateVector::zero(2);
        CHECK_THROWS_AS(state.apply_branchwise_rotation(
                            0, LaneSet{0}, [](Word) {
                                return BranchRotation{1.0, 0.0};
                            }),
                        LaneError);
        CHECK_THROWS_AS(state.apply_branchwise_rotation(
                            0, LaneSet{1}, [](Word) {
                                return BranchRotation{-1.0, 0.0};
                            }),
                        Error);
    }
}

TEST_CASE("projection returns the pre-renormalization probability") {
    SUBCASE("Bell-pair branch") {
        StateVector state = StateVector::zero(2);
        state.apply_rotation(0, kPi / 4);
        state.apply_branchwise_rotation(
            1, LaneSet{0}, [](Word x) {
                return BranchRotation{1.0, x ? kPi / 2 : 0.0};
            });
        const double p = state.project(LaneSet{0}, 0);
        CHECK(p == doctest::Approx(0.5));
        CHECK(state.amplitude(0) == doctest::Approx(1.0));
    }
    SUBCASE("basis state projects onto itself with certainty") {
        StateVector state = StateVector::basis(3, 0b101);
        const double p = state.project(LaneSet{0, 1, 2}, 0b101);
        CHECK(p == doctest::Approx(1.0));
        CHECK(state.amplitude(0b101) == doctest::Approx(1.0));
    }
    SUBCASE("asymmetric branch weights") {
        // 0.6|00> + 0.8|11>.
        StateVector state = StateVector::zero(2);
        state.apply_rotation(0, std::asin(0.8));
        state.apply_branchwise_rotation(
            1, LaneSet{0}, [](Word x) {
                return BranchRotation{1.0, x ? kPi / 2 : 0.0};
            });
        const double p = state.project(LaneSet{1}, 1);
        CHECK(p == doctest::Approx(0.64));
        CHECK(state.amplitude(3) == doctest::Approx(1.0));
    }
    SUBCASE("impossible outcomes are rejected") {
        StateVector state = StateVector::basis(2, 0b00);
        CHECK_THROWS_AS(state.project(LaneSet{0}, 1),
                        ImpossibleOutcomeError);
    }
}

TEST_CASE("marginals accumulate squared amplitudes per outcome word") {
    SUBCASE("uniform state") {
        StateVector state = StateVector::zero(2);
        state.apply_rotation(0, kPi / 4);
        state.apply_rotation(1, kPi / 4);
        const auto probs = state.marginal(LaneSet{0, 1});
        for (double p : probs)
            CHECK(p == doctest::Approx(0.25));
    }
    SUBCASE("asymmetric state") {
        StateVector state = StateVector::zero(2);
        state.apply_rotation(0, std::asin(0.8));
        state.apply_branchwise_rotation(
            1, LaneSet{0}, [](Word x) {
                return BranchRotation{1.0, x ? kPi / 2 : 0.0};
            });
        const auto probs = state.marginal(LaneSet{1});
        CHECK(probs[0] == doctest::Approx(0.36));
        CHECK(probs[1] == doctest::Approx(0.64));
    }
    SUBCASE("basis state is one-hot") {
        const StateVector state = StateVector::basis(3, 0b011);
        const auto probs = state.marginal(LaneSet{0, 1, 2});
        CHECK(probs[0b011] == doctest::Approx(1.0));
    }
}

TEST_CASE("reset_lanes relabels deterministic lanes to zero") {
    SUBCASE("known word is cleared") {
        StateVector state = StateVector::basis(3, 0b110);
        state.apply_rotation(0, 0.3); // lane 0 stays unentangled
        const StateVector before = state;
        state.reset_lanes(LaneSet{1, 2}, 0b11);
        CHECK(state.amplitude(0) == doctest::Approx(before.amplitude(0b110)));
        CHECK(state.amplitude(1) == doctest::Approx(before.amplitude(0b111)));
        CHECK(state.amplitude(0b110) == 0.0);
    }
    SUBCASE("already-zero lanes are untouched") {
        StateVector state = random_state(2, 5);
        state.project(LaneSet{1}, 0);
        const StateVector before = state;
        state.reset_lanes(LaneSet{1}, 0);
        CHECK(distance(before, state) == 0.0);
    }
    SUBCASE("entangled lanes are rejected") {
        StateVector state = StateVector::zero(1);
        state.apply_rotation(0, kPi / 4);
        CHECK_THROWS_AS(state.reset_lanes(LaneSet{0}, 0),
                        EntangledLanesError);
    }
}

TEST_CASE("unitary operations preserve the norm") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    for (int trial = 0; trial < 25; ++trial) {
        StateVector state = random_state(4, 100 + trial);
        state.apply_rotation(trial % 4, angle(rng));
        state.apply_bitflip((trial + 1) % 4);
        CHECK(std::abs(state.norm() - 1.0) <= 1e-12);
    }
}

TEST_CASE("rotations compose additively") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    for (int trial = 0; trial < 25; ++trial) {
        const double t1 = angle(rng);
        const double t2 = angle(rng);
        StateVector a = random_state(3, 200 + trial);
        StateVector b = a;
        a.apply_rotation(1, t1);
        a.apply_rotation(1, t2);
        b.apply_rotation(1, t1 + t2);
        CHECK(distance(a, b) <= 1e-12);
    }
}

TEST_CASE("projection probabilities sum to one and condition the marginal") {
    for (int trial = 0; trial < 10; ++trial) {
        const StateVector state = random_state(4, 300 + trial);
        const LaneSet lanes{0, 2};
        double total = 0.0;
        for (Word outcome = 0; outcome < 4; ++outcome) {
            StateVector branch = state;
            double p = 0.0;
            try {
                p = branch.project(lanes, outcome);
                const auto probs = branch.marginal(lanes);
                CHECK(probs[outcome] == doctest::Approx(1.0));
            } catch (const ImpossibleOutcomeError&) {
                p = 0.0;
            }
            total += p;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("scale-one branch maps preserve the norm") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    for (int trial = 0; trial < 10; ++trial) {
        StateVector state = random_state(4, 400 + trial);
        std::vector<double> angles(8);
        for (double& a : angles)
            a = angle(rng);
        state.apply_branchwise_rotation(
            1, LaneSet{0, 2, 3},
            [&](Word x) { return BranchRotation{1.0, angles[x]}; });
        CHECK(std::abs(state.norm() - 1.0) <= 1e-12);
    }
}

TEST_CASE("lane sets reject duplicates and define outcome bit order") {
    CHECK_THROWS_AS(LaneSet({1, 1}), LaneError);
    const LaneSet lanes{2, 0};
    // First listed lane is the least significant outcome bit.
    CHECK(lanes.gather(0b100) == 0b01);
    CHECK(lanes.gather(0b001) == 0b10);
    CHECK(lanes.scatter(0b01) == 0b100);
}
