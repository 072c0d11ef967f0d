#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "qrnn/neuron.hpp"

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

// Direct long-double evaluation of the activation through tan, the way the
// amplitudes are stated; independent of the production power form.
void reference_activation(long double eta, std::uint32_t order,
                          long double& cos_f, long double& sin_f) {
    const long double t = std::tan(eta);
    const unsigned k = 1u << order;
    long double tk = 1.0L;
    for (unsigned i = 0; i < k; ++i)
        tk *= t;
    const long double denom = std::sqrt(1.0L + tk * tk);
    cos_f = 1.0L / denom;
    sin_f = tk / denom;
    if (std::abs(t) > 1e12L) { // eta at the pole: limit (0, 1)
        cos_f = 0.0L;
        sin_f = 1.0L;
    }
}

} // namespace

TEST_CASE("param_count sums binomials up to the degree") {
    CHECK(param_count(4, 2) == 11);
    CHECK(param_count(5, 0) == 1);
    CHECK(param_count(7, 3) == 64);
    // Degree saturates at the control count.
    CHECK(param_count(2, 5) == 4);
}

TEST_CASE("monomial order is canonical and bijective") {
    const auto masks = monomial_masks(4, 2);
    REQUIRE(masks.size() == 11);
    CHECK(masks[0] == 0b0000);
    CHECK(masks[1] == 0b0001);
    CHECK(masks[4] == 0b1000);
    CHECK(masks[5] == 0b0011);  // {0,1} first among the pairs
    CHECK(masks[10] == 0b1100); // {2,3} last

    for (std::size_t n = 0; n <= 10; ++n)
        for (std::size_t d = 0; d <= n; ++d) {
            const auto m = monomial_masks(n, d);
            CHECK(m.size() == param_count(n, d));
            CHECK(std::set<std::uint32_t>(m.begin(), m.end()).size() ==
                  m.size());
        }
}

TEST_CASE("eta evaluates the subset polynomial") {
    NeuronSpec spec{{2, LaneSet{0, 1}, 2, 1}, {0.1, 0.2, 0.3, 0.4}};
    CHECK(eta(spec, 0b11) == doctest::Approx(1.0));
    CHECK(eta(spec, 0b00) == doctest::Approx(0.1)); // only the bias survives
    spec.theta = {0.0, 0.0, 0.0, 0.0};
    CHECK(eta(spec, 0b11) == 0.0);
}

TEST_CASE("activation matches the tan form and fixed points") {
    for (std::uint32_t ord = 1; ord <= 3; ++ord) {
        const Activation at_diag = activation(kPi / 4, ord);
        CHECK(at_diag.cos_f == doctest::Approx(std::sqrt(0.5)));
        CHECK(at_diag.sin_f == doctest::Approx(std::sqrt(0.5)));
        const Activation at_zero = activation(0.0, ord);
        CHECK(at_zero.cos_f == 1.0);
        CHECK(at_zero.sin_f == 0.0);
    }
    const Activation a = activation(kPi / 8, 1);
    CHECK(a.cos_f == doctest::Approx(0.98559855965348878).epsilon(1e-14));
    CHECK(a.sin_f == doctest::Approx(0.16910197872576275).epsilon(1e-14));
}

TEST_CASE("activation stays normalized everywhere") {
    for (std::uint32_t ord = 1; ord <= 4; ++ord)
        for (int i = 0; i <= 1000; ++i) {
            const double eta = kPi * i / 1000.0;
            const Activation a = activation(eta, ord);
            CHECK(std::abs(a.cos_f * a.cos_f + a.sin_f * a.sin_f - 1.0) <=
                  1e-12);
        }
}

TEST_CASE("higher order sharpens the sigmoid past the fixed point") {
    for (int i = 1; i < 100; ++i) {
        const double eta = kPi / 4 + (kPi / 4) * i / 100.0;
        for (std::uint32_t ord = 1; ord <= 3; ++ord)
            CHECK(activation(eta, ord + 1).sin_f >=
                  activation(eta, ord).sin_f - 1e-12);
    }
}

TEST_CASE("success weight and its floor") {
    CHECK(success_weight(0.0, 1) == doctest::Approx(1.0));
    const double w1 = success_weight(kPi / 4, 1);
    CHECK(w1 * w1 == doctest::Approx(0.5));
    const double w2 = success_weight(kPi / 4, 2);
    CHECK(w2 * w2 == doctest::Approx(0.125));

    // Min over a grid containing pi/4 equals 2^(1 - 2^ord).
    for (std::uint32_t ord = 1; ord <= 3; ++ord) {
        double min_p = 1.0;
        for (int i = 0; i <= 1000; ++i) {
            const double w = success_weight(kPi * i / 1000.0, ord);
            min_p = std::min(min_p, w * w);
        }
        CHECK(std::abs(min_p - std::pow(2.0, 1.0 - double(1u << ord))) <=
              1e-9);
    }
}

TEST_CASE("activation agrees with extended-precision direct evaluation") {
    for (std::uint32_t ord = 1; ord <= 3; ++ord)
        for (int i = 0; i <= 1000; ++i) {
            const double eta = kPi * i / 1000.0;
            long double c, s;
            reference_activation(eta, ord, c, s);
            const Activation a = activation(eta, ord);
            CHECK(std::abs(a.cos_f - double(c)) <= 1e-12);
            CHECK(std::abs(a.sin_f - double(s)) <= 1e-12);
        }
}

TEST_CASE("apply_effective matches hand-computed branches") {
    SUBCASE("zero parameters are the identity") {
        StateVector state = random_state(3, 7);
        const StateVector before = state;
        NeuronSpec spec{{0, LaneSet{1, 2}, 2, 1},
                        std::vector<double>(param_count(2, 2), 0.0)};
        const NeuronApplication app = apply_effective(state, spec);
        CHECK(app.success_probability == doctest::Approx(1.0));
        for (std::size_t i = 0; i < state.dimension(); ++i)
            CHECK(state.amplitudes()[i] ==
                  doctest::Approx(before.amplitudes()[i]));
    }
    SUBCASE("basis control with eta = pi/4") {
        // eta(1) = pi/4 via the single-control weight.
        StateVector state = StateVector::basis(2, 0b10);
        NeuronSpec spec{{0, LaneSet{1}, 1, 1}, {0.0, kPi / 4}};
        const NeuronApplication app = apply_effective(state, spec);
        CHECK(app.success_probability == doctest::Approx(0.5));
        CHECK(state.amplitude(0b10) == doctest::Approx(std::sqrt(0.5)));
        CHECK(state.amplitude(0b11) == doctest::Approx(std::sqrt(0.5)));
    }
    SUBCASE("superposed control mixes branch weights") {
        // (|0> + |1>)/sqrt(2) control, eta(0)=0, eta(1)=pi/4, ord 1.
        StateVector state = StateVector::zero(2);
        state.apply_rotation(1, kPi / 4);
        NeuronSpec spec{{0, LaneSet{1}, 1, 1}, {0.0, kPi / 4}};
        const NeuronApplication app = apply_effective(state, spec);
        CHECK(app.success_probability == doctest::Approx(0.75));
        // Renormalized branches: sqrt(2/3)|00> + sqrt(1/6)(|10> + |11>).
        CHECK(state.amplitude(0b00) == doctest::Approx(std::sqrt(2.0 / 3.0)));
        CHECK(state.amplitude(0b10) == doctest::Approx(std::sqrt(1.0 / 6.0)));
        CHECK(state.amplitude(0b11) == doctest::Approx(std::sqrt(1.0 / 6.0)));
    }
}

TEST_CASE("basis controls act as an exact rotation after renormalization") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> angle(-1.5, 1.5);
    for (int trial = 0; trial < 20; ++trial) {
        const Word control_word = rng() & 3;
        NeuronSpec spec{{0, LaneSet{1, 2}, 2, 2},
                        std::vector<double>(param_count(2, 2))};
        for (double& t : spec.theta)
            t = angle(rng);
        StateVector state = StateVector::basis(3, control_word << 1);
        state.apply_rotation(0, angle(rng)); // arbitrary target state
        StateVector expected = state;

        apply_effective(state, spec);
        const double e = eta(spec, control_word);
        const Activation f = activation(e, 2);
        expected.apply_branchwise_rotation(
            0, LaneSet{1, 2}, [&](Word x) {
                return BranchRotation{
                    1.0, x == control_word
                             ? std::atan2(f.sin_f, f.cos_f)
                             : 0.0};
            });
        for (std::size_t i = 0; i < state.dimension(); ++i)
            CHECK(state.amplitudes()[i] ==
                  doctest::Approx(expected.amplitudes()[i]).epsilon(1e-10));
    }
}

TEST_CASE("circuit construction gate counts") {
    NeuronSpec spec{{2, LaneSet{0, 1}, 1, 1},
                    std::vector<double>(param_count(2, 1), 0.2)};
    const NeuronCircuit circuit = NeuronCircuit::build(spec, 3);
    CHECK(circuit.gate_count() == 7); // 3 bank + 1 controlled + 3 inverse
    CHECK(circuit.projection_count() == 1);
}

TEST_CASE("theta = 0 circuit succeeds with certainty") {
    NeuronSpec spec{{2, LaneSet{0, 1}, 2, 2},
                    std::vector<double>(param_count(2, 2), 0.0)};
    StateVector state = random_state(3, 9);
    StateVector extended = StateVector::zero(5);
    std::copy(state.amplitudes().begin(), state.amplitudes().end(),
              extended.raw().begin());
    const NeuronCircuit circuit = NeuronCircuit::build(spec, 3);
    const double p = circuit.execute(extended);
    CHECK(p == doctest::Approx(1.0));
    for (std::size_t i = 0; i < state.dimension(); ++i)
        CHECK(extended.amplitudes()[i] ==
              doctest::Approx(state.amplitudes()[i]));
}

TEST_CASE("circuit-level and effective application agree") {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> angle(-1.2, 1.2);
    std::uniform_int_distribution<std::uint32_t> control_count(1, 3);
    std::uniform_int_distribution<std::uint32_t> order_dist(1, 2);
    for (int trial = 0; trial < 200; ++trial) {
        const std::uint32_t n = control_count(rng);
        const std::uint32_t ord = order_dist(rng);
        const std::uint32_t degree = 1 + (rng() % n);
        NeuronSpec spec{{n, LaneSet::range(0, n), degree, ord},
                        std::vector<double>(param_count(n, degree))};
        for (double& t : spec.theta)
            t = angle(rng);

        StateVector effective = random_state(n + 1, 1000 + trial);
        StateVector circuit_state = StateVector::zero(n + 1 + ord);
        std::copy(effective.amplitudes().begin(),
                  effective.amplitudes().end(), circuit_state.raw().begin());

        const double p_effective =
            apply_effective(effective, spec).success_probability;
        const NeuronCircuit circuit = NeuronCircuit::build(spec, n + 1);
        const double p_circuit = circuit.execute(circuit_state);

        CHECK(std::abs(p_effective - p_circuit) <= 1e-10);
        double distance_sq = 0.0;
        for (std::size_t i = 0; i < effective.dimension(); ++i) {
            const double d = effective.amplitudes()[i] -
                             circuit_state.amplitudes()[i];
            distance_sq += d * d;
        }
        // Ancillas must be exactly |0...0> after their projections.
        for (std::size_t i = effective.dimension();
             i < circuit_state.dimension(); ++i)
            CHECK(circuit_state.amplitudes()[i] == 0.0);
        CHECK(std::sqrt(distance_sq) <= 1e-10);
    }
}
