#include "qrnn/neuron.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qrnn {

namespace {

std::size_t binomial(std::size_t n, std::size_t k) {
    if (k > n)
        return 0;
    k = std::min(k, n - k);
    std::size_t result = 1;
    for (std::size_t i = 1; i <= k; ++i)
        result = result * (n - k + i) / i;
    return result;
}

// c^(2^order) by repeated squaring.
double pow2k(double value, std::uint32_t order) {
    double v = value;
    for (std::uint32_t i = 0; i < order; ++i)
        v *= v;
    return v;
}

} // namespace

std::size_t param_count(std::size_t num_controls, std::size_t degree) {
    const std::size_t max_size = std::min(degree, num_controls);
    std::size_t total = 0;
    for (std::size_t i = 0; i <= max_size; ++i)
        total += binomial(num_controls, i);
    return total;
}

std::vector<std::uint32_t> monomial_masks(std::size_t num_controls,
                                          std::size_t degree) {
    std::vector<std::uint32_t> masks;
    masks.reserve(param_count(num_controls, degree));
    const std::size_t max_size = std::min(degree, num_controls);
    for (std::size_t k = 0; k <= max_size; ++k) {
        // Combinations of size k in lexicographic order of member indices.
        std::vector<std::uint32_t> members(k);
        std::iota(members.begin(), members.end(), 0);
        while (true) {
            std::uint32_t mask = 0;
            for (std::uint32_t m : members)
                mask |= std::uint32_t{1} << m;
            masks.push_back(mask);
            if (k == 0)
                break;
            // Advance to the next combination.
            std::size_t i = k;
            while (i > 0 && members[i - 1] == num_controls - k + (i - 1))
                --i;
            if (i == 0)
                break;
            ++members[i - 1];
            for (std::size_t j = i; j < k; ++j)
                members[j] = members[j - 1] + 1;
        }
    }
    return masks;
}

double eta(std::span<const double> theta,
           std::span<const std::uint32_t> masks, Word x) {
    double sum = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i)
        if ((x & masks[i]) == masks[i])
            sum += theta[i];
    return sum;
}

double eta(const NeuronSpec& spec, Word x) {
    const auto masks =
        monomial_masks(spec.shape.controls.size(), spec.shape.degree);
    return eta(spec.theta, masks, x);
}

Activation activation(double eta, std::uint32_t order) {
    const double ck = pow2k(std::cos(eta), order);
    const double sk = pow2k(std::sin(eta), order);
    const double w = std::hypot(ck, sk);
    return {ck / w, sk / w};
}

double success_weight(double eta, std::uint32_t order) {
    return std::hypot(pow2k(std::cos(eta), order),
                      pow2k(std::sin(eta), order));
}

std::vector<RotationCoeffs>
neuron_branch_table(std::span<const double> theta,
                    std::span<const std::uint32_t> masks,
                    std::size_t num_controls, std::uint32_t order) {
    std::vector<RotationCoeffs> table(std::size_t{1} << num_controls);
    for (Word x = 0; x < table.size(); ++x) {
        const double e = eta(theta, masks, x);
        table[x] = {pow2k(std::cos(e), order), pow2k(std::sin(e), order)};
    }
    return table;
}

double apply_neuron(StateVector& state, const NeuronShape& shape,
                    std::span<const double> theta) {
    const auto masks = monomial_masks(shape.controls.size(), shape.degree);
    const auto table =
        neuron_branch_table(theta, masks, shape.controls.size(), shape.order);
    state.apply_rotation_table(shape.target, shape.controls, table);
    return state.renormalize();
}

NeuronApplication apply_effective(StateVector& state, const NeuronSpec& spec) {
    return {apply_neuron(state, spec.shape, spec.theta)};
}

namespace {

constexpr double kHalfPi = 1.5707963267948966;

struct CircuitBuilder {
    const NeuronSpec& spec;
    std::uint32_t first_ancilla;
    std::vector<std::uint32_t> masks;
    std::vector<NeuronCircuit::ControlledRotation> rotations;
    std::vector<std::uint32_t> projections;
    std::vector<std::int32_t> sequence;

    LaneSet subset_lanes(std::uint32_t mask) const {
        std::vector<std::uint32_t> lanes;
        for (std::size_t b = 0; b < spec.shape.controls.size(); ++b)
            if (mask & (std::uint32_t{1} << b))
                lanes.push_back(spec.shape.controls[b]);
        return LaneSet(std::move(lanes));
    }

    void emit_rotation(LaneSet controls, std::uint32_t target, double angle) {
        sequence.push_back(static_cast<std::int32_t>(rotations.size()));
        rotations.push_back({std::move(controls), target, angle});
    }

    void emit_projection(std::uint32_t lane) {
        projections.push_back(lane);
        sequence.push_back(-static_cast<std::int32_t>(projections.size()));
    }

    // Rotation bank: one controlled R(sign * theta_I) per monomial subset.
    void emit_bank(std::uint32_t target, double sign) {
        for (std::size_t i = 0; i < masks.size(); ++i)
            emit_rotation(subset_lanes(masks[i]), target,
                          sign * spec.theta[i]);
    }

    // Rotate `target` by sign * f_level(eta), recursing one ancilla per
    // level; level 0 is the plain rotation bank.
    void emit_level(std::uint32_t level, std::uint32_t target, double sign) {
        if (level == 0) {
            emit_bank(target, sign);
            return;
        }
        const std::uint32_t ancilla = first_ancilla + level - 1;
        emit_level(level - 1, ancilla, 1.0);
        emit_rotation(LaneSet{ancilla}, target, sign * kHalfPi);
        emit_level(level - 1, ancilla, -1.0);
        emit_projection(ancilla);
    }
};

} // namespace

NeuronCircuit NeuronCircuit::build(const NeuronSpec& spec,
                                   std::uint32_t first_ancilla) {
    CircuitBuilder b{spec,
                     first_ancilla,
                     monomial_masks(spec.shape.controls.size(),
                                    spec.shape.degree),
                     {},
                     {},
                     {}};
    b.emit_level(spec.shape.order, spec.shape.target, 1.0);
    NeuronCircuit circuit;
    circuit.rotations_ = std::move(b.rotations);
    circuit.projection_lanes_ = std::move(b.projections);
    circuit.sequence_ = std::move(b.sequence);
    return circuit;
}

double NeuronCircuit::execute(StateVector& state) const {
    double probability = 1.0;
    for (std::int32_t op : sequence_) {
        if (op < 0) {
            const std::uint32_t lane = projection_lanes_[-op - 1];
            probability *= state.project(LaneSet{lane}, 0);
            continue;
        }
        const ControlledRotation& rot = rotations_[op];
        if (rot.controls.empty()) {
            state.apply_rotation(rot.target, rot.angle);
            continue;
        }
        // Rotate only on the all-ones control branch.
        std::vector<RotationCoeffs> table(
            std::size_t{1} << rot.controls.size(), RotationCoeffs{1.0, 0.0});
        table.back() = {std::cos(rot.angle), std::sin(rot.angle)};
        state.apply_rotation_table(rot.target, rot.controls, table);
    }
    return probability;
}

} // namespace qrnn
