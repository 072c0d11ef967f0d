#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qrnn/statevector.hpp"

namespace qrnn {

/// Which lanes a quantum neuron reads and rotates, and how sharply.
///
/// The neuron rotates `target` by a sigmoid-like angle f(eta(x)) where
/// eta(x) is a degree-`degree` polynomial over the control bits x and the
/// activation steepness doubles with every unit of `order`.
struct NeuronShape {
    std::uint32_t target = 0;
    LaneSet controls;
    std::uint32_t degree = 1;
    std::uint32_t order = 1;
};

/// A neuron shape together with its parameter vector theta, one entry per
/// control subset of size <= degree in canonical order (see monomial_masks).
struct NeuronSpec {
    NeuronShape shape;
    std::vector<double> theta;
};

/// Result of applying a neuron in the postselected (training) regime.
struct NeuronApplication {
    double success_probability = 1.0;
};

/// Normalized activation amplitudes (cos f, sin f) of the order-`order`
/// neuron at polynomial value eta.
struct Activation {
    double cos_f = 1.0;
    double sin_f = 0.0;
};

/// Number of parameters of a neuron with n controls and the given degree:
/// sum over subset sizes i <= min(degree, n) of C(n, i).
std::size_t param_count(std::size_t num_controls, std::size_t degree);

/// Control-subset masks in canonical parameter order: subsets sorted by
/// size, then lexicographically by member indices; the empty set (the bias)
/// first. Bit b of a mask refers to the b-th control of the neuron.
std::vector<std::uint32_t> monomial_masks(std::size_t num_controls,
                                          std::size_t degree);

/// eta(x) = sum over subsets I of theta_I * prod_{i in I} x_i.
double eta(std::span<const double> theta,
           std::span<const std::uint32_t> masks, Word x);

/// Evaluate eta directly from a spec (convenience path; builds the masks).
double eta(const NeuronSpec& spec, Word x);

/// cos/sin of f(eta) = arctan(tan(eta)^(2^order)), evaluated through the
/// normalized power form; stable for all eta including pi/2.
Activation activation(double eta, std::uint32_t order);

/// sqrt(cos^(2k) eta + sin^(2k) eta) with k = 2^order; the squared value is
/// the postselection probability of the branch when the target starts in a
/// basis state.
double success_weight(double eta, std::uint32_t order);

/// Branch coefficient table for one neuron application: entry x holds
/// (cos^k eta(x), sin^k eta(x)), the unnormalized target-lane map.
std::vector<RotationCoeffs>
neuron_branch_table(std::span<const double> theta,
                    std::span<const std::uint32_t> masks,
                    std::size_t num_controls, std::uint32_t order);

/// Apply the neuron in the postselected regime: branchwise unnormalized map
/// followed by one global renormalization. Returns the success probability
/// (the squared norm before renormalization).
double apply_neuron(StateVector& state, const NeuronShape& shape,
                    std::span<const double> theta);

/// Spec convenience wrapper around apply_neuron.
NeuronApplication apply_effective(StateVector& state, const NeuronSpec& spec);

/// Circuit-level construction of the neuron as multi-controlled rotations,
/// controlled R(pi/2) gates and ancilla postselections. Kept as the
/// verification path for apply_neuron; `order` ancilla lanes are appended
/// above the register the shape addresses.
class NeuronCircuit {
  public:
    struct ControlledRotation {
        LaneSet controls; // empty = unconditional
        std::uint32_t target;
        double angle;
    };
    struct Projection {
        std::uint32_t lane; // postselected on |0⟩
    };

    /// Build the gate program. `first_ancilla` is the index of the lowest
    /// ancilla lane; lanes [first_ancilla, first_ancilla + order) must be
    /// |0⟩ when the circuit runs.
    static NeuronCircuit build(const NeuronSpec& spec,
                               std::uint32_t first_ancilla);

    /// Run on a state that includes the ancilla lanes. Returns the joint
    /// probability of all postselections.
    double execute(StateVector& state) const;

    std::size_t gate_count() const { return rotations_.size(); }
    std::size_t projection_count() const { return projection_lanes_.size(); }

  private:
    // Ops interleaved: ops_[i] < 0 marks a projection, >= 0 a rotation index.
    std::vector<ControlledRotation> rotations_;
    std::vector<std::uint32_t> projection_lanes_;
    std::vector<std::int32_t> sequence_;
};

} // namespace qrnn
