#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "qrnn/neuron.hpp"
#include "qrnn/statevector.hpp"

namespace qrnn {

/// Flat vector of partial derivatives, one per registered parameter slot.
using GradientVector = std::vector<double>;

/// Recording something that has no derivative (or referencing a parameter
/// slot outside the registered range).
class RecordingError : public Error {
  public:
    using Error::Error;
};

/// Gradients of the scalar loss with respect to a tape's recorded outputs.
/// Anything left empty contributes zero.
struct BackwardSeeds {
    /// Per recorded marginal, in record order; inner length 2^|lanes|.
    std::vector<std::vector<double>> marginals;
    /// Per recorded probability output (projections and neuron success
    /// probabilities), in record order.
    std::vector<double> probabilities;
    /// With respect to the final state amplitudes.
    std::vector<double> final_state;
};

/// Recorded forward computation over a StateVector, differentiable in
/// reverse mode through rotations, neuron maps, projections,
/// renormalizations and marginals.
///
/// The state before each non-unitary operation (neuron, projection) is
/// checkpointed; unitary segments are recomputed by inverse application in
/// the backward sweep, so memory stays proportional to the number of
/// non-unitary operations. Parameterized operations reference slots of the
/// flat parameter vector passed at construction; the slot values are frozen
/// into the tape, so replay() reproduces the recorded run bit for bit even
/// after the parameters change.
class Tape {
  public:
    static constexpr bool kRecords = true;
    static constexpr std::size_t kNoSlot = static_cast<std::size_t>(-1);

    Tape(StateVector initial, std::span<const double> params);

    /// Trainable rotation of `target` by params[slot].
    void rotation(std::uint32_t target, std::size_t slot);
    /// Fixed-angle rotation (no parameter).
    void rotation_const(std::uint32_t target, double angle);
    void bitflip(std::uint32_t target);
    /// Neuron with theta = params[theta_base .. theta_base + D). Returns the
    /// success probability, which is also recorded as a probability output.
    double neuron(const NeuronShape& shape, std::size_t theta_base);
    /// Returns the outcome probability, recorded as a probability output.
    double project(const LaneSet& lanes, Word outcome);
    /// Returns the distribution, recorded as a marginal output.
    std::vector<double> marginal(const LaneSet& lanes);
    void reset_lanes(const LaneSet& lanes, Word known);

    const StateVector& state() const { return state_; }
    std::size_t parameter_count() const { return num_params_; }
    std::size_t num_marginals() const { return num_marginals_; }
    std::size_t num_probabilities() const { return num_probabilities_; }
    std::size_t size() const { return ops_.size(); }

    /// Re-execute the recorded program from the initial state.
    StateVector replay() const;

    /// Reverse sweep. Exact partial derivatives of the scalar loss whose
    /// output gradients are given by `seeds`, one entry per parameter slot.
    GradientVector backward(const BackwardSeeds& seeds) const;

  private:
    struct RotationOp {
        std::uint32_t target;
        std::size_t slot;
        double theta;
    };
    struct BitflipOp {
        std::uint32_t target;
    };
    struct NeuronOp {
        NeuronShape shape;
        std::vector<std::uint32_t> masks;
        std::size_t theta_base;
        std::vector<double> theta;
        StateVector before;
        double probability;
        std::size_t prob_index;
    };
    struct ProjectOp {
        LaneSet lanes;
        Word outcome;
        StateVector before;
        double probability;
        std::size_t prob_index;
    };
    struct MarginalOp {
        LaneSet lanes;
        std::size_t index;
    };
    struct ResetOp {
        LaneSet lanes;
        Word known;
    };
    using Op = std::variant<RotationOp, BitflipOp, NeuronOp, ProjectOp,
                            MarginalOp, ResetOp>;

    double resolve(std::size_t slot) const;

    StateVector state_;
    StateVector initial_;
    std::span<const double> params_; // valid during recording only
    std::size_t num_params_;
    std::vector<Op> ops_;
    std::size_t num_marginals_ = 0;
    std::size_t num_probabilities_ = 0;
};

/// Per-parameter comparison of a reverse-mode gradient against central
/// finite differences of the loss.
struct FiniteDifferenceReport {
    double max_abs_deviation = 0.0;
    double max_rel_deviation = 0.0;
    std::size_t worst_parameter = 0;
    bool passed = true;
    GradientVector analytic;
    GradientVector numeric;

    bool empty() const { return analytic.empty(); }
};

/// Compare `gradient(params)` against central differences of `loss` with the
/// given step. A parameter passes when |analytic - numeric| is at most
/// tolerance * (1 + |numeric|).
FiniteDifferenceReport finite_difference_check(
    std::span<const double> params,
    const std::function<double(std::span<const double>)>& loss,
    const std::function<GradientVector(std::span<const double>)>& gradient,
    double step, double tolerance);

} // namespace qrnn
