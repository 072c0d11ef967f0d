#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "qrnn/gradient.hpp"
#include "qrnn/neuron.hpp"
#include "qrnn/statevector.hpp"

namespace qrnn {

inline constexpr double kQuarterPi = 0.7853981633974483;

/// Shape of one QRNN cell. Simulation uses workspace + io lanes; the
/// circuit-level hardware budget would be workspace + io + order qubits.
struct CellTopology {
    std::uint32_t workspace = 4; // H: cell-state lane count
    std::uint32_t io = 1;        // I: input/output word width in bits
    std::uint32_t stages = 1;    // S: work stages per cell application
    std::uint32_t degree = 2;    // d: neuron polynomial degree
    std::uint32_t order = 2;     // ord: neuron activation order

    std::uint32_t lanes() const { return workspace + io; }
    bool operator==(const CellTopology&) const = default;
};

/// Parameter-group initialization hyperparameters: neuron biases are drawn
/// from N(bias_mean, bias_sigma^2), neuron weights from N(0, weight_sigma^2)
/// and stage rotations from N(0, unitary_sigma^2).
struct InitConfig {
    double bias_mean = kQuarterPi;
    double bias_sigma = 0.1;
    double weight_sigma = 0.1;
    double unitary_sigma = 0.1;
};

/// Postselection bookkeeping for one run: every postselected event's
/// probability, tagged by where it happened. The overhead estimate is the
/// repetition factor amplitude amplification would need, one factor
/// p^(-1/2) per event.
class OverheadMonitor {
  public:
    enum class Event { neuron, output };

    void record(Event kind, double probability);

    /// Smallest recorded probability; 1 when nothing was recorded.
    double min_probability() const { return min_p_; }
    /// O = prod over events of p^(-1/2); O >= 1, and O = 1 iff every
    /// recorded probability is 1.
    double overhead() const;
    /// Same product restricted to one event kind. The output-event overhead
    /// equals exp(total sequence loss / 2) in training mode and is the
    /// quantity that converges to 1 as the loss does; neuron events carry a
    /// floor of 2^(1 - 2^ord) per branch and never approach certainty.
    double overhead(Event kind) const;
    std::size_t event_count() const { return events_.size(); }
    const std::vector<std::pair<Event, double>>& events() const {
        return events_;
    }

  private:
    std::vector<std::pair<Event, double>> events_;
    double min_p_ = 1.0;
    double log_sum_ = 0.0;
    double log_sum_output_ = 0.0;
};

/// Output of one cell application.
struct StepOutput {
    static constexpr std::size_t kNoMarginal = static_cast<std::size_t>(-1);

    /// Distribution over the 2^I output words; empty when the step carried
    /// no target and the output stage was skipped.
    std::vector<double> distribution;
    /// Training mode: probability of the postselected target word.
    double postselect_probability = 1.0;
    /// Sampling mode: the word drawn from the distribution.
    Word sampled_word = 0;
    /// Tape handle of the recorded distribution (recorded runs only).
    std::size_t marginal_id = kNoMarginal;
    bool has_output = false;
};

/// QRNN model: topology plus one flat parameter vector the optimizer works
/// on. Group and per-neuron offsets into the flat vector are fixed by the
/// topology; neuron shapes are precomputed.
///
/// Flat layout: input neurons (H blocks of D(I, d)), stage rotations
/// (S x H angles), stage neurons (S x H blocks of D(H - 1 + I, d)), output
/// neurons (I blocks of D(H, d)).
class QrnnModel {
  public:
    explicit QrnnModel(const CellTopology& topology);

    /// Draw parameters per InitConfig; deterministic for a given seed.
    static QrnnModel initialized(const CellTopology& topology,
                                 const InitConfig& init, std::uint64_t seed);

    const CellTopology& topology() const { return topology_; }

    std::span<const double> parameters() const { return params_; }
    std::span<double> parameters() { return params_; }
    void set_parameters(std::span<const double> values);

    std::size_t parameter_count() const { return params_.size(); }
    /// Closed form: H*D(I,d) + S*(H + H*D(H-1+I,d)) + I*D(H,d).
    static std::size_t parameter_count(const CellTopology& topology);

    // Flat-layout offsets.
    std::size_t input_neuron_base(std::size_t h) const;
    std::size_t stage_rotation_slot(std::size_t s, std::size_t h) const;
    std::size_t stage_neuron_base(std::size_t s, std::size_t h) const;
    std::size_t output_neuron_base(std::size_t i) const;

    std::size_t input_param_count() const { return input_d_; }
    std::size_t stage_param_count() const { return stage_d_; }
    std::size_t output_param_count() const { return output_d_; }

    const NeuronShape& input_neuron_shape(std::size_t h) const {
        return input_shapes_[h];
    }
    const NeuronShape& stage_neuron_shape(std::size_t h) const {
        return stage_shapes_[h];
    }
    const NeuronShape& output_neuron_shape(std::size_t i) const {
        return output_shapes_[i];
    }

    /// i/o lanes: [workspace, workspace + io).
    const LaneSet& io_lanes() const { return io_lanes_; }

  private:
    CellTopology topology_;
    std::vector<double> params_;
    std::vector<NeuronShape> input_shapes_;
    std::vector<NeuronShape> stage_shapes_;
    std::vector<NeuronShape> output_shapes_;
    LaneSet io_lanes_;
    std::size_t input_d_ = 0, stage_d_ = 0, output_d_ = 0;
    std::size_t rotation_base_ = 0, stage_base_ = 0, output_base_ = 0;
};

/// Complete recorded forward pass over one input sequence.
struct RecordedRun {
    Tape tape;
    std::vector<StepOutput> outputs;
    OverheadMonitor monitor;
};

/// Training-mode (postselected) sequence run, recorded for backward().
/// Steps whose target is absent skip the output stage.
RecordedRun record_sequence(const QrnnModel& model,
                            std::span<const Word> inputs,
                            std::span<const std::optional<Word>> targets);

/// Training-mode sequence run without recording (validation / evaluation).
std::vector<StepOutput>
run_sequence(const QrnnModel& model, std::span<const Word> inputs,
             std::span<const std::optional<Word>> targets,
             OverheadMonitor& monitor);

/// Same, continuing from a caller-provided cell state (used to share a
/// common prefix across candidate labels during evaluation). The state must
/// have clean i/o lanes.
std::vector<StepOutput>
run_sequence_from(StateVector& state, const QrnnModel& model,
                  std::span<const Word> inputs,
                  std::span<const std::optional<Word>> targets,
                  OverheadMonitor& monitor);

/// Inference-mode sampling: feed the primer, then feed each sampled word
/// back as the next input. Returns one sampled word per step.
std::vector<Word> generate(const QrnnModel& model,
                           std::span<const Word> primer,
                           std::size_t total_steps, std::mt19937_64& rng,
                           OverheadMonitor* monitor = nullptr);

} // namespace qrnn
