#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>

#include "qrnn/model.hpp"
#include "qrnn/tasks/task.hpp"

namespace qrnn {

struct OptimizerConfig {
    enum class Kind { sgd, rmsprop, adam };

    Kind kind = Kind::adam;
    double learning_rate = 0.05;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    double rmsprop_decay = 0.9;
    double rmsprop_epsilon = 1e-8;
};

/// First-order update rule with per-parameter state where the rule needs it.
class Optimizer {
  public:
    static std::unique_ptr<Optimizer> make(const OptimizerConfig& config,
                                           std::size_t parameter_count);
    virtual ~Optimizer() = default;

    /// Applies one update in place. Non-finite gradient entries abort with
    /// a diagnostic naming the offending slot.
    virtual void step(std::span<double> params,
                      std::span<const double> grad) = 0;
};

struct TrainConfig {
    std::size_t batch_size = 32;
    std::size_t max_steps = 500;
    double validation_threshold = 1e-3;
    std::size_t validation_interval = 25;
    std::uint64_t seed = 1;
    InitConfig init;
    OptimizerConfig optimizer;
    /// Gradient max-norm guard; 0 disables clipping.
    double max_grad_norm = 0.0;
};

struct MetricsRow {
    std::size_t step = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    std::optional<double> accuracy;
    double min_postselect_p = 1.0;
    double overhead = 1.0;
    double seconds = 0.0;
};

/// Training trajectory, one row per validation check.
struct Metrics {
    static constexpr std::string_view kHeader =
        "step,train_loss,val_loss,accuracy,min_postselect_p,overhead,seconds";

    std::vector<MetricsRow> rows;

    void write_csv(std::ostream& out) const;
    void write_csv(const std::filesystem::path& path) const;
};

/// Mean over target-bearing steps of -ln(distribution[target]).
double sequence_loss(std::span<const StepOutput> outputs,
                     std::span<const std::optional<Word>> targets);

/// Backward seeds of sequence_loss for a recorded run.
BackwardSeeds sequence_loss_seeds(std::size_t num_marginals,
                                  std::span<const StepOutput> outputs,
                                  std::span<const std::optional<Word>> targets);

/// Forward + backward of one sample.
struct SampleGradient {
    double loss = 0.0;
    GradientVector gradient;
};
SampleGradient sample_gradient(const QrnnModel& model,
                               const TaskSample& sample);

/// Validation-set summary in training (postselected) mode.
struct ValidationStats {
    double mean_loss = 0.0;
    double min_postselect_p = 1.0;
    /// Mean per-sequence amplitude-amplification overhead estimate.
    double mean_overhead = 1.0;
};
ValidationStats validation_stats(const QrnnModel& model,
                                 std::span<const TaskSample> samples,
                                 unsigned workers = 1);

struct TrainResult {
    Metrics metrics;
    bool reached_threshold = false;
    std::size_t steps_run = 0;
};

/// Batched gradient training with threshold stopping. Deterministic for a
/// given config and seed: batches come from one seeded stream and gradients
/// reduce in sample order regardless of the worker count.
TrainResult train(QrnnModel& model, const Task& task, const TrainConfig& config,
                  unsigned workers = 1);

struct EvalResult {
    double accuracy = 0.0;
    double mean_loss = 0.0;
};

/// Accuracy and mean loss of a model (or a distribution-averaged ensemble)
/// on labeled samples. Class scores are the teacher-forced probabilities of
/// each candidate label's words; ties break toward the smaller label value.
EvalResult evaluate(std::span<const QrnnModel* const> models,
                    std::span<const TaskSample> samples,
                    const LabelSet& labels, unsigned workers = 1);

} // namespace qrnn
