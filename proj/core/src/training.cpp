#include "qrnn/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

namespace qrnn {

namespace {

std::string format_value(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

/// Runs fn(i) for i in [0, n); results must go to per-index slots so the
/// partition never affects the outcome.
void parallel_for(std::size_t n, unsigned workers,
                  const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    const unsigned used = static_cast<unsigned>(
        std::min<std::size_t>(workers, n));
    std::vector<std::thread> threads;
    threads.reserve(used);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (unsigned w = 0; w < used; ++w)
        threads.emplace_back([&] {
            try {
                for (std::size_t i = next.fetch_add(1); i < n;
                     i = next.fetch_add(1))
                    fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        });
    for (auto& t : threads)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

class SgdOptimizer final : public Optimizer {
  public:
    explicit SgdOptimizer(const OptimizerConfig& config) : config_(config) {}
    void step(std::span<double> params, std::span<const double> grad) override;

  private:
    OptimizerConfig config_;
};

class RmspropOptimizer final : public Optimizer {
  public:
    RmspropOptimizer(const OptimizerConfig& config, std::size_t n)
        : config_(config), mean_square_(n, 0.0) {}
    void step(std::span<double> params, std::span<const double> grad) override;

  private:
    OptimizerConfig config_;
    std::vector<double> mean_square_;
};

class AdamOptimizer final : public Optimizer {
  public:
    AdamOptimizer(const OptimizerConfig& config, std::size_t n)
        : config_(config), first_(n, 0.0), second_(n, 0.0) {}
    void step(std::span<double> params, std::span<const double> grad) override;

  private:
    OptimizerConfig config_;
    std::vector<double> first_;
    std::vector<double> second_;
    std::size_t t_ = 0;
};

void check_finite(std::span<const double> grad) {
    for (std::size_t i = 0; i < grad.size(); ++i)
        if (!std::isfinite(grad[i]))
            throw Error("non-finite gradient entry " + format_value(grad[i]) +
                        " at parameter slot " + std::to_string(i));
}

void SgdOptimizer::step(std::span<double> params,
                        std::span<const double> grad) {
    check_finite(grad);
    for (std::size_t i = 0; i < params.size(); ++i)
        params[i] -= config_.learning_rate * grad[i];
}

void RmspropOptimizer::step(std::span<double> params,
                            std::span<const double> grad) {
    check_finite(grad);
    const double decay = config_.rmsprop_decay;
    for (std::size_t i = 0; i < params.size(); ++i) {
        mean_square_[i] =
            decay * mean_square_[i] + (1.0 - decay) * grad[i] * grad[i];
        params[i] -= config_.learning_rate * grad[i] /
                     (std::sqrt(mean_square_[i]) + config_.rmsprop_epsilon);
    }
}

void AdamOptimizer::step(std::span<double> params,
                         std::span<const double> grad) {
    check_finite(grad);
    ++t_;
    const double b1 = config_.adam_beta1;
    const double b2 = config_.adam_beta2;
    const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        first_[i] = b1 * first_[i] + (1.0 - b1) * grad[i];
        second_[i] = b2 * second_[i] + (1.0 - b2) * grad[i] * grad[i];
        const double m_hat = first_[i] / correction1;
        const double v_hat = second_[i] / correction2;
        params[i] -= config_.learning_rate * m_hat /
                     (std::sqrt(v_hat) + config_.adam_epsilon);
    }
}

} // namespace

std::unique_ptr<Optimizer> Optimizer::make(const OptimizerConfig& config,
                                           std::size_t parameter_count) {
    if (config.learning_rate <= 0.0)
        throw Error("learning rate must be positive");
    switch (config.kind) {
    case OptimizerConfig::Kind::sgd:
        return std::make_unique<SgdOptimizer>(config);
    case OptimizerConfig::Kind::rmsprop:
        return std::make_unique<RmspropOptimizer>(config, parameter_count);
    case OptimizerConfig::Kind::adam:
        return std::make_unique<AdamOptimizer>(config, parameter_count);
    }
    throw Error("unknown optimizer kind");
}

void Metrics::write_csv(std::ostream& out) const {
    out << kHeader << '\n';
    for (const MetricsRow& row : rows) {
        out << row.step << ',' << format_value(row.train_loss) << ','
            << format_value(row.val_loss) << ',';
        if (row.accuracy)
            out << format_value(*row.accuracy);
        out << ',' << format_value(row.min_postselect_p) << ','
            << format_value(row.overhead) << ',';
        char seconds[32];
        std::snprintf(seconds, sizeof(seconds), "%.3f", row.seconds);
        out << seconds << '\n';
    }
}

void Metrics::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot open metrics file for writing: " + path.string());
    write_csv(out);
}

double sequence_loss(std::span<const StepOutput> outputs,
                     std::span<const std::optional<Word>> targets) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < outputs.size(); ++t) {
        if (!targets[t].has_value())
            continue;
        sum += -std::log(outputs[t].distribution[*targets[t]]);
        ++count;
    }
    if (count == 0)
        throw Error("sequence_loss needs at least one target-bearing step");
    return sum / static_cast<double>(count);
}

BackwardSeeds sequence_loss_seeds(std::size_t num_marginals,
                                  std::span<const StepOutput> outputs,
                                  std::span<const std::optional<Word>> targets) {
    std::size_t count = 0;
    for (const auto& t : targets)
        if (t.has_value())
            ++count;
    BackwardSeeds seeds;
    seeds.marginals.resize(num_marginals);
    for (std::size_t t = 0; t < outputs.size(); ++t) {
        if (!targets[t].has_value())
            continue;
        const StepOutput& out = outputs[t];
        std::vector<double> seed(out.distribution.size(), 0.0);
        seed[*targets[t]] = -1.0 / (static_cast<double>(count) *
                                    out.distribution[*targets[t]]);
        seeds.marginals[out.marginal_id] = std::move(seed);
    }
    return seeds;
}

SampleGradient sample_gradient(const QrnnModel& model,
                               const TaskSample& sample) {
    RecordedRun run = record_sequence(model, sample.inputs, sample.targets);
    SampleGradient result;
    result.loss = sequence_loss(run.outputs, sample.targets);
    const BackwardSeeds seeds = sequence_loss_seeds(
        run.tape.num_marginals(), run.outputs, sample.targets);
    result.gradient = run.tape.backward(seeds);
    return result;
}

ValidationStats validation_stats(const QrnnModel& model,
                                 std::span<const TaskSample> samples,
                                 unsigned workers) {
    std::vector<double> losses(samples.size());
    std::vector<double> overheads(samples.size());
    std::vector<double> min_ps(samples.size(), 1.0);
    parallel_for(samples.size(), workers, [&](std::size_t i) {
        OverheadMonitor monitor;
        const auto outputs = run_sequence(model, samples[i].inputs,
                                          samples[i].targets, monitor);
        losses[i] = sequence_loss(outputs, samples[i].targets);
        overheads[i] = monitor.overhead();
        min_ps[i] = monitor.min_probability();
    });
    ValidationStats stats;
    if (samples.empty())
        return stats;
    double loss_sum = 0.0, overhead_sum = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        loss_sum += losses[i];
        overhead_sum += overheads[i];
        stats.min_postselect_p = std::min(stats.min_postselect_p, min_ps[i]);
    }
    stats.mean_loss = loss_sum / static_cast<double>(samples.size());
    stats.mean_overhead = overhead_sum / static_cast<double>(samples.size());
    return stats;
}

TrainResult train(QrnnModel& model, const Task& task,
                  const TrainConfig& config, unsigned workers) {
    const auto start = std::chrono::steady_clock::now();
    const auto elapsed = [&] {
        return std::chrono::duration<double>(
                   std::chrono::steady_clock::now() - start)
            .count();
    };
    auto optimizer = Optimizer::make(config.optimizer,
                                     model.parameter_count());
    // Batch stream is decoupled from the init stream.
    std::mt19937_64 batch_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    const auto validation = task.validation();

    TrainResult result;
    const auto record_row = [&](std::size_t step, double train_loss) {
        const ValidationStats stats =
            validation_stats(model, validation, workers);
        MetricsRow row{step,
                       train_loss,
                       stats.mean_loss,
                       std::nullopt,
                       stats.min_postselect_p,
                       stats.mean_overhead,
                       elapsed()};
        if (const LabelSet* labels = task.labels()) {
            const QrnnModel* members[] = {&model};
            row.accuracy =
                evaluate(members, validation, *labels, workers).accuracy;
        }
        result.metrics.rows.push_back(row);
        return stats.mean_loss;
    };

    double val_loss = record_row(0, std::nan(""));
    if (val_loss < config.validation_threshold) {
        result.reached_threshold = true;
        return result;
    }

    std::vector<TaskSample> batch;
    std::vector<double> losses;
    std::vector<GradientVector> gradients;
    for (std::size_t step = 1; step <= config.max_steps; ++step) {
        batch.clear();
        for (std::size_t b = 0; b < config.batch_size; ++b)
            batch.push_back(task.draw(batch_rng));
        losses.assign(batch.size(), 0.0);
        gradients.assign(batch.size(), {});
        parallel_for(batch.size(), workers, [&](std::size_t i) {
            SampleGradient sg = sample_gradient(model, batch[i]);
            losses[i] = sg.loss;
            gradients[i] = std::move(sg.gradient);
        });

        // Fixed-order reduction keeps runs bit-identical across worker
        // counts.
        double batch_loss = 0.0;
        for (double l : losses)
            batch_loss += l;
        batch_loss /= static_cast<double>(batch.size());
        GradientVector grad(model.parameter_count(), 0.0);
        for (const GradientVector& g : gradients)
            for (std::size_t j = 0; j < grad.size(); ++j)
                grad[j] += g[j];
        const double scale = 1.0 / static_cast<double>(batch.size());
        for (double& g : grad)
            g *= scale;
        if (config.max_grad_norm > 0.0) {
            double norm_sq = 0.0;
            for (double g : grad)
                norm_sq += g * g;
            const double norm = std::sqrt(norm_sq);
            if (norm > config.max_grad_norm) {
                const double shrink = config.max_grad_norm / norm;
                for (double& g : grad)
                    g *= shrink;
            }
        }
        optimizer->step(model.parameters(), grad);
        result.steps_run = step;

        if (step % config.validation_interval == 0 ||
            step == config.max_steps) {
            val_loss = record_row(step, batch_loss);
            if (val_loss < config.validation_threshold) {
                result.reached_threshold = true;
                return result;
            }
        }
    }
    return result;
}

EvalResult evaluate(std::span<const QrnnModel* const> models,
                    std::span<const TaskSample> samples,
                    const LabelSet& labels, unsigned workers) {
    if (models.empty())
        throw Error("evaluate needs at least one model");
    const std::size_t classes = labels.num_classes();
    std::vector<char> correct(samples.size(), 0);
    std::vector<double> losses(samples.size(), 0.0);

    parallel_for(samples.size(), workers, [&](std::size_t i) {
        const TaskSample& sample = samples[i];
        if (!sample.label.has_value())
            throw Error("evaluate needs labeled samples");
        std::vector<std::size_t> positions;
        for (std::size_t t = 0; t < sample.targets.size(); ++t)
            if (sample.targets[t].has_value())
                positions.push_back(t);
        const std::size_t first = positions.empty() ? sample.inputs.size()
                                                    : positions.front();

        std::vector<double> class_score(classes, 0.0);
        std::vector<double> true_probs(positions.size(), 0.0);
        const std::span<const Word> inputs = sample.inputs;
        const std::span<const std::optional<Word>> no_targets(
            sample.targets.data(), first);

        for (const QrnnModel* model : models) {
            OverheadMonitor monitor;
            StateVector prefix =
                StateVector::zero(model->topology().lanes());
            run_sequence_from(prefix, *model, inputs.first(first),
                              no_targets, monitor);
            for (std::size_t c = 0; c < classes; ++c) {
                const auto& words = labels.class_words[c];
                if (words.size() != positions.size())
                    throw Error("label words do not match the sample's "
                                "target-bearing steps");
                std::vector<std::optional<Word>> targets(
                    sample.targets.size() - first, std::nullopt);
                for (std::size_t j = 0; j < positions.size(); ++j)
                    targets[positions[j] - first] = words[j];
                StateVector branch = prefix;
                const auto outputs = run_sequence_from(
                    branch, *model, inputs.subspan(first), targets, monitor);
                double score = 1.0;
                for (std::size_t j = 0; j < positions.size(); ++j)
                    score *= outputs[positions[j] - first]
                                 .distribution[words[j]];
                class_score[c] += score;
                if (static_cast<int>(c) == *sample.label)
                    for (std::size_t j = 0; j < positions.size(); ++j)
                        true_probs[j] += outputs[positions[j] - first]
                                             .distribution[words[j]];
            }
        }

        // Strict comparison: ties go to the smaller label value (classes
        // are ordered ascending).
        std::size_t predicted = 0;
        for (std::size_t c = 1; c < classes; ++c)
            if (class_score[c] > class_score[predicted])
                predicted = c;
        correct[i] = static_cast<int>(predicted) == *sample.label;

        double loss = 0.0;
        for (double p : true_probs)
            loss += -std::log(p / static_cast<double>(models.size()));
        losses[i] = positions.empty()
                        ? 0.0
                        : loss / static_cast<double>(positions.size());
    });

    EvalResult result;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        result.accuracy += correct[i];
        result.mean_loss += losses[i];
    }
    if (!samples.empty()) {
        result.accuracy /= static_cast<double>(samples.size());
        result.mean_loss /= static_cast<double>(samples.size());
    }
    return result;
}

} // namespace qrnn
