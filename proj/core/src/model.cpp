#include "qrnn/model.hpp"

#include <cmath>

namespace qrnn {

void OverheadMonitor::record(Event kind, double probability) {
    // Renormalization can report 1 + epsilon on identity maps; clamp so the
    // overhead stays a true repetition factor.
    const double p = std::min(probability, 1.0);
    events_.emplace_back(kind, p);
    min_p_ = std::min(min_p_, p);
    log_sum_ += std::log(p);
    if (kind == Event::output)
        log_sum_output_ += std::log(p);
}

double OverheadMonitor::overhead() const {
    return std::exp(-0.5 * log_sum_);
}

double OverheadMonitor::overhead(Event kind) const {
    if (kind == Event::output)
        return std::exp(-0.5 * log_sum_output_);
    return std::exp(-0.5 * (log_sum_ - log_sum_output_));
}

QrnnModel::QrnnModel(const CellTopology& topology) : topology_(topology) {
    const std::uint32_t h_count = topology.workspace;
    const std::uint32_t i_count = topology.io;
    const std::uint32_t d = topology.degree;
    io_lanes_ = LaneSet::range(h_count, i_count);

    input_d_ = param_count(i_count, d);
    stage_d_ = param_count(h_count - 1 + i_count, d);
    output_d_ = param_count(h_count, d);
    rotation_base_ = h_count * input_d_;
    stage_base_ = rotation_base_ + topology.stages * h_count;
    output_base_ =
        stage_base_ + topology.stages * h_count * stage_d_;
    params_.assign(output_base_ + i_count * output_d_, 0.0);

    for (std::uint32_t h = 0; h < h_count; ++h)
        input_shapes_.push_back(
            {h, LaneSet::range(h_count, i_count), d, topology.order});
    for (std::uint32_t h = 0; h < h_count; ++h) {
        std::vector<std::uint32_t> controls;
        for (std::uint32_t other = 0; other < h_count; ++other)
            if (other != h)
                controls.push_back(other);
        for (std::uint32_t i = 0; i < i_count; ++i)
            controls.push_back(h_count + i);
        stage_shapes_.push_back(
            {h, LaneSet(std::move(controls)), d, topology.order});
    }
    for (std::uint32_t i = 0; i < i_count; ++i)
        output_shapes_.push_back(
            {h_count + i, LaneSet::range(0, h_count), d, topology.order});
}

QrnnModel QrnnModel::initialized(const CellTopology& topology,
                                 const InitConfig& init, std::uint64_t seed) {
    QrnnModel model(topology);
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    const auto fill_neuron = [&](std::size_t base, std::size_t count) {
        model.params_[base] = init.bias_mean + init.bias_sigma * unit(gen);
        for (std::size_t j = 1; j < count; ++j)
            model.params_[base + j] = init.weight_sigma * unit(gen);
    };
    const auto& topo = model.topology_;
    for (std::uint32_t h = 0; h < topo.workspace; ++h)
        fill_neuron(model.input_neuron_base(h), model.input_d_);
    for (std::uint32_t s = 0; s < topo.stages; ++s)
        for (std::uint32_t h = 0; h < topo.workspace; ++h)
            model.params_[model.stage_rotation_slot(s, h)] =
                init.unitary_sigma * unit(gen);
    for (std::uint32_t s = 0; s < topo.stages; ++s)
        for (std::uint32_t h = 0; h < topo.workspace; ++h)
            fill_neuron(model.stage_neuron_base(s, h), model.stage_d_);
    for (std::uint32_t i = 0; i < topo.io; ++i)
        fill_neuron(model.output_neuron_base(i), model.output_d_);
    return model;
}

void QrnnModel::set_parameters(std::span<const double> values) {
    if (values.size() != params_.size())
        throw Error("parameter vector length mismatch");
    params_.assign(values.begin(), values.end());
}

std::size_t QrnnModel::parameter_count(const CellTopology& t) {
    return t.workspace * param_count(t.io, t.degree) +
           t.stages * (t.workspace +
                       t.workspace *
                           param_count(t.workspace - 1 + t.io, t.degree)) +
           t.io * param_count(t.workspace, t.degree);
}

std::size_t QrnnModel::input_neuron_base(std::size_t h) const {
    return h * input_d_;
}

std::size_t QrnnModel::stage_rotation_slot(std::size_t s,
                                           std::size_t h) const {
    return rotation_base_ + s * topology_.workspace + h;
}

std::size_t QrnnModel::stage_neuron_base(std::size_t s, std::size_t h) const {
    return stage_base_ + (s * topology_.workspace + h) * stage_d_;
}

std::size_t QrnnModel::output_neuron_base(std::size_t i) const {
    return output_base_ + i * output_d_;
}

namespace {

/// Applies operations immediately without recording; used for validation,
/// evaluation and inference sampling.
struct EagerExec {
    static constexpr bool kRecords = false;

    StateVector state;
    std::span<const double> params;

    void rotation(std::uint32_t target, std::size_t slot) {
        state.apply_rotation(target, params[slot]);
    }
    void bitflip(std::uint32_t target) { state.apply_bitflip(target); }
    double neuron(const NeuronShape& shape, std::size_t base) {
        const std::size_t count =
            param_count(shape.controls.size(), shape.degree);
        return apply_neuron(state, shape, params.subspan(base, count));
    }
    double project(const LaneSet& lanes, Word outcome) {
        return state.project(lanes, outcome);
    }
    std::vector<double> marginal(const LaneSet& lanes) {
        return state.marginal(lanes);
    }
    void reset_lanes(const LaneSet& lanes, Word known) {
        state.reset_lanes(lanes, known);
    }
};

Word sample_word(const std::vector<double>& distribution,
                 std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double u = uniform(rng);
    double cumulative = 0.0;
    Word last_positive = 0;
    for (Word w = 0; w < distribution.size(); ++w) {
        if (distribution[w] <= 0.0)
            continue;
        last_positive = w;
        cumulative += distribution[w];
        if (u < cumulative)
            return w;
    }
    return last_positive;
}

template <class Exec>
StepOutput cell_step(Exec& exec, const QrnnModel& model, Word input,
                     const std::optional<Word>& target, bool sampling,
                     std::mt19937_64* rng, OverheadMonitor& monitor) {
    if constexpr (Exec::kRecords) {
        if (sampling)
            throw RecordingError(
                "sampling collapses are not differentiable and cannot be "
                "recorded; run inference eagerly");
    }
    const CellTopology& topo = model.topology();
    const LaneSet& io = model.io_lanes();

    const auto write_input = [&] {
        for (std::uint32_t i = 0; i < topo.io; ++i)
            if (input & (Word{1} << i))
                exec.bitflip(topo.workspace + i);
    };

    write_input();
    for (std::uint32_t h = 0; h < topo.workspace; ++h)
        monitor.record(OverheadMonitor::Event::neuron,
                       exec.neuron(model.input_neuron_shape(h),
                                   model.input_neuron_base(h)));
    for (std::uint32_t s = 0; s < topo.stages; ++s) {
        for (std::uint32_t h = 0; h < topo.workspace; ++h)
            exec.rotation(h, model.stage_rotation_slot(s, h));
        for (std::uint32_t h = 0; h < topo.workspace; ++h)
            monitor.record(OverheadMonitor::Event::neuron,
                           exec.neuron(model.stage_neuron_shape(h),
                                       model.stage_neuron_base(s, h)));
    }
    // The work stages only condition on the i/o lanes, so they still hold
    // |input⟩ exactly; the same flips return them to |0...0⟩.
    write_input();

    StepOutput out;
    if (!sampling && !target.has_value())
        return out;

    for (std::uint32_t i = 0; i < topo.io; ++i)
        monitor.record(OverheadMonitor::Event::neuron,
                       exec.neuron(model.output_neuron_shape(i),
                                   model.output_neuron_base(i)));
    out.distribution = exec.marginal(io);
    out.has_output = true;
    if constexpr (Exec::kRecords)
        out.marginal_id = exec.num_marginals() - 1;

    if (!sampling) {
        out.postselect_probability = exec.project(io, *target);
        monitor.record(OverheadMonitor::Event::output,
                       out.postselect_probability);
        exec.reset_lanes(io, *target);
    } else {
        out.sampled_word = sample_word(out.distribution, *rng);
        exec.project(io, out.sampled_word);
        exec.reset_lanes(io, out.sampled_word);
    }
    return out;
}

template <class Exec>
std::vector<StepOutput>
run_steps(Exec& exec, const QrnnModel& model, std::span<const Word> inputs,
          std::span<const std::optional<Word>> targets,
          OverheadMonitor& monitor) {
    if (inputs.size() != targets.size())
        throw Error("inputs and targets must have the same length");
    std::vector<StepOutput> outputs;
    outputs.reserve(inputs.size());
    for (std::size_t t = 0; t < inputs.size(); ++t)
        outputs.push_back(cell_step(exec, model, inputs[t], targets[t],
                                    /*sampling=*/false, nullptr, monitor));
    return outputs;
}

} // namespace

RecordedRun record_sequence(const QrnnModel& model,
                            std::span<const Word> inputs,
                            std::span<const std::optional<Word>> targets) {
    RecordedRun run{Tape(StateVector::zero(model.topology().lanes()),
                         model.parameters()),
                    {},
                    {}};
    run.outputs = run_steps(run.tape, model, inputs, targets, run.monitor);
    return run;
}

std::vector<StepOutput>
run_sequence(const QrnnModel& model, std::span<const Word> inputs,
             std::span<const std::optional<Word>> targets,
             OverheadMonitor& monitor) {
    StateVector state = StateVector::zero(model.topology().lanes());
    return run_sequence_from(state, model, inputs, targets, monitor);
}

std::vector<StepOutput>
run_sequence_from(StateVector& state, const QrnnModel& model,
                  std::span<const Word> inputs,
                  std::span<const std::optional<Word>> targets,
                  OverheadMonitor& monitor) {
    EagerExec exec{std::move(state), model.parameters()};
    auto outputs = run_steps(exec, model, inputs, targets, monitor);
    state = std::move(exec.state);
    return outputs;
}

std::vector<Word> generate(const QrnnModel& model,
                           std::span<const Word> primer,
                           std::size_t total_steps, std::mt19937_64& rng,
                           OverheadMonitor* monitor) {
    if (primer.empty())
        throw Error("generate needs at least one primer word");
    OverheadMonitor local;
    OverheadMonitor& mon = monitor ? *monitor : local;
    EagerExec exec{StateVector::zero(model.topology().lanes()),
                   model.parameters()};
    std::vector<Word> sampled;
    sampled.reserve(total_steps);
    for (std::size_t t = 0; t < total_steps; ++t) {
        const Word input =
            t < primer.size() ? primer[t] : sampled.back();
        const StepOutput out = cell_step(exec, model, input, std::nullopt,
                                         /*sampling=*/true, &rng, mon);
        sampled.push_back(out.sampled_word);
    }
    return sampled;
}

} // namespace qrnn
