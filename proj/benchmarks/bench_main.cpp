#include <benchmark/benchmark.h>

#include <random>

#include "qrnn/model.hpp"
#include "qrnn/training.hpp"

namespace {

using namespace qrnn;

StateVector random_state(std::uint32_t lanes, std::uint64_t seed) {
    StateVector state = StateVector::zero(lanes);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& a : state.raw())
        a = normal(rng);
    state.renormalize();
    return state;
}

void BM_Rotation(benchmark::State& state) {
    const auto lanes = static_cast<std::uint32_t>(state.range(0));
    StateVector sv = random_state(lanes, 1);
    double angle = 0.01;
    for (auto _ : state) {
        sv.apply_rotation(0, angle);
        angle = -angle;
        benchmark::DoNotOptimize(sv.raw().data());
    }
}
BENCHMARK(BM_Rotation)->Arg(8)->Arg(12)->Arg(16);

void BM_NeuronApply(benchmark::State& state) {
    const auto controls = static_cast<std::uint32_t>(state.range(0));
    const NeuronShape shape{controls, LaneSet::range(0, controls), 2, 2};
    std::vector<double> theta(param_count(controls, 2), 0.1);
    for (auto _ : state) {
        StateVector sv = random_state(controls + 1, 2);
        benchmark::DoNotOptimize(apply_neuron(sv, shape, theta));
    }
}
BENCHMARK(BM_NeuronApply)->Arg(4)->Arg(7)->Arg(9);

QrnnModel bench_model() {
    return QrnnModel::initialized(CellTopology{8, 2, 2, 2, 2}, InitConfig{},
                                  11);
}

TaskSample bench_sample(std::size_t steps) {
    TaskSample sample;
    std::mt19937_64 rng(3);
    for (std::size_t t = 0; t < steps; ++t) {
        sample.inputs.push_back(rng() & 3);
        sample.targets.push_back(rng() & 3);
    }
    return sample;
}

void BM_SequenceForward(benchmark::State& state) {
    const QrnnModel model = bench_model();
    const TaskSample sample = bench_sample(
        static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        OverheadMonitor monitor;
        benchmark::DoNotOptimize(
            run_sequence(model, sample.inputs, sample.targets, monitor));
    }
}
BENCHMARK(BM_SequenceForward)->Arg(10)->Arg(50);

void BM_SequenceBackward(benchmark::State& state) {
    const QrnnModel model = bench_model();
    const TaskSample sample = bench_sample(
        static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(sample_gradient(model, sample).loss);
}
BENCHMARK(BM_SequenceBackward)->Arg(10)->Arg(50);

} // namespace

BENCHMARK_MAIN();
