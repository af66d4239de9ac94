// OpenMP kernels against their serial references.
//   ./bench_kernels --benchmark_filter=Detect

#include <benchmark/benchmark.h>

#include <random>

#include "ltdet/evaluation.hpp"
#include "ltdet/kernels.hpp"

using namespace ltdet;

namespace {

struct World {
    std::vector<ClassSpec> specs = default_visdrone_spec();
    SceneConfig config;
    std::vector<Scene> scenes;
    DetectionSetup setup;
    TrainedHeads heads;
    DetectionsByScene detections;

    World() {
        config.num_scenes = 64;
        scenes = generate_dataset(specs, config);
        setup.scene_config = config;
        setup.partition = partition_from_specs(specs);
        setup.route = InferenceRoute::Dual;
        TrainConfig tc;
        tc.epochs = 1;
        heads = train(scenes, config, setup.partition, TrainMode::CbsBbh, tc);
        detections = detect_serial(heads, scenes, setup);
    }
};

const World& world() {
    static const World w;
    return w;
}

void BM_DetectSerial(benchmark::State& state) {
    const World& w = world();
    for (auto _ : state) {
        benchmark::DoNotOptimize(detect_serial(w.heads, w.scenes, w.setup));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.scenes.size()));
}

void BM_DetectParallel(benchmark::State& state) {
    const World& w = world();
    for (auto _ : state) {
        benchmark::DoNotOptimize(detect(w.heads, w.scenes, w.setup));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.scenes.size()));
}

void BM_EvaluateSerial(benchmark::State& state) {
    const World& w = world();
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate_serial(w.detections, w.scenes, w.setup.partition));
    }
}

void BM_EvaluateParallel(benchmark::State& state) {
    const World& w = world();
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate(w.detections, w.scenes, w.setup.partition));
    }
}

void BM_GenerateSerial(benchmark::State& state) {
    SceneConfig c;
    c.num_scenes = static_cast<std::size_t>(state.range(0));
    const auto specs = default_visdrone_spec();
    for (auto _ : state) {
        benchmark::DoNotOptimize(generate_dataset_serial(specs, c));
    }
}

void BM_GenerateParallel(benchmark::State& state) {
    SceneConfig c;
    c.num_scenes = static_cast<std::size_t>(state.range(0));
    const auto specs = default_visdrone_spec();
    for (auto _ : state) {
        benchmark::DoNotOptimize(generate_dataset(specs, c));
    }
}

Eigen::MatrixXd random_features(Eigen::Index cols) {
    std::mt19937_64 g(1);
    std::normal_distribution<double> n01(0.0, 1.0);
    Eigen::MatrixXd x(11, cols);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n01(g);
    return x;
}

void BM_ForwardSerial(benchmark::State& state) {
    const HeadParams p = HeadParams::random(11, 64, 10, 1);
    const Eigen::MatrixXd x = random_features(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(forward_batch(p, x));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ForwardParallel(benchmark::State& state) {
    const HeadParams p = HeadParams::random(11, 64, 10, 1);
    const Eigen::MatrixXd x = random_features(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(forward_batch_parallel(p, x));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_DetectSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DetectParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluateSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluateParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GenerateSerial)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GenerateParallel)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardSerial)->Arg(512)->Arg(8192)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ForwardParallel)->Arg(512)->Arg(8192)->Unit(benchmark::kMicrosecond);

int main(int argc, char** argv) {
    configure_allocator();
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
