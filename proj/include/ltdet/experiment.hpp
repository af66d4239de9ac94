#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltdet/dataset_io.hpp"
#include "ltdet/evaluation.hpp"
#include "ltdet/kernels.hpp"
#include "ltdet/training.hpp"

namespace ltdet {

/// Experiment modes, named after the detector variants they reproduce.
enum class ExperimentMode {
    Rs,
    RsDbl,
    RsDblBbh,
    Cbs,
    CbsBbh,
    CesBbh,
    CbsBbhAll,
    Cascade,
    OneStageMask,
    Mmf,
};

std::string to_string(ExperimentMode mode);
/// Throws ConfigError on an unknown name.
ExperimentMode experiment_mode_from_string(const std::string& name);
TrainMode train_mode_for(ExperimentMode mode);
InferenceRoute inference_route_for(ExperimentMode mode);
std::vector<ExperimentMode> all_experiment_modes();
/// Mode rows of the ablation table, in output order.
std::vector<ExperimentMode> ablation_modes();

/// Smallest scene count whose hash split yields exactly `train_scenes`
/// training scenes.
std::size_t scenes_for_train_count(std::size_t train_scenes, int test_percent);

/// Scene defaults sized for 500 training scenes under the 80/20 split.
SceneConfig default_dataset_config();

struct ExperimentConfig {
    double centroid_scale = 1.0;
    SceneConfig dataset = default_dataset_config();
    TrainConfig train;
    InferenceConfig inference;
    ExperimentMode mode = ExperimentMode::CbsBbh;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    /// Percentage of scenes (by scene-id hash) held out for evaluation.
    int test_percent = 20;
    int jobs = 1;

    void validate() const;
};

/// Every field optional; missing ones keep their defaults. Throws ConfigError.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Hash of the canonical JSON form (mode and lambda included, seeds and jobs
/// excluded).
std::string config_hash(const ExperimentConfig& cfg);

/// True when the scene belongs to the evaluation split. Depends only on the
/// scene id.
bool is_test_scene(std::uint64_t scene_id, int test_percent);

struct Split {
    std::vector<Scene> train;
    std::vector<Scene> test;
};
Split split_dataset(const std::vector<Scene>& scenes, int test_percent);

Dataset make_dataset(const ExperimentConfig& cfg);

struct RunResult {
    ExperimentMode mode = ExperimentMode::Rs;
    std::uint64_t seed = 0;
    double lambda = 0.0;
    std::string config_hash;
    TrainedHeads heads;
    DetectionsByScene detections;
    EvalReport report;
    std::size_t train_scenes = 0;
    std::size_t test_scenes = 0;
    std::size_t max_detections_in_scene = 0;
    /// Config echo: effective samples per head per step.
    std::size_t effective_num_samples = 0;
};

/// Train and evaluate one (mode, seed).
RunResult run_once(const ExperimentConfig& cfg, const Dataset& dataset, ExperimentMode mode,
                   std::uint64_t seed);

/// Several independent runs, `jobs` at a time. Output order matches input.
struct RunRequest {
    ExperimentMode mode;
    std::uint64_t seed;
    double lambda;
};
std::vector<RunResult> run_many(const ExperimentConfig& cfg, const Dataset& dataset,
                                const std::vector<RunRequest>& requests);

struct MetricStats {
    double mean = 0.0;
    double stddev = 0.0;
};

/// Mean and population standard deviation.
MetricStats stats_of(const std::vector<double>& values);

// Sub-commands. Each writes its files into out_dir and returns the results
// it computed.
std::filesystem::path cmd_generate(const ExperimentConfig& cfg, const std::filesystem::path& out_path);
std::vector<RunResult> cmd_run(const ExperimentConfig& cfg, const Dataset& dataset,
                               const std::filesystem::path& out_dir);
std::vector<RunResult> cmd_sweep_lambda(const ExperimentConfig& cfg, const Dataset& dataset,
                                        const std::vector<double>& lambdas,
                                        const std::filesystem::path& out_dir);
std::vector<RunResult> cmd_ablate(const ExperimentConfig& cfg, const Dataset& dataset,
                                  const std::filesystem::path& out_dir);
EvalReport cmd_evaluate(const ExperimentConfig& cfg, const Dataset& dataset,
                        const std::filesystem::path& detections_path,
                        const std::filesystem::path& out_dir);

}  // namespace ltdet
