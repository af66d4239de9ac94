#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "ltdet/geometry.hpp"
#include "ltdet/rng.hpp"

namespace ltdet {

using Feature = std::vector<double>;

enum class ClassGroup { Head, Tail };

struct ClassSpec {
    int class_id = 0;
    std::string name;
    double proportion = 0.0;
    ClassGroup group = ClassGroup::Tail;
    Feature feature_centroid;
};

template <typename T>
struct Range {
    T min{};
    T max{};
};

struct SceneConfig {
    std::size_t num_scenes = 625;
    Range<int> objects_per_scene{8, 24};
    double extent_width = 400.0;
    double extent_height = 300.0;
    Range<double> object_size{12.0, 40.0};
    std::size_t feature_dim = 11;
    double feature_noise_sigma = 0.5;
    Feature background_centroid;  // empty means the one-hot slot after the last class
    std::uint64_t seed = 7;
};

/// Parameters of the simulated region-proposal stage.
struct ProposalConfig {
    // Enough positives per scene (128-384 at 8-24 objects) that the 128
    // positive slots of a 512-sample draw are contested.
    int proposals_per_object = 16;
    double jitter_sigma = 1.5;
    std::size_t num_background = 400;
    double feature_noise_sigma = 0.25;
};

struct ObjectInstance {
    Box box;
    int class_id = 0;
    Feature feature;
};

struct Scene {
    std::uint64_t scene_id = 0;
    std::vector<ObjectInstance> objects;
};

struct Proposal {
    Box box;
    Feature feature;
};

/// Head/tail split of the foreground classes.
struct ClassPartition {
    std::set<int> head_classes;
    std::set<int> tail_classes;

    bool is_head(int class_id) const { return head_classes.count(class_id) != 0; }
    bool is_tail(int class_id) const { return tail_classes.count(class_id) != 0; }
    int num_classes() const {
        return static_cast<int>(head_classes.size() + tail_classes.size());
    }
};

/// Ten VisDrone classes with training-set proportions re-normalised to sum to
/// one. ped, person and car form the head group. Centroids sit at
/// `centroid_scale` times the one-hot direction of each class in an
/// 11-dimensional feature space; the last slot is reserved for background.
std::vector<ClassSpec> default_visdrone_spec(double centroid_scale = 1.0);

/// Raw percentages as published, before re-normalisation.
std::vector<double> visdrone_raw_percentages();

/// Throws std::invalid_argument on inconsistent specs.
void validate_specs(const std::vector<ClassSpec>& specs);
void validate_config(const SceneConfig& config);

ClassPartition partition_from_specs(const std::vector<ClassSpec>& specs);

/// Background centroid actually used by `config`.
Feature background_centroid(const SceneConfig& config);

/// Deterministic in (specs, config). Scene i draws from its own substream of
/// config.seed, so scenes are generated in parallel.
std::vector<Scene> generate_dataset(const std::vector<ClassSpec>& specs, const SceneConfig& config);

/// Serial reference for generate_dataset().
std::vector<Scene> generate_dataset_serial(const std::vector<ClassSpec>& specs,
                                           const SceneConfig& config);

/// Simulated RPN output: proposals_per_object jittered copies of every
/// ground-truth box followed by num_background uniformly placed boxes that
/// carry background features.
std::vector<Proposal> generate_proposals(const Scene& scene, const SceneConfig& config,
                                         const ProposalConfig& proposals, Rng& rng);

}  // namespace ltdet
