#pragma once

// Scene-parallel inference drivers. Every OpenMP kernel here has a serial
// reference that must produce identical output; tests compare the two and
// bench/bench_kernels.cpp times them.

#include <span>
#include <string>
#include <vector>

#include "ltdet/evaluation.hpp"
#include "ltdet/fusion.hpp"
#include "ltdet/training.hpp"

namespace ltdet {

enum class InferenceRoute { Single, Dual, AllNms, Cascade };

std::string to_string(InferenceRoute route);

struct DetectionSetup {
    InferenceRoute route = InferenceRoute::Single;
    SceneConfig scene_config;
    ProposalConfig proposals;
    ClassPartition partition;
    InferenceConfig inference;
};

/// Detections for one scene from the evaluation-time proposals.
std::vector<ScoredDetection> detect_scene(const TrainedHeads& heads, const Scene& scene,
                                          const DetectionSetup& setup);

/// OpenMP over scenes.
DetectionsByScene detect(const TrainedHeads& heads, std::span<const Scene> scenes,
                         const DetectionSetup& setup);
DetectionsByScene detect_serial(const TrainedHeads& heads, std::span<const Scene> scenes,
                                const DetectionSetup& setup);

/// Keeps the per-step activation buffers (a few hundred KiB each) on the heap
/// instead of fresh mmap'd pages. glibc only; a no-op elsewhere. Call once
/// from main().
void configure_allocator();

/// forward_batch() with the columns split across OpenMP threads.
ForwardCache forward_batch_parallel(const HeadParams& params, const Eigen::MatrixXd& features);

}  // namespace ltdet
