#include "ltdet/kernels.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>

#include <omp.h>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace ltdet {

std::string to_string(InferenceRoute route) {
    switch (route) {
        case InferenceRoute::Single: return "single";
        case InferenceRoute::Dual: return "dual";
        case InferenceRoute::AllNms: return "all-nms";
        case InferenceRoute::Cascade: return "cascade";
    }
    return "unknown";
}

namespace {

// Exceptions must not escape an OpenMP region, so shape errors are caught here.
void check_setup(const TrainedHeads& heads, const DetectionSetup& setup) {
    setup.inference.validate();
    const InferenceRoute route = setup.route;
    const std::size_t needed = route == InferenceRoute::Single    ? 1
                               : route == InferenceRoute::Cascade ? 2 * kCascadeStages
                                                                  : 2;
    if (heads.params.size() != needed) {
        throw std::invalid_argument("detect: route " + to_string(route) + " needs " +
                                    std::to_string(needed) + " heads, got " +
                                    std::to_string(heads.params.size()));
    }
}

}  // namespace

std::vector<ScoredDetection> detect_scene(const TrainedHeads& heads, const Scene& scene,
                                          const DetectionSetup& setup) {
    const std::vector<Proposal> proposals = scene_proposals(
        scene, setup.scene_config, setup.proposals, setup.scene_config.seed, kEvalProposalTag);
    switch (setup.route) {
        case InferenceRoute::Single:
            return predict_single(heads.params.at(0), proposals, setup.inference);
        case InferenceRoute::Dual: {
            const HeadPair p = heads.pair();
            return predict_dual(p.head, p.tail, proposals, setup.partition, setup.inference);
        }
        case InferenceRoute::AllNms: {
            const HeadPair p = heads.pair();
            return predict_all_nms(p.head, p.tail, proposals, setup.inference);
        }
        case InferenceRoute::Cascade:
            return predict_cascade(heads.cascade_stages(), proposals, setup.partition,
                                   setup.inference);
    }
    throw std::logic_error("unhandled inference route");
}

DetectionsByScene detect(const TrainedHeads& heads, std::span<const Scene> scenes,
                         const DetectionSetup& setup) {
    check_setup(heads, setup);
    std::vector<std::vector<ScoredDetection>> per_scene(scenes.size());
    const auto n = static_cast<std::int64_t>(scenes.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        per_scene[k] = detect_scene(heads, scenes[k], setup);
    }
    DetectionsByScene out;
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        out[scenes[i].scene_id] = std::move(per_scene[i]);
    }
    return out;
}

DetectionsByScene detect_serial(const TrainedHeads& heads, std::span<const Scene> scenes,
                                const DetectionSetup& setup) {
    check_setup(heads, setup);
    DetectionsByScene out;
    for (const Scene& s : scenes) {
        out[s.scene_id] = detect_scene(heads, s, setup);
    }
    return out;
}

void configure_allocator() {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 64 << 20);
    mallopt(M_TRIM_THRESHOLD, 128 << 20);
#endif
}

ForwardCache forward_batch_parallel(const HeadParams& params, const Eigen::MatrixXd& features) {
    if (features.rows() != params.w1.cols()) {
        return forward_batch(params, features);  // reports the mismatch
    }
    const Eigen::Index n = features.cols();
    const int threads = omp_get_max_threads();
    const Eigen::Index chunk = std::max<Eigen::Index>(64, (n + threads - 1) / threads);
    const Eigen::Index num_chunks = (n + chunk - 1) / chunk;
    if (num_chunks <= 1) {
        return forward_batch(params, features);
    }
    const auto hidden = static_cast<Eigen::Index>(params.hidden());
    const Eigen::Index outputs = params.wc.rows();
    ForwardCache out;
    out.z1.resize(hidden, n);
    out.a1.resize(hidden, n);
    out.z2.resize(hidden, n);
    out.a2.resize(hidden, n);
    out.scores.resize(outputs, n);
    out.log_scores.resize(outputs, n);
    out.deltas.resize(params.wr.rows(), n);
#pragma omp parallel for schedule(static)
    for (Eigen::Index k = 0; k < num_chunks; ++k) {
        const Eigen::Index begin = k * chunk;
        const Eigen::Index len = std::min(chunk, n - begin);
        const ForwardCache part = forward_batch(params, features.middleCols(begin, len));
        out.z1.middleCols(begin, len) = part.z1;
        out.a1.middleCols(begin, len) = part.a1;
        out.z2.middleCols(begin, len) = part.z2;
        out.a2.middleCols(begin, len) = part.a2;
        out.scores.middleCols(begin, len) = part.scores;
        out.log_scores.middleCols(begin, len) = part.log_scores;
        out.deltas.middleCols(begin, len) = part.deltas;
    }
    return out;
}

}  // namespace ltdet
