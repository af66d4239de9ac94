#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "ltdet/geometry.hpp"
#include "ltdet/heads.hpp"
#include "ltdet/scenes.hpp"

namespace ltdet {

inline constexpr std::size_t kDefaultMaxDetections = 500;

struct InferenceConfig {
    double score_threshold = 0.05;
    double nms_iou = 0.5;
    std::size_t max_detections_per_scene = kDefaultMaxDetections;
    /// BBH-ALL fusion only: suppress across classes.
    bool class_agnostic_all_nms = false;

    void validate() const;
};

struct HeadPair {
    HeadParams head;  // BBH(H)
    HeadParams tail;  // BBH(T)
};

inline constexpr std::size_t kCascadeStages = 3;

/// Which classes a head may emit.
enum class ClassFilter { All, HeadOnly, TailOnly };

/// Per-class candidates for every proposal: score >= threshold, box decoded
/// from that class's deltas. Appends to `out`.
void emit_candidates(const HeadParams& params, std::span<const Proposal> proposals,
                     const ClassPartition& partition, ClassFilter filter, SourceHead tag,
                     double score_threshold, std::vector<ScoredDetection>& out);

/// Class-wise (or class-agnostic) NMS followed by the top-k cap.
std::vector<ScoredDetection> finalize_detections(std::span<const ScoredDetection> candidates,
                                                 const InferenceConfig& cfg,
                                                 bool class_agnostic = false);

/// Box decode with the log-size deltas clamped to avoid overflow.
Box decode_clamped(const Box& proposal, const BoxDeltas& deltas);

std::vector<ScoredDetection> predict_single(const HeadParams& params,
                                            std::span<const Proposal> proposals,
                                            const InferenceConfig& cfg);

/// BBH(H) emits head classes only and BBH(T) tail classes only.
std::vector<ScoredDetection> predict_dual(const HeadParams& params_h, const HeadParams& params_t,
                                          std::span<const Proposal> proposals,
                                          const ClassPartition& partition,
                                          const InferenceConfig& cfg);

/// Both heads emit every class; the streams are fused by NMS.
std::vector<ScoredDetection> predict_all_nms(const HeadParams& params_h,
                                             const HeadParams& params_t,
                                             std::span<const Proposal> proposals,
                                             const InferenceConfig& cfg);

/// Group-masked class scores: head classes from `pair.head`, tail classes
/// from `pair.tail`. Returns C x n.
Eigen::MatrixXd masked_scores(const HeadPair& pair, const Eigen::MatrixXd& features,
                              const ClassPartition& partition);

/// Moves every proposal box by the deltas of its arg-max foreground class
/// (taken from that class's group head).
std::vector<Proposal> refine_proposals(const HeadPair& pair, std::span<const Proposal> proposals,
                                       const ClassPartition& partition);

/// Three-stage chain: each stage refines boxes for the next; class scores are
/// the mean of the stages' group-masked scores, boxes come from the last
/// stage's regressor of the class's group. Throws on a stage count other than 3.
std::vector<ScoredDetection> predict_cascade(std::span<const HeadPair> stages,
                                             std::span<const Proposal> proposals,
                                             const ClassPartition& partition,
                                             const InferenceConfig& cfg);

Eigen::MatrixXd feature_matrix(std::span<const Proposal> proposals);

}  // namespace ltdet
