#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ltdet/geometry.hpp"
#include "ltdet/scenes.hpp"

namespace ltdet {

/// (dx, dy, dw, dh) in the centre/log-size parameterisation.
using BoxDeltas = std::array<double, 4>;

inline constexpr int kBackground = -1;

struct LabeledProposal {
    Box box;
    Feature feature;
    int label = kBackground;
    double max_iou = 0.0;
    std::optional<std::size_t> matched_gt;
    std::optional<BoxDeltas> regression_target;
    /// Position in the proposal list the partition was built from; identifies
    /// the proposal across sample sets.
    std::size_t proposal_index = 0;

    bool is_background() const { return label == kBackground; }
};

/// Tail positives, head positives and background pools consumed by the samplers.
struct ProposalPartition {
    std::vector<LabeledProposal> s_t;
    std::vector<LabeledProposal> s_h;
    std::vector<LabeledProposal> s_b;

    std::size_t size() const { return s_t.size() + s_h.size() + s_b.size(); }
};

struct AssignConfig {
    double pos_thr = 0.5;
    double neg_thr = 0.5;
};

/// Throws std::invalid_argument when the proposal has zero width or height.
BoxDeltas encode_deltas(const Box& proposal, const Box& gt);
/// Exact inverse of encode_deltas(). The result is not clipped.
Box decode_deltas(const Box& proposal, const BoxDeltas& deltas);

/// Matches each proposal to the ground truth of maximal IoU (ties: lower
/// index). max_iou >= pos_thr gives a positive routed by group; max_iou <
/// neg_thr gives background; the band in between is dropped.
ProposalPartition assign(std::span<const Proposal> proposals, const Scene& scene,
                         const ClassPartition& partition, const AssignConfig& cfg = {});

/// Turns positives of the named group into background, keeping their
/// proposals (multi-model fusion training).
void relabel_group_as_background(ProposalPartition& partition, ClassGroup group);

}  // namespace ltdet
