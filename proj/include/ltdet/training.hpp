#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ltdet/assignment.hpp"
#include "ltdet/fusion.hpp"
#include "ltdet/heads.hpp"
#include "ltdet/samplers.hpp"
#include "ltdet/scenes.hpp"

namespace ltdet {

enum class TrainMode {
    RsSingle,      // random sampler, one head
    RsDblSingle,   // doubled random sampler, one head
    CbsSingle,     // R_t and R_h merged into one head
    CbsBbh,        // class-biased samplers feeding bilateral heads
    CesBbh,        // class-exclusive samplers feeding bilateral heads
    RsDblBbh,      // two independent random-sampler draws feeding bilateral heads
    Mmf,           // two independent single heads, other group relabelled background
    Cascade,       // three stages of bilateral heads at rising IoU thresholds
    OneStageMask,  // one head, loss masked to the CBS selections
};

std::string to_string(TrainMode mode);
/// Throws ConfigError on an unknown name.
TrainMode train_mode_from_string(const std::string& name);

/// Number of HeadParams a mode trains.
std::size_t num_heads(TrainMode mode);

struct TrainConfig {
    int epochs = 12;
    double base_lr = 0.01;
    std::size_t hidden = 64;
    std::uint64_t seed = 1;
    double lambda = 2.0;
    SamplerConfig sampler;
    AssignConfig assign;
    ProposalConfig proposals;
    std::array<double, kCascadeStages> cascade_iou{0.5, 0.6, 0.7};
    /// Reuse epoch 0's proposals and samples in every epoch, so the epoch
    /// loss tracks the parameters alone. Off for real training.
    bool fixed_draws = false;

    /// Step size for a 0-based epoch: base_lr, times 0.1 from 2/3 of the
    /// epochs on and 0.1 again from 5/6.
    double learning_rate(int epoch) const;
    void validate() const;
};

/// Trained parameters. Layout by mode: single-head modes hold one entry;
/// bilateral and MMF modes hold {head-group, tail-group}; cascade holds
/// {head, tail} for each of the three stages in order.
struct TrainedHeads {
    TrainMode mode = TrainMode::RsSingle;
    std::vector<HeadParams> params;
    /// Mean per-step training loss for each epoch.
    std::vector<double> epoch_losses;

    HeadPair pair(std::size_t stage = 0) const;
    std::vector<HeadPair> cascade_stages() const;
};

TrainedHeads initial_heads(TrainMode mode, std::size_t feature_dim, std::size_t num_classes,
                           const TrainConfig& cfg);

/// Seeded, strictly sequential SGD over the scenes. Each epoch visits the
/// scenes in a shuffled order; per scene: proposals, assignment, sampling
/// per mode, loss, one step.
TrainedHeads train(std::span<const Scene> scenes, const SceneConfig& scene_config,
                   const ClassPartition& partition, TrainMode mode, const TrainConfig& cfg);

/// Epoch tag reserved for evaluation-time proposals.
inline constexpr std::uint64_t kEvalProposalTag = 0xffff;

/// Proposals for a scene under a given seed/epoch; also used at evaluation
/// with kEvalProposalTag.
std::vector<Proposal> scene_proposals(const Scene& scene, const SceneConfig& scene_config,
                                      const ProposalConfig& pc, std::uint64_t seed,
                                      std::uint64_t epoch_tag);

}  // namespace ltdet
