#include "ltdet/training.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ltdet/errors.hpp"

namespace ltdet {

namespace {

struct ModeName {
    TrainMode mode;
    const char* name;
};

constexpr ModeName kModeNames[] = {
    {TrainMode::RsSingle, "rs-single"},   {TrainMode::RsDblSingle, "rs-dbl-single"},
    {TrainMode::CbsSingle, "cbs-single"}, {TrainMode::CbsBbh, "cbs+bbh"},
    {TrainMode::CesBbh, "ces+bbh"},       {TrainMode::RsDblBbh, "rs-dbl+bbh"},
    {TrainMode::Mmf, "mmf"},              {TrainMode::Cascade, "cascade"},
    {TrainMode::OneStageMask, "one-stage-mask"},
};

void sgd_step(HeadParams& params, const HeadParams& grad, double lr) {
    params.add_scaled(grad, -lr);
}

// One SGD step on a single head; returns the loss or NaN when skipped.
double single_step(HeadParams& params, const SampleSet& samples, double lr) {
    if (samples.empty()) {
        return std::nan("");
    }
    LossAndGrad lg = head_loss(params, samples);
    sgd_step(params, lg.grad, lr);
    return lg.loss.total;
}

double bilateral_step(HeadParams& head, HeadParams& tail, const SampleSet& r_h,
                      const SampleSet& r_t, double lambda, double lr) {
    if (r_h.empty() && r_t.empty()) {
        return std::nan("");
    }
    if (!r_h.empty() && !r_t.empty()) {
        BilateralLoss bl = bbh_loss(head, tail, r_h, r_t, lambda);
        sgd_step(head, bl.grad_head, lr);
        sgd_step(tail, bl.grad_tail, lr);
        return bl.breakdown.total;
    }
    if (!r_h.empty()) {
        return single_step(head, r_h, lr);
    }
    LossAndGrad lg = head_loss(tail, r_t);
    sgd_step(tail, lg.grad, lr * lambda);
    return lambda * lg.loss.total;
}

std::vector<std::size_t> selected_indices(const BiasedSamples& s) {
    std::vector<std::size_t> out;
    for (const SampleSet* set : {&s.tail, &s.head}) {
        for (const auto* list : {&set->positives, &set->negatives}) {
            for (const LabeledProposal& lp : *list) {
                out.push_back(lp.proposal_index);
            }
        }
    }
    return out;
}

double scene_step(TrainedHeads& heads, const Scene& scene, const SceneConfig& scene_config,
                  const ClassPartition& partition, const TrainConfig& cfg, double lr,
                  std::uint64_t epoch) {
    const std::vector<Proposal> proposals =
        scene_proposals(scene, scene_config, cfg.proposals, cfg.seed, epoch);
    Rng rng = Rng::substream(cfg.seed ^ 0x5a5a5a5aULL, (epoch << 32) ^ scene.scene_id);
    std::vector<HeadParams>& p = heads.params;

    if (heads.mode == TrainMode::Cascade) {
        std::vector<Proposal> current = proposals;
        double total = 0.0;
        for (std::size_t k = 0; k < kCascadeStages; ++k) {
            const AssignConfig ac{cfg.cascade_iou[k], cfg.cascade_iou[k]};
            const ProposalPartition part = assign(current, scene, partition, ac);
            const BiasedSamples s = cbs(part, cfg.sampler, rng);
            const double loss =
                bilateral_step(p[2 * k], p[2 * k + 1], s.head, s.tail, cfg.lambda, lr);
            total += std::isnan(loss) ? 0.0 : loss;
            if (k + 1 < kCascadeStages) {
                current = refine_proposals(heads.pair(k), current, partition);
                for (Proposal& prop : current) {
                    prop.box = prop.box.clipped(scene_config.extent_width,
                                                scene_config.extent_height);
                }
            }
        }
        return total;
    }

    ProposalPartition part = assign(proposals, scene, partition, cfg.assign);
    switch (heads.mode) {
        case TrainMode::RsSingle:
            return single_step(p[0], random_sampler(part, cfg.sampler, rng), lr);
        case TrainMode::RsDblSingle:
            return single_step(p[0], rs_dbl(part, cfg.sampler, rng), lr);
        case TrainMode::CbsSingle: {
            const BiasedSamples s = cbs(part, cfg.sampler, rng);
            return single_step(p[0], merge_unique(s.tail, s.head), lr);
        }
        case TrainMode::CbsBbh: {
            const BiasedSamples s = cbs(part, cfg.sampler, rng);
            return bilateral_step(p[0], p[1], s.head, s.tail, cfg.lambda, lr);
        }
        case TrainMode::CesBbh: {
            const BiasedSamples s = ces(part, cfg.sampler, rng);
            return bilateral_step(p[0], p[1], s.head, s.tail, cfg.lambda, lr);
        }
        case TrainMode::RsDblBbh: {
            const SampleSet r_h = random_sampler(part, cfg.sampler, rng);
            const SampleSet r_t = random_sampler(part, cfg.sampler, rng);
            return bilateral_step(p[0], p[1], r_h, r_t, cfg.lambda, lr);
        }
        case TrainMode::Mmf: {
            ProposalPartition head_view = part;
            relabel_group_as_background(head_view, ClassGroup::Tail);
            ProposalPartition tail_view = std::move(part);
            relabel_group_as_background(tail_view, ClassGroup::Head);
            const double a = single_step(p[0], random_sampler(head_view, cfg.sampler, rng), lr);
            const double b = single_step(p[1], random_sampler(tail_view, cfg.sampler, rng), lr);
            return (std::isnan(a) ? 0.0 : a) + (std::isnan(b) ? 0.0 : b);
        }
        case TrainMode::OneStageMask: {
            const BiasedSamples s = cbs(part, cfg.sampler, rng);
            const LossBatch batch = make_masked_batch(part, p[0].num_classes(), selected_indices(s));
            if (batch.size() == 0 || !(batch.weights.sum() > 0.0)) {
                return std::nan("");
            }
            LossAndGrad lg = batch_loss(p[0], batch);
            sgd_step(p[0], lg.grad, lr);
            return lg.loss.total;
        }
        case TrainMode::Cascade:
            break;
    }
    throw std::logic_error("unhandled training mode");
}

}  // namespace

std::string to_string(TrainMode mode) {
    for (const ModeName& m : kModeNames) {
        if (m.mode == mode) {
            return m.name;
        }
    }
    return "unknown";
}

TrainMode train_mode_from_string(const std::string& name) {
    for (const ModeName& m : kModeNames) {
        if (name == m.name) {
            return m.mode;
        }
    }
    throw ConfigError("unknown training mode '" + name + "'");
}

std::size_t num_heads(TrainMode mode) {
    switch (mode) {
        case TrainMode::RsSingle:
        case TrainMode::RsDblSingle:
        case TrainMode::CbsSingle:
        case TrainMode::OneStageMask: return 1;
        case TrainMode::CbsBbh:
        case TrainMode::CesBbh:
        case TrainMode::RsDblBbh:
        case TrainMode::Mmf: return 2;
        case TrainMode::Cascade: return 2 * kCascadeStages;
    }
    return 0;
}

double TrainConfig::learning_rate(int epoch) const {
    double lr = base_lr;
    if (epoch >= (2 * epochs) / 3) {
        lr *= 0.1;
    }
    if (epoch >= (5 * epochs) / 6) {
        lr *= 0.1;
    }
    return lr;
}

void TrainConfig::validate() const {
    if (epochs < 0) {
        throw ConfigError("train: epochs must be >= 0");
    }
    if (!(base_lr > 0.0)) {
        throw ConfigError("train: base_lr must be > 0");
    }
    if (hidden == 0) {
        throw ConfigError("train: hidden width must be > 0");
    }
    if (!(lambda >= 0.0)) {
        throw ConfigError("train: lambda must be >= 0");
    }
    try {
        sampler.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(assign.neg_thr >= 0.0 && assign.neg_thr <= assign.pos_thr && assign.pos_thr <= 1.0)) {
        throw ConfigError("train: need 0 <= neg_thr <= pos_thr <= 1");
    }
}

HeadPair TrainedHeads::pair(std::size_t stage) const {
    if (params.size() < 2 * stage + 2) {
        throw std::logic_error("TrainedHeads::pair: mode has no head pair");
    }
    return {params[2 * stage], params[2 * stage + 1]};
}

std::vector<HeadPair> TrainedHeads::cascade_stages() const {
    std::vector<HeadPair> out;
    for (std::size_t k = 0; k < kCascadeStages; ++k) {
        out.push_back(pair(k));
    }
    return out;
}

TrainedHeads initial_heads(TrainMode mode, std::size_t feature_dim, std::size_t num_classes,
                           const TrainConfig& cfg) {
    TrainedHeads heads;
    heads.mode = mode;
    for (std::size_t i = 0; i < num_heads(mode); ++i) {
        heads.params.push_back(HeadParams::random(feature_dim, cfg.hidden, num_classes,
                                                  splitmix64(cfg.seed * 131 + i + 1)));
    }
    return heads;
}

std::vector<Proposal> scene_proposals(const Scene& scene, const SceneConfig& scene_config,
                                      const ProposalConfig& pc, std::uint64_t seed,
                                      std::uint64_t epoch_tag) {
    Rng rng = Rng::substream(seed ^ 0x9f3b'17c4ULL, (epoch_tag << 32) ^ scene.scene_id);
    return generate_proposals(scene, scene_config, pc, rng);
}

TrainedHeads train(std::span<const Scene> scenes, const SceneConfig& scene_config,
                   const ClassPartition& partition, TrainMode mode, const TrainConfig& cfg) {
    cfg.validate();
    if (scenes.empty()) {
        throw std::invalid_argument("train: empty dataset");
    }
    TrainedHeads heads = initial_heads(mode, scene_config.feature_dim,
                                       static_cast<std::size_t>(partition.num_classes()), cfg);
    std::vector<std::size_t> order(scenes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng = Rng::substream(cfg.seed, 0xabcdefULL);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[static_cast<std::size_t>(shuffle_rng.below(i))]);
        }
        const double lr = cfg.learning_rate(epoch);
        double sum = 0.0;
        std::size_t steps = 0;
        for (std::size_t idx : order) {
            const double loss = scene_step(heads, scenes[idx], scene_config, partition, cfg, lr,
                                           cfg.fixed_draws ? 0 : static_cast<std::uint64_t>(epoch));
            if (!std::isnan(loss)) {
                sum += loss;
                ++steps;
            }
        }
        heads.epoch_losses.push_back(steps == 0 ? 0.0 : sum / static_cast<double>(steps));
    }
    return heads;
}

}  // namespace ltdet
