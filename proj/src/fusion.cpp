#include "ltdet/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ltdet {

namespace {

// Largest log-scale step accepted at decode time (1000 / 16).
const double kMaxLogScale = std::log(1000.0 / 16.0);

bool passes(ClassFilter filter, const ClassPartition& partition, int c) {
    switch (filter) {
        case ClassFilter::All: return true;
        case ClassFilter::HeadOnly: return partition.is_head(c);
        case ClassFilter::TailOnly: return partition.is_tail(c);
    }
    return false;
}

ClassPartition everything(std::size_t num_classes) {
    ClassPartition p;
    for (std::size_t c = 0; c < num_classes; ++c) {
        p.head_classes.insert(static_cast<int>(c));
    }
    return p;
}

}  // namespace

void InferenceConfig::validate() const {
    if (!(score_threshold >= 0.0 && score_threshold <= 1.0)) {
        throw std::invalid_argument("inference: score_threshold outside [0,1]");
    }
    if (!(nms_iou >= 0.0 && nms_iou <= 1.0)) {
        throw std::invalid_argument("inference: nms_iou outside [0,1]");
    }
    if (max_detections_per_scene < 1) {
        throw std::invalid_argument("inference: max_detections_per_scene must be >= 1");
    }
}

Eigen::MatrixXd feature_matrix(std::span<const Proposal> proposals) {
    if (proposals.empty()) {
        return {};
    }
    const auto dim = static_cast<Eigen::Index>(proposals.front().feature.size());
    Eigen::MatrixXd x(dim, static_cast<Eigen::Index>(proposals.size()));
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        if (static_cast<Eigen::Index>(proposals[i].feature.size()) != dim) {
            throw std::invalid_argument("proposals: inconsistent feature dimension");
        }
        x.col(static_cast<Eigen::Index>(i)) =
            Eigen::Map<const Eigen::VectorXd>(proposals[i].feature.data(), dim);
    }
    return x;
}

Box decode_clamped(const Box& proposal, const BoxDeltas& d) {
    return decode_deltas(proposal, {d[0], d[1], std::clamp(d[2], -kMaxLogScale, kMaxLogScale),
                                    std::clamp(d[3], -kMaxLogScale, kMaxLogScale)});
}

void emit_candidates(const HeadParams& params, std::span<const Proposal> proposals,
                     const ClassPartition& partition, ClassFilter filter, SourceHead tag,
                     double score_threshold, std::vector<ScoredDetection>& out) {
    if (proposals.empty()) {
        return;
    }
    const ForwardCache fc = forward_batch(params, feature_matrix(proposals));
    const auto num_classes = static_cast<int>(params.num_classes());
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        const auto col = static_cast<Eigen::Index>(i);
        for (int c = 0; c < num_classes; ++c) {
            if (!passes(filter, partition, c)) {
                continue;
            }
            const double score = fc.scores(c, col);
            if (score < score_threshold) {
                continue;
            }
            const Eigen::Index k = 4 * c;
            const BoxDeltas d{fc.deltas(k, col), fc.deltas(k + 1, col), fc.deltas(k + 2, col),
                              fc.deltas(k + 3, col)};
            out.emplace_back(decode_clamped(proposals[i].box, d), c, std::clamp(score, 0.0, 1.0),
                             tag);
        }
    }
}

std::vector<ScoredDetection> finalize_detections(std::span<const ScoredDetection> candidates,
                                                 const InferenceConfig& cfg, bool class_agnostic) {
    cfg.validate();
    std::vector<ScoredDetection> kept = class_agnostic ? nms_class_agnostic(candidates, cfg.nms_iou)
                                                       : nms(candidates, cfg.nms_iou);
    if (kept.size() > cfg.max_detections_per_scene) {
        kept.resize(cfg.max_detections_per_scene);
    }
    return kept;
}

std::vector<ScoredDetection> predict_single(const HeadParams& params,
                                            std::span<const Proposal> proposals,
                                            const InferenceConfig& cfg) {
    std::vector<ScoredDetection> cand;
    emit_candidates(params, proposals, everything(params.num_classes()), ClassFilter::All,
                    SourceHead::Single, cfg.score_threshold, cand);
    return finalize_detections(cand, cfg);
}

std::vector<ScoredDetection> predict_dual(const HeadParams& params_h, const HeadParams& params_t,
                                          std::span<const Proposal> proposals,
                                          const ClassPartition& partition,
                                          const InferenceConfig& cfg) {
    std::vector<ScoredDetection> cand;
    emit_candidates(params_h, proposals, partition, ClassFilter::HeadOnly, SourceHead::Head,
                    cfg.score_threshold, cand);
    emit_candidates(params_t, proposals, partition, ClassFilter::TailOnly, SourceHead::Tail,
                    cfg.score_threshold, cand);
    return finalize_detections(cand, cfg);
}

std::vector<ScoredDetection> predict_all_nms(const HeadParams& params_h,
                                             const HeadParams& params_t,
                                             std::span<const Proposal> proposals,
                                             const InferenceConfig& cfg) {
    std::vector<ScoredDetection> cand;
    const ClassPartition all = everything(params_h.num_classes());
    emit_candidates(params_h, proposals, all, ClassFilter::All, SourceHead::Head,
                    cfg.score_threshold, cand);
    emit_candidates(params_t, proposals, all, ClassFilter::All, SourceHead::Tail,
                    cfg.score_threshold, cand);
    return finalize_detections(cand, cfg, cfg.class_agnostic_all_nms);
}

namespace {

struct StageOutput {
    Eigen::MatrixXd scores;  // C x n, group-masked
    Eigen::MatrixXd deltas;  // 4C x n, group-masked
};

StageOutput run_stage(const HeadPair& pair, const Eigen::MatrixXd& features,
                      const ClassPartition& partition) {
    const ForwardCache h = forward_batch(pair.head, features);
    const ForwardCache t = forward_batch(pair.tail, features);
    const auto num_classes = static_cast<Eigen::Index>(pair.head.num_classes());
    StageOutput out{Eigen::MatrixXd(num_classes, features.cols()),
                    Eigen::MatrixXd(4 * num_classes, features.cols())};
    for (Eigen::Index c = 0; c < num_classes; ++c) {
        const ForwardCache& src = partition.is_tail(static_cast<int>(c)) ? t : h;
        out.scores.row(c) = src.scores.row(c);
        out.deltas.middleRows(4 * c, 4) = src.deltas.middleRows(4 * c, 4);
    }
    return out;
}

BoxDeltas deltas_at(const Eigen::MatrixXd& deltas, Eigen::Index c, Eigen::Index col) {
    return {deltas(4 * c, col), deltas(4 * c + 1, col), deltas(4 * c + 2, col),
            deltas(4 * c + 3, col)};
}

std::vector<Proposal> refine_with(const StageOutput& stage, std::span<const Proposal> proposals) {
    std::vector<Proposal> out(proposals.begin(), proposals.end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto col = static_cast<Eigen::Index>(i);
        Eigen::Index best = 0;
        stage.scores.col(col).maxCoeff(&best);
        out[i].box = decode_clamped(proposals[i].box, deltas_at(stage.deltas, best, col));
    }
    return out;
}

}  // namespace

Eigen::MatrixXd masked_scores(const HeadPair& pair, const Eigen::MatrixXd& features,
                              const ClassPartition& partition) {
    return run_stage(pair, features, partition).scores;
}

std::vector<Proposal> refine_proposals(const HeadPair& pair, std::span<const Proposal> proposals,
                                       const ClassPartition& partition) {
    if (proposals.empty()) {
        return {};
    }
    return refine_with(run_stage(pair, feature_matrix(proposals), partition), proposals);
}

std::vector<ScoredDetection> predict_cascade(std::span<const HeadPair> stages,
                                             std::span<const Proposal> proposals,
                                             const ClassPartition& partition,
                                             const InferenceConfig& cfg) {
    if (stages.size() != kCascadeStages) {
        throw std::invalid_argument("predict_cascade: expected 3 stages, got " +
                                    std::to_string(stages.size()));
    }
    cfg.validate();
    if (proposals.empty()) {
        return {};
    }
    const Eigen::MatrixXd features = feature_matrix(proposals);
    std::vector<Proposal> current(proposals.begin(), proposals.end());
    Eigen::MatrixXd score_sum;
    StageOutput last;
    for (std::size_t k = 0; k < stages.size(); ++k) {
        StageOutput out = run_stage(stages[k], features, partition);
        score_sum = k == 0 ? out.scores : Eigen::MatrixXd(score_sum + out.scores);
        if (k + 1 < stages.size()) {
            current = refine_with(out, current);
        } else {
            last = std::move(out);
        }
    }
    const Eigen::MatrixXd mean_scores = score_sum / static_cast<double>(stages.size());
    std::vector<ScoredDetection> cand;
    for (std::size_t i = 0; i < current.size(); ++i) {
        const auto col = static_cast<Eigen::Index>(i);
        for (Eigen::Index c = 0; c < mean_scores.rows(); ++c) {
            const double score = mean_scores(c, col);
            if (score < cfg.score_threshold) {
                continue;
            }
            cand.emplace_back(decode_clamped(current[i].box, deltas_at(last.deltas, c, col)),
                              static_cast<int>(c), std::clamp(score, 0.0, 1.0),
                              SourceHead::Cascade, static_cast<int>(stages.size()));
        }
    }
    return finalize_detections(cand, cfg);
}

}  // namespace ltdet
