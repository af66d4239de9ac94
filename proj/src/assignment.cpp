#include "ltdet/assignment.hpp"

#include <cmath>
#include <stdexcept>

namespace ltdet {

BoxDeltas encode_deltas(const Box& p, const Box& g) {
    const double pw = p.width();
    const double ph = p.height();
    if (!(pw > 0.0 && ph > 0.0)) {
        throw std::invalid_argument("encode_deltas: proposal has zero width or height");
    }
    if (!(g.width() > 0.0 && g.height() > 0.0)) {
        throw std::invalid_argument("encode_deltas: target has zero width or height");
    }
    return {(g.center_x() - p.center_x()) / pw, (g.center_y() - p.center_y()) / ph,
            std::log(g.width() / pw), std::log(g.height() / ph)};
}

Box decode_deltas(const Box& p, const BoxDeltas& d) {
    const double cx = p.center_x() + d[0] * p.width();
    const double cy = p.center_y() + d[1] * p.height();
    const double w = p.width() * std::exp(d[2]);
    const double h = p.height() * std::exp(d[3]);
    return Box(cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h);
}

ProposalPartition assign(std::span<const Proposal> proposals, const Scene& scene,
                         const ClassPartition& partition, const AssignConfig& cfg) {
    if (!(cfg.neg_thr >= 0.0 && cfg.neg_thr <= cfg.pos_thr && cfg.pos_thr <= 1.0)) {
        throw std::invalid_argument("assign: need 0 <= neg_thr <= pos_thr <= 1");
    }
    ProposalPartition out;
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        const Proposal& prop = proposals[i];
        double best = 0.0;
        std::optional<std::size_t> best_gt;
        for (std::size_t g = 0; g < scene.objects.size(); ++g) {
            const double v = iou(prop.box, scene.objects[g].box);
            if (!best_gt || v > best) {
                best = v;
                best_gt = g;
            }
        }
        LabeledProposal lp;
        lp.box = prop.box;
        lp.feature = prop.feature;
        lp.max_iou = best;
        lp.proposal_index = i;
        if (best_gt && best >= cfg.pos_thr && prop.box.width() > 0.0 && prop.box.height() > 0.0) {
            const ObjectInstance& gt = scene.objects[*best_gt];
            lp.label = gt.class_id;
            lp.matched_gt = best_gt;
            lp.regression_target = encode_deltas(prop.box, gt.box);
            if (partition.is_tail(gt.class_id)) {
                out.s_t.push_back(std::move(lp));
            } else if (partition.is_head(gt.class_id)) {
                out.s_h.push_back(std::move(lp));
            } else {
                throw std::invalid_argument("assign: class not covered by partition");
            }
        } else if (best < cfg.neg_thr) {
            out.s_b.push_back(std::move(lp));
        }
    }
    return out;
}

void relabel_group_as_background(ProposalPartition& partition, ClassGroup group) {
    std::vector<LabeledProposal>& pool = group == ClassGroup::Tail ? partition.s_t : partition.s_h;
    for (LabeledProposal& lp : pool) {
        lp.label = kBackground;
        lp.matched_gt.reset();
        lp.regression_target.reset();
        partition.s_b.push_back(std::move(lp));
    }
    pool.clear();
}

}  // namespace ltdet
