#include "ltdet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace ltdet {

Box::Box(double x1, double y1, double x2, double y2) : x1_(x1), y1_(y1), x2_(x2), y2_(y2) {
    if (!(std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2))) {
        throw std::invalid_argument("Box: non-finite coordinate");
    }
    if (x1 > x2 || y1 > y2) {
        throw std::invalid_argument("Box: negative extent");
    }
}

Box Box::clipped(double extent_w, double extent_h) const {
    auto clamp = [](double v, double hi) { return std::clamp(v, 0.0, hi); };
    return Box(clamp(x1_, extent_w), clamp(y1_, extent_h), clamp(x2_, extent_w),
               clamp(y2_, extent_h));
}

std::string source_head_tag(SourceHead head, int cascade_stage) {
    switch (head) {
        case SourceHead::Tail: return "tail";
        case SourceHead::Head: return "head";
        case SourceHead::Single: return "single";
        case SourceHead::Cascade: return "cascade" + std::to_string(cascade_stage);
    }
    return "unknown";
}

ScoredDetection::ScoredDetection(Box b, int cls, double s, SourceHead src, int stage)
    : box(b), class_id(cls), score(s), source(src), cascade_stage(stage) {
    if (!(s >= 0.0 && s <= 1.0)) {
        throw std::invalid_argument("ScoredDetection: score outside [0,1]");
    }
    if (cls < 0) {
        throw std::invalid_argument("ScoredDetection: negative class id");
    }
}

double iou(const Box& a, const Box& b) {
    const double iw = std::min(a.x2(), b.x2()) - std::max(a.x1(), b.x1());
    const double ih = std::min(a.y2(), b.y2()) - std::max(a.y1(), b.y1());
    const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) {
        return 0.0;
    }
    return std::clamp(inter / uni, 0.0, 1.0);
}

std::vector<std::size_t> score_order(std::span<const ScoredDetection> dets) {
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].score > dets[b].score;
    });
    return order;
}

namespace {

std::vector<ScoredDetection> greedy_nms(std::span<const ScoredDetection> dets,
                                        double iou_threshold, bool class_aware) {
    if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0)) {
        throw std::invalid_argument("nms: iou_threshold outside [0,1]");
    }
    // Kept boxes bucketed by class (a single bucket when class-agnostic).
    std::map<int, std::vector<Box>> kept_boxes;
    std::vector<ScoredDetection> kept;
    kept.reserve(dets.size());
    for (std::size_t idx : score_order(dets)) {
        const ScoredDetection& cand = dets[idx];
        std::vector<Box>& bucket = kept_boxes[class_aware ? cand.class_id : 0];
        const bool suppressed = std::any_of(bucket.begin(), bucket.end(), [&](const Box& k) {
            return iou(k, cand.box) > iou_threshold;
        });
        if (!suppressed) {
            bucket.push_back(cand.box);
            kept.push_back(cand);
        }
    }
    return kept;
}

}  // namespace

std::vector<ScoredDetection> nms(std::span<const ScoredDetection> dets, double iou_threshold) {
    return greedy_nms(dets, iou_threshold, true);
}

std::vector<ScoredDetection> nms_class_agnostic(std::span<const ScoredDetection> dets,
                                                double iou_threshold) {
    return greedy_nms(dets, iou_threshold, false);
}

}  // namespace ltdet
