#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ltdet {

/// Axis-aligned rectangle in scene units. Construction enforces x1 <= x2 and
/// y1 <= y2; zero-area boxes are allowed.
class Box {
public:
    Box() = default;
    Box(double x1, double y1, double x2, double y2);

    double x1() const { return x1_; }
    double y1() const { return y1_; }
    double x2() const { return x2_; }
    double y2() const { return y2_; }

    double width() const { return x2_ - x1_; }
    double height() const { return y2_ - y1_; }
    double area() const { return width() * height(); }
    double center_x() const { return 0.5 * (x1_ + x2_); }
    double center_y() const { return 0.5 * (y1_ + y2_); }

    /// Clamps the box into [0, width] x [0, height].
    Box clipped(double extent_w, double extent_h) const;

    bool operator==(const Box&) const = default;

private:
    double x1_ = 0.0;
    double y1_ = 0.0;
    double x2_ = 0.0;
    double y2_ = 0.0;
};

/// Which head produced a detection. Cascade detections carry the stage index
/// of the final regressor that placed the box.
enum class SourceHead { Tail, Head, Single, Cascade };

std::string source_head_tag(SourceHead head, int cascade_stage = 0);

struct ScoredDetection {
    Box box;
    int class_id = 0;
    double score = 0.0;
    SourceHead source = SourceHead::Single;
    int cascade_stage = 0;

    ScoredDetection() = default;
    ScoredDetection(Box b, int cls, double s, SourceHead src, int stage = 0);
};

/// Intersection over union; 0 when the union has zero area.
double iou(const Box& a, const Box& b);

/// Greedy class-wise non-maximum suppression. Detections are visited in
/// descending score order (ties: lower input index first); a detection is
/// kept iff its IoU with every kept detection of the same class is
/// <= iou_threshold. Output is sorted by score descending.
std::vector<ScoredDetection> nms(std::span<const ScoredDetection> dets, double iou_threshold);

/// Same as nms() but suppression crosses class boundaries.
std::vector<ScoredDetection> nms_class_agnostic(std::span<const ScoredDetection> dets,
                                                double iou_threshold);

/// Indices of `dets` in score-descending order, ties broken by index.
std::vector<std::size_t> score_order(std::span<const ScoredDetection> dets);

}  // namespace ltdet
