#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltdet/geometry.hpp"
#include "ltdet/scenes.hpp"

namespace ltdet {

using DetectionsByScene = std::map<std::uint64_t, std::vector<ScoredDetection>>;

struct MatchedDetection {
    ScoredDetection detection;
    bool true_positive = false;
    std::optional<std::size_t> matched_gt;
};

/// IoU thresholds 0.50, 0.55, ..., 0.95.
std::vector<double> coco_iou_thresholds();

inline constexpr int kRecallPoints = 101;

/// Greedy matching; `dets` must already be sorted by descending score. Each
/// detection takes the unmatched same-class ground truth of highest IoU
/// (>= iou_thr, ties to the lower index).
std::vector<MatchedDetection> match_detections(std::span<const ScoredDetection> dets,
                                               const Scene& scene, double iou_thr);

/// 101-point interpolated AP from true-positive flags in descending score
/// order. Zero when num_gt is zero.
double average_precision(const std::vector<bool>& flags, std::size_t num_gt);

struct EvalReport {
    std::vector<double> iou_thresholds;
    /// [class][threshold]; zero for classes without ground truth.
    std::vector<std::vector<double>> ap_per_class_per_iou;
    std::vector<std::size_t> num_gt;
    double ap = 0.0;
    double ap50 = 0.0;
    double ap75 = 0.0;
    double head_group_ap = 0.0;
    double tail_group_ap = 0.0;

    /// Mean over IoU thresholds for one class.
    double class_ap(std::size_t class_id) const;
    bool has_gt(std::size_t class_id) const { return num_gt[class_id] > 0; }
};

/// COCO-style evaluation over `scenes`. Detections for scene ids not in
/// `scenes` raise DataError. Runs (class, threshold) pairs in parallel.
EvalReport evaluate(const DetectionsByScene& dets, std::span<const Scene> scenes,
                    const ClassPartition& partition);
/// Serial reference for evaluate().
EvalReport evaluate_serial(const DetectionsByScene& dets, std::span<const Scene> scenes,
                           const ClassPartition& partition);

/// Header and row in the order AP, AP50, AP75, per-class AP..., head AP, tail AP.
std::string report_csv_header(const std::vector<std::string>& class_names);
std::string report_csv_row(const EvalReport& report);
nlohmann::json report_to_json(const EvalReport& report, const std::vector<std::string>& class_names);

/// One line per detection: scene_id class_id score x1 y1 x2 y2 source_head.
std::string format_detection_line(std::uint64_t scene_id, const ScoredDetection& det);
std::string format_detections(const DetectionsByScene& dets);
/// Inverse of format_detections(); throws DataError with a line number.
DetectionsByScene parse_detections(const std::string& text);

}  // namespace ltdet
