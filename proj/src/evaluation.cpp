#include "ltdet/evaluation.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_map>

#include "ltdet/errors.hpp"

namespace ltdet {

std::vector<double> coco_iou_thresholds() {
    std::vector<double> t;
    for (int i = 0; i < 10; ++i) {
        t.push_back(static_cast<double>(50 + 5 * i) / 100.0);
    }
    return t;
}

std::vector<MatchedDetection> match_detections(std::span<const ScoredDetection> dets,
                                               const Scene& scene, double iou_thr) {
    std::vector<bool> taken(scene.objects.size(), false);
    std::vector<MatchedDetection> out;
    out.reserve(dets.size());
    for (const ScoredDetection& d : dets) {
        MatchedDetection m{d, false, std::nullopt};
        double best = iou_thr;
        for (std::size_t g = 0; g < scene.objects.size(); ++g) {
            if (taken[g] || scene.objects[g].class_id != d.class_id) {
                continue;
            }
            const double v = iou(d.box, scene.objects[g].box);
            if (v >= best && (!m.matched_gt || v > best)) {
                best = v;
                m.matched_gt = g;
            }
        }
        if (m.matched_gt) {
            taken[*m.matched_gt] = true;
            m.true_positive = true;
        }
        out.push_back(m);
    }
    return out;
}

double average_precision(const std::vector<bool>& flags, std::size_t num_gt) {
    if (num_gt == 0 || flags.empty()) {
        return 0.0;
    }
    const std::size_t n = flags.size();
    std::vector<double> recall(n);
    std::vector<double> precision(n);
    double tp = 0.0;
    double fp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        (flags[i] ? tp : fp) += 1.0;
        recall[i] = tp / static_cast<double>(num_gt);
        precision[i] = tp / (tp + fp);
    }
    for (std::size_t i = n - 1; i > 0; --i) {
        precision[i - 1] = std::max(precision[i - 1], precision[i]);
    }
    double sum = 0.0;
    for (int k = 0; k < kRecallPoints; ++k) {
        const double r = static_cast<double>(k) / (kRecallPoints - 1);
        const auto it = std::lower_bound(recall.begin(), recall.end(), r);
        if (it != recall.end()) {
            sum += precision[static_cast<std::size_t>(it - recall.begin())];
        }
    }
    return sum / kRecallPoints;
}

double EvalReport::class_ap(std::size_t class_id) const {
    const std::vector<double>& row = ap_per_class_per_iou.at(class_id);
    double s = 0.0;
    for (double v : row) {
        s += v;
    }
    return row.empty() ? 0.0 : s / static_cast<double>(row.size());
}

namespace {

struct EvalInputs {
    std::vector<const Scene*> scenes;
    // Per scene (aligned with `scenes`) and class: detections sorted by score.
    std::vector<std::vector<std::vector<ScoredDetection>>> dets;
    std::vector<std::size_t> num_gt;
};

EvalInputs prepare(const DetectionsByScene& dets, std::span<const Scene> scenes,
                   std::size_t num_classes) {
    EvalInputs in;
    in.num_gt.assign(num_classes, 0);
    std::unordered_map<std::uint64_t, std::size_t> index;
    for (const Scene& s : scenes) {
        index.emplace(s.scene_id, in.scenes.size());
        in.scenes.push_back(&s);
        for (const ObjectInstance& o : s.objects) {
            if (o.class_id < 0 || static_cast<std::size_t>(o.class_id) >= num_classes) {
                throw DataError("evaluate: ground-truth class out of range");
            }
            ++in.num_gt[static_cast<std::size_t>(o.class_id)];
        }
    }
    in.dets.assign(in.scenes.size(), std::vector<std::vector<ScoredDetection>>(num_classes));
    for (const auto& [scene_id, list] : dets) {
        const auto it = index.find(scene_id);
        if (it == index.end()) {
            if (list.empty()) {
                continue;
            }
            throw DataError("evaluate: detections reference unknown scene " +
                            std::to_string(scene_id));
        }
        for (std::size_t idx : score_order(list)) {
            const ScoredDetection& d = list[idx];
            if (static_cast<std::size_t>(d.class_id) >= num_classes) {
                throw DataError("evaluate: detection class out of range");
            }
            in.dets[it->second][static_cast<std::size_t>(d.class_id)].push_back(d);
        }
    }
    return in;
}

double class_threshold_ap(const EvalInputs& in, std::size_t c, double thr) {
    struct Scored {
        double score;
        bool tp;
    };
    std::vector<Scored> all;
    for (std::size_t s = 0; s < in.scenes.size(); ++s) {
        for (const MatchedDetection& m : match_detections(in.dets[s][c], *in.scenes[s], thr)) {
            all.push_back({m.detection.score, m.true_positive});
        }
    }
    std::stable_sort(all.begin(), all.end(),
                     [](const Scored& a, const Scored& b) { return a.score > b.score; });
    std::vector<bool> flags;
    flags.reserve(all.size());
    for (const Scored& x : all) {
        flags.push_back(x.tp);
    }
    return average_precision(flags, in.num_gt[c]);
}

double mean_over(const EvalReport& r, const std::vector<std::size_t>& classes,
                 std::size_t thr_index, bool all_thresholds) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t c : classes) {
        if (!r.has_gt(c)) {
            continue;
        }
        sum += all_thresholds ? r.class_ap(c) : r.ap_per_class_per_iou[c][thr_index];
        ++count;
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

EvalReport summarise(std::vector<std::vector<double>> table, std::vector<std::size_t> num_gt,
                     const ClassPartition& partition) {
    EvalReport r;
    r.iou_thresholds = coco_iou_thresholds();
    r.ap_per_class_per_iou = std::move(table);
    r.num_gt = std::move(num_gt);
    std::vector<std::size_t> all;
    std::vector<std::size_t> head;
    std::vector<std::size_t> tail;
    for (std::size_t c = 0; c < r.num_gt.size(); ++c) {
        all.push_back(c);
        (partition.is_head(static_cast<int>(c)) ? head : tail).push_back(c);
    }
    r.ap = mean_over(r, all, 0, true);
    r.ap50 = mean_over(r, all, 0, false);
    r.ap75 = mean_over(r, all, 5, false);
    r.head_group_ap = mean_over(r, head, 0, true);
    r.tail_group_ap = mean_over(r, tail, 0, true);
    return r;
}

}  // namespace

EvalReport evaluate(const DetectionsByScene& dets, std::span<const Scene> scenes,
                    const ClassPartition& partition) {
    const auto num_classes = static_cast<std::size_t>(partition.num_classes());
    const EvalInputs in = prepare(dets, scenes, num_classes);
    const std::vector<double> thresholds = coco_iou_thresholds();
    const std::size_t num_thr = thresholds.size();
    std::vector<std::vector<double>> table(num_classes, std::vector<double>(num_thr, 0.0));
    const auto pairs = static_cast<std::int64_t>(num_classes * num_thr);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t k = 0; k < pairs; ++k) {
        const auto c = static_cast<std::size_t>(k) / num_thr;
        const auto t = static_cast<std::size_t>(k) % num_thr;
        table[c][t] = class_threshold_ap(in, c, thresholds[t]);
    }
    return summarise(std::move(table), in.num_gt, partition);
}

EvalReport evaluate_serial(const DetectionsByScene& dets, std::span<const Scene> scenes,
                           const ClassPartition& partition) {
    const auto num_classes = static_cast<std::size_t>(partition.num_classes());
    const EvalInputs in = prepare(dets, scenes, num_classes);
    const std::vector<double> thresholds = coco_iou_thresholds();
    std::vector<std::vector<double>> table(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
        for (double thr : thresholds) {
            table[c].push_back(class_threshold_ap(in, c, thr));
        }
    }
    return summarise(std::move(table), in.num_gt, partition);
}

namespace {

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

std::string report_csv_header(const std::vector<std::string>& class_names) {
    std::string h = "AP,AP50,AP75";
    for (const std::string& n : class_names) {
        h += "," + n;
    }
    return h + ",head_AP,tail_AP";
}

std::string report_csv_row(const EvalReport& r) {
    std::string row = fmt6(r.ap) + "," + fmt6(r.ap50) + "," + fmt6(r.ap75);
    for (std::size_t c = 0; c < r.num_gt.size(); ++c) {
        row += "," + fmt6(r.class_ap(c));
    }
    return row + "," + fmt6(r.head_group_ap) + "," + fmt6(r.tail_group_ap);
}

nlohmann::json report_to_json(const EvalReport& r, const std::vector<std::string>& names) {
    nlohmann::json classes = nlohmann::json::array();
    for (std::size_t c = 0; c < r.num_gt.size(); ++c) {
        classes.push_back({{"class_id", c},
                           {"name", c < names.size() ? names[c] : std::to_string(c)},
                           {"num_gt", r.num_gt[c]},
                           {"ap", r.class_ap(c)},
                           {"ap_per_iou", r.ap_per_class_per_iou[c]}});
    }
    return {{"ap", r.ap},
            {"ap50", r.ap50},
            {"ap75", r.ap75},
            {"head_group_ap", r.head_group_ap},
            {"tail_group_ap", r.tail_group_ap},
            {"iou_thresholds", r.iou_thresholds},
            {"classes", std::move(classes)}};
}

std::string format_detection_line(std::uint64_t scene_id, const ScoredDetection& d) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%" PRIu64 " %d %.6f %.6f %.6f %.6f %.6f %s", scene_id,
                  d.class_id, d.score, d.box.x1(), d.box.y1(), d.box.x2(), d.box.y2(),
                  source_head_tag(d.source, d.cascade_stage).c_str());
    return buf;
}

std::string format_detections(const DetectionsByScene& dets) {
    std::string out;
    for (const auto& [scene_id, list] : dets) {
        for (const ScoredDetection& d : list) {
            out += format_detection_line(scene_id, d);
            out += '\n';
        }
    }
    return out;
}

DetectionsByScene parse_detections(const std::string& text) {
    DetectionsByScene out;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::istringstream fields(line);
        std::uint64_t scene_id = 0;
        int cls = 0;
        double score = 0, x1 = 0, y1 = 0, x2 = 0, y2 = 0;
        std::string tag;
        if (!(fields >> scene_id >> cls >> score >> x1 >> y1 >> x2 >> y2 >> tag)) {
            throw DataError("detections line " + std::to_string(line_no) + ": malformed record");
        }
        SourceHead src = SourceHead::Single;
        int stage = 0;
        if (tag == "head") {
            src = SourceHead::Head;
        } else if (tag == "tail") {
            src = SourceHead::Tail;
        } else if (tag.rfind("cascade", 0) == 0) {
            src = SourceHead::Cascade;
            stage = std::atoi(tag.c_str() + 7);
        } else if (tag != "single") {
            throw DataError("detections line " + std::to_string(line_no) + ": unknown source tag");
        }
        try {
            out[scene_id].emplace_back(Box(x1, y1, x2, y2), cls, score, src, stage);
        } catch (const std::invalid_argument& e) {
            throw DataError("detections line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace ltdet
