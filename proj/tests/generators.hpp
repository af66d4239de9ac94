#pragma once

// Random instance generators shared by the test binaries.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "ltdet/assignment.hpp"
#include "ltdet/geometry.hpp"
#include "ltdet/heads.hpp"
#include "ltdet/samplers.hpp"
#include "ltdet/scenes.hpp"

namespace gen {

inline ltdet::Box random_box(std::mt19937_64& g, double extent = 20.0, double max_side = 8.0) {
    std::uniform_real_distribution<double> pos(0.0, extent);
    std::uniform_real_distribution<double> side(0.0, max_side);
    const double x = pos(g);
    const double y = pos(g);
    return ltdet::Box(x, y, x + side(g), y + side(g));
}

/// Boxes clustered in a small area so overlaps are common.
inline ltdet::ScoredDetection random_detection(std::mt19937_64& g, int num_classes) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> cls(0, num_classes - 1);
    // Quantised scores make ties reasonably frequent.
    const double score = std::round(unit(g) * 20.0) / 20.0;
    return {random_box(g, 6.0, 5.0), cls(g), score, ltdet::SourceHead::Single};
}

inline ltdet::Scene random_scene(std::mt19937_64& g, std::uint64_t id, int num_classes,
                                 int max_objects, std::size_t dim = 3) {
    std::uniform_int_distribution<int> count(0, max_objects);
    std::uniform_int_distribution<int> cls(0, num_classes - 1);
    std::normal_distribution<double> noise(0.0, 1.0);
    ltdet::Scene s;
    s.scene_id = id;
    const int n = count(g);
    for (int i = 0; i < n; ++i) {
        ltdet::ObjectInstance o;
        ltdet::Box b = random_box(g, 10.0, 6.0);
        // Ground truth needs positive area for box encoding.
        o.box = ltdet::Box(b.x1(), b.y1(), b.x2() + 0.5, b.y2() + 0.5);
        o.class_id = cls(g);
        for (std::size_t k = 0; k < dim; ++k) {
            o.feature.push_back(noise(g));
        }
        s.objects.push_back(o);
    }
    return s;
}

/// Alternating head/tail partition over `num_classes` classes.
inline ltdet::ClassPartition alternating_partition(int num_classes) {
    ltdet::ClassPartition p;
    for (int c = 0; c < num_classes; ++c) {
        (c % 2 == 0 ? p.head_classes : p.tail_classes).insert(c);
    }
    return p;
}

/// Partition with the requested pool sizes. proposal_index runs over tail,
/// head, then background, so the source pool of a sample is recoverable.
inline ltdet::ProposalPartition sized_partition(std::size_t n_t, std::size_t n_h, std::size_t n_b) {
    ltdet::ProposalPartition p;
    std::size_t next = 0;
    auto fill = [&](std::vector<ltdet::LabeledProposal>& dst, std::size_t n, int label) {
        for (std::size_t i = 0; i < n; ++i) {
            ltdet::LabeledProposal lp;
            lp.box = ltdet::Box(0, 0, 1, 1);
            lp.label = label;
            lp.proposal_index = next++;
            dst.push_back(lp);
        }
    };
    fill(p.s_t, n_t, 1);
    fill(p.s_h, n_h, 0);
    fill(p.s_b, n_b, ltdet::kBackground);
    return p;
}

/// Sample set with random features, labels in [0, num_classes) and random
/// regression targets; proposal indices are unique.
inline ltdet::SampleSet random_sample_set(std::mt19937_64& g, std::size_t dim,
                                          int num_classes, std::size_t num_pos,
                                          std::size_t num_neg) {
    std::normal_distribution<double> n01(0.0, 1.0);
    std::uniform_int_distribution<int> cls(0, num_classes - 1);
    ltdet::SampleSet s;
    std::size_t next = 0;
    auto make = [&](bool positive) {
        ltdet::LabeledProposal lp;
        lp.box = ltdet::Box(0, 0, 1, 1);
        for (std::size_t k = 0; k < dim; ++k) lp.feature.push_back(n01(g));
        lp.proposal_index = next++;
        if (positive) {
            lp.label = cls(g);
            lp.regression_target = ltdet::BoxDeltas{n01(g), n01(g), n01(g), n01(g)};
        }
        return lp;
    };
    for (std::size_t i = 0; i < num_pos; ++i) s.positives.push_back(make(true));
    for (std::size_t i = 0; i < num_neg; ++i) s.negatives.push_back(make(false));
    return s;
}

/// Distance of the nearest non-differentiable point of the loss (ReLU at 0,
/// smooth-L1 at |d| = beta) from the current parameters' activations.
inline double kink_margin(const ltdet::HeadParams& p, const ltdet::SampleSet& s) {
    const ltdet::LossBatch b = ltdet::make_batch(s, p.num_classes());
    const ltdet::ForwardCache c = ltdet::forward_batch(p, b.features);
    double m = std::min(c.z1.cwiseAbs().minCoeff(), c.z2.cwiseAbs().minCoeff());
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (!b.is_positive[i]) continue;
        const auto col = static_cast<Eigen::Index>(i);
        for (Eigen::Index k = 0; k < 4; ++k) {
            const double d = c.deltas(4 * b.targets[i] + k, col) - b.reg_targets(k, col);
            m = std::min(m, std::abs(std::abs(d) - ltdet::kSmoothL1Beta));
        }
    }
    return m;
}

/// Tiny evaluation instance: up to 3 scenes and 3 classes, at most 20
/// detections in total. Half of the detections are perturbed copies of
/// ground truth so that matches at several IoU levels occur.
struct EvalInstance {
    std::vector<ltdet::Scene> scenes;
    std::map<std::uint64_t, std::vector<ltdet::ScoredDetection>> dets;
    ltdet::ClassPartition partition;
};

inline EvalInstance random_eval_instance(std::mt19937_64& g) {
    std::uniform_int_distribution<int> n_scenes(1, 3);
    std::uniform_int_distribution<int> n_classes(2, 3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> jitter(0.0, 0.6);
    EvalInstance inst;
    const int classes = n_classes(g);
    inst.partition = alternating_partition(classes);
    const int ns = n_scenes(g);
    for (int s = 0; s < ns; ++s) {
        inst.scenes.push_back(random_scene(g, static_cast<std::uint64_t>(10 + s), classes, 4, 1));
    }
    std::uniform_int_distribution<int> n_dets(0, 20);
    std::uniform_int_distribution<int> pick_scene(0, ns - 1);
    std::uniform_int_distribution<int> cls(0, classes - 1);
    const int nd = n_dets(g);
    for (int i = 0; i < nd; ++i) {
        const auto& scene = inst.scenes[static_cast<std::size_t>(pick_scene(g))];
        const double score = std::round(unit(g) * 10.0) / 10.0;
        ltdet::Box box = random_box(g, 10.0, 6.0);
        int c = cls(g);
        if (!scene.objects.empty() && unit(g) < 0.5) {
            std::uniform_int_distribution<std::size_t> obj(0, scene.objects.size() - 1);
            const auto& o = scene.objects[obj(g)];
            const double x1 = o.box.x1() + jitter(g), y1 = o.box.y1() + jitter(g);
            box = ltdet::Box(x1, y1, std::max(x1, o.box.x2() + jitter(g)),
                             std::max(y1, o.box.y2() + jitter(g)));
            if (unit(g) < 0.8) c = o.class_id;
        }
        inst.dets[scene.scene_id].emplace_back(box, c, score, ltdet::SourceHead::Single);
    }
    return inst;
}

}  // namespace gen
