#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ltdet/assignment.hpp"
#include "ltdet/samplers.hpp"

namespace ltdet {

/// Box head: two shared fully connected ReLU layers followed by a
/// classifier over (C + 1) logits (background last) and a class-specific
/// regressor with 4 * C outputs. The same type stores gradients.
struct HeadParams {
    Eigen::MatrixXd w1;  // H x D
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;  // H x H
    Eigen::VectorXd b2;
    Eigen::MatrixXd wc;  // (C+1) x H
    Eigen::VectorXd bc;
    Eigen::MatrixXd wr;  // 4C x H
    Eigen::VectorXd br;

    static HeadParams zeros(std::size_t feature_dim, std::size_t hidden, std::size_t num_classes);
    /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases.
    static HeadParams random(std::size_t feature_dim, std::size_t hidden, std::size_t num_classes,
                             std::uint64_t seed);

    std::size_t feature_dim() const { return static_cast<std::size_t>(w1.cols()); }
    std::size_t hidden() const { return static_cast<std::size_t>(w1.rows()); }
    std::size_t num_classes() const { return static_cast<std::size_t>(wc.rows()) - 1; }
    std::size_t num_parameters() const;

    /// All parameters in a fixed order (w1, b1, w2, b2, wc, bc, wr, br),
    /// matrices row-major.
    Eigen::VectorXd flatten() const;
    void assign_flat(const Eigen::VectorXd& flat);

    /// this += scale * other
    void add_scaled(const HeadParams& other, double scale);
    bool all_finite() const;
    bool same_shape(const HeadParams& other) const;
    bool operator==(const HeadParams& other) const;
};

struct Prediction {
    Eigen::VectorXd class_scores;  // C + 1 softmax probabilities, background last
    Eigen::VectorXd box_deltas;    // 4 * C, class c at [4c, 4c + 4)

    BoxDeltas deltas_for(int class_id) const;
};

/// Column-batched activations kept for back-propagation.
struct ForwardCache {
    Eigen::MatrixXd z1, a1, z2, a2;
    Eigen::MatrixXd scores;      // (C+1) x n, softmax
    Eigen::MatrixXd log_scores;  // log-softmax
    Eigen::MatrixXd deltas;  // 4C x n
};

/// Throws std::invalid_argument on dimension mismatch.
Prediction forward(const HeadParams& params, std::span<const double> feature);
ForwardCache forward_batch(const HeadParams& params, const Eigen::MatrixXd& features);

/// Training batch in matrix form. targets[i] is a class id or C for
/// background. Regression targets are read only where is_positive is set.
struct LossBatch {
    Eigen::MatrixXd features;        // D x n
    std::vector<int> targets;
    Eigen::MatrixXd reg_targets;     // 4 x n
    std::vector<bool> is_positive;
    Eigen::VectorXd weights;         // per-sample label weight, default 1

    std::size_t size() const { return targets.size(); }
};

LossBatch make_batch(const SampleSet& samples, std::size_t num_classes);
/// Every proposal of a partition, weighted 1 when `selected` contains its
/// proposal_index and 0 otherwise.
LossBatch make_masked_batch(const ProposalPartition& partition, std::size_t num_classes,
                            const std::vector<std::size_t>& selected);

struct LossValue {
    double total = 0.0;
    double classification = 0.0;
    double regression = 0.0;
};

struct LossAndGrad {
    LossValue loss;
    HeadParams grad;
};

inline constexpr double kSmoothL1Beta = 1.0;

/// Weighted mean cross-entropy over all samples plus weighted mean smooth-L1
/// over positives (matched class slot only), 1:1. Throws std::invalid_argument
/// when the batch has zero total weight.
LossAndGrad batch_loss(const HeadParams& params, const LossBatch& batch);
double batch_loss_value(const HeadParams& params, const LossBatch& batch);

/// batch_loss() on a sample set; throws on an empty set.
LossAndGrad head_loss(const HeadParams& params, const SampleSet& samples);

struct LossBreakdown {
    double l_h = 0.0;
    double l_t = 0.0;
    double lambda = 0.0;
    double total = 0.0;
};

struct BilateralLoss {
    LossBreakdown breakdown;
    HeadParams grad_head;  // d total / d params_h
    HeadParams grad_tail;  // d total / d params_t = lambda * d l_t
};

/// total = l_h + lambda * l_t with l_h on the head-biased samples and l_t on
/// the tail-biased samples; each head receives gradient only from its term.
BilateralLoss bbh_loss(const HeadParams& params_h, const HeadParams& params_t,
                       const SampleSet& r_h, const SampleSet& r_t, double lambda);

}  // namespace ltdet
