#include "ltdet/heads.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "ltdet/rng.hpp"

namespace ltdet {

namespace {

template <typename Fn>
void for_each_block(HeadParams& p, Fn&& fn) {
    fn(p.w1);
    fn(p.b1);
    fn(p.w2);
    fn(p.b2);
    fn(p.wc);
    fn(p.bc);
    fn(p.wr);
    fn(p.br);
}

template <typename Fn>
void for_each_block(const HeadParams& p, Fn&& fn) {
    fn(p.w1);
    fn(p.b1);
    fn(p.w2);
    fn(p.b2);
    fn(p.wc);
    fn(p.bc);
    fn(p.wr);
    fn(p.br);
}

void fill_uniform(Eigen::MatrixXd& m, double bound, Rng& rng) {
    // Row-major visiting order keeps the draw sequence independent of storage.
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            m(r, c) = rng.uniform(-bound, bound);
        }
    }
}

void fill_uniform(Eigen::VectorXd& v, double bound, Rng& rng) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v(i) = rng.uniform(-bound, bound);
    }
}

double smooth_l1(double x) {
    const double a = std::abs(x);
    return a < kSmoothL1Beta ? 0.5 * x * x / kSmoothL1Beta : a - 0.5 * kSmoothL1Beta;
}

double smooth_l1_grad(double x) {
    if (std::abs(x) < kSmoothL1Beta) {
        return x / kSmoothL1Beta;
    }
    return x > 0.0 ? 1.0 : -1.0;
}

}  // namespace

HeadParams HeadParams::zeros(std::size_t d, std::size_t h, std::size_t c) {
    const auto D = static_cast<Eigen::Index>(d);
    const auto H = static_cast<Eigen::Index>(h);
    const auto C = static_cast<Eigen::Index>(c);
    HeadParams p;
    p.w1 = Eigen::MatrixXd::Zero(H, D);
    p.b1 = Eigen::VectorXd::Zero(H);
    p.w2 = Eigen::MatrixXd::Zero(H, H);
    p.b2 = Eigen::VectorXd::Zero(H);
    p.wc = Eigen::MatrixXd::Zero(C + 1, H);
    p.bc = Eigen::VectorXd::Zero(C + 1);
    p.wr = Eigen::MatrixXd::Zero(4 * C, H);
    p.br = Eigen::VectorXd::Zero(4 * C);
    return p;
}

HeadParams HeadParams::random(std::size_t d, std::size_t h, std::size_t c, std::uint64_t seed) {
    HeadParams p = zeros(d, h, c);
    Rng rng(seed);
    const double bound_in = 1.0 / std::sqrt(static_cast<double>(d));
    const double bound_hidden = 1.0 / std::sqrt(static_cast<double>(h));
    fill_uniform(p.w1, bound_in, rng);
    fill_uniform(p.b1, bound_in, rng);
    fill_uniform(p.w2, bound_hidden, rng);
    fill_uniform(p.b2, bound_hidden, rng);
    fill_uniform(p.wc, bound_hidden, rng);
    fill_uniform(p.bc, bound_hidden, rng);
    fill_uniform(p.wr, bound_hidden, rng);
    fill_uniform(p.br, bound_hidden, rng);
    return p;
}

std::size_t HeadParams::num_parameters() const {
    std::size_t n = 0;
    for_each_block(*this, [&](const auto& m) { n += static_cast<std::size_t>(m.size()); });
    return n;
}

Eigen::VectorXd HeadParams::flatten() const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(num_parameters()));
    Eigen::Index k = 0;
    for_each_block(*this, [&](const auto& m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                out(k++) = m(r, c);
            }
        }
    });
    return out;
}

void HeadParams::assign_flat(const Eigen::VectorXd& flat) {
    if (static_cast<std::size_t>(flat.size()) != num_parameters()) {
        throw std::invalid_argument("HeadParams::assign_flat: size mismatch");
    }
    Eigen::Index k = 0;
    for_each_block(*this, [&](auto& m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                m(r, c) = flat(k++);
            }
        }
    });
}

void HeadParams::add_scaled(const HeadParams& o, double s) {
    w1 += s * o.w1;
    b1 += s * o.b1;
    w2 += s * o.w2;
    b2 += s * o.b2;
    wc += s * o.wc;
    bc += s * o.bc;
    wr += s * o.wr;
    br += s * o.br;
}

bool HeadParams::all_finite() const {
    bool ok = true;
    for_each_block(*this, [&](const auto& m) { ok = ok && m.allFinite(); });
    return ok;
}

bool HeadParams::same_shape(const HeadParams& o) const {
    return w1.rows() == o.w1.rows() && w1.cols() == o.w1.cols() && wc.rows() == o.wc.rows();
}

bool HeadParams::operator==(const HeadParams& o) const {
    return same_shape(o) && w1 == o.w1 && b1 == o.b1 && w2 == o.w2 && b2 == o.b2 && wc == o.wc &&
           bc == o.bc && wr == o.wr && br == o.br;
}

BoxDeltas Prediction::deltas_for(int class_id) const {
    const auto k = static_cast<Eigen::Index>(4 * class_id);
    return {box_deltas(k), box_deltas(k + 1), box_deltas(k + 2), box_deltas(k + 3)};
}

ForwardCache forward_batch(const HeadParams& p, const Eigen::MatrixXd& x) {
    if (x.rows() != p.w1.cols()) {
        throw std::invalid_argument("forward: feature dimension " + std::to_string(x.rows()) +
                                    " does not match head input " + std::to_string(p.w1.cols()));
    }
    ForwardCache c;
    c.z1 = (p.w1 * x).colwise() + p.b1;
    c.a1 = c.z1.cwiseMax(0.0);
    c.z2 = (p.w2 * c.a1).colwise() + p.b2;
    c.a2 = c.z2.cwiseMax(0.0);
    Eigen::MatrixXd logits = (p.wc * c.a2).colwise() + p.bc;
    const Eigen::RowVectorXd col_max = logits.colwise().maxCoeff();
    logits.rowwise() -= col_max;
    c.scores = logits.array().exp().matrix();
    const Eigen::RowVectorXd sums = c.scores.colwise().sum();
    c.log_scores = logits;
    for (Eigen::Index j = 0; j < c.scores.cols(); ++j) {
        c.scores.col(j) /= sums(j);
        c.log_scores.col(j).array() -= std::log(sums(j));
    }
    c.deltas = (p.wr * c.a2).colwise() + p.br;
    return c;
}

Prediction forward(const HeadParams& params, std::span<const double> feature) {
    const Eigen::MatrixXd x = Eigen::Map<const Eigen::VectorXd>(
        feature.data(), static_cast<Eigen::Index>(feature.size()));
    ForwardCache c = forward_batch(params, x);
    return {c.scores.col(0), c.deltas.col(0)};
}

namespace {

void append_sample(LossBatch& b, Eigen::Index col, const LabeledProposal& lp,
                   std::size_t num_classes, double weight) {
    b.features.col(col) = Eigen::Map<const Eigen::VectorXd>(
        lp.feature.data(), static_cast<Eigen::Index>(lp.feature.size()));
    if (lp.is_background()) {
        b.targets.push_back(static_cast<int>(num_classes));
        b.is_positive.push_back(false);
        b.reg_targets.col(col).setZero();
    } else {
        if (lp.label < 0 || static_cast<std::size_t>(lp.label) >= num_classes) {
            throw std::invalid_argument("loss batch: label out of range");
        }
        b.targets.push_back(lp.label);
        b.is_positive.push_back(true);
        const BoxDeltas& t = *lp.regression_target;
        b.reg_targets.col(col) << t[0], t[1], t[2], t[3];
    }
    b.weights(col) = weight;
}

LossBatch allocate(std::size_t n, std::size_t dim) {
    LossBatch b;
    const auto N = static_cast<Eigen::Index>(n);
    b.features.resize(static_cast<Eigen::Index>(dim), N);
    b.reg_targets.resize(4, N);
    b.weights.resize(N);
    b.targets.reserve(n);
    b.is_positive.reserve(n);
    return b;
}

}  // namespace

LossBatch make_batch(const SampleSet& samples, std::size_t num_classes) {
    if (samples.empty()) {
        return {};
    }
    const std::size_t dim = (samples.positives.empty() ? samples.negatives : samples.positives)
                                .front()
                                .feature.size();
    LossBatch b = allocate(samples.size(), dim);
    Eigen::Index col = 0;
    for (const LabeledProposal& lp : samples.positives) {
        append_sample(b, col++, lp, num_classes, 1.0);
    }
    for (const LabeledProposal& lp : samples.negatives) {
        append_sample(b, col++, lp, num_classes, 1.0);
    }
    return b;
}

LossBatch make_masked_batch(const ProposalPartition& p, std::size_t num_classes,
                            const std::vector<std::size_t>& selected) {
    if (p.size() == 0) {
        return {};
    }
    const std::set<std::size_t> chosen(selected.begin(), selected.end());
    const std::size_t dim = (!p.s_t.empty()   ? p.s_t
                             : !p.s_h.empty() ? p.s_h
                                              : p.s_b)
                                .front()
                                .feature.size();
    LossBatch b = allocate(p.size(), dim);
    Eigen::Index col = 0;
    for (const auto* pool : {&p.s_t, &p.s_h, &p.s_b}) {
        for (const LabeledProposal& lp : *pool) {
            append_sample(b, col++, lp, num_classes, chosen.count(lp.proposal_index) ? 1.0 : 0.0);
        }
    }
    return b;
}

LossAndGrad batch_loss(const HeadParams& p, const LossBatch& batch) {
    const std::size_t n = batch.size();
    const double total_weight = n == 0 ? 0.0 : batch.weights.sum();
    if (!(total_weight > 0.0)) {
        throw std::invalid_argument("head loss: empty sample set");
    }
    const ForwardCache c = forward_batch(p, batch.features);
    const auto N = static_cast<Eigen::Index>(n);

    double positive_weight = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (batch.is_positive[i]) {
            positive_weight += batch.weights(static_cast<Eigen::Index>(i));
        }
    }

    LossAndGrad out;
    Eigen::MatrixXd d_logits = c.scores;
    Eigen::MatrixXd d_deltas = Eigen::MatrixXd::Zero(c.deltas.rows(), N);
    double cls = 0.0;
    double reg = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) {
        const double w = batch.weights(i);
        const auto y = static_cast<Eigen::Index>(batch.targets[static_cast<std::size_t>(i)]);
        cls -= w * c.log_scores(y, i);
        d_logits(y, i) -= 1.0;
        d_logits.col(i) *= w / total_weight;
        if (batch.is_positive[static_cast<std::size_t>(i)] && positive_weight > 0.0 && w != 0.0) {
            for (Eigen::Index k = 0; k < 4; ++k) {
                const double diff = c.deltas(4 * y + k, i) - batch.reg_targets(k, i);
                reg += w * smooth_l1(diff);
                d_deltas(4 * y + k, i) = w * smooth_l1_grad(diff) / positive_weight;
            }
        }
    }
    out.loss.classification = cls / total_weight;
    out.loss.regression = positive_weight > 0.0 ? reg / positive_weight : 0.0;
    out.loss.total = out.loss.classification + out.loss.regression;

    HeadParams& g = out.grad;
    g.wc = d_logits * c.a2.transpose();
    g.bc = d_logits.rowwise().sum();
    g.wr = d_deltas * c.a2.transpose();
    g.br = d_deltas.rowwise().sum();
    Eigen::MatrixXd d_a2 = p.wc.transpose() * d_logits + p.wr.transpose() * d_deltas;
    Eigen::MatrixXd d_z2 = d_a2.cwiseProduct((c.z2.array() > 0.0).cast<double>().matrix());
    g.w2 = d_z2 * c.a1.transpose();
    g.b2 = d_z2.rowwise().sum();
    Eigen::MatrixXd d_a1 = p.w2.transpose() * d_z2;
    Eigen::MatrixXd d_z1 = d_a1.cwiseProduct((c.z1.array() > 0.0).cast<double>().matrix());
    g.w1 = d_z1 * batch.features.transpose();
    g.b1 = d_z1.rowwise().sum();
    return out;
}

double batch_loss_value(const HeadParams& p, const LossBatch& batch) {
    return batch_loss(p, batch).loss.total;
}

LossAndGrad head_loss(const HeadParams& params, const SampleSet& samples) {
    if (samples.empty()) {
        throw std::invalid_argument("head loss: empty sample set");
    }
    return batch_loss(params, make_batch(samples, params.num_classes()));
}

BilateralLoss bbh_loss(const HeadParams& params_h, const HeadParams& params_t,
                       const SampleSet& r_h, const SampleSet& r_t, double lambda) {
    if (!(lambda >= 0.0)) {
        throw std::invalid_argument("bbh loss: lambda must be >= 0");
    }
    LossAndGrad h = head_loss(params_h, r_h);
    LossAndGrad t = head_loss(params_t, r_t);
    BilateralLoss out;
    out.breakdown.l_h = h.loss.total;
    out.breakdown.l_t = t.loss.total;
    out.breakdown.lambda = lambda;
    out.breakdown.total = h.loss.total + lambda * t.loss.total;
    out.grad_head = std::move(h.grad);
    out.grad_tail = HeadParams::zeros(params_t.feature_dim(), params_t.hidden(),
                                      params_t.num_classes());
    out.grad_tail.add_scaled(t.grad, lambda);
    return out;
}

}  // namespace ltdet
