#include "ltdet/samplers.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace ltdet {

std::size_t SamplerConfig::num_positive() const {
    return static_cast<std::size_t>(std::llround(static_cast<double>(num_samples) * pos_fraction));
}

void SamplerConfig::validate() const {
    if (num_samples < 1) {
        throw std::invalid_argument("sampler: num_samples must be >= 1");
    }
    if (!(pos_fraction > 0.0 && pos_fraction < 1.0)) {
        throw std::invalid_argument("sampler: pos_fraction must lie in (0,1)");
    }
}

SampleSet random_sampler(const ProposalPartition& p, const SamplerConfig& cfg, Rng& rng) {
    cfg.validate();
    std::vector<LabeledProposal> fg;
    fg.reserve(p.s_t.size() + p.s_h.size());
    fg.insert(fg.end(), p.s_t.begin(), p.s_t.end());
    fg.insert(fg.end(), p.s_h.begin(), p.s_h.end());
    SampleSet out;
    out.bias = SampleBias::Unbiased;
    out.positives = sub_sample(fg, cfg.num_positive(), rng);
    out.negatives = sub_sample(p.s_b, cfg.num_negative(), rng);
    return out;
}

SampleSet rs_dbl(const ProposalPartition& p, const SamplerConfig& cfg, Rng& rng) {
    SamplerConfig doubled = cfg;
    doubled.num_samples = 2 * cfg.num_samples;
    return random_sampler(p, doubled, rng);
}

namespace {

SampleSet biased_pass(const std::vector<LabeledProposal>& primary,
                      const std::vector<LabeledProposal>& secondary,
                      const std::vector<LabeledProposal>& background, const SamplerConfig& cfg,
                      bool top_up, SampleBias bias, Rng& rng) {
    const std::size_t n_pos = cfg.num_positive();
    SampleSet out;
    out.bias = bias;
    out.negatives = sub_sample(background, cfg.num_negative(), rng);
    out.positives = sub_sample(primary, n_pos, rng);
    if (top_up && primary.size() < n_pos) {
        std::vector<LabeledProposal> extra = sub_sample(secondary, n_pos - primary.size(), rng);
        out.positives.insert(out.positives.end(), std::make_move_iterator(extra.begin()),
                             std::make_move_iterator(extra.end()));
    }
    return out;
}

BiasedSamples biased_samplers(const ProposalPartition& p, const SamplerConfig& cfg, bool top_up,
                              Rng& rng) {
    cfg.validate();
    BiasedSamples out;
    out.tail = biased_pass(p.s_t, p.s_h, p.s_b, cfg, top_up, SampleBias::TailBiased, rng);
    out.head = biased_pass(p.s_h, p.s_t, p.s_b, cfg, top_up, SampleBias::HeadBiased, rng);
    return out;
}

}  // namespace

BiasedSamples cbs(const ProposalPartition& p, const SamplerConfig& cfg, Rng& rng) {
    return biased_samplers(p, cfg, true, rng);
}

BiasedSamples ces(const ProposalPartition& p, const SamplerConfig& cfg, Rng& rng) {
    return biased_samplers(p, cfg, false, rng);
}

SampleSet merge_unique(const SampleSet& a, const SampleSet& b) {
    SampleSet out;
    out.bias = SampleBias::Unbiased;
    std::set<std::size_t> seen;
    auto add = [&](const std::vector<LabeledProposal>& src, std::vector<LabeledProposal>& dst) {
        for (const LabeledProposal& lp : src) {
            if (seen.insert(lp.proposal_index).second) {
                dst.push_back(lp);
            }
        }
    };
    add(a.positives, out.positives);
    add(b.positives, out.positives);
    add(a.negatives, out.negatives);
    add(b.negatives, out.negatives);
    return out;
}

}  // namespace ltdet
