#pragma once

#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "ltdet/assignment.hpp"
#include "ltdet/rng.hpp"

namespace ltdet {

struct SamplerConfig {
    std::size_t num_samples = 512;
    double pos_fraction = 0.25;

    /// round(num_samples * pos_fraction)
    std::size_t num_positive() const;
    std::size_t num_negative() const { return num_samples - num_positive(); }
    void validate() const;
};

enum class SampleBias { TailBiased, HeadBiased, Unbiased };

struct SampleSet {
    std::vector<LabeledProposal> positives;
    std::vector<LabeledProposal> negatives;
    SampleBias bias = SampleBias::Unbiased;

    std::size_t size() const { return positives.size() + negatives.size(); }
    bool empty() const { return size() == 0; }
};

/// Returns `num` elements drawn uniformly without replacement, or the whole
/// pool when num >= pool.size(). The whole-pool branch draws nothing from rng.
template <typename T>
std::vector<T> sub_sample(std::span<const T> pool, std::size_t num, Rng& rng) {
    if (num >= pool.size()) {
        return {pool.begin(), pool.end()};
    }
    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<T> out;
    out.reserve(num);
    for (std::size_t i = 0; i < num; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
        std::swap(idx[i], idx[j]);
        out.push_back(pool[idx[i]]);
    }
    return out;
}

template <typename T>
std::vector<T> sub_sample(const std::vector<T>& pool, std::size_t num, Rng& rng) {
    return sub_sample(std::span<const T>(pool), num, rng);
}

/// Baseline sampler: positives from s_t and s_h pooled together.
SampleSet random_sampler(const ProposalPartition& partition, const SamplerConfig& cfg, Rng& rng);

/// Random sampler at twice the configured sample count.
SampleSet rs_dbl(const ProposalPartition& partition, const SamplerConfig& cfg, Rng& rng);

struct BiasedSamples {
    SampleSet tail;  // R_t
    SampleSet head;  // R_h
};

/// Class-biased samplers. The tail-biased set takes negatives, then up to N_p
/// tail positives, then tops up from head positives when s_t is short; the
/// head-biased set mirrors it. The two sets are drawn independently.
BiasedSamples cbs(const ProposalPartition& partition, const SamplerConfig& cfg, Rng& rng);

/// Class-exclusive variant of cbs() with no top-up from the other group.
BiasedSamples ces(const ProposalPartition& partition, const SamplerConfig& cfg, Rng& rng);

/// Union of two sample sets with duplicates (same proposal_index) removed.
SampleSet merge_unique(const SampleSet& a, const SampleSet& b);

}  // namespace ltdet
