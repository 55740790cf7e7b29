#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "brl/longtail.hpp"
#include "brl/rng.hpp"
#include "brl/skeleton.hpp"

namespace brl {

struct MixupConfig {
  double k = 3.0;                  // imbalance threshold between two classes
  double selection_rate = 1.0 / 16.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct SoftLabel {
  std::vector<double> probs;

  static SoftLabel one_hot(int label, int num_classes);
  void validate() const;
};

struct ReverseSamplerConfig {
  double exponent = 0.5;  // tempering power
  std::size_t cap = 4;    // max repeat factor
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// Label-space mix weight: 0 when n_i/n_j > k, 1 when n_i/n_j <= 1/k,
// otherwise lambda_x.
double lambda_y(std::size_t n_i, std::size_t n_j, double lambda_x, double k);

// Spatial mix ratio fixed by the body partition.
double lambda_x_of(const SkeletonGraph& g);

// Upper-body joints from sample_i, lower-body joints from sample_j; label
// mixed by lambda_y over the classes' training counts.
std::pair<SkeletonSequence, SoftLabel> partial_mixup(
    const SkeletonSequence& sample_i, const SkeletonSequence& sample_j,
    const SkeletonGraph& g, const ClassHistogram& hist, int num_classes,
    const MixupConfig& cfg);

// floor(batch * rate) targets without replacement; partner uniform over the
// batch excluding the target.
std::vector<std::pair<std::size_t, std::size_t>> select_mixup_pairs(
    std::size_t batch_size, double selection_rate, Rng& rng);

// r_c = min(cap, max(1, round((n_median / n_c)^exponent))); classes at or
// above the median repeat once.
std::vector<std::size_t> reverse_repeat_factors(const ClassHistogram& hist,
                                                const ReverseSamplerConfig& cfg);

// Shuffled epoch index with each sample of class c repeated r_c times.
std::vector<std::size_t> build_epoch_index(const DatasetManifest& manifest,
                                           const std::vector<std::size_t>& factors,
                                           Rng& rng);

}  // namespace brl
