#pragma once

#include <cstdint>

#include "brl/rng.hpp"
#include "brl/skeleton.hpp"

namespace brl {

struct AugmentConfig {
  double flip_prob = 0.5;
  double rotate_max_deg = 15.0;   // per axis
  double scale_low = 0.9;
  double scale_high = 1.1;
  std::size_t target_frames = 64; // L
  std::uint64_t rng_seed = 0;

  void validate() const;
};

enum class SampleMode { random, center };

// Swap symmetric joint pairs and negate the lateral axis (channel 0),
// with probability flip_prob.
SkeletonSequence flip(const SkeletonSequence& seq, const SkeletonGraph& g,
                      double flip_prob, Rng& rng);

// One rotation per sequence, per-axis angles uniform in [-theta, +theta]
// degrees. C>=3 composes Rz*Ry*Rx over channels (0,1,2); C==2 rotates in
// the (0,1) plane.
SkeletonSequence rotate(const SkeletonSequence& seq, Rng& rng,
                        double rotate_max_deg);

// One scalar per sequence, uniform in [low, high].
SkeletonSequence scale(const SkeletonSequence& seq, Rng& rng, double low,
                       double high);

// Uniform split sampler: L splits with boundaries floor(s*T/L); one frame
// per split (random within the split, or the midpoint for center mode).
SkeletonSequence uniform_sample(const SkeletonSequence& seq, std::size_t L,
                                SampleMode mode, Rng& rng);

// Frame indices the sampler would pick; exposed for statistical tests.
std::vector<std::size_t> uniform_sample_indices(std::size_t T, std::size_t L,
                                                SampleMode mode, Rng& rng);

}  // namespace brl
