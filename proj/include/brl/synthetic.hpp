#pragma once

#include <cstdint>
#include <string>

#include "brl/longtail.hpp"
#include "brl/skeleton.hpp"

namespace brl {

// Desk-scale dataset generator: each class is a sinusoidal limb-motion
// pattern with class-specific frequency/amplitude, plus coordinate noise.
struct SyntheticSpec {
  int num_classes = 10;
  std::size_t joints = 15;
  std::size_t frames = 48;
  std::size_t persons = 1;
  std::size_t train_per_class = 200;
  std::size_t val_per_class = 40;
  double base_frequency = 1.0;
  double frequency_step = 1.0;    // class separation in cycles per sequence
  double base_amplitude = 0.5;
  double amplitude_step = 0.05;
  double noise = 0.03;            // gaussian coordinate noise sigma
  double phase_jitter = 3.0;      // per-sample phase offset bound (radians)
  std::uint64_t seed = 0;

  void validate() const;
};

// Humanoid-like tree for an arbitrary joint count: a spine plus two arms
// and two legs, with symmetry pairs and the upper/lower partition.
SkeletonGraph synthetic_graph(std::size_t joints);

// Deterministic per (spec.seed, cls, index, split).
SkeletonSequence synthesize_sample(const SyntheticSpec& spec,
                                   const SkeletonGraph& g, int cls,
                                   std::size_t index, bool val_split);

struct SyntheticOutput {
  std::string graph_path;
  std::string train_manifest_path;
  std::string val_manifest_path;
};

// Writes graph.json, train/val manifests and SKL1 sample files under dir.
SyntheticOutput generate_synthetic(const SyntheticSpec& spec,
                                   const std::string& dir);

}  // namespace brl
