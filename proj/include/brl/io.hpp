#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brl/backbone.hpp"
#include "brl/longtail.hpp"
#include "brl/skeleton.hpp"

namespace brl {

// "SKL1" container: magic, u32 LE header length, JSON header
// {"dtype","shape","label"}, row-major little-endian IEEE-754 payload.
void save_sequence(const std::string& path, const SkeletonSequence& seq,
                   bool as_f32 = true);
SkeletonSequence load_sequence(const std::string& path);

// Score matrices reuse the container with shape [num_samples, num_classes].
void save_matrix(const std::string& path, const std::vector<double>& data,
                 std::size_t rows, std::size_t cols, bool as_f32 = false);
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
};
Matrix load_matrix(const std::string& path);

// "BRLCKPT1" checkpoint: magic, u32 LE header length, JSON header (config,
// epoch, histogram, graph, rng state, metric log, parameter directory),
// then the named parameter blobs in directory order.
struct Checkpoint {
  BackboneConfig config;
  SkeletonGraph graph;
  std::vector<std::size_t> train_counts;  // may be empty
  std::string modality = "joint";
  std::size_t epoch = 0;
  std::uint64_t rng_state = 0;
  std::vector<std::string> metric_log;  // one JSON line per epoch
  ParamSet params;                      // values only are persisted
  bool as_f32 = false;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace brl
