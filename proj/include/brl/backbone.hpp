#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brl/rng.hpp"
#include "brl/skeleton.hpp"

namespace brl {

struct Tensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> v;

  Tensor() = default;
  Tensor(std::string n, std::vector<std::size_t> s)
      : name(std::move(n)), shape(std::move(s)) {
    std::size_t total = 1;
    for (std::size_t d : shape) total *= d;
    v.assign(total, 0.0);
  }
  std::size_t size() const { return v.size(); }
};

// Named parameter tensors with matching gradient and momentum slots.
struct ParamSet {
  std::vector<Tensor> values;
  std::vector<Tensor> grads;
  std::vector<Tensor> momentum;

  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;
  Tensor& grad(const std::string& name);
  void add(Tensor t);
  void zero_grad();
  std::size_t total_size() const;
};

struct BackboneConfig {
  std::size_t input_channels = 3;
  std::size_t joints = 25;
  std::size_t frames = 64;
  std::size_t num_classes = 60;
  std::vector<std::size_t> block_channels = {32, 64};
  std::size_t temporal_kernel = 5;
  std::vector<std::size_t> temporal_strides = {1, 2};
  std::uint64_t init_seed = 0;

  void validate() const;
};

// D^{-1/2} (A + I) D^{-1/2} over the symmetric binary edge matrix.
struct NormalizedAdjacency {
  std::size_t num_joints = 0;
  std::vector<double> a;  // row-major V x V
};

NormalizedAdjacency build_adjacency(const SkeletonGraph& g);

// Per-sample activation cache kept between forward and backward.
struct ForwardCache {
  struct PersonCache {
    std::vector<double> input;                 // L x V x C
    std::vector<std::vector<double>> block_in; // block input, Lb x V x Cin
    std::vector<std::vector<double>> spatial;  // S, pre-affine
    std::vector<std::vector<double>> affine;   // U, pre-relu
    std::vector<std::vector<double>> temporal; // pre-relu temporal output
    std::vector<double> pooled;                // feature after GAP
  };
  std::vector<PersonCache> persons;  // present persons only
  std::vector<std::size_t> person_ids;
  std::vector<double> mean_feature;
  bool valid = false;
};

// Two blocks of [spatial aggregation, per-channel affine, ReLU, temporal
// conv, ReLU], global average pooling, masked person mean, linear head.
class Backbone {
 public:
  Backbone(BackboneConfig cfg, const SkeletonGraph& graph);

  const BackboneConfig& config() const { return cfg_; }
  const NormalizedAdjacency& adjacency() const { return adj_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  // Sequence must be frames x joints x channels matching the config.
  std::vector<double> forward(const SkeletonSequence& seq,
                              ForwardCache& cache) const;

  // Accumulates into gradient slots; cache must come from the same sample.
  void backward(const SkeletonSequence& seq, const ForwardCache& cache,
                const std::vector<double>& dlogits);

  void sgd_step(double lr, double momentum, double weight_decay, bool nesterov);

 private:
  std::size_t block_out_frames(std::size_t block) const;

  BackboneConfig cfg_;
  NormalizedAdjacency adj_;
  ParamSet params_;
};

// lr = 0.5 * base_lr * (1 + cos(pi * epoch / total_epochs))
double cosine_lr(std::size_t epoch, std::size_t total_epochs, double base_lr);

}  // namespace brl
