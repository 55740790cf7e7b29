#pragma once

#include <cstddef>
#include <vector>

#include "brl/exploration.hpp"
#include "brl/longtail.hpp"

namespace brl {

struct LossResult {
  double value = 0.0;
  std::vector<double> grad;  // d value / d logits
};

struct ActionAwareHyper {
  double upsilon = 0.99;
  double lambda = 0.0099;
  bool normalize_weights = false;

  void validate() const;
};

struct ScheduleConfig {
  std::size_t total_epochs = 120;  // T
  std::size_t switch_epoch = 100;  // T0

  void validate() const;
};

enum class LossKind { generic_ce, action_aware };

// Stabilized softmax probabilities.
std::vector<double> softmax(const std::vector<double>& logits);

// loss = -sum_c y_c log p_c, gradient = p - y.
LossResult softmax_ce(const std::vector<double>& logits, const SoftLabel& label);

// beta_y = lambda * (n_y - n_min)/(n_max - n_min) + upsilon.
double beta_of(std::size_t n_y, std::size_t n_min, std::size_t n_max,
               const ActionAwareHyper& hyper);

// gamma = (1 - beta) / (1 - beta^n), beta in (0,1).
double gamma_of(double beta, std::size_t n);

// Per-class effective-number weights; optionally rescaled to mean 1.
std::vector<double> class_weights(const ClassHistogram& hist,
                                  const ActionAwareHyper& hyper);

// loss = -sum_c y_c gamma_c log p_c.
LossResult action_aware_loss(const std::vector<double>& logits,
                             const SoftLabel& label,
                             const std::vector<double>& weights);

// loss = -(1 - p_y)^gamma_f * log p_y, hard labels only.
LossResult focal_loss(const std::vector<double>& logits, int label_index,
                      double gamma_focal);

// Inverse-frequency weighted cross-entropy, w_y = total / (C * n_y).
LossResult weighted_ce(const std::vector<double>& logits, int label_index,
                       const ClassHistogram& hist);

// CE for epoch < T0, action-aware for epoch >= T0.
LossKind select_loss(std::size_t epoch, const ScheduleConfig& schedule);

}  // namespace brl
