#include "brl/loss.hpp"

#include <algorithm>
#include <cmath>

namespace brl {

void ActionAwareHyper::validate() const {
  if (!(upsilon > 0.0 && upsilon < 1.0))
    throw DomainError("action-aware: upsilon must be in (0,1)");
  if (!(lambda > 0.0)) throw DomainError("action-aware: lambda must be > 0");
  if (!(upsilon + lambda < 1.0))
    throw DomainError("action-aware: upsilon + lambda must be < 1");
}

void ScheduleConfig::validate() const {
  if (switch_epoch == 0 || switch_epoch > total_epochs)
    throw DomainError("schedule: require 0 < T0 <= T");
}

std::vector<double> softmax(const std::vector<double>& logits) {
  const double zmax = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double denom = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    p[c] = std::exp(logits[c] - zmax);
    denom += p[c];
  }
  for (double& x : p) x /= denom;
  return p;
}

LossResult softmax_ce(const std::vector<double>& logits, const SoftLabel& label) {
  if (logits.size() != label.probs.size())
    throw ShapeError("softmax_ce: logits/label dimension mismatch");
  const auto p = softmax(logits);
  LossResult res;
  res.grad.resize(logits.size());
  for (std::size_t c = 0; c < logits.size(); ++c) {
    if (label.probs[c] != 0.0) res.value -= label.probs[c] * std::log(p[c]);
    res.grad[c] = p[c] - label.probs[c];
  }
  return res;
}

double beta_of(std::size_t n_y, std::size_t n_min, std::size_t n_max,
               const ActionAwareHyper& hyper) {
  hyper.validate();
  if (n_y < n_min || n_y > n_max)
    throw DomainError("beta_of: n_y outside [n_min, n_max]");
  if (n_max == n_min) return hyper.upsilon;
  return hyper.lambda * static_cast<double>(n_y - n_min) /
             static_cast<double>(n_max - n_min) +
         hyper.upsilon;
}

double gamma_of(double beta, std::size_t n) {
  if (!(beta > 0.0 && beta < 1.0))
    throw DomainError("gamma_of: beta must be in (0,1)");
  if (n < 1) throw DomainError("gamma_of: n must be >= 1");
  // 1 - beta^n = -expm1(n log beta), stable for beta near 1 and large n
  const double denom = -std::expm1(static_cast<double>(n) * std::log(beta));
  return (1.0 - beta) / denom;
}

std::vector<double> class_weights(const ClassHistogram& hist,
                                  const ActionAwareHyper& hyper) {
  std::vector<double> w(hist.counts.size());
  for (std::size_t c = 0; c < hist.counts.size(); ++c)
    w[c] = gamma_of(beta_of(hist.counts[c], hist.n_min, hist.n_max, hyper),
                    hist.counts[c]);
  if (hyper.normalize_weights) {
    double mean = 0.0;
    for (double x : w) mean += x;
    mean /= w.size();
    for (double& x : w) x /= mean;
  }
  return w;
}

LossResult action_aware_loss(const std::vector<double>& logits,
                             const SoftLabel& label,
                             const std::vector<double>& weights) {
  if (logits.size() != label.probs.size() || logits.size() != weights.size())
    throw ShapeError("action_aware_loss: dimension mismatch");
  const auto p = softmax(logits);
  LossResult res;
  res.grad.resize(logits.size());
  double wsum = 0.0;  // sum_c y_c gamma_c
  for (std::size_t c = 0; c < logits.size(); ++c) {
    const double yw = label.probs[c] * weights[c];
    if (yw != 0.0) res.value -= yw * std::log(p[c]);
    wsum += yw;
  }
  for (std::size_t c = 0; c < logits.size(); ++c)
    res.grad[c] = wsum * p[c] - label.probs[c] * weights[c];
  return res;
}

LossResult focal_loss(const std::vector<double>& logits, int label_index,
                      double gamma_focal) {
  if (gamma_focal < 0.0) throw DomainError("focal_loss: gamma must be >= 0");
  if (label_index < 0 || static_cast<std::size_t>(label_index) >= logits.size())
    throw DomainError("focal_loss: label out of range");
  const auto p = softmax(logits);
  const double py = p[label_index];
  const double q = 1.0 - py;
  LossResult res;
  res.value = -std::pow(q, gamma_focal) * std::log(py);
  // dL/dp_y, then chain through dp_y/dz_j = p_y (delta - p_j)
  double dldp = -std::pow(q, gamma_focal) / py;
  if (gamma_focal > 0.0)
    dldp += gamma_focal * std::pow(q, gamma_focal - 1.0) * std::log(py);
  res.grad.resize(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) {
    const double delta = (static_cast<int>(j) == label_index) ? 1.0 : 0.0;
    res.grad[j] = dldp * py * (delta - p[j]);
  }
  return res;
}

LossResult weighted_ce(const std::vector<double>& logits, int label_index,
                       const ClassHistogram& hist) {
  if (label_index < 0 || static_cast<std::size_t>(label_index) >= logits.size())
    throw DomainError("weighted_ce: label out of range");
  if (hist.counts.size() != logits.size())
    throw ShapeError("weighted_ce: histogram/logits dimension mismatch");
  const double w = static_cast<double>(hist.total()) /
                   (static_cast<double>(logits.size()) *
                    static_cast<double>(hist.counts[label_index]));
  LossResult res =
      softmax_ce(logits, SoftLabel::one_hot(label_index, logits.size()));
  res.value *= w;
  for (double& g : res.grad) g *= w;
  return res;
}

LossKind select_loss(std::size_t epoch, const ScheduleConfig& schedule) {
  schedule.validate();
  if (epoch >= schedule.total_epochs)
    throw DomainError("select_loss: epoch out of range");
  return epoch < schedule.switch_epoch ? LossKind::generic_ce
                                       : LossKind::action_aware;
}

}  // namespace brl
