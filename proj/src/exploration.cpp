#include "brl/exploration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace brl {

void MixupConfig::validate() const {
  if (!(k > 1.0)) throw DomainError("mixup: k must be > 1");
  if (!(selection_rate > 0.0) || selection_rate > 1.0)
    throw DomainError("mixup: selection_rate must be in (0,1]");
}

void ReverseSamplerConfig::validate() const {
  if (exponent < 0.0) throw DomainError("reverse sampler: exponent must be >= 0");
  if (cap < 1) throw DomainError("reverse sampler: cap must be >= 1");
}

SoftLabel SoftLabel::one_hot(int label, int num_classes) {
  SoftLabel l;
  l.probs.assign(num_classes, 0.0);
  l.probs[label] = 1.0;
  return l;
}

void SoftLabel::validate() const {
  double sum = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw DomainError("soft label: negative entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw DomainError("soft label: probabilities must sum to 1");
}

double lambda_y(std::size_t n_i, std::size_t n_j, double lambda_x, double k) {
  const double ratio = static_cast<double>(n_i) / static_cast<double>(n_j);
  if (ratio > k) return 0.0;
  if (ratio <= 1.0 / k) return 1.0;
  return lambda_x;
}

double lambda_x_of(const SkeletonGraph& g) {
  return static_cast<double>(g.upper.size()) / static_cast<double>(g.num_joints);
}

std::pair<SkeletonSequence, SoftLabel> partial_mixup(
    const SkeletonSequence& sample_i, const SkeletonSequence& sample_j,
    const SkeletonGraph& g, const ClassHistogram& hist, int num_classes,
    const MixupConfig& cfg) {
  cfg.validate();
  if (sample_i.persons != sample_j.persons ||
      sample_i.frames != sample_j.frames ||
      sample_i.joints != sample_j.joints ||
      sample_i.channels != sample_j.channels)
    throw ShapeError("partial_mixup: sample shapes differ");
  if (sample_i.joints != g.num_joints)
    throw ShapeError("partial_mixup: graph partition does not match samples");

  SkeletonSequence mixed = sample_i;
  const std::size_t ch = sample_i.channels;
  for (std::size_t m = 0; m < mixed.persons; ++m)
    for (std::size_t t = 0; t < mixed.frames; ++t)
      for (std::size_t v : g.lower) {
        const double* src = sample_j.joint_ptr(m, t, v);
        std::copy(src, src + ch, mixed.joint_ptr(m, t, v));
      }

  const double lx = lambda_x_of(g);
  const double ly = lambda_y(hist.counts[sample_i.label],
                             hist.counts[sample_j.label], lx, cfg.k);
  SoftLabel label;
  label.probs.assign(num_classes, 0.0);
  label.probs[sample_i.label] += ly;
  label.probs[sample_j.label] += 1.0 - ly;
  return {std::move(mixed), std::move(label)};
}

std::vector<std::pair<std::size_t, std::size_t>> select_mixup_pairs(
    std::size_t batch_size, double selection_rate, Rng& rng) {
  const std::size_t count = static_cast<std::size_t>(
      std::floor(batch_size * selection_rate));
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (count == 0 || batch_size < 2) return pairs;
  std::vector<std::size_t> targets(batch_size);
  std::iota(targets.begin(), targets.end(), 0);
  std::shuffle(targets.begin(), targets.end(), rng);
  targets.resize(count);
  std::uniform_int_distribution<std::size_t> pick(0, batch_size - 2);
  for (std::size_t t : targets) {
    std::size_t partner = pick(rng);
    if (partner >= t) ++partner;  // uniform over the batch minus the target
    pairs.emplace_back(t, partner);
  }
  return pairs;
}

std::vector<std::size_t> reverse_repeat_factors(const ClassHistogram& hist,
                                                const ReverseSamplerConfig& cfg) {
  cfg.validate();
  std::vector<std::size_t> factors(hist.counts.size(), 1);
  for (std::size_t c = 0; c < hist.counts.size(); ++c) {
    if (hist.counts[c] >= hist.n_median) continue;
    const double raw = std::pow(
        static_cast<double>(hist.n_median) / hist.counts[c], cfg.exponent);
    const auto rounded = static_cast<std::size_t>(std::floor(raw + 0.5));
    factors[c] = std::min(cfg.cap, std::max<std::size_t>(1, rounded));
  }
  return factors;
}

std::vector<std::size_t> build_epoch_index(const DatasetManifest& manifest,
                                           const std::vector<std::size_t>& factors,
                                           Rng& rng) {
  if (factors.size() != static_cast<std::size_t>(manifest.num_classes))
    throw DomainError("build_epoch_index: factors must cover all classes");
  std::vector<std::size_t> index;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const std::size_t r = factors[manifest.entries[i].label];
    for (std::size_t j = 0; j < r; ++j) index.push_back(i);
  }
  std::shuffle(index.begin(), index.end(), rng);
  return index;
}

}  // namespace brl
