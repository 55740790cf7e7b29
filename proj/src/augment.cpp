#include "brl/augment.hpp"

#include <array>
#include <cmath>

namespace brl {

void AugmentConfig::validate() const {
  if (flip_prob < 0.0 || flip_prob > 1.0)
    throw DomainError("augment: flip_prob must be in [0,1]");
  if (rotate_max_deg < 0.0)
    throw DomainError("augment: rotate_max_deg must be >= 0");
  if (!(scale_low > 0.0) || scale_low > scale_high)
    throw DomainError("augment: require 0 < scale_low <= scale_high");
  if (target_frames < 1) throw DomainError("augment: target_frames must be >= 1");
}

SkeletonSequence flip(const SkeletonSequence& seq, const SkeletonGraph& g,
                      double flip_prob, Rng& rng) {
  if (g.symmetry_pairs.empty())
    throw DomainError("flip: graph has no symmetry pairs");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const bool active = coin(rng) < flip_prob;
  if (!active) return seq;
  SkeletonSequence out = seq;
  for (std::size_t m = 0; m < seq.persons; ++m)
    for (std::size_t t = 0; t < seq.frames; ++t) {
      for (auto [l, r] : g.symmetry_pairs)
        for (std::size_t c = 0; c < seq.channels; ++c) {
          out.at(m, t, l, c) = seq.at(m, t, r, c);
          out.at(m, t, r, c) = seq.at(m, t, l, c);
        }
      // lateral axis flips sign for every joint
      for (std::size_t v = 0; v < seq.joints; ++v)
        out.at(m, t, v, 0) = -out.at(m, t, v, 0);
    }
  return out;
}

namespace {

// Rz*Ry*Rx for angles in radians
std::array<std::array<double, 3>, 3> rotation3(double ax, double ay, double az) {
  const double cx = std::cos(ax), sx = std::sin(ax);
  const double cy = std::cos(ay), sy = std::sin(ay);
  const double cz = std::cos(az), sz = std::sin(az);
  return {{{cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx},
           {sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx},
           {-sy, cy * sx, cy * cx}}};
}

}  // namespace

SkeletonSequence rotate(const SkeletonSequence& seq, Rng& rng,
                        double rotate_max_deg) {
  const double theta = rotate_max_deg * M_PI / 180.0;
  std::uniform_real_distribution<double> angle(-theta, theta);
  SkeletonSequence out = seq;
  if (seq.channels >= 3) {
    const double ax = angle(rng), ay = angle(rng), az = angle(rng);
    const auto r = rotation3(ax, ay, az);
    for (std::size_t m = 0; m < seq.persons; ++m)
      for (std::size_t t = 0; t < seq.frames; ++t)
        for (std::size_t v = 0; v < seq.joints; ++v) {
          const double* p = seq.joint_ptr(m, t, v);
          double* q = out.joint_ptr(m, t, v);
          for (int i = 0; i < 3; ++i)
            q[i] = r[i][0] * p[0] + r[i][1] * p[1] + r[i][2] * p[2];
        }
  } else {
    const double a = angle(rng);
    const double ca = std::cos(a), sa = std::sin(a);
    for (std::size_t m = 0; m < seq.persons; ++m)
      for (std::size_t t = 0; t < seq.frames; ++t)
        for (std::size_t v = 0; v < seq.joints; ++v) {
          const double* p = seq.joint_ptr(m, t, v);
          double* q = out.joint_ptr(m, t, v);
          q[0] = ca * p[0] - sa * p[1];
          q[1] = sa * p[0] + ca * p[1];
        }
  }
  return out;
}

SkeletonSequence scale(const SkeletonSequence& seq, Rng& rng, double low,
                       double high) {
  std::uniform_real_distribution<double> dist(low, high);
  const double s = dist(rng);
  SkeletonSequence out = seq;
  for (double& x : out.data) x *= s;
  return out;
}

std::vector<std::size_t> uniform_sample_indices(std::size_t T, std::size_t L,
                                                SampleMode mode, Rng& rng) {
  std::vector<std::size_t> idx(L);
  for (std::size_t s = 0; s < L; ++s) {
    const std::size_t lo = s * T / L;
    const std::size_t hi = (s + 1) * T / L;  // exclusive
    if (hi > lo) {
      if (mode == SampleMode::center) {
        idx[s] = lo + (hi - lo) / 2;
      } else {
        std::uniform_int_distribution<std::size_t> pick(lo, hi - 1);
        idx[s] = pick(rng);
      }
    } else {
      idx[s] = std::min(lo, T - 1);  // empty split: frames repeat when T < L
    }
  }
  return idx;
}

SkeletonSequence uniform_sample(const SkeletonSequence& seq, std::size_t L,
                                SampleMode mode, Rng& rng) {
  if (L < 1) throw DomainError("uniform_sample: L must be >= 1");
  const auto idx = uniform_sample_indices(seq.frames, L, mode, rng);
  SkeletonSequence out(seq.persons, L, seq.joints, seq.channels, seq.label);
  out.person_mask = seq.person_mask;
  const std::size_t frame_sz = seq.joints * seq.channels;
  for (std::size_t m = 0; m < seq.persons; ++m)
    for (std::size_t s = 0; s < L; ++s) {
      const double* src = seq.joint_ptr(m, idx[s], 0);
      std::copy(src, src + frame_sz, out.joint_ptr(m, s, 0));
    }
  return out;
}

}  // namespace brl
