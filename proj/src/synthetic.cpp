#include "brl/synthetic.hpp"

#include <array>
#include <cmath>
#include <filesystem>

#include "brl/io.hpp"

namespace brl {

void SyntheticSpec::validate() const {
  if (num_classes < 1) throw DomainError("synthetic: num_classes must be >= 1");
  if (joints < 5) throw DomainError("synthetic: need at least 5 joints");
  if (frames < 2) throw DomainError("synthetic: need at least 2 frames");
  if (persons < 1) throw DomainError("synthetic: persons must be >= 1");
  if (train_per_class < 1 || val_per_class < 1)
    throw DomainError("synthetic: per-class sample counts must be >= 1");
  if (noise < 0.0) throw DomainError("synthetic: noise must be >= 0");
  if (phase_jitter < 0.0) throw DomainError("synthetic: phase_jitter must be >= 0");
}

namespace {

struct Chain {
  std::size_t attach;            // joint the chain hangs from
  std::array<double, 3> dir;     // growth direction of the rest pose
  std::vector<std::size_t> joints;
};

// Rest-pose layout shared by the graph and the sample generator.
struct Layout {
  std::vector<std::size_t> parent;
  std::vector<std::array<double, 3>> rest;
  std::vector<double> mobility;  // distal joints move more
  std::vector<Chain> chains;     // spine, arm L/R, leg L/R
};

Layout build_layout(std::size_t v) {
  Layout lay;
  lay.parent.assign(v, 0);
  lay.rest.assign(v, {0.0, 0.0, 0.0});
  lay.mobility.assign(v, 0.0);
  lay.parent[0] = 0;  // pelvis root

  // distribute the remaining joints over five chains, spine first
  std::array<std::size_t, 5> len{};  // spine, armL, armR, legL, legR
  std::size_t rest_joints = v - 1;
  for (std::size_t i = 0; rest_joints > 0; i = (i + 1) % 5) {
    // keep left/right chains the same length when possible
    if ((i == 1 || i == 3) && rest_joints < 2) i = 0;
    ++len[i];
    --rest_joints;
    if (i == 1 || i == 3) {  // mirror immediately
      if (rest_joints == 0) break;
      ++len[i + 1];
      --rest_joints;
      i = i + 1;
    }
  }

  lay.chains.resize(5);
  lay.chains[0] = {0, {0.0, 1.0, 0.0}, {}};
  std::size_t next = 1;
  auto grow = [&](Chain& ch, std::size_t n) {
    std::size_t prev = ch.attach;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t id = next++;
      lay.parent[id] = prev;
      for (int d = 0; d < 3; ++d)
        lay.rest[id][d] = lay.rest[prev][d] + 0.3 * ch.dir[d];
      lay.mobility[id] = static_cast<double>(j + 1) / static_cast<double>(n);
      ch.joints.push_back(id);
      prev = id;
    }
  };
  grow(lay.chains[0], len[0]);
  const std::size_t neck = len[0] > 0 ? lay.chains[0].joints.back() : 0;
  lay.chains[1] = {neck, {-1.0, 0.0, 0.1}, {}};
  lay.chains[2] = {neck, {1.0, 0.0, 0.1}, {}};
  lay.chains[3] = {0, {-0.4, -1.0, 0.0}, {}};
  lay.chains[4] = {0, {0.4, -1.0, 0.0}, {}};
  grow(lay.chains[1], len[1]);
  grow(lay.chains[2], len[2]);
  grow(lay.chains[3], len[3]);
  grow(lay.chains[4], len[4]);
  return lay;
}

}  // namespace

SkeletonGraph synthetic_graph(std::size_t joints) {
  const Layout lay = build_layout(joints);
  SkeletonGraph g;
  g.num_joints = joints;
  g.parent = lay.parent;
  for (std::size_t j = 1; j < joints; ++j) g.edges.emplace_back(lay.parent[j], j);
  auto pair_up = [&](const Chain& l, const Chain& r) {
    for (std::size_t i = 0; i < std::min(l.joints.size(), r.joints.size()); ++i)
      g.symmetry_pairs.emplace_back(l.joints[i], r.joints[i]);
  };
  pair_up(lay.chains[1], lay.chains[2]);
  pair_up(lay.chains[3], lay.chains[4]);
  // upper body: spine and arms; lower body: pelvis and legs
  for (std::size_t j : lay.chains[0].joints) g.upper.push_back(j);
  for (std::size_t j : lay.chains[1].joints) g.upper.push_back(j);
  for (std::size_t j : lay.chains[2].joints) g.upper.push_back(j);
  g.lower.push_back(0);
  for (std::size_t j : lay.chains[3].joints) g.lower.push_back(j);
  for (std::size_t j : lay.chains[4].joints) g.lower.push_back(j);
  g.validate();
  return g;
}

SkeletonSequence synthesize_sample(const SyntheticSpec& spec,
                                   const SkeletonGraph& g, int cls,
                                   std::size_t index, bool val_split) {
  spec.validate();
  const Layout lay = build_layout(spec.joints);
  const double freq = spec.base_frequency + spec.frequency_step * cls;
  const double amp = spec.base_amplitude + spec.amplitude_step * (cls % 4);

  Rng rng = make_rng(derive_seed(spec.seed, (val_split ? 1u : 0u) * 1000003u + cls,
                                 index));
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const double delta = spec.phase_jitter * uni(rng);  // per-sample phase
  std::normal_distribution<double> gauss(0.0, 1.0);

  SkeletonSequence seq(spec.persons, spec.frames, spec.joints, 3, cls);
  for (std::size_t m = 0; m < spec.persons; ++m) {
    const double person_off = 0.8 * static_cast<double>(m);
    for (std::size_t v = 0; v < spec.joints; ++v) {
      // class-specific per-joint phase and displacement direction
      Rng jrng = make_rng(derive_seed(spec.seed ^ 0x5e21u, cls, v));
      std::uniform_real_distribution<double> juni(-1.0, 1.0);
      const double phase = M_PI * juni(jrng);
      std::array<double, 3> dir{juni(jrng), juni(jrng), juni(jrng)};
      const double norm = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] +
                                    dir[2] * dir[2]) + 1e-12;
      for (double& d : dir) d /= norm;
      for (std::size_t t = 0; t < spec.frames; ++t) {
        const double arg = 2.0 * M_PI * freq * static_cast<double>(t) /
                               static_cast<double>(spec.frames) +
                           phase + delta;
        const double wav = amp * lay.mobility[v] * std::sin(arg);
        for (int d = 0; d < 3; ++d)
          seq.at(m, t, v, d) = lay.rest[v][d] + wav * dir[d] +
                               (d == 0 ? person_off : 0.0) +
                               spec.noise * gauss(rng);
      }
    }
  }
  return seq;
}

SyntheticOutput generate_synthetic(const SyntheticSpec& spec,
                                   const std::string& dir) {
  spec.validate();
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  fs::create_directories(fs::path(dir) / "samples");
  const SkeletonGraph g = synthetic_graph(spec.joints);

  SyntheticOutput out;
  out.graph_path = (fs::path(dir) / "graph.json").string();
  g.save(out.graph_path);

  auto emit_split = [&](bool val) {
    DatasetManifest m;
    m.num_classes = spec.num_classes;
    m.split = val ? "val" : "train";
    const std::size_t per = val ? spec.val_per_class : spec.train_per_class;
    for (int c = 0; c < spec.num_classes; ++c)
      for (std::size_t i = 0; i < per; ++i) {
        const std::string rel = "samples/" + std::string(val ? "val" : "train") +
                                "_c" + std::to_string(c) + "_" +
                                std::to_string(i) + ".skl";
        save_sequence((fs::path(dir) / rel).string(),
                      synthesize_sample(spec, g, c, i, val));
        m.entries.push_back({rel, c});
      }
    return m;
  };
  out.train_manifest_path = (fs::path(dir) / "train_manifest.json").string();
  emit_split(false).save(out.train_manifest_path);
  out.val_manifest_path = (fs::path(dir) / "val_manifest.json").string();
  emit_split(true).save(out.val_manifest_path);
  return out;
}

}  // namespace brl
