#include "brl/skeleton.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "brl/kernels.hpp"
#include "json.hpp"

namespace brl {

bool SkeletonSequence::finite() const {
  for (double x : data)
    if (!std::isfinite(x)) return false;
  return true;
}

void SkeletonSequence::validate(int num_classes) const {
  if (persons < 1 || frames < 1 || joints < 1 || channels < 2)
    throw ShapeError("SkeletonSequence: require M>=1, T>=1, V>=1, C>=2");
  if (data.size() != persons * frames * joints * channels)
    throw ShapeError("SkeletonSequence: data size does not match dimensions");
  if (person_mask.size() != persons)
    throw ShapeError("SkeletonSequence: person_mask size mismatch");
  if (!finite())
    throw DomainError("SkeletonSequence: non-finite entries");
  if (num_classes >= 0 && (label < 0 || label >= num_classes))
    throw DomainError("SkeletonSequence: label out of range");
}

void SkeletonGraph::validate() const {
  const std::size_t v = num_joints;
  if (parent.size() != v)
    throw DomainError("SkeletonGraph: parent map size mismatch");
  for (auto [a, b] : edges)
    if (a >= v || b >= v) throw DomainError("SkeletonGraph: edge out of range");
  // every joint must reach a root (self-loop) without cycles
  for (std::size_t j = 0; j < v; ++j) {
    std::size_t cur = j;
    std::size_t steps = 0;
    while (parent[cur] != cur) {
      if (parent[cur] >= v) throw DomainError("SkeletonGraph: parent out of range");
      cur = parent[cur];
      if (++steps > v) throw DomainError("SkeletonGraph: parent map has a cycle");
    }
  }
  std::set<std::size_t> up(upper.begin(), upper.end());
  std::set<std::size_t> lo(lower.begin(), lower.end());
  if (up.size() + lo.size() != v)
    throw DomainError("SkeletonGraph: upper/lower must partition the joints");
  for (std::size_t j = 0; j < v; ++j)
    if (up.count(j) == lo.count(j))
      throw DomainError("SkeletonGraph: upper/lower must partition the joints");
  std::set<std::size_t> seen;
  for (auto [l, r] : symmetry_pairs) {
    if (l >= v || r >= v || l == r)
      throw DomainError("SkeletonGraph: bad symmetry pair");
    if (!seen.insert(l).second || !seen.insert(r).second)
      throw DomainError("SkeletonGraph: joint in more than one symmetry pair");
  }
}

bool SkeletonGraph::is_upper(std::size_t v) const {
  for (std::size_t u : upper)
    if (u == v) return true;
  return false;
}

SkeletonGraph SkeletonGraph::from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  SkeletonGraph g;
  g.num_joints = j.at("num_joints").get<std::size_t>();
  for (const auto& e : j.at("edges"))
    g.edges.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>());
  g.parent = j.at("parent").get<std::vector<std::size_t>>();
  for (const auto& p : j.at("symmetry_pairs"))
    g.symmetry_pairs.emplace_back(p.at(0).get<std::size_t>(),
                                  p.at(1).get<std::size_t>());
  g.upper = j.at("upper").get<std::vector<std::size_t>>();
  g.lower = j.at("lower").get<std::vector<std::size_t>>();
  g.validate();
  return g;
}

SkeletonGraph SkeletonGraph::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string SkeletonGraph::to_json_text() const {
  nlohmann::json j;
  j["num_joints"] = num_joints;
  j["edges"] = nlohmann::json::array();
  for (auto [a, b] : edges) j["edges"].push_back({a, b});
  j["parent"] = parent;
  j["symmetry_pairs"] = nlohmann::json::array();
  for (auto [a, b] : symmetry_pairs) j["symmetry_pairs"].push_back({a, b});
  j["upper"] = upper;
  j["lower"] = lower;
  return j.dump(2);
}

void SkeletonGraph::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write graph file: " + path);
  out << to_json_text() << "\n";
}

Modality modality_from_string(const std::string& name) {
  if (name == "joint") return Modality::joint;
  if (name == "bone") return Modality::bone;
  if (name == "skip") return Modality::skip;
  if (name == "joint_motion") return Modality::joint_motion;
  if (name == "bone_motion") return Modality::bone_motion;
  if (name == "skip_motion") return Modality::skip_motion;
  throw DomainError("unknown modality: " + name);
}

std::string modality_name(Modality m) {
  switch (m) {
    case Modality::joint: return "joint";
    case Modality::bone: return "bone";
    case Modality::skip: return "skip";
    case Modality::joint_motion: return "joint_motion";
    case Modality::bone_motion: return "bone_motion";
    case Modality::skip_motion: return "skip_motion";
  }
  throw DomainError("unknown modality");
}

const std::vector<Modality>& all_modalities() {
  static const std::vector<Modality> all = {
      Modality::joint,        Modality::bone,        Modality::skip,
      Modality::joint_motion, Modality::bone_motion, Modality::skip_motion};
  return all;
}

namespace {

void check_graph_match(const SkeletonSequence& seq, const SkeletonGraph& g) {
  if (seq.joints != g.num_joints)
    throw ShapeError("joint count mismatch between sequence and graph");
}

// out[v] = seq[v] - seq[ref(v)] for every person/frame
SkeletonSequence joint_difference(const SkeletonSequence& seq,
                                  const std::vector<std::size_t>& ref) {
  SkeletonSequence out = seq;
  const auto& k = kern::active();
  for (std::size_t m = 0; m < seq.persons; ++m)
    for (std::size_t t = 0; t < seq.frames; ++t)
      for (std::size_t v = 0; v < seq.joints; ++v)
        k.sub(seq.channels, seq.joint_ptr(m, t, v),
              seq.joint_ptr(m, t, ref[v]), out.joint_ptr(m, t, v));
  return out;
}

}  // namespace

SkeletonSequence bone_of(const SkeletonSequence& seq, const SkeletonGraph& g) {
  check_graph_match(seq, g);
  return joint_difference(seq, g.parent);
}

SkeletonSequence skip_of(const SkeletonSequence& seq, const SkeletonGraph& g) {
  check_graph_match(seq, g);
  std::vector<std::size_t> grandparent(g.num_joints);
  for (std::size_t v = 0; v < g.num_joints; ++v)
    grandparent[v] = g.parent[g.parent[v]];
  return joint_difference(seq, grandparent);
}

SkeletonSequence motion_of(const SkeletonSequence& seq) {
  SkeletonSequence out = seq;
  const std::size_t frame_sz = seq.joints * seq.channels;
  const auto& k = kern::active();
  for (std::size_t m = 0; m < seq.persons; ++m) {
    for (std::size_t t = 0; t + 1 < seq.frames; ++t)
      k.sub(frame_sz, seq.joint_ptr(m, t + 1, 0), seq.joint_ptr(m, t, 0),
            out.joint_ptr(m, t, 0));
    // last frame zero-padded so the shape is preserved
    double* last = out.joint_ptr(m, seq.frames - 1, 0);
    std::fill(last, last + frame_sz, 0.0);
  }
  return out;
}

SkeletonSequence derive_modality(const SkeletonSequence& seq,
                                 const SkeletonGraph& g, Modality m) {
  switch (m) {
    case Modality::joint: return seq;
    case Modality::bone: return bone_of(seq, g);
    case Modality::skip: return skip_of(seq, g);
    case Modality::joint_motion: return motion_of(seq);
    case Modality::bone_motion: return motion_of(bone_of(seq, g));
    case Modality::skip_motion: return motion_of(skip_of(seq, g));
  }
  throw DomainError("unknown modality");
}

}  // namespace brl
