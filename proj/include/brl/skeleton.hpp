#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace brl {

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense motion tensor: persons x frames x joints x channels, row-major.
struct SkeletonSequence {
  std::size_t persons = 0;  // M
  std::size_t frames = 0;   // T
  std::size_t joints = 0;   // V
  std::size_t channels = 0; // C
  std::vector<double> data;
  int label = 0;
  std::vector<std::uint8_t> person_mask;  // 1 = body present

  SkeletonSequence() = default;
  SkeletonSequence(std::size_t m, std::size_t t, std::size_t v, std::size_t c,
                   int lbl = 0)
      : persons(m), frames(t), joints(v), channels(c),
        data(m * t * v * c, 0.0), label(lbl), person_mask(m, 1) {}

  std::size_t size() const { return data.size(); }

  double& at(std::size_t m, std::size_t t, std::size_t v, std::size_t c) {
    return data[((m * frames + t) * joints + v) * channels + c];
  }
  double at(std::size_t m, std::size_t t, std::size_t v, std::size_t c) const {
    return data[((m * frames + t) * joints + v) * channels + c];
  }

  double* joint_ptr(std::size_t m, std::size_t t, std::size_t v) {
    return data.data() + ((m * frames + t) * joints + v) * channels;
  }
  const double* joint_ptr(std::size_t m, std::size_t t, std::size_t v) const {
    return data.data() + ((m * frames + t) * joints + v) * channels;
  }

  bool finite() const;
  void validate(int num_classes = -1) const;
};

// Joint topology: edges, parent map (root maps to itself), left/right
// symmetry pairs, and the upper/lower body partition.
struct SkeletonGraph {
  std::size_t num_joints = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::size_t> parent;
  std::vector<std::pair<std::size_t, std::size_t>> symmetry_pairs;
  std::vector<std::size_t> upper;
  std::vector<std::size_t> lower;

  void validate() const;
  bool is_upper(std::size_t v) const;

  static SkeletonGraph from_json_text(const std::string& text);
  static SkeletonGraph load(const std::string& path);
  std::string to_json_text() const;
  void save(const std::string& path) const;
};

enum class Modality {
  joint,
  bone,
  skip,
  joint_motion,
  bone_motion,
  skip_motion,
};

Modality modality_from_string(const std::string& name);
std::string modality_name(Modality m);
const std::vector<Modality>& all_modalities();

SkeletonSequence bone_of(const SkeletonSequence& seq, const SkeletonGraph& g);
SkeletonSequence skip_of(const SkeletonSequence& seq, const SkeletonGraph& g);
SkeletonSequence motion_of(const SkeletonSequence& seq);
SkeletonSequence derive_modality(const SkeletonSequence& seq,
                                 const SkeletonGraph& g, Modality m);

}  // namespace brl
