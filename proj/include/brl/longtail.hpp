#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brl/rng.hpp"
#include "brl/skeleton.hpp"

namespace brl {

struct ManifestEntry {
  std::string path;
  int label = 0;
};

struct DatasetManifest {
  int num_classes = 0;
  std::string split = "train";  // "train" | "val"
  std::vector<ManifestEntry> entries;

  void validate() const;

  static DatasetManifest from_json_text(const std::string& text);
  static DatasetManifest load(const std::string& path);
  std::string to_json_text() const;
  void save(const std::string& path) const;
};

struct ClassHistogram {
  std::vector<std::size_t> counts;  // n_y per class
  std::size_t n_min = 0;
  std::size_t n_max = 0;
  std::size_t n_median = 0;

  static ClassHistogram from_counts(std::vector<std::size_t> counts);
  static ClassHistogram of(const DatasetManifest& m);
  std::size_t total() const;
};

struct LongTailSpec {
  std::size_t max_per_class = 600;
  double imbalance_ratio = 100.0;
  std::uint64_t seed = 0;
};

enum class ClassOrderPolicy { by_label, random_permutation };

// target[c] = round(max * ratio^(-c/(C-1))), round half up.
std::vector<std::size_t> exponential_profile(std::size_t num_classes,
                                             std::size_t max_per_class,
                                             double ratio);

struct TruncateResult {
  DatasetManifest manifest;
  ClassHistogram histogram;
  std::vector<int> clamped_classes;  // targets clamped to availability
};

TruncateResult truncate_dataset(const DatasetManifest& manifest,
                                const LongTailSpec& spec,
                                ClassOrderPolicy policy = ClassOrderPolicy::by_label);

struct ShotGroups {
  std::vector<int> many;    // n > 100
  std::vector<int> medium;  // 20 <= n <= 100
  std::vector<int> few;     // n < 20
};

constexpr std::size_t kManyShotThreshold = 100;
constexpr std::size_t kFewShotThreshold = 20;

ShotGroups shot_groups(const ClassHistogram& hist);

double imbalance_ratio(const ClassHistogram& hist);

}  // namespace brl
