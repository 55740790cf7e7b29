#include "brl/longtail.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace brl {

void DatasetManifest::validate() const {
  if (num_classes < 1) throw DomainError("manifest: num_classes must be >= 1");
  if (entries.empty()) throw DomainError("manifest: entries must be non-empty");
  if (split != "train" && split != "val")
    throw DomainError("manifest: split must be train or val");
  for (const auto& e : entries)
    if (e.label < 0 || e.label >= num_classes)
      throw DomainError("manifest: label out of range for " + e.path);
}

DatasetManifest DatasetManifest::from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  DatasetManifest m;
  m.num_classes = j.at("num_classes").get<int>();
  m.split = j.value("split", "train");
  for (const auto& e : j.at("entries"))
    m.entries.push_back({e.at("path").get<std::string>(), e.at("label").get<int>()});
  m.validate();
  return m;
}

DatasetManifest DatasetManifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string DatasetManifest::to_json_text() const {
  nlohmann::json j;
  j["num_classes"] = num_classes;
  j["split"] = split;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : entries)
    j["entries"].push_back({{"path", e.path}, {"label", e.label}});
  return j.dump(2);
}

void DatasetManifest::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  out << to_json_text() << "\n";
}

ClassHistogram ClassHistogram::from_counts(std::vector<std::size_t> counts) {
  if (counts.empty()) throw DomainError("histogram: no classes");
  for (std::size_t n : counts)
    if (n == 0) throw DomainError("histogram: empty class");
  ClassHistogram h;
  h.counts = std::move(counts);
  h.n_min = *std::min_element(h.counts.begin(), h.counts.end());
  h.n_max = *std::max_element(h.counts.begin(), h.counts.end());
  std::vector<std::size_t> sorted = h.counts;
  std::sort(sorted.begin(), sorted.end());
  h.n_median = sorted[sorted.size() / 2];
  return h;
}

ClassHistogram ClassHistogram::of(const DatasetManifest& m) {
  std::vector<std::size_t> counts(m.num_classes, 0);
  for (const auto& e : m.entries) counts[e.label]++;
  return from_counts(std::move(counts));
}

std::size_t ClassHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

std::vector<std::size_t> exponential_profile(std::size_t num_classes,
                                             std::size_t max_per_class,
                                             double ratio) {
  if (ratio < 1.0) throw DomainError("exponential_profile: ratio must be >= 1");
  if (num_classes == 0) throw DomainError("exponential_profile: no classes");
  if (num_classes == 1) return {max_per_class};
  std::vector<std::size_t> target(num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) {
    const double exact =
        max_per_class *
        std::pow(ratio, -static_cast<double>(c) / (num_classes - 1));
    target[c] = static_cast<std::size_t>(std::floor(exact + 0.5));
  }
  return target;
}

TruncateResult truncate_dataset(const DatasetManifest& manifest,
                                const LongTailSpec& spec,
                                ClassOrderPolicy policy) {
  manifest.validate();
  if (manifest.split != "train")
    throw DomainError("truncate_dataset: only the train split may be truncated");
  if (spec.imbalance_ratio < 1.0)
    throw DomainError("truncate_dataset: imbalance_ratio must be >= 1");
  if (spec.max_per_class / spec.imbalance_ratio < 1.0)
    throw DomainError("truncate_dataset: tail target below one sample");

  const std::size_t num_classes = manifest.num_classes;
  auto target = exponential_profile(num_classes, spec.max_per_class,
                                    spec.imbalance_ratio);

  // Which class takes which slot of the decay profile.
  std::vector<std::size_t> order(num_classes);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(spec.seed);
  if (policy == ClassOrderPolicy::random_permutation)
    std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < manifest.entries.size(); ++i)
    by_class[manifest.entries[i].label].push_back(i);
  for (std::size_t c = 0; c < num_classes; ++c)
    if (by_class[c].empty())
      throw DomainError("truncate_dataset: class " + std::to_string(c) +
                        " has no samples");

  TruncateResult res;
  res.manifest.num_classes = manifest.num_classes;
  res.manifest.split = "train";
  std::vector<std::size_t> counts(num_classes, 0);
  for (std::size_t slot = 0; slot < num_classes; ++slot) {
    const std::size_t c = order[slot];
    auto& pool = by_class[c];
    std::size_t want = target[slot];
    if (want > pool.size()) {
      want = pool.size();
      res.clamped_classes.push_back(static_cast<int>(c));
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<std::size_t> keep(pool.begin(), pool.begin() + want);
    std::sort(keep.begin(), keep.end());
    for (std::size_t idx : keep) res.manifest.entries.push_back(manifest.entries[idx]);
    counts[c] = want;
  }
  res.histogram = ClassHistogram::from_counts(std::move(counts));
  return res;
}

ShotGroups shot_groups(const ClassHistogram& hist) {
  ShotGroups g;
  for (std::size_t c = 0; c < hist.counts.size(); ++c) {
    const std::size_t n = hist.counts[c];
    if (n > kManyShotThreshold)
      g.many.push_back(static_cast<int>(c));
    else if (n < kFewShotThreshold)
      g.few.push_back(static_cast<int>(c));
    else
      g.medium.push_back(static_cast<int>(c));
  }
  return g;
}

double imbalance_ratio(const ClassHistogram& hist) {
  return static_cast<double>(hist.n_max) / static_cast<double>(hist.n_min);
}

}  // namespace brl
