#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "brl/longtail.hpp"

using namespace brl;

namespace {

DatasetManifest balanced_manifest(int classes, std::size_t per_class) {
  DatasetManifest m;
  m.num_classes = classes;
  for (int c = 0; c < classes; ++c)
    for (std::size_t i = 0; i < per_class; ++i)
      m.entries.push_back({"c" + std::to_string(c) + "_" + std::to_string(i), c});
  return m;
}

}  // namespace

TEST_CASE("exponential profile endpoints and interior value") {
  CHECK(exponential_profile(2, 600, 100.0) == std::vector<std::size_t>{600, 6});
  const auto p = exponential_profile(60, 600, 100.0);
  CHECK(p[0] == 600);
  CHECK(p[59] == 6);
  CHECK(p[1] == 555);  // 600 * 100^(-1/59) = 554.9
  for (std::size_t c = 1; c < p.size(); ++c) CHECK(p[c] <= p[c - 1]);
  CHECK(exponential_profile(1, 300, 100.0) == std::vector<std::size_t>{300});
  CHECK_THROWS_AS(exponential_profile(4, 100, 0.5), DomainError);
}

TEST_CASE("truncate_dataset follows the profile and is seed-deterministic") {
  const auto m = balanced_manifest(2, 600);
  LongTailSpec spec{600, 100.0, 42};
  const auto r1 = truncate_dataset(m, spec);
  CHECK(r1.histogram.counts == std::vector<std::size_t>{600, 6});
  CHECK(r1.clamped_classes.empty());
  const auto r2 = truncate_dataset(m, spec);
  CHECK(r1.manifest.to_json_text() == r2.manifest.to_json_text());

  LongTailSpec other{600, 100.0, 43};
  const auto r3 = truncate_dataset(m, other);
  CHECK(r3.histogram.counts == r1.histogram.counts);
  CHECK(r3.manifest.to_json_text() != r1.manifest.to_json_text());
}

TEST_CASE("truncate_dataset clamps to availability and flags it") {
  DatasetManifest m;
  m.num_classes = 2;
  for (std::size_t i = 0; i < 600; ++i)
    m.entries.push_back({"a" + std::to_string(i), 0});
  for (std::size_t i = 0; i < 4; ++i)
    m.entries.push_back({"b" + std::to_string(i), 1});
  LongTailSpec spec{600, 100.0, 0};
  const auto r = truncate_dataset(m, spec);
  CHECK(r.histogram.counts == std::vector<std::size_t>{600, 4});
  CHECK(r.clamped_classes == std::vector<int>{1});
}

TEST_CASE("truncate_dataset refuses val splits and bad specs") {
  auto m = balanced_manifest(2, 10);
  m.split = "val";
  CHECK_THROWS_AS(truncate_dataset(m, LongTailSpec{10, 2.0, 0}), DomainError);
  m.split = "train";
  CHECK_THROWS_AS(truncate_dataset(m, LongTailSpec{10, 0.5, 0}), DomainError);
  CHECK_THROWS_AS(truncate_dataset(m, LongTailSpec{10, 100.0, 0}), DomainError);
}

TEST_CASE("random permutation policy reassigns the head class") {
  const auto m = balanced_manifest(6, 50);
  LongTailSpec spec{50, 10.0, 9};
  const auto by_label = truncate_dataset(m, spec, ClassOrderPolicy::by_label);
  CHECK(by_label.histogram.counts[0] == 50);
  const auto shuffled =
      truncate_dataset(m, spec, ClassOrderPolicy::random_permutation);
  // same multiset of counts, possibly different class assignment
  auto a = by_label.histogram.counts;
  auto b = shuffled.histogram.counts;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);
}

TEST_CASE("shot group thresholds at 100 and 20") {
  const auto h = ClassHistogram::from_counts({600, 100, 20, 19});
  const auto g = shot_groups(h);
  CHECK(g.many == std::vector<int>{0});
  CHECK(g.medium == std::vector<int>{1, 2});
  CHECK(g.few == std::vector<int>{3});

  const auto uniform = shot_groups(ClassHistogram::from_counts({50, 50, 50}));
  CHECK(uniform.many.empty());
  CHECK(uniform.few.empty());
  CHECK(uniform.medium.size() == 3);
}

TEST_CASE("shot groups of the 60-class profile match a brute-force scan") {
  const auto p = exponential_profile(60, 600, 100.0);
  const auto g = shot_groups(ClassHistogram::from_counts(p));
  std::size_t many = 0, medium = 0, few = 0;
  for (std::size_t n : p) {
    if (n > 100) ++many;
    else if (n < 20) ++few;
    else ++medium;
  }
  CHECK(g.many.size() == many);
  CHECK(g.medium.size() == medium);
  CHECK(g.few.size() == few);
  CHECK(many + medium + few == 60);
}

TEST_CASE("imbalance ratio") {
  CHECK(imbalance_ratio(ClassHistogram::from_counts({600, 6})) ==
        doctest::Approx(100.0));
  CHECK(imbalance_ratio(ClassHistogram::from_counts({7, 7, 7})) ==
        doctest::Approx(1.0));
  CHECK(imbalance_ratio(ClassHistogram::from_counts({100, 10})) ==
        doctest::Approx(10.0));
}

TEST_CASE("manifest json round trip and validation") {
  const auto m = balanced_manifest(3, 2);
  const auto m2 = DatasetManifest::from_json_text(m.to_json_text());
  CHECK(m2.num_classes == 3);
  CHECK(m2.entries.size() == 6);
  CHECK(m2.entries[5].label == 2);

  DatasetManifest bad = m;
  bad.entries[0].label = 7;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("histogram statistics") {
  const auto h = ClassHistogram::from_counts({5, 9, 2, 7});
  CHECK(h.n_min == 2);
  CHECK(h.n_max == 9);
  CHECK(h.total() == 23);
  CHECK_THROWS_AS(ClassHistogram::from_counts({3, 0}), DomainError);
}
