#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "brl/synthetic.hpp"
#include "brl/train.hpp"
#include "test_util.hpp"

using namespace brl;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("brl_train_" + tag + "_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

SyntheticSpec tiny_spec() {
  SyntheticSpec spec;
  spec.num_classes = 3;
  spec.joints = 9;
  spec.frames = 12;
  spec.train_per_class = 6;
  spec.val_per_class = 4;
  spec.seed = 21;
  return spec;
}

TrainConfig tiny_train_config(const SyntheticOutput& data,
                              const std::string& out_dir) {
  TrainConfig cfg;
  cfg.train_manifest = data.train_manifest_path;
  cfg.graph_path = data.graph_path;
  cfg.augment.target_frames = 8;
  cfg.augment.rotate_max_deg = 5.0;
  cfg.block_channels = {8, 8};
  cfg.temporal_kernel = 3;
  cfg.temporal_strides = {1, 2};
  cfg.batch_size = 8;
  cfg.base_lr = 0.05;
  cfg.schedule.total_epochs = 4;
  cfg.schedule.switch_epoch = 3;
  cfg.seed = 7;
  cfg.out_dir = out_dir;
  return cfg;
}

double l2_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(d);
}

}  // namespace

TEST_CASE("synthetic graph is a valid partitioned tree") {
  for (std::size_t joints : {5, 9, 15, 25}) {
    const auto g = synthetic_graph(joints);
    g.validate();
    CHECK(g.num_joints == joints);
    CHECK(g.upper.size() + g.lower.size() == joints);
    CHECK(!g.symmetry_pairs.empty());
    CHECK(!g.upper.empty());
    CHECK(!g.lower.empty());
  }
}

TEST_CASE("synthesize_sample is deterministic and distinguishes arguments") {
  const auto spec = tiny_spec();
  const auto g = synthetic_graph(spec.joints);
  const auto a = synthesize_sample(spec, g, 1, 3, false);
  const auto b = synthesize_sample(spec, g, 1, 3, false);
  CHECK(a.data == b.data);
  CHECK(a.label == 1);
  CHECK(a.frames == spec.frames);
  CHECK(a.joints == spec.joints);
  CHECK(synthesize_sample(spec, g, 1, 4, false).data != a.data);
  CHECK(synthesize_sample(spec, g, 2, 3, false).data != a.data);
  CHECK(synthesize_sample(spec, g, 1, 3, true).data != a.data);
}

TEST_CASE("noise-free classes collapse to one centroid each, well separated") {
  auto spec = tiny_spec();
  spec.noise = 0.0;
  spec.phase_jitter = 0.0;
  const auto g = synthetic_graph(spec.joints);
  std::vector<SkeletonSequence> centroids;
  for (int c = 0; c < spec.num_classes; ++c) {
    const auto first = synthesize_sample(spec, g, c, 0, false);
    for (std::size_t i = 1; i < 4; ++i)
      CHECK(l2_diff(synthesize_sample(spec, g, c, i, false).data, first.data) ==
            doctest::Approx(0.0).epsilon(1e-12));
    centroids.push_back(first);
  }
  // nearest-centroid on noisy (but jitter-free) samples recovers the label
  auto noisy = tiny_spec();
  noisy.phase_jitter = 0.0;
  std::size_t correct = 0, total = 0;
  for (int c = 0; c < noisy.num_classes; ++c)
    for (std::size_t i = 0; i < 5; ++i) {
      const auto s = synthesize_sample(noisy, g, c, i, true);
      int best = -1;
      double best_d = 1e300;
      for (int k = 0; k < noisy.num_classes; ++k) {
        const double d = l2_diff(s.data, centroids[k].data);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      correct += best == c;
      ++total;
    }
  CHECK(double(correct) / double(total) > 0.9);
}

TEST_CASE("generate_synthetic produces a loadable dataset") {
  TempDir dir("gen");
  const auto spec = tiny_spec();
  const auto out = generate_synthetic(spec, dir.str());
  const auto train = LoadedDataset::load(out.train_manifest_path);
  const auto val = LoadedDataset::load(out.val_manifest_path);
  CHECK(train.manifest.split == "train");
  CHECK(val.manifest.split == "val");
  CHECK(train.sequences.size() == 3 * 6);
  CHECK(val.sequences.size() == 3 * 4);
  const auto hist = ClassHistogram::of(train.manifest);
  CHECK(hist.counts == std::vector<std::size_t>{6, 6, 6});
  for (std::size_t i = 0; i < train.sequences.size(); ++i)
    CHECK(train.sequences[i].label == train.manifest.entries[i].label);
  const auto g = SkeletonGraph::load(out.graph_path);
  CHECK(g.num_joints == spec.joints);
}

TEST_CASE("training runs, logs the schedule, and is reproducible") {
  TempDir data_dir("data");
  const auto out = generate_synthetic(tiny_spec(), data_dir.str());

  TempDir run1("run1"), run2("run2");
  auto cfg = tiny_train_config(out, run1.str());
  const auto r1 = train(cfg);
  REQUIRE(r1.epochs.size() == 4);
  CHECK(r1.epochs[0].loss_kind == LossKind::generic_ce);
  CHECK(r1.epochs[2].loss_kind == LossKind::generic_ce);
  CHECK(r1.epochs[3].loss_kind == LossKind::action_aware);
  CHECK(r1.epochs[0].class_loss_weights == std::vector<double>(3, 1.0));
  // balanced counts of 6: every class gets gamma(0.99, 6), not 1
  const double gamma6 = (1.0 - 0.99) / (1.0 - std::pow(0.99, 6.0));
  CHECK(r1.epochs[3].class_loss_weights[0] == doctest::Approx(gamma6));
  CHECK(r1.epochs[3].class_loss_weights[2] == doctest::Approx(gamma6));
  CHECK(r1.epochs[0].lr == doctest::Approx(0.05));
  CHECK(fs::exists(r1.checkpoint_path));

  cfg.out_dir = run2.str();
  const auto r2 = train(cfg);
  std::ifstream f1(r1.checkpoint_path, std::ios::binary);
  std::ifstream f2(r2.checkpoint_path, std::ios::binary);
  const std::string b1((std::istreambuf_iterator<char>(f1)), {});
  const std::string b2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(b1 == b2);

  // a different seed changes the parameters
  cfg.seed = 8;
  TempDir run3("run3");
  cfg.out_dir = run3.str();
  const auto r3 = train(cfg);
  CHECK(r3.checkpoint.params.values[0].v != r1.checkpoint.params.values[0].v);
}

TEST_CASE("a small balanced problem is overfit to near-zero loss") {
  TempDir data_dir("overfit");
  auto spec = tiny_spec();
  spec.noise = 0.005;
  spec.phase_jitter = 0.0;
  const auto out = generate_synthetic(spec, data_dir.str());

  TempDir run("overfit_run");
  auto cfg = tiny_train_config(out, run.str());
  cfg.val_manifest = out.val_manifest_path;
  cfg.eval_every = 10;
  cfg.mixup_enabled = false;
  cfg.augment.flip_prob = 0.0;
  cfg.augment.rotate_max_deg = 0.0;
  cfg.augment.scale_low = 1.0;
  cfg.augment.scale_high = 1.0;
  cfg.schedule.total_epochs = 100;
  cfg.schedule.switch_epoch = 100;  // plain CE throughout
  cfg.base_lr = 0.1;
  const auto r = train(cfg);
  CHECK(r.epochs.back().mean_loss < 0.05);
  REQUIRE(r.epochs.back().val_accuracy.has_value());
  CHECK(*r.epochs.back().val_accuracy > 0.9);
}

TEST_CASE("evaluate is deterministic and produces probability rows") {
  TempDir data_dir("eval");
  const auto out = generate_synthetic(tiny_spec(), data_dir.str());
  TempDir run("eval_run");
  const auto cfg = tiny_train_config(out, run.str());
  const auto r = train(cfg);
  const auto val = LoadedDataset::load(out.val_manifest_path);

  const auto e1 = evaluate(r.checkpoint, val, Modality::joint);
  const auto e2 = evaluate(r.checkpoint, val, Modality::joint);
  CHECK(e1.scores.data == e2.scores.data);
  CHECK(e1.scores.rows == val.sequences.size());
  CHECK(e1.scores.cols == 3);
  for (std::size_t i = 0; i < e1.scores.rows; ++i) {
    double sum = 0.0;
    for (std::size_t c = 0; c < 3; ++c) sum += e1.scores.data[i * 3 + c];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(e1.labels.size() == val.sequences.size());
  // a derived modality gives different scores from the joint stream
  const auto eb = evaluate(r.checkpoint, val, Modality::bone);
  CHECK(eb.scores.data != e1.scores.data);
}

TEST_CASE("ensemble is a weighted sum and validates shapes") {
  Matrix a{2, 2, {0.8, 0.2, 0.4, 0.6}};
  Matrix b{2, 2, {0.5, 0.5, 0.9, 0.1}};
  const auto fused = ensemble({a, b}, {2.0, 1.0});
  CHECK(fused.data[0] == doctest::Approx(2.0 * 0.8 + 0.5));
  CHECK(fused.data[3] == doctest::Approx(2.0 * 0.6 + 0.1));
  CHECK_THROWS_AS(ensemble({a, b}, {1.0}), ShapeError);
  Matrix c{1, 2, {1.0, 0.0}};
  CHECK_THROWS_AS(ensemble({a, c}, {1.0, 1.0}), ShapeError);
  CHECK(four_stream_preset().size() == 4);
  CHECK(six_stream_preset().size() == 6);
}

TEST_CASE("compute_metrics hand example with shot groups") {
  // 4 samples, 2 classes; predictions: argmax rows = 0, 0, 1, 0
  Matrix scores{4, 2, {0.9, 0.1, 0.8, 0.2, 0.3, 0.7, 0.6, 0.4}};
  const std::vector<int> labels = {0, 0, 1, 1};
  const auto rep = compute_metrics(scores, labels, {150, 10});
  CHECK(rep.overall == doctest::Approx(0.75));
  CHECK(rep.per_class_accuracy[0] == doctest::Approx(1.0));
  CHECK(rep.per_class_accuracy[1] == doctest::Approx(0.5));
  REQUIRE(rep.many.has_value());
  REQUIRE(rep.few.has_value());
  CHECK(!rep.medium.has_value());  // no class with 20 <= n <= 100
  CHECK(*rep.many == doctest::Approx(1.0));
  CHECK(*rep.few == doctest::Approx(0.5));
  CHECK(rep.confusion[1][0] == 1);
  CHECK(rep.confusion[0][0] == 2);

  // no counts: groups unavailable
  const auto plain = compute_metrics(scores, labels, {});
  CHECK(!plain.many.has_value());
  CHECK(!plain.medium.has_value());
  CHECK(!plain.few.has_value());
}

TEST_CASE("metrics reports round trip through json and csv has rows") {
  Matrix scores{4, 2, {0.9, 0.1, 0.8, 0.2, 0.3, 0.7, 0.6, 0.4}};
  const auto rep = compute_metrics(scores, {0, 0, 1, 1}, {150, 10});
  const auto back = metrics_from_json(rep.to_json());
  CHECK(back.overall == doctest::Approx(rep.overall));
  CHECK(back.per_class_accuracy == rep.per_class_accuracy);
  CHECK(back.train_counts == rep.train_counts);
  CHECK(back.few.has_value());
  CHECK(*back.few == doctest::Approx(*rep.few));

  const auto csv = rep.to_csv();
  CHECK(csv.find("class_index") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') >= 3);  // header + 2 classes
}
