#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "brl/augment.hpp"
#include "brl/backbone.hpp"
#include "brl/exploration.hpp"
#include "brl/io.hpp"
#include "brl/longtail.hpp"
#include "brl/loss.hpp"
#include "brl/synthetic.hpp"

namespace brl {

struct TrainConfig {
  std::string train_manifest;
  std::string val_manifest;  // optional; used for periodic accuracy
  std::string graph_path;
  Modality modality = Modality::joint;

  AugmentConfig augment;
  bool mixup_enabled = true;
  MixupConfig mixup;
  bool reverse_enabled = true;
  ReverseSamplerConfig reverse;
  ActionAwareHyper hyper;
  ScheduleConfig schedule;

  std::vector<std::size_t> block_channels = {32, 64};
  std::size_t temporal_kernel = 5;
  std::vector<std::size_t> temporal_strides = {1, 2};

  std::size_t batch_size = 16;
  double base_lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::uint64_t seed = 0;
  std::string precision = "f64";  // checkpoint blob dtype: f32 | f64
  std::size_t eval_every = 0;     // 0 = never during training
  std::size_t threads = 1;

  std::string out_dir = ".";
  bool checkpoint_every_epoch = false;

  void validate() const;
};

struct EpochLog {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double lr = 0.0;
  std::size_t steps = 0;
  LossKind loss_kind = LossKind::generic_ce;
  std::vector<double> class_loss_weights;  // in effect this epoch
  std::optional<double> val_accuracy;

  std::string to_json() const;
};

struct MetricsReport {
  double overall = 0.0;
  std::vector<double> per_class_accuracy;
  std::vector<std::size_t> train_counts;  // empty when unavailable
  std::optional<double> many;
  std::optional<double> medium;
  std::optional<double> few;
  std::vector<std::vector<std::size_t>> confusion;

  std::string to_json() const;
  std::string to_csv() const;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochLog> epochs;
  std::string checkpoint_path;
};

// In-memory dataset: raw sequences loaded once, resolved against the
// manifest's directory.
struct LoadedDataset {
  DatasetManifest manifest;
  std::vector<SkeletonSequence> sequences;

  static LoadedDataset load(const std::string& manifest_path);
};

TrainResult train(const TrainConfig& config);

struct EvalResult {
  Matrix scores;            // softmax probabilities, rows = val samples
  std::vector<int> labels;
  MetricsReport report;
};

EvalResult evaluate(const Checkpoint& ckpt, const LoadedDataset& val,
                    Modality modality);

// fused = sum_s w_s * scores_s
Matrix ensemble(const std::vector<Matrix>& streams,
                const std::vector<double>& weights);

const std::vector<Modality>& four_stream_preset();
const std::vector<Modality>& six_stream_preset();

MetricsReport compute_metrics(const Matrix& scores, const std::vector<int>& labels,
                              const std::vector<std::size_t>& train_counts);

void write_report(const MetricsReport& report, const std::string& json_path,
                  const std::string& csv_path);

MetricsReport metrics_from_json(const std::string& text);

}  // namespace brl
