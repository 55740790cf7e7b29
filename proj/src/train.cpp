#include "brl/train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "json.hpp"

namespace brl {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
  if (batch_size < 1) throw DomainError("train: batch_size must be >= 1");
  if (!(base_lr >= 0.0)) throw DomainError("train: base_lr must be >= 0");
  if (precision != "f32" && precision != "f64")
    throw DomainError("train: precision must be f32 or f64");
  if (threads < 1) throw DomainError("train: threads must be >= 1");
  if (train_manifest.empty()) throw DomainError("train: train_manifest required");
  if (graph_path.empty()) throw DomainError("train: graph_path required");
  augment.validate();
  mixup.validate();
  reverse.validate();
  hyper.validate();
  schedule.validate();
}

std::string EpochLog::to_json() const {
  nlohmann::json j;
  j["epoch"] = epoch;
  j["mean_loss"] = mean_loss;
  j["lr"] = lr;
  j["steps"] = steps;
  j["loss"] = loss_kind == LossKind::generic_ce ? "generic_ce" : "action_aware";
  j["class_loss_weights"] = class_loss_weights;
  if (val_accuracy) j["val_accuracy"] = *val_accuracy;
  return j.dump();
}

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  j["overall"] = overall;
  j["per_class_accuracy"] = per_class_accuracy;
  j["train_counts"] = train_counts;
  j["many"] = many ? nlohmann::json(*many) : nlohmann::json();
  j["medium"] = medium ? nlohmann::json(*medium) : nlohmann::json();
  j["few"] = few ? nlohmann::json(*few) : nlohmann::json();
  j["confusion"] = confusion;
  return j.dump(2);
}

std::string MetricsReport::to_csv() const {
  std::string out = "class_index,n_train,group,accuracy\n";
  ShotGroups groups;
  std::vector<std::string> group_of(per_class_accuracy.size(), "unknown");
  if (!train_counts.empty()) {
    const auto g = shot_groups(ClassHistogram::from_counts(train_counts));
    for (int c : g.many) group_of[c] = "many";
    for (int c : g.medium) group_of[c] = "medium";
    for (int c : g.few) group_of[c] = "few";
  }
  for (std::size_t c = 0; c < per_class_accuracy.size(); ++c) {
    out += std::to_string(c) + ",";
    out += (c < train_counts.size() ? std::to_string(train_counts[c]) : "0");
    out += "," + group_of[c] + "," + std::to_string(per_class_accuracy[c]) + "\n";
  }
  return out;
}

LoadedDataset LoadedDataset::load(const std::string& manifest_path) {
  LoadedDataset ds;
  ds.manifest = DatasetManifest::load(manifest_path);
  const fs::path base = fs::path(manifest_path).parent_path();
  ds.sequences.reserve(ds.manifest.entries.size());
  for (const auto& e : ds.manifest.entries) {
    fs::path p(e.path);
    if (p.is_relative()) p = base / p;
    SkeletonSequence seq = load_sequence(p.string());
    if (seq.label != e.label)
      throw DomainError("dataset: label mismatch for " + e.path);
    ds.sequences.push_back(std::move(seq));
  }
  return ds;
}

namespace {

// flip/rotate/scale on raw joints, then modality, then temporal sampling
SkeletonSequence prepare_train_item(const SkeletonSequence& raw,
                                    const SkeletonGraph& g,
                                    const TrainConfig& cfg, Rng& rng) {
  SkeletonSequence s = flip(raw, g, cfg.augment.flip_prob, rng);
  s = rotate(s, rng, cfg.augment.rotate_max_deg);
  s = scale(s, rng, cfg.augment.scale_low, cfg.augment.scale_high);
  s = derive_modality(s, g, cfg.modality);
  return uniform_sample(s, cfg.augment.target_frames, SampleMode::random, rng);
}

SkeletonSequence prepare_eval_item(const SkeletonSequence& raw,
                                   const SkeletonGraph& g, Modality modality,
                                   std::size_t target_frames) {
  SkeletonSequence s = derive_modality(raw, g, modality);
  Rng unused = make_rng(0);
  return uniform_sample(s, target_frames, SampleMode::center, unused);
}

double accuracy_of(const Matrix& scores, const std::vector<int>& labels) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < scores.rows; ++i) {
    const double* row = scores.data.data() + i * scores.cols;
    const std::size_t pred =
        std::max_element(row, row + scores.cols) - row;
    if (static_cast<int>(pred) == labels[i]) ++correct;
  }
  return scores.rows ? static_cast<double>(correct) / scores.rows : 0.0;
}

}  // namespace

TrainResult train(const TrainConfig& config) {
  config.validate();
  const SkeletonGraph graph = SkeletonGraph::load(config.graph_path);
  LoadedDataset train_ds = LoadedDataset::load(config.train_manifest);
  if (train_ds.manifest.split != "train")
    throw DomainError("train: manifest is not a train split");
  const ClassHistogram hist = ClassHistogram::of(train_ds.manifest);
  const int num_classes = train_ds.manifest.num_classes;

  std::optional<LoadedDataset> val_ds;
  if (!config.val_manifest.empty() && config.eval_every > 0)
    val_ds = LoadedDataset::load(config.val_manifest);

  BackboneConfig bcfg;
  bcfg.input_channels = train_ds.sequences.front().channels;
  bcfg.joints = graph.num_joints;
  bcfg.frames = config.augment.target_frames;
  bcfg.num_classes = num_classes;
  bcfg.block_channels = config.block_channels;
  bcfg.temporal_kernel = config.temporal_kernel;
  bcfg.temporal_strides = config.temporal_strides;
  bcfg.init_seed = derive_seed(config.seed, 0xB00);
  Backbone model(bcfg, graph);

  std::vector<std::size_t> factors(num_classes, 1);
  if (config.reverse_enabled)
    factors = reverse_repeat_factors(hist, config.reverse);

  // frozen at the detached switch; ones before it
  std::vector<double> aa_weights;

  TrainResult result;
  const std::size_t T = config.schedule.total_epochs;
  for (std::size_t epoch = 0; epoch < T; ++epoch) {
    const double lr = cosine_lr(epoch, T, config.base_lr);
    const LossKind kind = select_loss(epoch, config.schedule);
    if (kind == LossKind::action_aware && aa_weights.empty())
      aa_weights = class_weights(hist, config.hyper);

    Rng epoch_rng = make_rng(derive_seed(config.seed, 0xE90C4, epoch));
    const auto index = build_epoch_index(train_ds.manifest, factors, epoch_rng);

    EpochLog log;
    log.epoch = epoch;
    log.lr = lr;
    log.loss_kind = kind;
    log.class_loss_weights = kind == LossKind::action_aware
                                 ? aa_weights
                                 : std::vector<double>(num_classes, 1.0);

    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    for (std::size_t start = 0; start < index.size();
         start += config.batch_size) {
      const std::size_t bsz = std::min(config.batch_size, index.size() - start);
      std::vector<SkeletonSequence> batch;
      std::vector<SoftLabel> labels;
      batch.reserve(bsz);
      for (std::size_t i = 0; i < bsz; ++i) {
        const std::size_t item = index[start + i];
        Rng item_rng =
            make_rng(derive_seed(config.seed, 0xA7C0 + epoch, start + i));
        batch.push_back(prepare_train_item(train_ds.sequences[item], graph,
                                           config, item_rng));
        labels.push_back(
            SoftLabel::one_hot(train_ds.sequences[item].label, num_classes));
      }
      if (config.mixup_enabled) {
        Rng mix_rng = make_rng(
            derive_seed(config.seed, 0x313F0 + epoch, start / config.batch_size));
        const auto pairs =
            select_mixup_pairs(bsz, config.mixup.selection_rate, mix_rng);
        const std::vector<SkeletonSequence> snapshot = batch;
        for (auto [target, partner] : pairs) {
          auto [mixed, soft] =
              partial_mixup(snapshot[target], snapshot[partner], graph, hist,
                            num_classes, config.mixup);
          batch[target] = std::move(mixed);
          labels[target] = std::move(soft);
        }
      }

      double batch_loss = 0.0;
      ForwardCache cache;
      for (std::size_t i = 0; i < bsz; ++i) {
        const auto logits = model.forward(batch[i], cache);
        LossResult lr_res =
            kind == LossKind::action_aware
                ? action_aware_loss(logits, labels[i], aa_weights)
                : softmax_ce(logits, labels[i]);
        if (!std::isfinite(lr_res.value))
          throw DomainError(
              "train: NaN/Inf loss at epoch " + std::to_string(epoch) +
              " step " + std::to_string(log.steps) +
              "; check loss weight scaling and learning rate");
        batch_loss += lr_res.value;
        const double inv = 1.0 / static_cast<double>(bsz);
        for (double& g : lr_res.grad) g *= inv;
        model.backward(batch[i], cache, lr_res.grad);
      }
      model.sgd_step(lr, config.momentum, config.weight_decay, true);
      loss_sum += batch_loss / static_cast<double>(bsz);
      ++loss_count;
      ++log.steps;
    }
    log.mean_loss = loss_count ? loss_sum / loss_count : 0.0;

    if (val_ds && config.eval_every > 0 &&
        ((epoch + 1) % config.eval_every == 0 || epoch + 1 == T)) {
      Checkpoint tmp;
      tmp.config = bcfg;
      tmp.graph = graph;
      tmp.train_counts = hist.counts;
      tmp.modality = modality_name(config.modality);
      tmp.params = model.params();
      const auto ev = evaluate(tmp, *val_ds, config.modality);
      log.val_accuracy = ev.report.overall;
    }
    result.epochs.push_back(log);

    if (config.checkpoint_every_epoch || epoch + 1 == T) {
      Checkpoint ckpt;
      ckpt.config = bcfg;
      ckpt.graph = graph;
      ckpt.train_counts = hist.counts;
      ckpt.modality = modality_name(config.modality);
      ckpt.epoch = epoch + 1;
      ckpt.rng_state = derive_seed(config.seed, 0xF17A1, epoch);
      for (const auto& l : result.epochs) ckpt.metric_log.push_back(l.to_json());
      ckpt.params = model.params();
      ckpt.as_f32 = config.precision == "f32";
      fs::create_directories(config.out_dir);
      const std::string name = epoch + 1 == T
                                   ? "checkpoint.brlckpt"
                                   : "checkpoint_e" + std::to_string(epoch + 1) +
                                         ".brlckpt";
      const std::string path = (fs::path(config.out_dir) / name).string();
      save_checkpoint(path, ckpt);
      if (epoch + 1 == T) {
        result.checkpoint = std::move(ckpt);
        result.checkpoint_path = path;
      }
    }
  }
  return result;
}

EvalResult evaluate(const Checkpoint& ckpt, const LoadedDataset& val,
                    Modality modality) {
  Backbone model(ckpt.config, ckpt.graph);
  for (auto& t : model.params().values) t.v = ckpt.params.value(t.name).v;

  EvalResult res;
  res.scores.rows = val.sequences.size();
  res.scores.cols = ckpt.config.num_classes;
  res.scores.data.resize(res.scores.rows * res.scores.cols);
  ForwardCache cache;
  for (std::size_t i = 0; i < val.sequences.size(); ++i) {
    const auto item = prepare_eval_item(val.sequences[i], ckpt.graph, modality,
                                        ckpt.config.frames);
    const auto logits = model.forward(item, cache);
    const auto p = softmax(logits);
    std::copy(p.begin(), p.end(), res.scores.data.begin() + i * res.scores.cols);
    res.labels.push_back(val.sequences[i].label);
  }
  res.report = compute_metrics(res.scores, res.labels, ckpt.train_counts);
  return res;
}

Matrix ensemble(const std::vector<Matrix>& streams,
                const std::vector<double>& weights) {
  if (streams.empty()) throw DomainError("ensemble: no streams");
  if (streams.size() != weights.size())
    throw ShapeError("ensemble: weight count does not match stream count");
  double wsum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw DomainError("ensemble: weights must be >= 0");
    wsum += w;
  }
  if (wsum == 0.0) throw DomainError("ensemble: weights must not all be zero");
  Matrix fused;
  fused.rows = streams[0].rows;
  fused.cols = streams[0].cols;
  fused.data.assign(fused.rows * fused.cols, 0.0);
  for (std::size_t s = 0; s < streams.size(); ++s) {
    if (streams[s].rows != fused.rows || streams[s].cols != fused.cols)
      throw ShapeError("ensemble: stream shapes differ");
    for (std::size_t i = 0; i < fused.data.size(); ++i)
      fused.data[i] += weights[s] * streams[s].data[i];
  }
  return fused;
}

const std::vector<Modality>& four_stream_preset() {
  static const std::vector<Modality> p = {Modality::joint, Modality::bone,
                                          Modality::joint_motion,
                                          Modality::bone_motion};
  return p;
}

const std::vector<Modality>& six_stream_preset() {
  static const std::vector<Modality> p = {
      Modality::joint,        Modality::bone,        Modality::joint_motion,
      Modality::bone_motion,  Modality::skip,        Modality::skip_motion};
  return p;
}

MetricsReport compute_metrics(const Matrix& scores, const std::vector<int>& labels,
                              const std::vector<std::size_t>& train_counts) {
  if (scores.rows != labels.size())
    throw ShapeError("compute_metrics: label count does not match scores");
  const std::size_t C = scores.cols;
  MetricsReport rep;
  rep.train_counts = train_counts;
  rep.confusion.assign(C, std::vector<std::size_t>(C, 0));
  std::vector<std::size_t> per_class_total(C, 0), per_class_correct(C, 0);
  for (std::size_t i = 0; i < scores.rows; ++i) {
    const double* row = scores.data.data() + i * C;
    const std::size_t pred = std::max_element(row, row + C) - row;
    const auto truth = static_cast<std::size_t>(labels[i]);
    rep.confusion[truth][pred]++;
    per_class_total[truth]++;
    if (pred == truth) per_class_correct[truth]++;
  }
  rep.overall = accuracy_of(scores, labels);
  rep.per_class_accuracy.resize(C, 0.0);
  for (std::size_t c = 0; c < C; ++c)
    if (per_class_total[c] > 0)
      rep.per_class_accuracy[c] =
          static_cast<double>(per_class_correct[c]) / per_class_total[c];

  if (!train_counts.empty() && train_counts.size() == C) {
    const auto groups = shot_groups(ClassHistogram::from_counts(train_counts));
    auto group_acc = [&](const std::vector<int>& cls) -> std::optional<double> {
      std::size_t total = 0, correct = 0;
      for (int c : cls) {
        total += per_class_total[c];
        correct += per_class_correct[c];
      }
      if (total == 0) return std::nullopt;
      return static_cast<double>(correct) / total;
    };
    rep.many = group_acc(groups.many);
    rep.medium = group_acc(groups.medium);
    rep.few = group_acc(groups.few);
  }
  return rep;
}

void write_report(const MetricsReport& report, const std::string& json_path,
                  const std::string& csv_path) {
  if (!json_path.empty()) {
    std::ofstream out(json_path);
    if (!out) throw std::runtime_error("cannot write report: " + json_path);
    out << report.to_json() << "\n";
  }
  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("cannot write report: " + csv_path);
    out << report.to_csv();
  }
}

MetricsReport metrics_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  MetricsReport rep;
  rep.overall = j.at("overall").get<double>();
  rep.per_class_accuracy = j.at("per_class_accuracy").get<std::vector<double>>();
  rep.train_counts = j.at("train_counts").get<std::vector<std::size_t>>();
  if (!j.at("many").is_null()) rep.many = j.at("many").get<double>();
  if (!j.at("medium").is_null()) rep.medium = j.at("medium").get<double>();
  if (!j.at("few").is_null()) rep.few = j.at("few").get<double>();
  rep.confusion = j.at("confusion").get<std::vector<std::vector<std::size_t>>>();
  return rep;
}

}  // namespace brl
