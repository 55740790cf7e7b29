#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "brl/config.hpp"
#include "brl/kernels.hpp"
#include "brl/synthetic.hpp"
#include "brl/train.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_synth(const brl::SyntheticSpec& spec, const std::string& out_dir) {
  const auto out = brl::generate_synthetic(spec, out_dir);
  std::cout << "graph:          " << out.graph_path << "\n"
            << "train manifest: " << out.train_manifest_path << "\n"
            << "val manifest:   " << out.val_manifest_path << "\n";
  return 0;
}

int run_make_lt(const std::string& manifest_path, double ratio, std::size_t max,
                std::uint64_t seed, const std::string& order,
                const std::string& out_path) {
  const auto manifest = brl::DatasetManifest::load(manifest_path);
  brl::LongTailSpec spec{max, ratio, seed};
  const auto policy = order == "random"
                          ? brl::ClassOrderPolicy::random_permutation
                          : brl::ClassOrderPolicy::by_label;
  const auto res = brl::truncate_dataset(manifest, spec, policy);
  res.manifest.save(out_path);
  std::cout << "per-class counts:";
  for (std::size_t n : res.histogram.counts) std::cout << " " << n;
  std::cout << "\nachieved imbalance ratio: "
            << brl::imbalance_ratio(res.histogram) << "\n";
  for (int c : res.clamped_classes)
    std::cerr << "warning: class " << c << " clamped to availability\n";
  return 0;
}

int run_derive(const std::string& in_path, const std::string& graph_path,
               const std::string& modality, const std::string& out_path) {
  const auto g = brl::SkeletonGraph::load(graph_path);
  const auto seq = brl::load_sequence(in_path);
  const auto out =
      brl::derive_modality(seq, g, brl::modality_from_string(modality));
  brl::save_sequence(out_path, out);
  return 0;
}

brl::TrainConfig build_train_config(const std::string& config_path,
                                    const std::vector<std::string>& overrides) {
  auto kv = config_path.empty() ? std::map<std::string, std::string>{}
                                : brl::load_kv_file(config_path);
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw brl::DomainError("--set expects key=value, got '" + ov + "'");
    kv[ov.substr(0, eq)] = ov.substr(eq + 1);
  }
  return brl::train_config_from_kv(kv);
}

int run_train(const brl::TrainConfig& cfg) {
  std::cout << "kernels: " << brl::kern::active_name()
            << "  threads: " << cfg.threads << "\n";
  const auto res = brl::train(cfg);
  for (const auto& e : res.epochs) {
    std::cout << "epoch " << e.epoch << "  loss " << e.mean_loss << "  lr "
              << e.lr;
    if (e.val_accuracy) std::cout << "  val_acc " << *e.val_accuracy;
    std::cout << "\n";
  }
  std::cout << "checkpoint: " << res.checkpoint_path << "\n";
  return 0;
}

int run_eval(const std::string& ckpt_path, const std::string& manifest_path,
             const std::string& modality, const std::string& out_prefix) {
  const auto ckpt = brl::load_checkpoint(ckpt_path);
  const auto val = brl::LoadedDataset::load(manifest_path);
  const auto mod = modality.empty() ? brl::modality_from_string(ckpt.modality)
                                    : brl::modality_from_string(modality);
  const auto res = brl::evaluate(ckpt, val, mod);
  brl::save_matrix(out_prefix + "_scores.skl", res.scores.data, res.scores.rows,
                   res.scores.cols);
  brl::write_report(res.report, out_prefix + "_report.json",
                    out_prefix + "_report.csv");
  std::cout << "overall accuracy: " << res.report.overall << "\n";
  if (res.report.many) std::cout << "many:   " << *res.report.many << "\n";
  if (res.report.medium) std::cout << "medium: " << *res.report.medium << "\n";
  if (res.report.few) std::cout << "few:    " << *res.report.few << "\n";
  return 0;
}

int run_ensemble(const std::vector<std::string>& score_paths,
                 const std::string& preset, const std::string& weights_csv,
                 const std::string& manifest_path,
                 const std::string& counts_csv, const std::string& out_prefix) {
  std::size_t expected = 0;
  if (preset == "4stream") expected = 4;
  else if (preset == "6stream") expected = 6;
  else if (preset != "custom")
    throw brl::DomainError("unknown preset: " + preset);
  if (expected && score_paths.size() != expected)
    throw brl::DomainError("preset " + preset + " expects " +
                           std::to_string(expected) + " score files, got " +
                           std::to_string(score_paths.size()));
  std::vector<brl::Matrix> streams;
  for (const auto& p : score_paths) streams.push_back(brl::load_matrix(p));

  std::vector<double> weights(streams.size(), 1.0);
  if (!weights_csv.empty()) {
    weights.clear();
    std::stringstream ss(weights_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) weights.push_back(std::stod(tok));
  }
  const auto fused = brl::ensemble(streams, weights);

  const auto manifest = brl::DatasetManifest::load(manifest_path);
  std::vector<int> labels;
  for (const auto& e : manifest.entries) labels.push_back(e.label);

  std::vector<std::size_t> counts;
  if (!counts_csv.empty()) {
    std::stringstream ss(counts_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) counts.push_back(std::stoull(tok));
  }
  const auto rep = brl::compute_metrics(fused, labels, counts);
  brl::save_matrix(out_prefix + "_scores.skl", fused.data, fused.rows, fused.cols);
  brl::write_report(rep, out_prefix + "_report.json", out_prefix + "_report.csv");
  std::cout << "fused overall accuracy: " << rep.overall << "\n";
  return 0;
}

int run_report(const std::string& metrics_path, const std::string& json_out,
               const std::string& csv_out) {
  const auto rep = brl::metrics_from_json(slurp(metrics_path));
  brl::write_report(rep, json_out, csv_out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"balanced representation learning for long-tailed skeleton "
               "action recognition"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  brl::SyntheticSpec spec;
  std::string synth_out = "synth_data";
  synth->add_option("--out", synth_out, "output directory")->capture_default_str();
  synth->add_option("--classes", spec.num_classes)->capture_default_str();
  synth->add_option("--joints", spec.joints)->capture_default_str();
  synth->add_option("--frames", spec.frames)->capture_default_str();
  synth->add_option("--persons", spec.persons)->capture_default_str();
  synth->add_option("--train-per-class", spec.train_per_class)->capture_default_str();
  synth->add_option("--val-per-class", spec.val_per_class)->capture_default_str();
  synth->add_option("--noise", spec.noise)->capture_default_str();
  synth->add_option("--phase-jitter", spec.phase_jitter)->capture_default_str();
  synth->add_option("--base-frequency", spec.base_frequency)->capture_default_str();
  synth->add_option("--frequency-step", spec.frequency_step)->capture_default_str();
  synth->add_option("--seed", spec.seed)->capture_default_str();

  // make-lt
  auto* mklt = app.add_subcommand("make-lt", "build a long-tailed train manifest");
  std::string lt_manifest, lt_out = "lt_manifest.json", lt_order = "label";
  double lt_ratio = 100.0;
  std::size_t lt_max = 600;
  std::uint64_t lt_seed = 0;
  mklt->add_option("--manifest", lt_manifest, "balanced train manifest")->required();
  mklt->add_option("--ratio", lt_ratio, "imbalance ratio")->capture_default_str();
  mklt->add_option("--max", lt_max, "head class sample count")->capture_default_str();
  mklt->add_option("--seed", lt_seed)->capture_default_str();
  mklt->add_option("--order", lt_order, "class order policy: label | random")
      ->capture_default_str();
  mklt->add_option("--out", lt_out)->capture_default_str();

  // derive
  auto* derive = app.add_subcommand("derive", "derive a modality from a sequence");
  std::string d_in, d_graph, d_mod = "bone", d_out;
  std::uint64_t d_seed = 0;
  derive->add_option("--in", d_in)->required();
  derive->add_option("--graph", d_graph)->required();
  derive->add_option("--modality", d_mod)->capture_default_str();
  derive->add_option("--out", d_out)->required();
  derive->add_option("--seed", d_seed)->capture_default_str();

  // train
  auto* tr = app.add_subcommand("train", "train a model");
  std::string tr_config;
  std::vector<std::string> tr_set;
  tr->add_option("--config", tr_config, "flat dotted-key config file");
  tr->add_option("--set", tr_set, "override: key=value (repeatable)");
  std::optional<std::size_t> tr_epochs, tr_threads;
  std::optional<std::uint64_t> tr_seed;
  std::optional<std::string> tr_out;
  tr->add_option("--epochs", tr_epochs, "override schedule.total_epochs");
  tr->add_option("--seed", tr_seed, "override train.seed");
  tr->add_option("--threads", tr_threads, "override train.threads");
  tr->add_option("--out", tr_out, "override train.out_dir");

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string ev_ckpt, ev_manifest, ev_mod, ev_out = "eval";
  std::uint64_t ev_seed = 0;
  ev->add_option("--checkpoint", ev_ckpt)->required();
  ev->add_option("--manifest", ev_manifest)->required();
  ev->add_option("--modality", ev_mod, "defaults to the checkpoint's modality");
  ev->add_option("--out-prefix", ev_out)->capture_default_str();
  ev->add_option("--seed", ev_seed)->capture_default_str();

  // ensemble
  auto* en = app.add_subcommand("ensemble", "fuse score matrices");
  std::vector<std::string> en_scores;
  std::string en_preset = "custom", en_weights, en_manifest, en_counts,
              en_out = "ensemble";
  std::uint64_t en_seed = 0;
  en->add_option("scores", en_scores, "score matrix files")->required();
  en->add_option("--preset", en_preset, "4stream | 6stream | custom")
      ->capture_default_str();
  en->add_option("--weights", en_weights, "comma-separated stream weights");
  en->add_option("--manifest", en_manifest, "val manifest for labels")->required();
  en->add_option("--counts", en_counts,
                 "comma-separated per-class train counts for shot groups");
  en->add_option("--out-prefix", en_out)->capture_default_str();
  en->add_option("--seed", en_seed)->capture_default_str();

  // report
  auto* rp = app.add_subcommand("report", "re-emit a metrics report");
  std::string rp_metrics, rp_json, rp_csv;
  std::uint64_t rp_seed = 0;
  rp->add_option("--metrics", rp_metrics, "metrics report JSON")->required();
  rp->add_option("--json", rp_json, "JSON output path");
  rp->add_option("--csv", rp_csv, "CSV output path");
  rp->add_option("--seed", rp_seed)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return run_synth(spec, synth_out);
    if (mklt->parsed())
      return run_make_lt(lt_manifest, lt_ratio, lt_max, lt_seed, lt_order, lt_out);
    if (derive->parsed()) return run_derive(d_in, d_graph, d_mod, d_out);
    if (tr->parsed()) {
      if (tr_epochs)
        tr_set.push_back("schedule.total_epochs=" + std::to_string(*tr_epochs));
      if (tr_seed) tr_set.push_back("train.seed=" + std::to_string(*tr_seed));
      if (tr_threads)
        tr_set.push_back("train.threads=" + std::to_string(*tr_threads));
      if (tr_out) tr_set.push_back("train.out_dir=" + *tr_out);
      return run_train(build_train_config(tr_config, tr_set));
    }
    if (ev->parsed()) return run_eval(ev_ckpt, ev_manifest, ev_mod, ev_out);
    if (en->parsed())
      return run_ensemble(en_scores, en_preset, en_weights, en_manifest,
                          en_counts, en_out);
    if (rp->parsed()) return run_report(rp_metrics, rp_json, rp_csv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
