#include "brl/config.hpp"

#include <fstream>
#include <sstream>

namespace brl {
namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::size_t> parse_size_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    out.push_back(std::stoull(trim(tok)));
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_kv_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DomainError("config line " + std::to_string(lineno) +
                        ": expected key = value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw DomainError("config line " + std::to_string(lineno) + ": empty key");
    kv[key] = val;
  }
  return kv;
}

std::map<std::string, std::string> load_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_kv_text(ss.str());
}

TrainConfig train_config_from_kv(const std::map<std::string, std::string>& kv) {
  TrainConfig c;
  for (const auto& [key, val] : kv) {
    try {
      if (key == "data.train_manifest") c.train_manifest = val;
      else if (key == "data.val_manifest") c.val_manifest = val;
      else if (key == "data.graph") c.graph_path = val;
      else if (key == "data.modality") c.modality = modality_from_string(val);
      else if (key == "augment.flip_prob") c.augment.flip_prob = std::stod(val);
      else if (key == "augment.rotate_max_deg") c.augment.rotate_max_deg = std::stod(val);
      else if (key == "augment.scale_low") c.augment.scale_low = std::stod(val);
      else if (key == "augment.scale_high") c.augment.scale_high = std::stod(val);
      else if (key == "augment.target_frames") c.augment.target_frames = std::stoull(val);
      else if (key == "mixup.enabled") c.mixup_enabled = val == "true" || val == "1";
      else if (key == "mixup.k") c.mixup.k = std::stod(val);
      else if (key == "mixup.selection_rate") c.mixup.selection_rate = std::stod(val);
      else if (key == "reverse.enabled") c.reverse_enabled = val == "true" || val == "1";
      else if (key == "reverse.exponent") c.reverse.exponent = std::stod(val);
      else if (key == "reverse.cap") c.reverse.cap = std::stoull(val);
      else if (key == "loss.upsilon") c.hyper.upsilon = std::stod(val);
      else if (key == "loss.lambda") c.hyper.lambda = std::stod(val);
      else if (key == "loss.normalize_weights")
        c.hyper.normalize_weights = val == "true" || val == "1";
      else if (key == "schedule.total_epochs") c.schedule.total_epochs = std::stoull(val);
      else if (key == "schedule.switch_epoch") c.schedule.switch_epoch = std::stoull(val);
      else if (key == "backbone.block_channels") c.block_channels = parse_size_list(val);
      else if (key == "backbone.temporal_kernel") c.temporal_kernel = std::stoull(val);
      else if (key == "backbone.temporal_strides") c.temporal_strides = parse_size_list(val);
      else if (key == "train.batch_size") c.batch_size = std::stoull(val);
      else if (key == "train.base_lr") c.base_lr = std::stod(val);
      else if (key == "train.momentum") c.momentum = std::stod(val);
      else if (key == "train.weight_decay") c.weight_decay = std::stod(val);
      else if (key == "train.seed") c.seed = std::stoull(val);
      else if (key == "train.precision") c.precision = val;
      else if (key == "train.eval_every") c.eval_every = std::stoull(val);
      else if (key == "train.threads") c.threads = std::stoull(val);
      else if (key == "train.out_dir") c.out_dir = val;
      else if (key == "train.checkpoint_every_epoch")
        c.checkpoint_every_epoch = val == "true" || val == "1";
      else
        throw DomainError("unknown config key: " + key);
    } catch (const std::invalid_argument&) {
      throw DomainError("config key " + key + ": cannot parse value '" + val + "'");
    } catch (const std::out_of_range&) {
      throw DomainError("config key " + key + ": value out of range '" + val + "'");
    }
  }
  return c;
}

}  // namespace brl
