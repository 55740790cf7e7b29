#pragma once

#include <map>
#include <string>

#include "brl/train.hpp"

namespace brl {

// Flat dotted-key config text, one "key = value" per line, '#' comments.
// Throws with the offending line number on parse errors.
std::map<std::string, std::string> parse_kv_text(const std::string& text);
std::map<std::string, std::string> load_kv_file(const std::string& path);

// Builds a TrainConfig from defaults plus the given keys; unknown keys are
// rejected so typos surface immediately.
TrainConfig train_config_from_kv(const std::map<std::string, std::string>& kv);

}  // namespace brl
