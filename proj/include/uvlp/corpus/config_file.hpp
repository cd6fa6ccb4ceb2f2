#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "uvlp/fusion/config.hpp"
#include "uvlp/objectives/trainer.hpp"

namespace uvlp {

using ConfigMap = std::map<std::string, std::string>;

/// `key = value` lines; '#' starts a comment; blank lines ignored. Duplicate
/// keys and lines without '=' throw std::invalid_argument with the line number.
ConfigMap parse_config(std::istream& is, const std::string& name = "config");
ConfigMap load_config(const std::filesystem::path& path);

/// Applies every `model.*` and `train.*` key. Unknown keys and unparsable
/// values throw std::invalid_argument naming the key.
void apply_config(const ConfigMap& map, ModelConfig& model, TrainConfig& train);

/// Echo of both configs in the same key space apply_config reads.
ConfigMap config_echo(const ModelConfig& model, const TrainConfig& train);

}  // namespace uvlp
