#include "uvlp/fusion/config.hpp"

#include <sstream>
#include <stdexcept>

namespace uvlp {
namespace {

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

ModelConfig ModelConfig::full_scale() {
  ModelConfig c;
  c.layers = 12;
  c.hidden = 768;
  c.heads = 12;
  c.intermediate = 3072;
  c.vocab_size = 30522;
  c.region_dim = 2048;
  c.region_classes = 1600;
  c.max_tokens = 64;
  c.max_regions = 50;
  return c;
}

ModelConfig ModelConfig::toy() { return ModelConfig{}; }

void ModelConfig::validate() const {
  auto require = [](bool ok, const char* field) {
    if (!ok) throw std::invalid_argument(std::string("model config: invalid ") + field);
  };
  require(layers >= 1, "layers");
  require(hidden >= 1, "hidden");
  require(heads >= 1 && hidden % heads == 0, "heads (hidden must be divisible by heads)");
  require(intermediate >= 1, "intermediate");
  require(vocab_size > 5, "vocab_size");
  require(region_dim >= 1, "region_dim");
  require(region_classes >= 1, "region_classes");
  require(max_tokens >= 3, "max_tokens");
  require(max_regions >= 1, "max_regions");
  require(modalities == 2, "modalities");
  require(init_std > 0, "init_std");
  require(ln_eps > 0, "ln_eps");
}

std::map<std::string, std::string> ModelConfig::to_map() const {
  return {
      {"model.layers", std::to_string(layers)},
      {"model.hidden", std::to_string(hidden)},
      {"model.heads", std::to_string(heads)},
      {"model.intermediate", std::to_string(intermediate)},
      {"model.vocab_size", std::to_string(vocab_size)},
      {"model.region_dim", std::to_string(region_dim)},
      {"model.region_classes", std::to_string(region_classes)},
      {"model.max_tokens", std::to_string(max_tokens)},
      {"model.max_regions", std::to_string(max_regions)},
      {"model.modalities", std::to_string(modalities)},
      {"model.init_std", fmt_double(init_std)},
      {"model.ln_eps", fmt_double(ln_eps)},
  };
}

}  // namespace uvlp
