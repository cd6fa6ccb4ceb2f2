#include "uvlp/corpus/config_file.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <stdexcept>

namespace uvlp {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const char* expected) {
  throw std::invalid_argument("config key " + key + ": cannot parse \"" + value + "\" as " + expected);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v, const char* expected) {
  T out{};
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) bad(key, v, expected);
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(key, v, "a boolean");
}

}  // namespace

ConfigMap parse_config(std::istream& is, const std::string& name) {
  ConfigMap out;
  std::string line;
  for (std::size_t n = 1; std::getline(is, line); ++n) {
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(name + ":" + std::to_string(n) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw std::invalid_argument(name + ":" + std::to_string(n) + ": empty key");
    if (!out.emplace(key, trim(line.substr(eq + 1))).second)
      throw std::invalid_argument(name + ":" + std::to_string(n) + ": duplicate key " + key);
  }
  return out;
}

ConfigMap load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  return parse_config(in, path.filename().string());
}

void apply_config(const ConfigMap& map, ModelConfig& m, TrainConfig& t) {
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto size = [](std::size_t& f) -> Setter {
    return [&f](const std::string& k, const std::string& v) { f = parse_number<std::size_t>(k, v, "an unsigned integer"); };
  };
  auto real = [](double& f) -> Setter {
    return [&f](const std::string& k, const std::string& v) { f = parse_number<double>(k, v, "a number"); };
  };
  auto flag = [](bool& f) -> Setter {
    return [&f](const std::string& k, const std::string& v) { f = parse_bool(k, v); };
  };
  const std::map<std::string, Setter> setters = {
      {"model.layers", size(m.layers)},
      {"model.hidden", size(m.hidden)},
      {"model.heads", size(m.heads)},
      {"model.intermediate", size(m.intermediate)},
      {"model.vocab_size", size(m.vocab_size)},
      {"model.region_dim", size(m.region_dim)},
      {"model.region_classes", size(m.region_classes)},
      {"model.max_tokens", size(m.max_tokens)},
      {"model.max_regions", size(m.max_regions)},
      {"model.modalities", size(m.modalities)},
      {"model.init_std", real(m.init_std)},
      {"model.ln_eps", real(m.ln_eps)},
      {"train.epochs", size(t.epochs)},
      {"train.batch_size", size(t.batch_size)},
      {"train.warmup_epochs", size(t.warmup_epochs)},
      {"train.weighted_itm", flag(t.weighted_itm)},
      {"train.peak_lr", real(t.peak_lr)},
      {"train.warmup_fraction", real(t.warmup_fraction)},
      {"train.beta1", real(t.beta1)},
      {"train.beta2", real(t.beta2)},
      {"train.adam_eps", real(t.adam_eps)},
      {"train.weight_decay", real(t.weight_decay)},
      {"train.clip_norm", real(t.clip_norm)},
      {"train.mask_rate", real(t.mask_rate)},
      {"train.rn_rate", real(t.rn_rate)},
      {"train.itm_positive_prob", real(t.itm_positive_prob)},
      {"train.seed", [&t](const std::string& k, const std::string& v) {
         t.seed = parse_number<std::uint64_t>(k, v, "an unsigned integer");
       }},
      {"train.schedule", [&t](const std::string& k, const std::string& v) {
         if (v == "sum") t.schedule = GranularitySchedule::Sum;
         else if (v == "round-robin") t.schedule = GranularitySchedule::RoundRobin;
         else bad(k, v, "sum or round-robin");
       }},
      {"train.region_tag", flag(t.region_tag)},
      {"train.region_phrase", flag(t.region_phrase)},
      {"train.image_sentence", flag(t.image_sentence)},
  };
  for (const auto& [k, v] : map) {
    auto it = setters.find(k);
    if (it == setters.end()) throw std::invalid_argument("unknown config key " + k);
    it->second(k, v);
  }
}

ConfigMap config_echo(const ModelConfig& model, const TrainConfig& train) {
  ConfigMap out = model.to_map();
  out.merge(train.to_map());
  return out;
}

}  // namespace uvlp
