#include "uvlp/corpus/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>
#include <openssl/evp.h>

namespace uvlp {
namespace {

using Json = nlohmann::ordered_json;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(out, bits);
}

class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t>& b, std::string name) : b_(b), name_(std::move(name)) {}
  std::uint64_t u(int bytes) {
    if (pos_ + static_cast<std::size_t>(bytes) > b_.size()) throw CheckpointError(name_ + ": truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= std::uint64_t{b_[pos_++]} << (8 * i);
    return v;
  }
  float f32() {
    const auto bits = static_cast<std::uint32_t>(u(4));
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
  }
  void expect_end() const {
    if (pos_ != b_.size()) throw CheckpointError(name_ + ": trailing bytes");
  }

 private:
  const std::vector<std::uint8_t>& b_;
  std::string name_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& b) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!out) throw CheckpointError("cannot write " + p.string());
}

}  // namespace

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::string file_sha256(const std::filesystem::path& path) { return sha256_hex(read_bytes(path)); }

void save_checkpoint(const std::filesystem::path& dir, const nk::ParamStore<float>& params,
                     const nk::Adam<float>& optimizer, const ConfigMap& config, const TrainerState& state) {
  std::filesystem::create_directories(dir);
  std::vector<std::uint8_t> pbytes, obytes;
  Json table = Json::array();
  for (std::size_t i = 0; i < params.size(); ++i) {
    table.push_back(Json{{"name", params[i].name}, {"shape", params[i].tensor.shape}});
    for (float v : params[i].tensor.values) put_f32(pbytes, v);
  }
  const auto step = static_cast<std::uint64_t>(optimizer.step_count());
  put_u32(obytes, static_cast<std::uint32_t>(step));
  put_u32(obytes, static_cast<std::uint32_t>(step >> 32));
  for (const auto* moments : {&optimizer.first_moments(), &optimizer.second_moments()})
    for (const auto& m : *moments)
      for (float v : m) put_f32(obytes, v);
  write_bytes(dir / "params.bin", pbytes);
  write_bytes(dir / "opt.bin", obytes);

  Json manifest{{"format_version", kCheckpointFormat},
                {"config", config},
                {"state", {{"epoch", state.epoch}, {"step_in_epoch", state.step_in_epoch},
                           {"global_step", state.global_step}}},
                {"optimizer_step", optimizer.step_count()},
                {"params", std::move(table)},
                {"params_sha256", sha256_hex(pbytes)},
                {"opt_sha256", sha256_hex(obytes)}};
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw CheckpointError("cannot write " + (dir / "manifest.json").string());
}

CheckpointManifest read_manifest(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw CheckpointError("no manifest.json in " + dir.string());
  CheckpointManifest m;
  try {
    const Json j = Json::parse(in);
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kCheckpointFormat)
      throw CheckpointError("unsupported checkpoint format " + std::to_string(m.format_version));
    m.config = j.at("config").get<ConfigMap>();
    const Json& s = j.at("state");
    m.state.epoch = s.at("epoch").get<std::size_t>();
    m.state.step_in_epoch = s.at("step_in_epoch").get<std::size_t>();
    m.state.global_step = s.at("global_step").get<std::int64_t>();
    m.optimizer_step = j.at("optimizer_step").get<std::int64_t>();
    for (const auto& p : j.at("params"))
      m.params.emplace_back(p.at("name").get<std::string>(), p.at("shape").get<nk::Shape>());
    m.params_sha256 = j.at("params_sha256").get<std::string>();
    m.opt_sha256 = j.at("opt_sha256").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("malformed manifest.json: " + std::string(e.what()));
  }
  return m;
}

CheckpointManifest load_checkpoint(const std::filesystem::path& dir, nk::ParamStore<float>& params,
                                   nk::Adam<float>* optimizer, const ConfigMap& expected) {
  CheckpointManifest m = read_manifest(dir);
  const auto pbytes = read_bytes(dir / "params.bin");
  const auto obytes = read_bytes(dir / "opt.bin");
  if (sha256_hex(pbytes) != m.params_sha256) throw CheckpointError("params.bin digest mismatch; refusing to load");
  if (sha256_hex(obytes) != m.opt_sha256) throw CheckpointError("opt.bin digest mismatch; refusing to load");

  for (const auto& [key, value] : expected) {
    auto it = m.config.find(key);
    if (it == m.config.end()) throw CheckpointError("config field " + key + " missing from checkpoint");
    if (it->second != value)
      throw CheckpointError("config field " + key + " differs: checkpoint " + it->second + ", requested " + value);
  }
  if (m.params.size() != params.size())
    throw CheckpointError("checkpoint has " + std::to_string(m.params.size()) + " parameters, model has " +
                          std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (m.params[i].first != params[i].name || m.params[i].second != params[i].tensor.shape)
      throw CheckpointError("parameter " + std::to_string(i) + " mismatch: checkpoint " + m.params[i].first + " " +
                            nk::shape_str(m.params[i].second) + ", model " + params[i].name + " " +
                            nk::shape_str(params[i].tensor.shape));
  }

  ByteReader pr(pbytes, "params.bin");
  std::vector<std::vector<float>> values(params.size());
  for (std::size_t i = 0; i < params.size(); ++i)
    for (std::size_t k = 0; k < params[i].tensor.size(); ++k) values[i].push_back(pr.f32());
  pr.expect_end();

  ByteReader orr(obytes, "opt.bin");
  const auto step = static_cast<std::int64_t>(orr.u(8));
  if (step != m.optimizer_step) throw CheckpointError("opt.bin step disagrees with manifest");
  std::vector<std::vector<float>> mom[2];
  for (auto& moments : mom) {
    moments.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i)
      for (std::size_t k = 0; k < params[i].tensor.size(); ++k) moments[i].push_back(orr.f32());
  }
  orr.expect_end();

  for (std::size_t i = 0; i < params.size(); ++i) params[i].tensor.values = std::move(values[i]);
  if (optimizer) {
    optimizer->first_moments() = std::move(mom[0]);
    optimizer->second_moments() = std::move(mom[1]);
    optimizer->set_step_count(step);
  }
  return m;
}

}  // namespace uvlp
