#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "uvlp/corpus/config_file.hpp"
#include "uvlp/numkernel/optimizer.hpp"
#include "uvlp/numkernel/param_store.hpp"
#include "uvlp/objectives/trainer.hpp"

namespace uvlp {

inline constexpr int kCheckpointFormat = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckpointManifest {
  int format_version = kCheckpointFormat;
  ConfigMap config;
  TrainerState state;
  std::int64_t optimizer_step = 0;
  std::vector<std::pair<std::string, nk::Shape>> params;
  std::string params_sha256;
  std::string opt_sha256;
};

/// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string file_sha256(const std::filesystem::path& path);

/// Writes manifest.json, params.bin (little-endian f32 in parameter order)
/// and opt.bin (i64 step, then every first moment, then every second moment).
void save_checkpoint(const std::filesystem::path& dir, const nk::ParamStore<float>& params,
                     const nk::Adam<float>& optimizer, const ConfigMap& config, const TrainerState& state);

/// Parses manifest.json only.
CheckpointManifest read_manifest(const std::filesystem::path& dir);

/// Verifies both digests, then that every key of `expected` matches the
/// manifest's config echo (the error names the first differing field), then
/// the parameter table, and finally fills `params` and, when given,
/// `optimizer`. Throws CheckpointError.
CheckpointManifest load_checkpoint(const std::filesystem::path& dir, nk::ParamStore<float>& params,
                                   nk::Adam<float>* optimizer, const ConfigMap& expected);

}  // namespace uvlp
