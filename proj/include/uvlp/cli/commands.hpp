#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "uvlp/corpus/config_file.hpp"
#include "uvlp/corpus/dataset_io.hpp"
#include "uvlp/corpus/world.hpp"
#include "uvlp/embedder/provider.hpp"
#include "uvlp/fusion/probe.hpp"
#include "uvlp/numkernel/grad_check.hpp"
#include "uvlp/numkernel/tape.hpp"
#include "uvlp/objectives/trainer.hpp"

namespace uvlp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitThreshold = 3;

using std::filesystem::path;

// ---- pipeline pieces shared by the commands and the acceptance harness ----

/// "bow": bag of words over the image class names. "hash": hashing provider.
std::unique_ptr<EmbeddingProvider> make_provider(const std::string& name, const ImageCollection& images,
                                                 std::size_t hash_dim = 256);

/// Retrieves top-K texts per image and links their noun phrases to regions
/// with a one-hot word embedder over the class names.
PairsFile build_corpus(const ImageCollection& images, const TextCollection& texts, std::size_t k,
                       const EmbeddingProvider& provider, std::vector<std::int64_t>* skipped = nullptr);

/// Links every pair's noun phrases in place.
void attach_links(std::vector<WeakPair>& pairs, const ImageCollection& images, const TextCollection& texts);

/// Model config sized for a dataset: vocabulary, region dim and class count
/// come from the data, everything else from `base`.
ModelConfig fit_model_config(ModelConfig base, const PretrainData& data);

struct ProbeScores {
  double itm = 0;
  double grounding = 0;
};
ProbeScores run_probes(FusionModel<float>& model, const std::vector<ProbeExample>& examples);

/// The grad-check objective: every head's loss summed on one fixed random
/// example drawn with `seed`.
nk::Var grad_check_loss(FusionModel<double>& model, nk::Tape<double>& tape, std::uint64_t seed);

// ---- commands ----

struct SynthGenOptions {
  WorldSpec spec;
  path out;
};
int synth_gen(const SynthGenOptions& o, std::ostream& log);

struct BuildCorpusOptions {
  path images;
  path texts;
  std::size_t k = 5;
  std::string provider = "bow";
  std::size_t hash_dim = 256;
  path out;
};
int build_corpus_cmd(const BuildCorpusOptions& o, std::ostream& log);

struct PretrainOptions {
  std::optional<path> config;
  path images;
  path texts;
  path pairs;
  path out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> warmup_epochs;
  std::optional<bool> weighted_itm;
  std::optional<std::string> schedule;
  std::optional<double> peak_lr;
  std::optional<path> resume;
  /// Stops after this many optimizer steps in this process and checkpoints.
  std::optional<std::int64_t> stop_after;
};
int pretrain_cmd(const PretrainOptions& o, std::ostream& log);

struct ProbeOptions {
  path checkpoint;
  path data;  // world directory with the held-out files and truth.jsonl
  std::string suite = "itm";
  std::uint64_t seed = 0;
  std::optional<double> threshold;
};
int probe_cmd(const ProbeOptions& o, std::ostream& out);

struct GradCheckOptions {
  std::optional<path> config;
  double tolerance = 1e-4;
  std::size_t samples = 64;  // per tensor; 0 = every entry
  std::uint64_t seed = 0;
  /// Negative control: scale the backward pass of this op kind.
  std::optional<std::string> fault_op;
  double fault_factor = 1.001;
};
int grad_check_cmd(const GradCheckOptions& o, std::ostream& out);

struct InspectAttentionOptions {
  path checkpoint;
  path data;
  std::size_t example = 0;
  std::uint64_t seed = 0;
  path out;  // CSV
};
int inspect_attention_cmd(const InspectAttentionOptions& o, std::ostream& log);

struct AblationOptions {
  path data;  // world directory
  std::optional<path> config;
  std::vector<std::size_t> ks = {1, 5, 10};
  std::size_t k = 5;  // corpus K for the w_ITM arms
  std::vector<double> ratios = {0.0, 0.5, 1.0};
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::string provider = "bow";
  path out;
};
int ablate_k_cmd(const AblationOptions& o, std::ostream& log);
int ablate_ratio_cmd(const AblationOptions& o, std::ostream& log);
int ablate_witm_cmd(const AblationOptions& o, std::ostream& log);

}  // namespace uvlp::cli
