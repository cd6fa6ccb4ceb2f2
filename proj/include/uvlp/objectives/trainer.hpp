#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <string>

#include "uvlp/aligner/masking.hpp"
#include "uvlp/corpus/dataset.hpp"
#include "uvlp/fusion/model.hpp"
#include "uvlp/numkernel/optimizer.hpp"
#include "uvlp/objectives/curriculum.hpp"

namespace uvlp {

enum class GranularitySchedule { Sum, RoundRobin };

struct TrainConfig {
  std::size_t epochs = 5;
  std::size_t batch_size = 32;
  std::size_t warmup_epochs = 1;  // m
  bool weighted_itm = true;
  double peak_lr = 1e-3;
  double warmup_fraction = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.0;
  double clip_norm = 0.0;
  double mask_rate = 0.15;        // R-T and I-S MLM / region masking
  double rn_rate = 0.15;          // ρ of the proportional R-N masking
  double itm_positive_prob = 0.5;
  std::uint64_t seed = 0;
  GranularitySchedule schedule = GranularitySchedule::Sum;
  bool region_tag = true;
  bool region_phrase = true;
  bool image_sentence = true;

  std::map<std::string, std::string> to_map() const;
};

/// One optimizer step's batch-mean losses.
struct MetricsRow {
  std::int64_t step = 0;  // optimizer steps completed, this one included
  std::size_t epoch = 0;
  LossBundle mean;
  bool w_active = false;
  double mean_w_itm = 1.0;
  /// mean_i w_i·(L^R-P_i + L^I-S_i); equals L^R-P + L^I-S when inactive.
  double weighted_rest = 0;
  double lr = 0;
  double total = 0;
};

void write_metrics_header(std::ostream& os);
void write_metrics_row(std::ostream& os, const MetricsRow& row);

struct TrainerState {
  std::size_t epoch = 0;
  std::size_t step_in_epoch = 0;
  std::int64_t global_step = 0;
};

/// Multi-granular curriculum pre-training over a weak-pair corpus. Each step
/// builds, for every example, the region-tag view, the region–phrase view
/// and the image–sentence view, sums their losses under the curriculum
/// rule, and takes one Adam step. Batch order and every mask draw derive
/// from (seed, epoch, step, example), so runs are reproducible and can
/// resume from any step.
class Trainer {
 public:
  Trainer(const PretrainData& data, ModelConfig model_config, TrainConfig config);

  std::size_t steps_per_epoch() const { return steps_per_epoch_; }
  std::int64_t total_steps() const { return static_cast<std::int64_t>(steps_per_epoch_ * cfg_.epochs); }
  bool done() const { return state_.global_step >= total_steps(); }

  MetricsRow step();
  /// Runs to completion; `on_epoch_end` fires after the last step of each epoch.
  void run(const std::function<void(const MetricsRow&)>& on_step,
           const std::function<void(std::size_t)>& on_epoch_end = {});

  FusionModel<float>& model() { return *model_; }
  nk::Adam<float>& optimizer() { return *optimizer_; }
  const TrainConfig& config() const { return cfg_; }
  const TrainerState& state() const { return state_; }
  void set_state(const TrainerState& s) { state_ = s; }

 private:
  struct ExampleResult {
    LossBundle losses;
    double w = 1.0;
  };

  std::vector<std::size_t> epoch_order(std::size_t epoch) const;
  ExampleResult train_example(const WeakPair& pair, const ItmSample& itm, std::size_t views,
                              Rng& rng, const CurriculumState& cur, double batch_scale);

  const PretrainData& data_;
  TrainConfig cfg_;
  std::size_t steps_per_epoch_;
  std::unique_ptr<FusionModel<float>> model_;
  std::unique_ptr<nk::Adam<float>> optimizer_;
  TrainerState state_;
};

/// Granularity bit flags for a step's views.
inline constexpr std::size_t kViewRegionTag = 1;
inline constexpr std::size_t kViewRegionPhrase = 2;
inline constexpr std::size_t kViewImageSentence = 4;

}  // namespace uvlp
