#include "uvlp/objectives/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "uvlp/numkernel/ops.hpp"
#include "uvlp/objectives/losses.hpp"

namespace uvlp {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<std::size_t> masked_text_rows(const MaskPlan& plan, std::vector<std::size_t>& targets) {
  std::vector<std::size_t> rows;
  for (const auto& m : plan.text) {
    rows.push_back(FusedInput::text_row(m.position));
    targets.push_back(m.target);
  }
  return rows;
}

std::vector<std::size_t> zeroed_regions(const MaskPlan& plan) {
  std::vector<std::size_t> out;
  for (const auto& r : plan.regions) out.push_back(r.region);
  return out;
}

}  // namespace

std::map<std::string, std::string> TrainConfig::to_map() const {
  return {
      {"train.epochs", std::to_string(epochs)},
      {"train.batch_size", std::to_string(batch_size)},
      {"train.warmup_epochs", std::to_string(warmup_epochs)},
      {"train.weighted_itm", weighted_itm ? "true" : "false"},
      {"train.peak_lr", fmt(peak_lr)},
      {"train.warmup_fraction", fmt(warmup_fraction)},
      {"train.beta1", fmt(beta1)},
      {"train.beta2", fmt(beta2)},
      {"train.adam_eps", fmt(adam_eps)},
      {"train.weight_decay", fmt(weight_decay)},
      {"train.clip_norm", fmt(clip_norm)},
      {"train.mask_rate", fmt(mask_rate)},
      {"train.rn_rate", fmt(rn_rate)},
      {"train.itm_positive_prob", fmt(itm_positive_prob)},
      {"train.seed", std::to_string(seed)},
      {"train.schedule", schedule == GranularitySchedule::Sum ? "sum" : "round-robin"},
      {"train.region_tag", region_tag ? "true" : "false"},
      {"train.region_phrase", region_phrase ? "true" : "false"},
      {"train.image_sentence", image_sentence ? "true" : "false"},
  };
}

void write_metrics_header(std::ostream& os) {
  os << "step,epoch,mlm_rt,mrc,mrfr,mlm_rp,p_mrtc,mlm_is,itm,l_rt,l_rp,l_is,w_active,mean_w_itm,"
        "weighted_rest,lr,total\n";
}

void write_metrics_row(std::ostream& os, const MetricsRow& r) {
  const auto& b = r.mean;
  os << r.step << ',' << r.epoch << ',' << fmt(b.mlm_rt) << ',' << fmt(b.mrc) << ',' << fmt(b.mrfr)
     << ',' << fmt(b.mlm_rp) << ',' << fmt(b.p_mrtc) << ',' << fmt(b.mlm_is) << ',' << fmt(b.itm)
     << ',' << fmt(b.region_tag()) << ',' << fmt(b.region_phrase()) << ','
     << fmt(b.image_sentence()) << ',' << (r.w_active ? 1 : 0) << ',' << fmt(r.mean_w_itm) << ','
     << fmt(r.weighted_rest) << ',' << fmt(r.lr) << ',' << fmt(r.total) << '\n';
}

Trainer::Trainer(const PretrainData& data, ModelConfig model_config, TrainConfig config)
    : data_(data), cfg_(std::move(config)) {
  if (data_.pairs.empty()) throw std::invalid_argument("trainer: no weak pairs");
  if (cfg_.batch_size == 0) throw std::invalid_argument("trainer: batch_size must be >= 1");
  if (cfg_.epochs == 0) throw std::invalid_argument("trainer: epochs must be >= 1");
  if (model_config.vocab_size < data_.texts.vocab.size()) {
    throw std::invalid_argument("trainer: model vocab_size " + std::to_string(model_config.vocab_size) +
                                " < data vocabulary " + std::to_string(data_.texts.vocab.size()));
  }
  if (model_config.region_dim != data_.images.region_dim) {
    throw std::invalid_argument("trainer: model region_dim " + std::to_string(model_config.region_dim) +
                                " != data region_dim " + std::to_string(data_.images.region_dim));
  }
  if (model_config.region_classes < data_.images.classes.size()) {
    throw std::invalid_argument("trainer: model region_classes smaller than the data's class list");
  }
  steps_per_epoch_ = (data_.pairs.size() + cfg_.batch_size - 1) / cfg_.batch_size;
  model_ = std::make_unique<FusionModel<float>>(std::move(model_config), derive_seed(cfg_.seed, {0}));
  nk::AdamConfig adam;
  adam.peak_lr = cfg_.peak_lr;
  adam.warmup_fraction = cfg_.warmup_fraction;
  adam.total_steps = total_steps();
  adam.beta1 = cfg_.beta1;
  adam.beta2 = cfg_.beta2;
  adam.eps = cfg_.adam_eps;
  adam.weight_decay = cfg_.weight_decay;
  adam.clip_norm = cfg_.clip_norm;
  optimizer_ = std::make_unique<nk::Adam<float>>(adam, model_->params());
}

std::vector<std::size_t> Trainer::epoch_order(std::size_t epoch) const {
  std::vector<std::size_t> order(data_.pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(cfg_.seed, {1, epoch}));
  // Fisher-Yates with our own index draw so the order does not depend on the
  // standard library's shuffle.
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
  return order;
}

Trainer::ExampleResult Trainer::train_example(const WeakPair& pair, const ItmSample& itm,
                                              std::size_t views, Rng& rng,
                                              const CurriculumState& cur, double batch_scale) {
  FusionModel<float>& m = *model_;
  const std::size_t vocab = m.config().vocab_size;
  const RegionSet& img = data_.images.get(pair.image_id);
  const Sentence& sent = data_.texts.get(pair.text_id);

  ExampleResult res;
  std::optional<double> w;
  if (cur.weighting_active()) {
    w = compute_w_itm(m, make_fused_input(sent.token_ids, img));
    res.w = *w;
  }

  nk::Tape<float> tape;
  nk::Var rt = zero_loss(tape);
  nk::Var rp = zero_loss(tape);
  nk::Var is = zero_loss(tape);
  nk::Var mlm_rt = rt, mrc = rt, mrfr = rt, mlm_rp = rt, pmrtc = rt, mlm_is = rt, itm_l = rt;

  if (views & kViewRegionTag) {
    std::vector<std::size_t> tags;
    for (const auto& r : img.regions) tags.push_back(data_.texts.vocab.id(r.tag));
    const MaskPlan plan = plan_rt_masks(tags, img, cfg_.mask_rate, vocab, rng);
    const auto zeroed = zeroed_regions(plan);
    const FusedInput in = make_fused_input(apply_text_masks(tags, plan.text), img, zeroed);
    auto enc = m.encode(tape, in);

    std::vector<std::size_t> text_targets;
    const auto text_rows = masked_text_rows(plan, text_targets);
    mlm_rt = mlm_loss(tape, text_rows.empty() ? nk::Var{} : m.mlm_logits(tape, enc.hidden, text_rows),
                      text_targets);
    if (!plan.regions.empty()) {
      std::vector<std::size_t> rows, classes;
      nk::Tensor<float> feats({plan.regions.size(), img.regions.front().feature.size()});
      for (std::size_t i = 0; i < plan.regions.size(); ++i) {
        rows.push_back(in.region_row(plan.regions[i].region));
        classes.push_back(plan.regions[i].target_class);
        std::copy(plan.regions[i].target_feature.begin(), plan.regions[i].target_feature.end(),
                  feats.values.begin() + static_cast<std::ptrdiff_t>(i * feats.cols()));
      }
      mrc = mrc_loss(tape, m.mrc_logits(tape, enc.hidden, rows), classes);
      mrfr = mrfr_loss(tape, m.mrfr_regression(tape, enc.hidden, rows), feats);
    }
    rt = nk::add(tape, nk::add(tape, mlm_rt, mrc), mrfr);
  }

  if ((views & kViewRegionPhrase) && !pair.links.empty()) {
    const MaskPlan plan = plan_rn_masks(pair, sent, img, cfg_.rn_rate, rng);
    const auto zeroed = zeroed_regions(plan);
    const FusedInput in = make_fused_input(apply_text_masks(sent.token_ids, plan.text), img, zeroed);
    auto enc = m.encode(tape, in);
    std::vector<std::size_t> text_targets;
    const auto text_rows = masked_text_rows(plan, text_targets);
    mlm_rp = mlm_loss(tape, text_rows.empty() ? nk::Var{} : m.mlm_logits(tape, enc.hidden, text_rows),
                      text_targets);
    if (!plan.regions.empty()) {
      std::vector<std::size_t> rows;
      std::vector<std::vector<std::size_t>> targets;
      for (const auto& r : plan.regions) {
        rows.push_back(in.region_row(r.region));
        targets.push_back(r.target_tokens);
      }
      pmrtc = p_mrtc_loss(tape, m.pmrtc_logits(tape, enc.hidden, rows), targets);
    }
    rp = nk::add(tape, mlm_rp, pmrtc);
  }

  if (views & kViewImageSentence) {
    const Sentence& shown = itm.label == 1 ? sent : data_.texts.get(itm.text_id);
    // Both labels are corrupted alike so [MASK] cannot reveal the label;
    // only matched pairs score MLM.
    const MaskPlan plan = plan_is_masks(shown.token_ids, cfg_.mask_rate, vocab, rng);
    const FusedInput in = make_fused_input(apply_text_masks(shown.token_ids, plan.text), img);
    auto enc = m.encode(tape, in);
    std::vector<std::size_t> text_targets;
    const auto text_rows = masked_text_rows(plan, text_targets);
    if (itm.label == 1 && !text_rows.empty())
      mlm_is = mlm_loss(tape, m.mlm_logits(tape, enc.hidden, text_rows), text_targets);
    itm_l = itm_loss(tape, m.itm_score(tape, enc.hidden), itm.label);
    is = nk::add(tape, mlm_is, itm_l);
  }

  nk::Var total = curriculum_objective(tape, rt, rp, is, w, cur);
  tape.backward(nk::scale(tape, total, static_cast<float>(batch_scale)));

  auto val = [&](nk::Var v) { return static_cast<double>(tape.value(v)[0]); };
  res.losses = {val(mlm_rt), val(mrc), val(mrfr), val(mlm_rp), val(pmrtc), val(mlm_is), val(itm_l)};
  return res;
}

MetricsRow Trainer::step() {
  if (done()) throw std::logic_error("trainer: training already finished");
  const CurriculumState cur{state_.epoch, cfg_.warmup_epochs, cfg_.weighted_itm};
  const auto order = epoch_order(state_.epoch);
  const std::size_t begin = state_.step_in_epoch * cfg_.batch_size;
  const std::size_t end = std::min(order.size(), begin + cfg_.batch_size);
  std::vector<WeakPair> batch;
  for (std::size_t i = begin; i < end; ++i) batch.push_back(data_.pairs[order[i]]);

  Rng itm_rng(derive_seed(cfg_.seed, {2, static_cast<std::uint64_t>(state_.global_step)}));
  const auto itm = sample_itm_pairs(batch, itm_rng, cfg_.itm_positive_prob);

  std::size_t views = 0;
  if (cfg_.region_tag) views |= kViewRegionTag;
  if (cfg_.region_phrase) views |= kViewRegionPhrase;
  if (cfg_.image_sentence) views |= kViewImageSentence;
  if (cfg_.schedule == GranularitySchedule::RoundRobin && views != 0) {
    std::vector<std::size_t> enabled;
    for (std::size_t v : {kViewRegionTag, kViewRegionPhrase, kViewImageSentence})
      if (views & v) enabled.push_back(v);
    views = enabled[static_cast<std::size_t>(state_.global_step) % enabled.size()];
  }

  model_->params().zero_grad();
  std::vector<LossBundle> bundles;
  std::vector<double> weights;
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Rng rng(derive_seed(cfg_.seed, {3, static_cast<std::uint64_t>(state_.global_step), i}));
    auto r = train_example(batch[i], itm[i], views, rng, cur, scale);
    bundles.push_back(r.losses);
    weights.push_back(r.w);
  }

  MetricsRow row;
  row.step = state_.global_step + 1;
  row.epoch = state_.epoch;
  row.w_active = cur.weighting_active();
  const double n = static_cast<double>(bundles.size());
  double wsum = 0.0;
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    const auto& b = bundles[i];
    row.mean.mlm_rt += b.mlm_rt / n;
    row.mean.mrc += b.mrc / n;
    row.mean.mrfr += b.mrfr / n;
    row.mean.mlm_rp += b.mlm_rp / n;
    row.mean.p_mrtc += b.p_mrtc / n;
    row.mean.mlm_is += b.mlm_is / n;
    row.mean.itm += b.itm / n;
    wsum += weights[i];
    row.weighted_rest += weights[i] * (b.region_phrase() + b.image_sentence()) / n;
  }
  row.mean_w_itm = wsum / n;
  row.total = curriculum_total(bundles, weights, cur);
  row.lr = optimizer_->current_lr();
  optimizer_->step(model_->params());

  ++state_.global_step;
  if (++state_.step_in_epoch == steps_per_epoch_) {
    state_.step_in_epoch = 0;
    ++state_.epoch;
  }
  return row;
}

void Trainer::run(const std::function<void(const MetricsRow&)>& on_step,
                  const std::function<void(std::size_t)>& on_epoch_end) {
  while (!done()) {
    const std::size_t epoch = state_.epoch;
    const MetricsRow row = step();
    if (on_step) on_step(row);
    if (on_epoch_end && state_.epoch != epoch) on_epoch_end(epoch);
  }
}

}  // namespace uvlp
