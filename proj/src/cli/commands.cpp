#include "uvlp/cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "uvlp/aligner/linker.hpp"
#include "uvlp/corpus/checkpoint.hpp"
#include "uvlp/corpus/ratio.hpp"
#include "uvlp/embedder/retrieval.hpp"
#include "uvlp/numkernel/random.hpp"
#include "uvlp/numkernel/ops.hpp"
#include "uvlp/objectives/losses.hpp"

namespace uvlp::cli {
namespace {

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::ofstream open_out(const path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

void load_configs(const std::optional<path>& file, ModelConfig& m, TrainConfig& t) {
  m = ModelConfig::toy();
  t = TrainConfig{};
  if (file) apply_config(load_config(*file), m, t);
}

/// Rebuilds the model a checkpoint was trained with and loads its weights.
std::unique_ptr<FusionModel<float>> load_model(const path& checkpoint) {
  const auto manifest = read_manifest(checkpoint);
  ModelConfig m;
  TrainConfig t;
  apply_config(manifest.config, m, t);
  auto model = std::make_unique<FusionModel<float>>(m, 0);
  load_checkpoint(checkpoint, model->params(), nullptr, {});
  return model;
}

struct TrainedRun {
  std::unique_ptr<Trainer> trainer;
  ProbeScores scores;
};

TrainedRun train_and_probe(const PretrainData& data, const ModelConfig& base, const TrainConfig& t,
                           const std::vector<ProbeExample>& probes) {
  TrainedRun r;
  r.trainer = std::make_unique<Trainer>(data, fit_model_config(base, data), t);
  r.trainer->run({});
  r.scores = run_probes(r.trainer->model(), probes);
  return r;
}

struct WorldFiles {
  ImageCollection images;
  TextCollection texts;
  std::vector<TruthRecord> truth;
  std::vector<ProbeExample> probes;
};

WorldFiles load_world_dir(const path& dir, std::uint64_t probe_seed) {
  WorldFiles w;
  w.images = load_images(dir / "images.jsonl");
  w.texts = load_texts(dir / "texts.jsonl");
  w.truth = load_truth(dir / "truth.jsonl");
  w.probes = load_probe_examples(dir, probe_seed);
  return w;
}

void apply_run_overrides(const AblationOptions& o, TrainConfig& t) {
  if (o.epochs) t.epochs = *o.epochs;
  if (o.batch_size) t.batch_size = *o.batch_size;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::unique_ptr<EmbeddingProvider> make_provider(const std::string& name, const ImageCollection& images,
                                                 std::size_t hash_dim) {
  if (name == "bow") return std::make_unique<BagOfWordsProvider>(images.classes);
  if (name == "hash") return std::make_unique<HashingProvider>(hash_dim);
  throw std::invalid_argument("unknown provider " + name + " (expected bow or hash)");
}

void attach_links(std::vector<WeakPair>& pairs, const ImageCollection& images, const TextCollection& texts) {
  const OneHotWordEmbedder embedder(images.classes);
  for (auto& p : pairs) p.links = link_phrases(texts.get(p.text_id), images.get(p.image_id), embedder);
}

PairsFile build_corpus(const ImageCollection& images, const TextCollection& texts, std::size_t k,
                       const EmbeddingProvider& provider, std::vector<std::int64_t>* skipped) {
  if (k < 1) throw std::invalid_argument("K must be >= 1");
  std::vector<std::int64_t> ids;
  std::vector<std::string> raw;
  for (const auto& s : texts.sentences) {
    ids.push_back(s.text_id);
    raw.push_back(s.text);
  }
  const auto index = RetrievalIndex::build(ids, raw, provider);
  WeakCorpus wc = build_weak_corpus(images.images, index, provider, k);
  if (skipped) *skipped = wc.skipped_images;
  attach_links(wc.pairs, images, texts);
  return PairsFile{k, provider.name(), std::move(wc.pairs)};
}

ModelConfig fit_model_config(ModelConfig base, const PretrainData& data) {
  base.vocab_size = data.texts.vocab.size();
  base.region_dim = data.images.region_dim;
  base.region_classes = data.images.classes.size();
  return base;
}

ProbeScores run_probes(FusionModel<float>& model, const std::vector<ProbeExample>& examples) {
  return {itm_probe(model, examples).accuracy(), grounding_probe(model, examples).accuracy()};
}

nk::Var grad_check_loss(FusionModel<double>& model, nk::Tape<double>& tape, std::uint64_t seed) {
  const ModelConfig& c = model.config();
  Rng rng(derive_seed(seed, {21}));
  std::normal_distribution<double> normal(0.0, 1.0);
  auto token = [&] { return Vocabulary::kSpecialCount + uniform_index(rng, c.vocab_size - Vocabulary::kSpecialCount); };

  const std::size_t n_text = std::min<std::size_t>(6, c.max_tokens - 2);
  const std::size_t n_regions = std::min<std::size_t>(3, c.max_regions);
  std::vector<std::size_t> tokens(n_text);
  for (auto& t : tokens) t = token();
  RegionSet img;
  img.width = img.height = 100;
  for (std::size_t r = 0; r < n_regions; ++r) {
    Region reg;
    reg.feature.resize(c.region_dim);
    for (auto& x : reg.feature) x = static_cast<float>(normal(rng));
    const float x1 = static_cast<float>(uniform_index(rng, 50)), y1 = static_cast<float>(uniform_index(rng, 50));
    reg.box = {x1, y1, x1 + 10 + static_cast<float>(uniform_index(rng, 40)), y1 + 10 + static_cast<float>(uniform_index(rng, 40))};
    img.regions.push_back(std::move(reg));
  }
  const FusedInput in = make_fused_input(tokens, img);
  auto enc = model.encode(tape, in);

  std::vector<std::size_t> text_rows{FusedInput::text_row(0), FusedInput::text_row(n_text - 1)};
  std::vector<std::size_t> text_targets{token(), token()};
  std::vector<std::size_t> region_rows{in.region_row(0), in.region_row(n_regions - 1)};
  std::vector<std::size_t> classes{uniform_index(rng, c.region_classes), uniform_index(rng, c.region_classes)};
  nk::Tensor<double> feats({region_rows.size(), c.region_dim});
  for (auto& x : feats.values) x = normal(rng);
  std::vector<std::vector<std::size_t>> phrase{{token(), token()}};

  nk::Var loss = mlm_loss(tape, model.mlm_logits(tape, enc.hidden, text_rows), text_targets);
  loss = nk::add(tape, loss, mrc_loss(tape, model.mrc_logits(tape, enc.hidden, region_rows), classes));
  loss = nk::add(tape, loss, mrfr_loss(tape, model.mrfr_regression(tape, enc.hidden, region_rows), feats));
  const std::vector<std::size_t> pm_rows{in.region_row(0)};
  loss = nk::add(tape, loss, p_mrtc_loss(tape, model.pmrtc_logits(tape, enc.hidden, pm_rows), phrase));
  return nk::add(tape, loss, itm_loss(tape, model.itm_score(tape, enc.hidden), 1));
}

int synth_gen(const SynthGenOptions& o, std::ostream& log) {
  const World w = generate_world(o.spec);
  save_world(o.out, w);
  log << "wrote " << w.images.size() << " images, " << w.texts.size() << " texts, " << w.heldout_images.size()
      << " held-out images to " << o.out.string() << '\n';
  return kExitOk;
}

int build_corpus_cmd(const BuildCorpusOptions& o, std::ostream& log) {
  if (o.k < 1) throw std::invalid_argument("--k must be >= 1");
  const auto images = load_images(o.images);
  const auto texts = load_texts(o.texts);
  const auto provider = make_provider(o.provider, images, o.hash_dim);
  std::vector<std::int64_t> skipped;
  const PairsFile pf = build_corpus(images, texts, o.k, *provider, &skipped);
  std::filesystem::create_directories(o.out);
  save_pairs(o.out / "pairs.jsonl", pf);

  auto skip = open_out(o.out / "skip_report.csv");
  skip << "image_id,reason\n";
  for (auto id : skipped) skip << id << ",no tags\n";

  std::size_t phrases = 0, linked = 0;
  std::vector<std::size_t> hist(10, 0);
  for (const auto& p : pf.pairs) {
    phrases += texts.get(p.text_id).noun_phrases.size();
    linked += p.links.size();
    for (const auto& l : p.links) ++hist[std::min<std::size_t>(9, static_cast<std::size_t>(l.score * 10))];
  }
  auto rep = open_out(o.out / "link_report.csv");
  rep << "metric,value\n";
  rep << "pairs," << pf.pairs.size() << "\nphrases," << phrases << "\nlinked," << linked << "\ncoverage,"
      << fixed(phrases ? static_cast<double>(linked) / static_cast<double>(phrases) : 0.0, 6) << '\n';
  for (std::size_t b = 0; b < hist.size(); ++b)
    rep << "score_bin_" << fixed(b / 10.0, 1) << '_' << fixed((b + 1) / 10.0, 1) << ',' << hist[b] << '\n';

  log << "wrote " << pf.pairs.size() << " pairs (K=" << o.k << ", provider " << pf.provider << "), skipped "
      << skipped.size() << " images\n";
  return kExitOk;
}

int pretrain_cmd(const PretrainOptions& o, std::ostream& log) {
  ModelConfig m;
  TrainConfig t;
  load_configs(o.config, m, t);
  if (o.seed) t.seed = *o.seed;
  if (o.epochs) t.epochs = *o.epochs;
  if (o.batch_size) t.batch_size = *o.batch_size;
  if (o.warmup_epochs) t.warmup_epochs = *o.warmup_epochs;
  if (o.weighted_itm) t.weighted_itm = *o.weighted_itm;
  if (o.peak_lr) t.peak_lr = *o.peak_lr;
  if (o.schedule) apply_config({{"train.schedule", *o.schedule}}, m, t);

  const PretrainData data = load_pretrain_data(o.images, o.texts, o.pairs);
  m = fit_model_config(m, data);
  Trainer trainer(data, m, t);
  const ConfigMap echo = config_echo(m, t);
  if (o.resume) {
    const auto manifest = load_checkpoint(*o.resume, trainer.model().params(), &trainer.optimizer(), echo);
    trainer.set_state(manifest.state);
    log << "resumed from step " << manifest.state.global_step << '\n';
  }

  std::filesystem::create_directories(o.out);
  const path metrics_path = o.out / "metrics.csv";
  const bool append = o.resume && std::filesystem::exists(metrics_path);
  std::ofstream metrics(metrics_path, append ? std::ios::app : std::ios::trunc);
  if (!metrics) throw std::runtime_error("cannot write " + metrics_path.string());
  if (!append) write_metrics_header(metrics);

  std::int64_t steps_here = 0;
  while (!trainer.done()) {
    const std::size_t epoch = trainer.state().epoch;
    const MetricsRow row = trainer.step();
    write_metrics_row(metrics, row);
    metrics.flush();
    ++steps_here;
    if (trainer.state().epoch != epoch) {
      save_checkpoint(o.out / "checkpoints" / ("epoch-" + std::to_string(epoch)), trainer.model().params(),
                      trainer.optimizer(), echo, trainer.state());
      log << "epoch " << epoch << " done at step " << trainer.state().global_step << ", total " << fixed(row.total)
          << '\n';
    }
    if (o.stop_after && steps_here >= *o.stop_after) break;
  }
  save_checkpoint(o.out / "checkpoint", trainer.model().params(), trainer.optimizer(), echo, trainer.state());
  log << "checkpoint at step " << trainer.state().global_step << " in " << (o.out / "checkpoint").string() << '\n';
  return kExitOk;
}

int probe_cmd(const ProbeOptions& o, std::ostream& out) {
  if (o.suite != "itm" && o.suite != "grounding")
    throw std::invalid_argument("--suite must be itm or grounding");
  auto model = load_model(o.checkpoint);
  const auto examples = load_probe_examples(o.data, o.seed);
  const ProbeResult r = o.suite == "itm" ? itm_probe(*model, examples) : grounding_probe(*model, examples);
  out << "suite=" << o.suite << " correct=" << r.correct << " total=" << r.total
      << " accuracy=" << fixed(r.accuracy()) << '\n';
  if (o.threshold && r.accuracy() < *o.threshold) {
    out << "below threshold " << fixed(*o.threshold) << '\n';
    return kExitThreshold;
  }
  return kExitOk;
}

int grad_check_cmd(const GradCheckOptions& o, std::ostream& out) {
  ModelConfig m;
  TrainConfig t;
  load_configs(o.config, m, t);
  FusionModel<double> model(m, t.seed);

  std::optional<nk::OpKind> fault;
  if (o.fault_op) {
    for (int k = 0; k <= static_cast<int>(nk::OpKind::WeightedSum); ++k)
      if (nk::op_name(static_cast<nk::OpKind>(k)) == *o.fault_op) fault = static_cast<nk::OpKind>(k);
    if (!fault) throw std::invalid_argument("unknown op " + *o.fault_op);
  }
  nk::GradCheckOptions gc;
  gc.samples_per_tensor = o.samples;
  gc.seed = o.seed;
  const auto reports = nk::check_gradients(
      model.params(), [&](nk::Tape<double>& tape) { return grad_check_loss(model, tape, o.seed); }, gc,
      [&](nk::Tape<double>& tape) {
        if (fault) tape.set_fault(*fault, o.fault_factor);
      });

  double worst = 0;
  out << "parameter,checked,max_rel_error,max_abs_error\n";
  for (const auto& r : reports) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e,%.3e", r.max_rel_error, r.max_abs_error);
    out << r.name << ',' << r.checked << ',' << buf << '\n';
    worst = std::max(worst, r.max_rel_error);
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", worst);
  const bool pass = worst < o.tolerance;
  out << (pass ? "PASS" : "FAIL") << " max_rel_error=" << buf << " tolerance=" << o.tolerance << " parameters="
      << reports.size() << '\n';
  return pass ? kExitOk : kExitThreshold;
}

int inspect_attention_cmd(const InspectAttentionOptions& o, std::ostream& log) {
  auto model = load_model(o.checkpoint);
  const auto examples = load_probe_examples(o.data, o.seed);
  if (o.example >= examples.size())
    throw std::invalid_argument("--example " + std::to_string(o.example) + " out of range (" +
                                std::to_string(examples.size()) + " examples)");
  const auto& ex = examples[o.example];
  const auto probe = attention_probe(*model, make_fused_input(ex.matched_tokens, ex.image));
  auto csv = open_out(o.out);
  csv << "layer,head,text_row,region,weight\n";
  auto dump = [&](const std::string& layer, const std::string& head, const nk::Tensor<double>& t) {
    for (std::size_t i = 0; i < probe.text_len; ++i)
      for (std::size_t r = 0; r < probe.region_count; ++r)
        csv << layer << ',' << head << ',' << i << ',' << r << ',' << fixed(t.at(i, r), 8) << '\n';
  };
  for (std::size_t l = 0; l < probe.text_to_region.size(); ++l)
    for (std::size_t h = 0; h < probe.text_to_region[l].size(); ++h)
      dump(std::to_string(l), std::to_string(h), probe.text_to_region[l][h]);
  dump("last", "mean", probe.last_layer_mean);
  log << "wrote text-to-region attention of example " << o.example << " to " << o.out.string() << '\n';
  return kExitOk;
}

int ablate_k_cmd(const AblationOptions& o, std::ostream& log) {
  const WorldFiles w = load_world_dir(o.data, 0);
  const auto provider = make_provider(o.provider, w.images);
  ModelConfig m;
  TrainConfig t;
  load_configs(o.config, m, t);
  apply_run_overrides(o, t);
  auto csv = open_out(o.out / "ablate_k.csv");
  csv << "k,seed,pairs,itm_accuracy,grounding_accuracy\n";
  for (std::size_t k : o.ks) {
    PretrainData data{w.images, w.texts, build_corpus(w.images, w.texts, k, *provider).pairs};
    for (auto seed : o.seeds) {
      t.seed = seed;
      const auto r = train_and_probe(data, m, t, w.probes);
      csv << k << ',' << seed << ',' << data.pairs.size() << ',' << fixed(r.scores.itm) << ','
          << fixed(r.scores.grounding) << '\n';
      log << "k=" << k << " seed=" << seed << " itm=" << fixed(r.scores.itm) << " grounding="
          << fixed(r.scores.grounding) << '\n';
    }
  }
  return kExitOk;
}

int ablate_ratio_cmd(const AblationOptions& o, std::ostream& log) {
  const WorldFiles w = load_world_dir(o.data, 0);
  ModelConfig m;
  TrainConfig t;
  load_configs(o.config, m, t);
  apply_run_overrides(o, t);
  auto csv = open_out(o.out / "ablate_ratio.csv");
  csv << "ratio,seed,aligned,itm_accuracy,grounding_accuracy\n";
  std::vector<double> medians;
  for (double ratio : o.ratios) {
    std::vector<double> accs;
    for (auto seed : o.seeds) {
      MixedCorpus mix = mix_alignment_ratio(w.truth, ratio, seed);
      attach_links(mix.pairs, w.images, w.texts);
      PretrainData data{w.images, w.texts, std::move(mix.pairs)};
      t.seed = seed;
      const auto r = train_and_probe(data, m, t, w.probes);
      accs.push_back(r.scores.itm);
      csv << ratio << ',' << seed << ',' << mix.aligned << ',' << fixed(r.scores.itm) << ','
          << fixed(r.scores.grounding) << '\n';
      log << "ratio=" << ratio << " seed=" << seed << " itm=" << fixed(r.scores.itm) << '\n';
    }
    medians.push_back(median(accs));
  }
  bool monotone = true;
  for (std::size_t i = 1; i < medians.size(); ++i) monotone = monotone && medians[i] >= medians[i - 1];
  const bool gap = medians.size() < 2 || medians.back() >= medians.front() + 0.05;
  for (std::size_t i = 0; i < medians.size(); ++i)
    log << "median itm at ratio " << o.ratios[i] << ": " << fixed(medians[i]) << '\n';
  log << "trend " << (monotone && gap ? "holds" : "does not hold") << '\n';
  return monotone && gap ? kExitOk : kExitThreshold;
}

int ablate_witm_cmd(const AblationOptions& o, std::ostream& log) {
  const WorldFiles w = load_world_dir(o.data, 0);
  const auto provider = make_provider(o.provider, w.images);
  ModelConfig m;
  TrainConfig t;
  load_configs(o.config, m, t);
  apply_run_overrides(o, t);
  PretrainData data{w.images, w.texts, build_corpus(w.images, w.texts, o.k, *provider).pairs};
  auto csv = open_out(o.out / "ablate_witm.csv");
  csv << "weighted_itm,seed,itm_accuracy,grounding_accuracy\n";
  for (bool weighted : {true, false}) {
    for (auto seed : o.seeds) {
      t.seed = seed;
      t.weighted_itm = weighted;
      const auto r = train_and_probe(data, m, t, w.probes);
      csv << (weighted ? "true" : "false") << ',' << seed << ',' << fixed(r.scores.itm) << ','
          << fixed(r.scores.grounding) << '\n';
      log << "weighted_itm=" << weighted << " seed=" << seed << " itm=" << fixed(r.scores.itm) << '\n';
    }
  }
  return kExitOk;
}

}  // namespace uvlp::cli
