// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and a
// summary. Exits 0 once every criterion has been evaluated; with --strict it
// exits 3 when any criterion failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "uvlp/aligner/masking.hpp"
#include "uvlp/cli/commands.hpp"
#include "uvlp/corpus/dataset_io.hpp"
#include "uvlp/embedder/retrieval.hpp"
#include "uvlp/numkernel/ops.hpp"
#include "uvlp/objectives/losses.hpp"

using namespace uvlp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Last line of `text` starting with `prefix`, or "".
std::string line_with(const std::string& text, const std::string& prefix) {
  std::istringstream in(text);
  std::string found;
  for (std::string l; std::getline(in, l);)
    if (l.rfind(prefix, 0) == 0) found = l;
  return found;
}

double field_value(const std::string& line, const std::string& key) {
  const auto pos = line.find(key + "=");
  if (pos == std::string::npos) return std::nan("");
  return std::stod(line.substr(pos + key.size() + 1));
}

// ---- 1 -------------------------------------------------------------------

Outcome gradient_correctness(const fs::path& work) {
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream out;
  const int code = cli::grad_check_cmd(cli::GradCheckOptions{}, out);
  const double secs = seconds_since(t0);
  std::ofstream(work / "grad_check.csv") << out.str();
  const std::string verdict = line_with(out.str(), code == 0 ? "PASS" : "FAIL");
  const double err = field_value(verdict, "max_rel_error");
  return {code == 0 && err < 1e-4 && secs < 120.0,
          "max_rel_error=" + num(err, 3) + " in " + num(secs, 3) + " s (limits 1e-4, 120 s)"};
}

// ---- 2 -------------------------------------------------------------------

std::vector<ScoredId> brute_force(std::span<const float> q, const RetrievalIndex& index, std::size_t k) {
  std::vector<ScoredId> all;
  for (std::size_t r = 0; r < index.size(); ++r) {
    const auto e = index.embedding(r);
    double dot = 0;
    for (std::size_t j = 0; j < e.size(); ++j) dot += static_cast<double>(q[j]) * e[j];
    all.push_back({index.id(r), std::clamp(dot, -1.0, 1.0)});
  }
  std::sort(all.begin(), all.end(), [](const ScoredId& a, const ScoredId& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  });
  all.resize(std::min(k, all.size()));
  return all;
}

Outcome retrieval_recall() {
  WorldSpec spec;
  spec.images = 200;
  spec.distractors = 1000;
  spec.heldout_images = 0;
  spec.seed = 21;
  const World w = generate_world(spec);
  const auto images = world_images(w, false);
  const auto texts = world_texts(w, false);
  const BagOfWordsProvider provider(images.classes);
  const PairsFile corpus = cli::build_corpus(images, texts, 5, provider);

  std::set<std::pair<std::int64_t, std::int64_t>> retrieved;
  for (const auto& p : corpus.pairs) retrieved.insert({p.image_id, p.text_id});
  std::size_t hits = 0;
  for (const auto& t : w.truth) hits += retrieved.count({t.image_id, t.text_id});
  const double recall = static_cast<double>(hits) / static_cast<double>(w.truth.size());

  // Sub-instances: random candidate subsets, random image query, random K.
  Rng rng(22);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 60);
    std::vector<std::int64_t> ids;
    std::vector<std::string> raw;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& s = texts.sentences[uniform_index(rng, texts.sentences.size())];
      if (std::find(ids.begin(), ids.end(), s.text_id) != ids.end()) continue;
      ids.push_back(s.text_id);
      raw.push_back(s.text);
    }
    const auto index = RetrievalIndex::build(ids, raw, provider);
    std::vector<std::string> tags;
    for (const auto& r : images.images[uniform_index(rng, images.images.size())].regions) tags.push_back(r.tag);
    const auto q = embed_tag_query(tags, provider);
    const std::size_t k = 1 + uniform_index(rng, 10);
    if (retrieve_topk(q, index, k) != brute_force(q, index, k)) ++mismatches;
  }
  return {recall >= 0.95 && mismatches == 0,
          "top-5 recall=" + num(recall) + " over " + std::to_string(w.truth.size()) +
              " images (limit 0.95); top-K mismatches=" + std::to_string(mismatches) + "/1000"};
}

// ---- 3 -------------------------------------------------------------------

Outcome masking_proportionality() {
  const World w = generate_world([] {
    WorldSpec s;
    s.images = 60;
    s.distractors = 60;
    s.heldout_images = 0;
    s.seed = 31;
    return s;
  }());
  const auto images = world_images(w, false);
  const auto texts = world_texts(w, false);
  const auto provider = cli::make_provider("bow", images);
  PairsFile corpus = cli::build_corpus(images, texts, 1, *provider);

  // The one-hot linker scores exact matches 1; rescore so the draw is uneven.
  Rng rng(32);
  double worst_l1 = 0;
  std::size_t plans = 0, bad = 0, instances = 0;
  for (auto& pair : corpus.pairs) {
    if (pair.links.size() < 2) continue;
    if (++instances > 10) break;
    for (auto& l : pair.links) l.score = 0.05 + 0.95 * uniform01(rng);
    const auto p = link_mask_probabilities(pair.links, 0.15);
    std::vector<double> freq(p.size(), 0.0);
    const auto& sentence = texts.get(pair.text_id);
    const auto& regions = images.get(pair.image_id);
    const int draws = 100000;
    for (int d = 0; d < draws; ++d, ++plans) {
      const MaskPlan plan = plan_rn_masks(pair, sentence, regions, 0.15, rng);
      for (auto i : plan.drawn_links) freq[i] += 1.0 / draws;
      const bool one_modality = plan.text.empty() != plan.regions.empty() &&
                                (plan.modality == MaskModality::Text ? plan.regions.empty() : plan.text.empty());
      if (!one_modality) ++bad;
    }
    double l1 = 0;
    for (std::size_t i = 0; i < p.size(); ++i) l1 += std::abs(freq[i] - p[i]);
    worst_l1 = std::max(worst_l1, l1);
  }
  return {instances > 0 && worst_l1 < 0.05 && bad == 0,
          "worst L1=" + num(worst_l1, 3) + " over " + std::to_string(std::min<std::size_t>(instances, 10)) +
              " pairs x 1e5 plans (limit 0.05); one-modality violations=" + std::to_string(bad) + "/" +
              std::to_string(plans)};
}

// ---- 4, 5, 6 ---------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::size_t col(const std::string& name) const {
    return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
  }
};

CsvTable read_csv(const fs::path& p) {
  CsvTable t;
  std::istringstream in(slurp(p));
  std::string line;
  std::getline(in, line);
  std::istringstream h(line);
  for (std::string c; std::getline(h, c, ',');) t.header.push_back(c);
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream r(line);
    for (std::string c; std::getline(r, c, ',');) row.push_back(std::stod(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Outcome curriculum_arithmetic(const fs::path& metrics) {
  const CsvTable t = read_csv(metrics);
  const auto epoch = t.col("epoch"), l_rt = t.col("l_rt"), l_rp = t.col("l_rp"), l_is = t.col("l_is"),
             wr = t.col("weighted_rest"), total = t.col("total"), active = t.col("w_active");
  double worst = 0;
  std::size_t wrong_gate = 0;
  for (const auto& r : t.rows) {
    const bool warm = r[epoch] < 1;
    if (warm == (r[active] != 0)) ++wrong_gate;
    const double expected = warm ? r[l_rt] + r[l_rp] + r[l_is] : r[l_rt] + r[wr];
    worst = std::max(worst, std::abs(r[total] - expected));
  }
  return {!t.rows.empty() && worst < 1e-6 && wrong_gate == 0,
          "max |total - rule|=" + num(worst, 3) + " over " + std::to_string(t.rows.size()) +
              " steps (limit 1e-6); rows with the wrong weighting gate=" + std::to_string(wrong_gate)};
}

struct ToyRun {
  fs::path checkpoint;
  fs::path world;
  fs::path metrics;
  double seconds = 0;
};

ToyRun toy_pretrain(const fs::path& work) {
  ToyRun r;
  r.world = work / "world500";
  cli::SynthGenOptions gen;
  gen.spec.images = 500;
  gen.spec.seed = 51;
  gen.out = r.world;
  std::ostringstream log;
  cli::synth_gen(gen, log);

  cli::BuildCorpusOptions bc;
  bc.images = r.world / "images.jsonl";
  bc.texts = r.world / "texts.jsonl";
  bc.k = 5;
  bc.out = work / "corpus500";
  cli::build_corpus_cmd(bc, log);

  cli::PretrainOptions pt;
  pt.config = fs::path(UVLP_SOURCE_DIR) / "configs" / "toy.cfg";
  pt.images = bc.images;
  pt.texts = bc.texts;
  pt.pairs = bc.out / "pairs.jsonl";
  pt.out = work / "pretrain500";
  pt.seed = 0;
  const auto t0 = std::chrono::steady_clock::now();
  cli::pretrain_cmd(pt, log);
  r.seconds = seconds_since(t0);
  r.checkpoint = pt.out / "checkpoint";
  r.metrics = pt.out / "metrics.csv";
  std::ofstream(work / "pretrain500.log") << log.str();
  return r;
}

double probe(const ToyRun& run, const std::string& suite) {
  cli::ProbeOptions o;
  o.checkpoint = run.checkpoint;
  o.data = run.world;
  o.suite = suite;
  std::ostringstream out;
  cli::probe_cmd(o, out);
  return field_value(out.str(), "accuracy");
}

// ---- 7 -------------------------------------------------------------------

Outcome ratio_trend(const fs::path& work) {
  cli::SynthGenOptions gen;
  gen.spec.images = 200;
  gen.spec.distractors = 0;
  gen.spec.heldout_images = 100;
  gen.spec.seed = 71;
  gen.out = work / "world_ratio";
  std::ostringstream log;
  cli::synth_gen(gen, log);

  cli::AblationOptions o;
  o.data = gen.out;
  o.config = fs::path(UVLP_SOURCE_DIR) / "configs" / "toy.cfg";
  o.out = work / "ablate_ratio";
  const int code = cli::ablate_ratio_cmd(o, log);
  std::ofstream(work / "ablate_ratio.log") << log.str();
  std::string medians;
  std::istringstream in(log.str());
  for (std::string l; std::getline(in, l);)
    if (l.rfind("median itm at ratio ", 0) == 0) {
      const std::string rest = l.substr(20);
      medians += (medians.empty() ? "" : ", ") + rest.substr(0, rest.find(':')) + "->" +
                 rest.substr(rest.find(':') + 2);
    }
  return {code == cli::kExitOk, "median ITM accuracy by ratio: " + medians +
                                     " (needs non-decreasing and a gap of at least 0.05)"};
}

// ---- 8 -------------------------------------------------------------------

Outcome determinism(const fs::path& work) {
  cli::SynthGenOptions gen;
  gen.spec.images = 48;
  gen.spec.distractors = 48;
  gen.spec.heldout_images = 0;
  gen.spec.seed = 81;
  gen.out = work / "world_det";
  std::ostringstream log;
  cli::synth_gen(gen, log);
  cli::BuildCorpusOptions bc;
  bc.images = gen.out / "images.jsonl";
  bc.texts = gen.out / "texts.jsonl";
  bc.k = 2;
  bc.out = work / "corpus_det";
  cli::build_corpus_cmd(bc, log);

  auto options = [&](const std::string& name) {
    cli::PretrainOptions pt;
    pt.images = bc.images;
    pt.texts = bc.texts;
    pt.pairs = bc.out / "pairs.jsonl";
    pt.out = work / name;
    pt.epochs = 2;
    pt.batch_size = 16;
    pt.seed = 5;
    return pt;
  };
  for (const char* name : {"det_a", "det_b"}) {
    fs::remove_all(work / name);
    cli::pretrain_cmd(options(name), log);
  }
  fs::remove_all(work / "det_c");
  auto first = options("det_c");
  first.stop_after = 7;  // mid-epoch
  cli::pretrain_cmd(first, log);
  auto second = options("det_c");
  second.resume = work / "det_c" / "checkpoint";
  cli::pretrain_cmd(second, log);

  const bool same_seed = slurp(work / "det_a/metrics.csv") == slurp(work / "det_b/metrics.csv") &&
                         slurp(work / "det_a/checkpoint/params.bin") == slurp(work / "det_b/checkpoint/params.bin");
  const bool resumed = slurp(work / "det_a/metrics.csv") == slurp(work / "det_c/metrics.csv") &&
                       slurp(work / "det_a/checkpoint/params.bin") == slurp(work / "det_c/checkpoint/params.bin") &&
                       slurp(work / "det_a/checkpoint/opt.bin") == slurp(work / "det_c/checkpoint/opt.bin");
  return {same_seed && resumed, std::string("same-seed runs identical: ") + (same_seed ? "yes" : "no") +
                                    "; resume after step 7 identical: " + (resumed ? "yes" : "no")};
}

// ---- 9 -------------------------------------------------------------------

Outcome closed_forms() {
  using nk::Tape;
  using nk::Tensor;
  Tape<double> t(false);
  auto uniform = [&](std::size_t rows, std::size_t cols) {
    return t.constant(Tensor<double>({rows, cols}, std::vector<double>(rows * cols, 0.37)));
  };
  const std::size_t V = 200, C = 40;
  const double mlm = t.value(mlm_loss(t, uniform(3, V), std::vector<std::size_t>{5, 17, 199}))[0];
  const double mrc = t.value(mrc_loss(t, uniform(2, C), std::vector<std::size_t>{0, 39}))[0];
  const double pm = t.value(p_mrtc_loss(t, uniform(2, V), {{5, 6}, {7}}))[0];
  double itm = 0;
  for (int y : {0, 1})
    itm = std::max(itm, std::abs(t.value(itm_loss(t, t.constant(Tensor<double>({1}, {0.0})), y))[0] - std::log(2.0)));
  const double e_mlm = std::abs(mlm - std::log(V)), e_mrc = std::abs(mrc - std::log(C)),
               e_pm = std::abs(pm - std::log(V));
  return {e_mlm < 1e-5 && e_mrc < 1e-5 && e_pm < 1e-5 && itm < 1e-7,
          "|MLM-lnV|=" + num(e_mlm, 2) + ", |MRC-lnC|=" + num(e_mrc, 2) + ", |p-MRTC-lnV|=" + num(e_pm, 2) +
              ", |ITM(0)-ln2|=" + num(itm, 2)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("Acceptance criteria 1-9");
  fs::path work = fs::temp_directory_path() / "uvlp_acceptance";
  bool strict = false;
  app.add_option("--work", work, "Scratch directory for generated worlds and runs")->capture_default_str();
  app.add_flag("--strict", strict, "Exit 3 when any criterion fails");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);

  std::size_t passed = 0, total = 0;
  auto report = [&](int id, const std::string& name, const std::function<Outcome()>& check) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    ++total;
    passed += o.pass;
    std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << " " << name << ": " << o.detail << " ["
              << num(seconds_since(t0), 3) << " s]" << std::endl;
  };

  report(1, "gradient correctness", [&] { return gradient_correctness(work); });
  report(2, "retrieval recall", retrieval_recall);
  report(3, "masking proportionality", masking_proportionality);

  ToyRun toy;
  std::string toy_error;
  try {
    toy = toy_pretrain(work);
  } catch (const std::exception& e) {
    toy_error = e.what();
  }
  auto needs_toy = [&](const std::function<Outcome()>& f) {
    return [&, f] { return toy_error.empty() ? f() : Outcome{false, "toy pretrain failed: " + toy_error}; };
  };
  report(4, "curriculum arithmetic", needs_toy([&] { return curriculum_arithmetic(toy.metrics); }));
  report(5, "ITM learnability", needs_toy([&] {
           const double acc = probe(toy, "itm");
           return Outcome{acc >= 0.9 && toy.seconds < 900, "held-out ITM accuracy=" + num(acc) +
                                                               " (limit 0.9); pretrain took " + num(toy.seconds, 3) +
                                                               " s (limit 900)"};
         }));
  report(6, "grounding", needs_toy([&] {
           const double acc = probe(toy, "grounding");
           return Outcome{acc >= 2.0 / 6.0, "grounding accuracy=" + num(acc) + " (limit 2/6=0.3333, chance 1/6)"};
         }));
  report(7, "alignment-ratio trend", [&] { return ratio_trend(work); });
  report(8, "determinism and resume", [&] { return determinism(work); });
  report(9, "loss closed forms", closed_forms);

  std::cout << "acceptance: " << passed << "/" << total << " criteria pass" << std::endl;
  return strict && passed != total ? cli::kExitThreshold : cli::kExitOk;
}
