#include <iostream>

#include <CLI11.hpp>

#include "uvlp/cli/commands.hpp"
#include "uvlp/corpus/checkpoint.hpp"
#include "uvlp/corpus/dataset_io.hpp"

namespace cli = uvlp::cli;

namespace {

template <typename T>
void optional_flag(CLI::App* app, const std::string& name, std::optional<T>& slot, const std::string& help) {
  app->add_option_function<T>(name, [&slot](const T& v) { slot = v; }, help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised vision-language pre-training toolkit"};
  app.require_subcommand(1);
  int exit_code = cli::kExitOk;
  std::function<int()> run;

  // synth-gen
  cli::SynthGenOptions sg;
  auto* gen = app.add_subcommand("synth-gen", "Generate a planted synthetic world");
  gen->add_option("--out", sg.out, "Output directory")->required();
  gen->add_option("--images", sg.spec.images, "Training images")->capture_default_str();
  gen->add_option("--distractors", sg.spec.distractors, "Distractor captions")->capture_default_str();
  gen->add_option("--heldout", sg.spec.heldout_images, "Held-out probe images")->capture_default_str();
  gen->add_option("--concepts", sg.spec.concepts, "Concept vocabulary size")->capture_default_str();
  gen->add_option("--region-dim", sg.spec.region_dim, "Region feature dimension d_v")->capture_default_str();
  gen->add_option("--sigma", sg.spec.noise_sigma, "Region feature noise std")->capture_default_str();
  gen->add_option("--min-concepts", sg.spec.min_concepts, "Fewest concepts per image")->capture_default_str();
  gen->add_option("--max-concepts", sg.spec.max_concepts, "Most concepts per image")->capture_default_str();
  gen->add_option("--adjective-prob", sg.spec.adjective_prob, "Chance a phrase gets an adjective")
      ->capture_default_str();
  gen->add_option("--seed", sg.spec.seed, "Random seed")->capture_default_str();
  gen->callback([&] { run = [&] { return cli::synth_gen(sg, std::cout); }; });

  // build-corpus
  cli::BuildCorpusOptions bc;
  auto* build = app.add_subcommand("build-corpus", "Retrieve top-K captions per image and link phrases");
  build->add_option("--images", bc.images, "images.jsonl")->required();
  build->add_option("--texts", bc.texts, "texts.jsonl")->required();
  build->add_option("--k", bc.k, "Captions retrieved per image (default 5)")->capture_default_str();
  build->add_option("--provider", bc.provider, "Embedding provider: bow or hash")->capture_default_str();
  build->add_option("--hash-dim", bc.hash_dim, "Buckets of the hash provider")->capture_default_str();
  build->add_option("--out", bc.out, "Output directory")->required();
  build->callback([&] { run = [&] { return cli::build_corpus_cmd(bc, std::cout); }; });

  // pretrain
  cli::PretrainOptions pt;
  auto* pre = app.add_subcommand(
      "pretrain",
      "Curriculum pre-training. Defaults come from the toy preset (batch 32, 5 epochs, peak lr 1e-3); "
      "configs/full-scale.cfg holds L=12, H=768, A=12, batch 480, peak lr 6e-5, 20 epochs");
  optional_flag(pre, "--config", pt.config, "key = value config file");
  pre->add_option("--images", pt.images, "images.jsonl")->required();
  pre->add_option("--texts", pt.texts, "texts.jsonl")->required();
  pre->add_option("--pairs", pt.pairs, "pairs.jsonl")->required();
  pre->add_option("--out", pt.out, "Output directory")->required();
  optional_flag(pre, "--seed", pt.seed, "Seed (default 0)");
  optional_flag(pre, "--epochs", pt.epochs, "Epochs (toy 5, full-scale 20)");
  optional_flag(pre, "--batch-size", pt.batch_size, "Batch size (toy 32, full-scale 480)");
  optional_flag(pre, "--warmup-epochs", pt.warmup_epochs, "Curriculum warmup epochs m (default 1)");
  optional_flag(pre, "--weighted-itm", pt.weighted_itm, "Weight R-P and I-S losses by w_ITM (default true)");
  optional_flag(pre, "--schedule", pt.schedule, "sum or round-robin (default sum)");
  optional_flag(pre, "--peak-lr", pt.peak_lr, "Peak learning rate (toy 1e-3, full-scale 6e-5)");
  optional_flag(pre, "--resume", pt.resume, "Checkpoint directory to continue from");
  optional_flag(pre, "--stop-after", pt.stop_after, "Stop and checkpoint after this many steps");
  pre->callback([&] { run = [&] { return cli::pretrain_cmd(pt, std::cout); }; });

  // probe
  cli::ProbeOptions pr;
  auto* probe = app.add_subcommand("probe", "Held-out ITM or grounding probe");
  probe->add_option("--checkpoint", pr.checkpoint, "Checkpoint directory")->required();
  probe->add_option("--data", pr.data, "World directory")->required();
  probe->add_option("--suite", pr.suite, "itm or grounding")->capture_default_str();
  probe->add_option("--seed", pr.seed, "Seed for shuffled pairs")->capture_default_str();
  optional_flag(probe, "--threshold", pr.threshold, "Exit 3 when accuracy is below this");
  probe->callback([&] { run = [&] { return cli::probe_cmd(pr, std::cout); }; });

  // grad-check
  cli::GradCheckOptions gc;
  auto* grad = app.add_subcommand("grad-check", "Finite-difference gradient check in double precision");
  optional_flag(grad, "--config", gc.config, "key = value config file (default: toy preset)");
  grad->add_option("--tolerance", gc.tolerance, "Maximum relative error")->capture_default_str();
  grad->add_option("--samples", gc.samples, "Entries per tensor, 0 for all")->capture_default_str();
  grad->add_option("--seed", gc.seed, "Seed")->capture_default_str();
  optional_flag(grad, "--fault-op", gc.fault_op, "Corrupt this op's backward (negative control)");
  grad->add_option("--fault-factor", gc.fault_factor, "Backward scale of the corrupted op")->capture_default_str();
  grad->callback([&] { run = [&] { return cli::grad_check_cmd(gc, std::cout); }; });

  // inspect-attention
  cli::InspectAttentionOptions ia;
  auto* insp = app.add_subcommand("inspect-attention", "Dump text-to-region attention of one held-out pair");
  insp->add_option("--checkpoint", ia.checkpoint, "Checkpoint directory")->required();
  insp->add_option("--data", ia.data, "World directory")->required();
  insp->add_option("--example", ia.example, "Held-out example index")->capture_default_str();
  insp->add_option("--seed", ia.seed, "Probe seed")->capture_default_str();
  insp->add_option("--out", ia.out, "CSV path")->required();
  insp->callback([&] { run = [&] { return cli::inspect_attention_cmd(ia, std::cout); }; });

  // ablations
  cli::AblationOptions ab;
  auto add_ablation = [&](const char* name, const char* help, int (*fn)(const cli::AblationOptions&, std::ostream&)) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--data", ab.data, "World directory")->required();
    optional_flag(sub, "--config", ab.config, "key = value config file");
    sub->add_option("--seeds", ab.seeds, "Seeds")->capture_default_str();
    optional_flag(sub, "--epochs", ab.epochs, "Epochs per run");
    optional_flag(sub, "--batch-size", ab.batch_size, "Batch size per run");
    sub->add_option("--provider", ab.provider, "Embedding provider")->capture_default_str();
    sub->add_option("--out", ab.out, "Output directory")->required();
    sub->callback([&, fn] { run = [&, fn] { return fn(ab, std::cout); }; });
    return sub;
  };
  add_ablation("ablate-k", "Pre-train and probe for each retrieval K", cli::ablate_k_cmd)
      ->add_option("--ks", ab.ks, "K values")
      ->capture_default_str();
  add_ablation("ablate-ratio", "Pre-train and probe across aligned-pair ratios", cli::ablate_ratio_cmd)
      ->add_option("--ratios", ab.ratios, "Ratios in [0,1]")
      ->capture_default_str();
  add_ablation("ablate-witm", "Pre-train with and without w_ITM weighting", cli::ablate_witm_cmd)
      ->add_option("--k", ab.k, "Corpus K")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? cli::kExitOk : cli::kExitValidation;
  }
  try {
    exit_code = run();
  } catch (const uvlp::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return cli::kExitValidation;
  } catch (const uvlp::CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << '\n';
    return cli::kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return cli::kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return exit_code;
}
