#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "uvlp/cli/commands.hpp"
#include "uvlp/corpus/checkpoint.hpp"
#include "uvlp/corpus/dataset_io.hpp"

using namespace uvlp;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

RunResult run(const std::string& args, const fs::path& scratch) {
  const fs::path out = scratch / "stdout.txt";
  const fs::path err = scratch / "stderr.txt";
  const std::string cmd = "\"" + test::cli_path() + "\" " + args + " > \"" + out.string() + "\" 2> \"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = test::slurp(out);
  r.err = test::slurp(err);
  return r;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

/// A small world plus a K=2 corpus, shared by the pretrain cases.
struct Fixture {
  fs::path dir;
  Fixture() : dir(test::scratch_dir("cli_world")) {
    const RunResult g = run("synth-gen --out " + (dir / "world").string() +
                                " --images 24 --distractors 24 --heldout 8 --concepts 10 --min-concepts 3"
                                " --max-concepts 3 --seed 4",
                            dir);
    REQUIRE(g.code == 0);
    const RunResult b = run("build-corpus --images " + (dir / "world/images.jsonl").string() + " --texts " +
                                (dir / "world/texts.jsonl").string() + " --k 2 --out " + (dir / "corpus").string(),
                            dir);
    REQUIRE(b.code == 0);
  }
  ~Fixture() { fs::remove_all(dir); }
  std::string pretrain(const fs::path& out, const std::string& extra = "") const {
    return "pretrain --images " + (dir / "world/images.jsonl").string() + " --texts " +
           (dir / "world/texts.jsonl").string() + " --pairs " + (dir / "corpus/pairs.jsonl").string() +
           " --out " + out.string() + " --epochs 2 --batch-size 8 --seed 1 " + extra;
  }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help documents the defaults") {
  const fs::path d = test::scratch_dir("cli_help");
  const RunResult top = run("--help", d);
  CHECK(top.code == 0);
  for (const char* sub : {"synth-gen", "build-corpus", "pretrain", "probe", "grad-check", "inspect-attention",
                          "ablate-k", "ablate-ratio", "ablate-witm"})
    CHECK(top.out.find(sub) != std::string::npos);
  const RunResult bc = run("build-corpus --help", d);
  CHECK(bc.out.find("--k") != std::string::npos);
  CHECK(bc.out.find("[5]") != std::string::npos);
  const RunResult pre = run("pretrain --help", d);
  CHECK(pre.out.find("batch 480") != std::string::npos);
  CHECK(pre.out.find("6e-5") != std::string::npos);
  CHECK(run("no-such-command", d).code == 2);
  fs::remove_all(d);
}

TEST_CASE("synth-gen and build-corpus") {
  const fs::path d = test::scratch_dir("cli_corpus");
  const std::string gen = " --images 30 --distractors 30 --heldout 4 --concepts 12 --min-concepts 3 --max-concepts 3";
  REQUIRE(run("synth-gen --out " + (d / "a").string() + gen, d).code == 0);
  REQUIRE(run("synth-gen --out " + (d / "b").string() + gen, d).code == 0);
  for (const char* f : {"images.jsonl", "texts.jsonl", "heldout_images.jsonl", "heldout_texts.jsonl", "truth.jsonl"})
    CHECK(test::slurp(d / "a" / f) == test::slurp(d / "b" / f));

  auto build = [&](const std::string& extra, const fs::path& out) {
    return run("build-corpus --images " + (d / "a/images.jsonl").string() + " --texts " +
                   (d / "a/texts.jsonl").string() + " --out " + out.string() + extra,
               d);
  };
  REQUIRE(build("", d / "k5").code == 0);
  REQUIRE(build(" --k 10", d / "k10").code == 0);
  REQUIRE(build("", d / "k5again").code == 0);
  CHECK(test::slurp(d / "k5/pairs.jsonl") == test::slurp(d / "k5again/pairs.jsonl"));
  CHECK(file_sha256(d / "k5/pairs.jsonl") == file_sha256(d / "k5again/pairs.jsonl"));

  const PairsFile k5 = load_pairs(d / "k5/pairs.jsonl");
  const PairsFile k10 = load_pairs(d / "k10/pairs.jsonl");
  CHECK(k5.k == 5);
  CHECK(k5.pairs.size() == 30 * 5);
  CHECK(k10.k == 10);
  CHECK(k10.pairs.size() == 30 * 10);
  std::map<std::int64_t, std::size_t> per_image;
  for (const auto& p : k10.pairs) ++per_image[p.image_id];
  for (const auto& [id, n] : per_image) CHECK(n == 10);

  CHECK(build(" --k 0", d / "k0").code == 2);
  CHECK(build(" --provider nope", d / "bad").code == 2);

  std::string images = test::slurp(d / "a/images.jsonl");
  const auto pos = images.find("\"box\":[");
  images.replace(pos, images.find(']', pos) - pos + 1, "\"box\":[9.0,1.0,3.0,2.0]");
  std::ofstream(d / "broken.jsonl") << images;
  const RunResult bad = run("build-corpus --images " + (d / "broken.jsonl").string() + " --texts " +
                                (d / "a/texts.jsonl").string() + " --out " + (d / "x").string(),
                            d);
  CHECK(bad.code == 2);
  CHECK(bad.err.find("broken.jsonl:2") != std::string::npos);
  CHECK(bad.err.find("regions[0].box") != std::string::npos);
  fs::remove_all(d);
}

TEST_CASE("pretrain is deterministic and resumable") {
  const Fixture fx;
  const fs::path d = fx.dir;
  REQUIRE(run(fx.pretrain(d / "a"), d).code == 0);
  REQUIRE(run(fx.pretrain(d / "b"), d).code == 0);
  CHECK(test::slurp(d / "a/metrics.csv") == test::slurp(d / "b/metrics.csv"));
  CHECK(test::slurp(d / "a/checkpoint/params.bin") == test::slurp(d / "b/checkpoint/params.bin"));
  CHECK(fs::exists(d / "a/checkpoints/epoch-0/params.bin"));
  CHECK(fs::exists(d / "a/checkpoints/epoch-1/params.bin"));

  const auto rows = lines(test::slurp(d / "a/metrics.csv"));
  REQUIRE(rows.size() == 1 + 2 * 6);
  const auto manifest = read_manifest(d / "a/checkpoint");
  CHECK(std::to_string(manifest.state.global_step) == rows.back().substr(0, rows.back().find(',')));
  CHECK(manifest.params_sha256 == file_sha256(d / "a/checkpoint/params.bin"));

  const RunResult first = run(fx.pretrain(d / "c", "--stop-after 5"), d);
  REQUIRE(first.code == 0);
  CHECK(lines(test::slurp(d / "c/metrics.csv")).size() == 6);
  const RunResult second = run(fx.pretrain(d / "c", "--resume " + (d / "c/checkpoint").string()), d);
  REQUIRE(second.code == 0);
  CHECK(second.out.find("resumed from step 5") != std::string::npos);
  CHECK(test::slurp(d / "c/metrics.csv") == test::slurp(d / "a/metrics.csv"));
  CHECK(test::slurp(d / "c/checkpoint/params.bin") == test::slurp(d / "a/checkpoint/params.bin"));
  CHECK(test::slurp(d / "c/checkpoint/opt.bin") == test::slurp(d / "a/checkpoint/opt.bin"));

  const RunResult mismatch = run(fx.pretrain(d / "e", "--peak-lr 0.01 --resume " + (d / "a/checkpoint").string()), d);
  CHECK(mismatch.code == 2);
  CHECK(mismatch.err.find("train.peak_lr") != std::string::npos);

  {  // probe exit codes
    const std::string base = "probe --checkpoint " + (d / "a/checkpoint").string() + " --data " +
                             (d / "world").string();
    const RunResult ok = run(base + " --threshold 0", d);
    CHECK(ok.code == 0);
    CHECK(ok.out.find("suite=itm") != std::string::npos);
    CHECK(ok.out.find("total=16") != std::string::npos);
    CHECK(run(base + " --threshold 1.01", d).code == 3);
    const RunResult g = run(base + " --suite grounding", d);
    CHECK(g.code == 0);
    CHECK(g.out.find("suite=grounding") != std::string::npos);
    CHECK(run(base + " --suite nope", d).code == 2);
  }
  {  // inspect-attention
    const RunResult r = run("inspect-attention --checkpoint " + (d / "a/checkpoint").string() + " --data " +
                                (d / "world").string() + " --out " + (d / "att.csv").string(),
                            d);
    CHECK(r.code == 0);
    CHECK(lines(test::slurp(d / "att.csv")).size() > 1);
  }
}

TEST_CASE("grad-check passes and catches a corrupted backward") {
  const fs::path d = test::scratch_dir("cli_grad");
  const RunResult ok = run("grad-check --samples 8", d);
  CHECK(ok.code == 0);
  const auto rows = lines(ok.out);
  REQUIRE(rows.size() > 2);
  CHECK(rows.front() == "parameter,checked,max_rel_error,max_abs_error");
  CHECK(rows.back().rfind("PASS", 0) == 0);
  std::set<std::string> names;
  for (std::size_t i = 1; i + 1 < rows.size(); ++i) CHECK(names.insert(rows[i].substr(0, rows[i].find(','))).second);
  FusionModel<double> m(ModelConfig::toy(), 0);
  CHECK(names.size() == m.params().size());

  const RunResult bad = run("grad-check --samples 8 --fault-op matmul", d);
  CHECK(bad.code == 3);
  CHECK(lines(bad.out).back().rfind("FAIL", 0) == 0);
  CHECK(run("grad-check --fault-op MatMul", d).code == 2);
  fs::remove_all(d);
}

}  // TEST_SUITE
