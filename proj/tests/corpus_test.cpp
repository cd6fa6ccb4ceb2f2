#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "uvlp/aligner/lexicon.hpp"
#include "uvlp/aligner/vocabulary.hpp"
#include "uvlp/cli/commands.hpp"
#include "uvlp/corpus/checkpoint.hpp"
#include "uvlp/corpus/config_file.hpp"
#include "uvlp/corpus/dataset_io.hpp"
#include "uvlp/corpus/ratio.hpp"

using namespace uvlp;
namespace fs = std::filesystem;

namespace {

/// write, read back, write again; both writes must agree byte for byte.
template <typename T, typename Write, typename Read>
void check_round_trip(const T& value, Write write, Read read) {
  std::ostringstream first;
  write(first, value);
  std::istringstream in(first.str());
  std::ostringstream second;
  write(second, read(in, "x.jsonl"));
  CHECK(first.str() == second.str());
}

/// Replaces line `n` (1-based) of a JSONL document.
std::string with_line(const std::string& doc, std::size_t n, const std::string& line) {
  std::istringstream in(doc);
  std::string out, l;
  for (std::size_t i = 1; std::getline(in, l); ++i) out += (i == n ? line : l) + "\n";
  return out;
}

std::string line_of(const std::string& doc, std::size_t n) {
  std::istringstream in(doc);
  std::string l;
  for (std::size_t i = 1; i <= n; ++i) std::getline(in, l);
  return l;
}

void replace_first(std::string& s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  s.replace(pos, from.size(), to);
}

template <typename F>
ValidationError expect_validation(F&& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    return e;
  }
  FAIL("expected ValidationError");
  return ValidationError("", 0, "", "");
}

std::vector<TruthRecord> fake_truth(std::size_t n) {
  std::vector<TruthRecord> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i].image_id = static_cast<std::int64_t>(i);
    t[i].text_id = static_cast<std::int64_t>(1000 + 7 * i);
  }
  return t;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("world generation") {
  const WorldSpec spec = test::small_world(5);
  const World w = generate_world(spec);
  CHECK(w.images.size() == spec.images);
  CHECK(w.heldout_images.size() == spec.heldout_images);
  CHECK(w.texts.size() == spec.images + spec.distractors);
  CHECK(w.classes.size() == spec.concepts);

  std::set<std::set<std::string>> concept_sets;
  for (const auto* list : {&w.images, &w.heldout_images})
    for (const auto& img : *list) {
      std::set<std::string> s;
      for (const auto& r : img.regions) {
        s.insert(r.tag);
        CHECK(w.classes[r.class_id] == r.tag);
        CHECK(r.box.x2 > r.box.x1);
        CHECK(r.box.x2 <= img.width);
        CHECK(r.box.y2 <= img.height);
      }
      CHECK(s.size() == img.regions.size());
      CHECK(concept_sets.insert(s).second);
    }

  const Lexicon& lex = Lexicon::builtin();
  std::map<std::int64_t, std::string> text_by_id;
  for (const auto* list : {&w.texts, &w.heldout_texts})
    for (const auto& t : *list) text_by_id[t.text_id] = t.text;
  std::set<std::int64_t> planted;
  for (const auto& rec : w.truth) {
    planted.insert(rec.text_id);
    const auto& imgs = rec.heldout ? w.heldout_images : w.images;
    const auto img = std::find_if(imgs.begin(), imgs.end(), [&](const RegionSet& r) { return r.image_id == rec.image_id; });
    REQUIRE(img != imgs.end());
    const auto words = tokenize(text_by_id.at(rec.text_id));
    std::set<std::string> nouns;
    for (const auto& wd : words)
      if (lex.tag(wd) == Pos::Noun) nouns.insert(wd);
    std::set<std::string> tags;
    for (const auto& r : img->regions) tags.insert(r.tag);
    CHECK(nouns == tags);
    CHECK(rec.phrases.size() == img->regions.size());
    for (const auto& ph : rec.phrases) CHECK(words.at(ph.phrase.end - 1) == img->regions.at(ph.region).tag);
  }
  for (const auto& t : w.texts) {
    if (planted.count(t.text_id)) continue;
    std::set<std::string> nouns;
    for (const auto& wd : tokenize(t.text))
      if (lex.tag(wd) == Pos::Noun) nouns.insert(wd);
    CHECK(!nouns.empty());
    CHECK(concept_sets.count(nouns) == 0);
  }

  std::ostringstream a, b;
  write_images(a, world_images(generate_world(spec), false));
  write_images(b, world_images(w, false));
  CHECK(a.str() == b.str());
}

TEST_CASE("noise-free regions equal their prototypes") {
  WorldSpec spec = test::small_world(1);
  spec.noise_sigma = 0;
  const World w = generate_world(spec);
  for (const auto& img : w.images)
    for (const auto& r : img.regions) CHECK(r.feature == w.prototypes[r.class_id]);
}

TEST_CASE("region noise has the requested spread") {
  WorldSpec spec;
  spec.images = 1700;
  spec.distractors = 0;
  spec.heldout_images = 0;
  spec.noise_sigma = 0.5;
  spec.seed = 9;
  const World w = generate_world(spec);
  double sq = 0;
  std::size_t n = 0;
  for (const auto& img : w.images)
    for (const auto& r : img.regions)
      for (std::size_t j = 0; j < r.feature.size(); ++j) {
        const double d = r.feature[j] - w.prototypes[r.class_id][j];
        sq += d * d;
        ++n;
      }
  CHECK(n / spec.region_dim >= 10000);
  CHECK(std::abs(std::sqrt(sq / static_cast<double>(n)) / 0.5 - 1.0) < 0.05);
}

TEST_CASE("invalid world specs") {
  WorldSpec s;
  s.concepts = 1;
  CHECK_THROWS_AS(generate_world(s), std::invalid_argument);
  s = WorldSpec{};
  s.noise_sigma = -1;
  CHECK_THROWS_AS(generate_world(s), std::invalid_argument);
}

TEST_CASE("dataset files round-trip byte for byte") {
  const World w = generate_world(test::small_world(6));
  const auto images = world_images(w, false);
  const auto texts = world_texts(w, false);
  const auto provider = cli::make_provider("bow", images);
  const PairsFile pairs = cli::build_corpus(images, texts, 3, *provider);

  check_round_trip(images, write_images, read_images);
  check_round_trip(texts, write_texts, read_texts);
  check_round_trip(pairs, write_pairs, read_pairs);
  check_round_trip(w.truth, write_truth, read_truth);

  std::istringstream in([&] { std::ostringstream o; write_images(o, images); return o.str(); }());
  const auto back = read_images(in);
  REQUIRE(back.images.size() == images.images.size());
  CHECK(back.images[3].regions[2].feature == images.images[3].regions[2].feature);
  CHECK(back.images[3].regions[2].box == images.images[3].regions[2].box);
}

TEST_CASE("ingest validation reports file, line and field") {
  const World w = generate_world(test::small_world(7));
  std::ostringstream os;
  write_images(os, world_images(w, false));
  const std::string doc = os.str();

  SUBCASE("inverted box") {
    std::string rec = line_of(doc, 3);
    const auto box = rec.find("\"box\":[");
    const auto end = rec.find(']', box);
    rec.replace(box, end - box + 1, "\"box\":[50.0,10.0,40.0,20.0]");
    const auto e = expect_validation([&] {
      std::istringstream in(with_line(doc, 3, rec));
      read_images(in, "imgs.jsonl");
    });
    CHECK(e.file() == "imgs.jsonl");
    CHECK(e.line() == 3);
    CHECK(e.field() == "regions[0].box");
    CHECK(std::string(e.what()).find("imgs.jsonl:3") != std::string::npos);
  }
  SUBCASE("feature dimension differs from the header") {
    std::string rec = line_of(doc, 2);
    replace_first(rec, "\"feature\":[", "\"feature\":[0.5,");
    const auto e = expect_validation([&] {
      std::istringstream in(with_line(doc, 2, rec));
      read_images(in);
    });
    CHECK(e.field() == "regions[0].feature");
  }
  SUBCASE("image without regions") {
    const auto e = expect_validation([&] {
      std::istringstream in(with_line(doc, 4, R"({"image_id":999,"width":10,"height":10,"regions":[]})"));
      read_images(in);
    });
    CHECK(e.field() == "regions");
    CHECK(e.line() == 4);
  }
  SUBCASE("class id out of range") {
    std::string rec = line_of(doc, 2);
    const auto pos = rec.find("\"class_id\":");
    const auto end = rec.find(',', pos);
    rec.replace(pos, end - pos, "\"class_id\":500");
    const auto e = expect_validation([&] {
      std::istringstream in(with_line(doc, 2, rec));
      read_images(in);
    });
    CHECK(e.field() == "regions[0].class_id");
  }
  SUBCASE("duplicate image id") {
    const auto e = expect_validation([&] {
      std::istringstream in(with_line(doc, 3, line_of(doc, 2)));
      read_images(in);
    });
    CHECK(e.field() == "image_id");
  }
  SUBCASE("malformed JSON and missing header") {
    expect_validation([&] {
      std::istringstream in(with_line(doc, 2, "{not json"));
      read_images(in);
    });
    const auto e = expect_validation([&] {
      std::istringstream in(line_of(doc, 2) + "\n");
      read_images(in);
    });
    CHECK(e.field() == "kind");
  }
  SUBCASE("empty sentence") {
    std::ostringstream t;
    write_texts(t, world_texts(w, false));
    const auto e = expect_validation([&] {
      std::istringstream in(with_line(t.str(), 2, R"({"text_id":77777,"text":"  , ."})"));
      read_texts(in);
    });
    CHECK(e.field() == "text");
  }
  SUBCASE("pairs referring to unknown ids") {
    const auto images = world_images(w, false);
    const auto texts = world_texts(w, false);
    WeakPair p;
    p.image_id = 123456;
    p.text_id = texts.sentences[0].text_id;
    p.rank = 1;
    const auto e = expect_validation([&] { validate_pairs({p}, images, texts); });
    CHECK(e.field() == "image_id");
    p.image_id = images.images[0].image_id;
    p.links = {{{0, 1}, 99, 0.5}};
    CHECK_THROWS_AS(validate_pairs({p}, images, texts), ValidationError);
  }
}

TEST_CASE("alignment-ratio mixing") {
  const auto truth = fake_truth(1000);
  std::multiset<std::int64_t> all_images, all_texts;
  for (const auto& t : truth) all_images.insert(t.image_id), all_texts.insert(t.text_id);
  auto aligned = [&](const MixedCorpus& m) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) n += m.pairs[i].text_id == truth[i].text_id;
    return n;
  };

  for (double ratio : {0.0, 0.25, 0.5, 0.998, 1.0}) {
    CAPTURE(ratio);
    const MixedCorpus m = mix_alignment_ratio(truth, ratio, 3);
    REQUIRE(m.pairs.size() == truth.size());
    const auto expected = static_cast<std::size_t>(std::llround(ratio * 1000));
    CHECK(m.aligned == expected);
    CHECK(aligned(m) == expected);
    std::multiset<std::int64_t> imgs, txts;
    for (const auto& p : m.pairs) imgs.insert(p.image_id), txts.insert(p.text_id);
    CHECK(imgs == all_images);
    CHECK(txts == all_texts);
  }
  CHECK(mix_alignment_ratio(truth, 0.5, 3).pairs == mix_alignment_ratio(truth, 0.5, 3).pairs);
  CHECK(mix_alignment_ratio(truth, 0.5, 3).pairs != mix_alignment_ratio(truth, 0.5, 4).pairs);
  CHECK_THROWS_AS(mix_alignment_ratio(truth, 1.5, 0), std::invalid_argument);
  CHECK_THROWS_AS(mix_alignment_ratio(fake_truth(3), 2.0 / 3.0, 0), std::invalid_argument);
}

TEST_CASE("config files") {
  std::istringstream good("# comment\nmodel.hidden = 32  # trailing\n\ntrain.peak_lr=0.002\ntrain.weighted_itm = false\n");
  const ConfigMap map = parse_config(good);
  CHECK(map.at("model.hidden") == "32");
  CHECK(map.at("train.peak_lr") == "0.002");
  ModelConfig m;
  TrainConfig t;
  apply_config(map, m, t);
  CHECK(m.hidden == 32);
  CHECK(t.peak_lr == 0.002);
  CHECK(!t.weighted_itm);

  std::istringstream dup("model.hidden = 1\nmodel.hidden = 2\n");
  CHECK_THROWS_AS(parse_config(dup), std::invalid_argument);
  std::istringstream noeq("model.hidden 2\n");
  CHECK_THROWS_AS(parse_config(noeq), std::invalid_argument);
  try {
    apply_config({{"model.hiden", "3"}}, m, t);
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("model.hiden") != std::string::npos);
  }
  CHECK_THROWS_AS(apply_config({{"train.epochs", "many"}}, m, t), std::invalid_argument);

  ModelConfig m2;
  TrainConfig t2;
  apply_config(config_echo(m, t), m2, t2);
  CHECK(config_echo(m2, t2) == config_echo(m, t));
}

TEST_CASE("shipped presets") {
  ModelConfig m;
  TrainConfig t;
  apply_config(load_config(test::source_dir() / "configs" / "full-scale.cfg"), m, t);
  CHECK(m.layers == 12);
  CHECK(m.hidden == 768);
  CHECK(m.heads == 12);
  CHECK(t.batch_size == 480);
  CHECK(t.peak_lr == 6e-5);
  CHECK(t.epochs == 20);
  CHECK(t.warmup_epochs == 1);

  ModelConfig toy;
  TrainConfig tt;
  apply_config(load_config(test::source_dir() / "configs" / "toy.cfg"), toy, tt);
  CHECK(toy.layers == 2);
  CHECK(toy.hidden == 64);
  CHECK(toy.heads == 4);
  CHECK(toy.region_dim == 16);
  CHECK(tt.batch_size == 32);
  CHECK(tt.epochs == 5);
}

TEST_CASE("checkpoints") {
  const World w = generate_world(test::small_world(8));
  PretrainData data{world_images(w, false), world_texts(w, false), {}};
  const auto provider = cli::make_provider("bow", data.images);
  data.pairs = cli::build_corpus(data.images, data.texts, 2, *provider).pairs;
  ModelConfig mc;
  mc.hidden = 32;
  mc.intermediate = 64;
  mc = cli::fit_model_config(mc, data);
  TrainConfig tc;
  tc.epochs = 1;
  tc.batch_size = 8;
  const ConfigMap echo = config_echo(mc, tc);
  const fs::path dir = test::scratch_dir("ckpt");

  Trainer straight(data, mc, tc);
  for (int i = 0; i < 4; ++i) straight.step();
  save_checkpoint(dir / "a", straight.model().params(), straight.optimizer(), echo, straight.state());
  save_checkpoint(dir / "b", straight.model().params(), straight.optimizer(), echo, straight.state());
  for (const char* f : {"manifest.json", "params.bin", "opt.bin"})
    CHECK(test::slurp(dir / "a" / f) == test::slurp(dir / "b" / f));

  SUBCASE("save, load, step equals step") {
    Trainer resumed(data, mc, tc);
    const auto manifest = load_checkpoint(dir / "a", resumed.model().params(), &resumed.optimizer(), echo);
    resumed.set_state(manifest.state);
    CHECK(manifest.state.global_step == 4);
    CHECK(manifest.optimizer_step == 4);
    std::ostringstream x, y;
    for (int i = 0; i < 3; ++i) {
      write_metrics_row(x, straight.step());
      write_metrics_row(y, resumed.step());
    }
    CHECK(x.str() == y.str());
    for (std::size_t i = 0; i < straight.model().params().size(); ++i)
      CHECK(straight.model().params()[i].tensor.values == resumed.model().params()[i].tensor.values);
  }
  SUBCASE("differing config names the field") {
    ConfigMap other = echo;
    other["model.hidden"] = "48";
    Trainer t(data, mc, tc);
    try {
      load_checkpoint(dir / "a", t.model().params(), nullptr, other);
      FAIL("expected CheckpointError");
    } catch (const CheckpointError& e) {
      CHECK(std::string(e.what()).find("model.hidden") != std::string::npos);
    }
  }
  SUBCASE("corrupt payload is refused") {
    std::string bytes = test::slurp(dir / "b" / "params.bin");
    bytes[bytes.size() / 2] ^= 0x01;
    std::ofstream(dir / "b" / "params.bin", std::ios::binary) << bytes;
    Trainer t(data, mc, tc);
    const auto before = t.model().params()[0].tensor.values;
    CHECK_THROWS_AS(load_checkpoint(dir / "b", t.model().params(), nullptr, echo), CheckpointError);
    CHECK(t.model().params()[0].tensor.values == before);
  }
  SUBCASE("digests and manifest") {
    CHECK(sha256_hex({}) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    const std::string abc = "abc";
    CHECK(sha256_hex({reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size()}) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    const auto man = read_manifest(dir / "a");
    CHECK(man.format_version == kCheckpointFormat);
    CHECK(man.params_sha256 == file_sha256(dir / "a" / "params.bin"));
    CHECK(man.params.size() == straight.model().params().size());
    CHECK(fs::file_size(dir / "a" / "params.bin") == straight.model().params().parameter_count() * 4);
  }
  fs::remove_all(dir);
}

}  // TEST_SUITE
