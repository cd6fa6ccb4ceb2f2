#include "uvlp/corpus/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "uvlp/aligner/noun_phrase.hpp"
#include "uvlp/numkernel/random.hpp"

namespace uvlp {

using Json = nlohmann::ordered_json;

namespace {

std::string describe(const std::string& file, std::size_t line, const std::string& field,
                     const std::string& message) {
  std::string s = file;
  if (line) s += ":" + std::to_string(line);
  if (!field.empty()) s += ": " + field;
  return s + ": " + message;
}

/// Shortest decimal that reads back as the same float.
double float_literal(float v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  double d = 0;
  std::from_chars(buf, res.ptr, d);
  return d;
}

Json float_array(const std::vector<float>& v) {
  Json a = Json::array();
  for (float x : v) a.push_back(float_literal(x));
  return a;
}

/// Line-by-line JSONL reader that knows where it is for error messages.
class JsonlReader {
 public:
  JsonlReader(std::istream& is, std::string name) : is_(is), name_(std::move(name)) {}

  bool next(Json& out) {
    std::string text;
    while (std::getline(is_, text)) {
      ++line_;
      if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        out = Json::parse(text);
      } catch (const Json::parse_error& e) {
        fail("", std::string("malformed JSON: ") + e.what());
      }
      if (!out.is_object()) fail("", "record is not a JSON object");
      return true;
    }
    return false;
  }

  Json header(const char* what) {
    Json h;
    if (!next(h)) fail("", std::string("empty file, expected a ") + what + " header");
    if (h.value("kind", "") != "header") fail("kind", "first record must be the header");
    if (!h.contains("schema") || !h["schema"].is_number_integer() || h["schema"].get<int>() != kSchemaVersion)
      fail("schema", "unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");
    return h;
  }

  [[noreturn]] void fail(const std::string& field, const std::string& message) const {
    throw ValidationError(name_, line_, field, message);
  }

  const Json& field(const Json& obj, const std::string& key, const std::string& path) const {
    auto it = obj.find(key);
    if (it == obj.end()) fail(path + key, "missing field");
    return *it;
  }

  double number(const Json& obj, const std::string& key, const std::string& path = "") const {
    const Json& v = field(obj, key, path);
    if (!v.is_number()) fail(path + key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path + key, "not finite");
    return d;
  }

  std::int64_t integer(const Json& obj, const std::string& key, const std::string& path = "") const {
    const Json& v = field(obj, key, path);
    if (!v.is_number_integer()) fail(path + key, "expected an integer");
    return v.get<std::int64_t>();
  }

  std::size_t count(const Json& obj, const std::string& key, const std::string& path = "") const {
    const auto v = integer(obj, key, path);
    if (v < 0) fail(path + key, "must be >= 0");
    return static_cast<std::size_t>(v);
  }

  std::string string(const Json& obj, const std::string& key, const std::string& path = "") const {
    const Json& v = field(obj, key, path);
    if (!v.is_string()) fail(path + key, "expected a string");
    return v.get<std::string>();
  }

  const Json& array(const Json& obj, const std::string& key, const std::string& path = "") const {
    const Json& v = field(obj, key, path);
    if (!v.is_array()) fail(path + key, "expected an array");
    return v;
  }

  Span span(const Json& obj, const std::string& path) const {
    const Json& a = array(obj, "span", path);
    if (a.size() != 2 || !a[0].is_number_unsigned() || !a[1].is_number_unsigned())
      fail(path + "span", "expected [start, end] with non-negative integers");
    Span s{a[0].get<std::size_t>(), a[1].get<std::size_t>()};
    if (s.end <= s.start) fail(path + "span", "end must be greater than start");
    return s;
  }

  std::size_t line() const { return line_; }
  const std::string& name() const { return name_; }

 private:
  std::istream& is_;
  std::string name_;
  std::size_t line_ = 0;
};

template <typename Fn>
auto with_file(const std::filesystem::path& path, Fn fn) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path.string(), 0, "", "cannot open file");
  return fn(in, path.filename().string());
}

template <typename Fn>
void to_file(const std::filesystem::path& path, Fn fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  fn(out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void put(std::ostream& os, const Json& j) { os << j.dump() << '\n'; }

}  // namespace

ValidationError::ValidationError(std::string file, std::size_t line, std::string field,
                                 const std::string& message)
    : std::runtime_error(describe(file, line, field, message)),
      file_(std::move(file)),
      line_(line),
      field_(std::move(field)) {}

void write_images(std::ostream& os, const ImageCollection& images) {
  put(os, Json{{"kind", "header"}, {"schema", kSchemaVersion}, {"d_v", images.region_dim},
               {"classes", images.classes}});
  for (const auto& img : images.images) {
    Json regions = Json::array();
    for (const auto& r : img.regions) {
      regions.push_back(Json{{"feature", float_array(r.feature)},
                             {"box", Json::array({float_literal(r.box.x1), float_literal(r.box.y1),
                                                  float_literal(r.box.x2), float_literal(r.box.y2)})},
                             {"tag", r.tag},
                             {"class_id", r.class_id},
                             {"confidence", float_literal(r.confidence)}});
    }
    put(os, Json{{"image_id", img.image_id}, {"width", float_literal(img.width)},
                 {"height", float_literal(img.height)}, {"regions", std::move(regions)}});
  }
}

ImageCollection read_images(std::istream& is, const std::string& name) {
  JsonlReader rd(is, name);
  const Json h = rd.header("images");
  ImageCollection out;
  out.region_dim = rd.count(h, "d_v");
  if (out.region_dim == 0) rd.fail("d_v", "must be >= 1");
  for (const auto& c : rd.array(h, "classes")) {
    if (!c.is_string()) rd.fail("classes", "expected strings");
    out.classes.push_back(c.get<std::string>());
  }
  std::unordered_set<std::int64_t> seen;
  Json rec;
  while (rd.next(rec)) {
    RegionSet img;
    img.image_id = rd.integer(rec, "image_id");
    if (!seen.insert(img.image_id).second) rd.fail("image_id", "duplicate id " + std::to_string(img.image_id));
    img.width = static_cast<float>(rd.number(rec, "width"));
    img.height = static_cast<float>(rd.number(rec, "height"));
    if (img.width <= 0) rd.fail("width", "must be > 0");
    if (img.height <= 0) rd.fail("height", "must be > 0");
    const Json& regions = rd.array(rec, "regions");
    if (regions.empty()) rd.fail("regions", "image has no regions");
    for (std::size_t i = 0; i < regions.size(); ++i) {
      const std::string p = "regions[" + std::to_string(i) + "].";
      const Json& rj = regions[i];
      if (!rj.is_object()) rd.fail(p.substr(0, p.size() - 1), "expected an object");
      Region r;
      const Json& feat = rd.array(rj, "feature", p);
      if (feat.size() != out.region_dim)
        rd.fail(p + "feature", "dimension " + std::to_string(feat.size()) + " != header d_v " +
                                   std::to_string(out.region_dim));
      for (const auto& x : feat) {
        if (!x.is_number() || !std::isfinite(x.get<double>())) rd.fail(p + "feature", "non-finite or non-numeric value");
        r.feature.push_back(static_cast<float>(x.get<double>()));
      }
      const Json& box = rd.array(rj, "box", p);
      if (box.size() != 4) rd.fail(p + "box", "expected [x1, y1, x2, y2]");
      for (const auto& x : box)
        if (!x.is_number()) rd.fail(p + "box", "expected numbers");
      r.box = {box[0].get<float>(), box[1].get<float>(), box[2].get<float>(), box[3].get<float>()};
      if (r.box.x2 <= r.box.x1) rd.fail(p + "box", "x2 <= x1");
      if (r.box.y2 <= r.box.y1) rd.fail(p + "box", "y2 <= y1");
      if (r.box.x1 < 0 || r.box.y1 < 0 || r.box.x2 > img.width || r.box.y2 > img.height)
        rd.fail(p + "box", "outside the image");
      r.tag = rd.string(rj, "tag", p);
      if (r.tag.empty()) rd.fail(p + "tag", "empty tag");
      r.class_id = rd.count(rj, "class_id", p);
      if (r.class_id >= out.classes.size())
        rd.fail(p + "class_id", std::to_string(r.class_id) + " >= class count " + std::to_string(out.classes.size()));
      const double conf = rd.number(rj, "confidence", p);
      if (conf < 0 || conf > 1) rd.fail(p + "confidence", "must lie in [0,1]");
      r.confidence = static_cast<float>(conf);
      img.regions.push_back(std::move(r));
    }
    out.images.push_back(std::move(img));
  }
  out.reindex();
  return out;
}

void write_texts(std::ostream& os, const TextCollection& texts) {
  const auto& words = texts.vocab.words();
  put(os, Json{{"kind", "header"},
               {"schema", kSchemaVersion},
               {"vocabulary", std::vector<std::string>(words.begin() + Vocabulary::kSpecialCount, words.end())}});
  for (const auto& s : texts.sentences) put(os, Json{{"text_id", s.text_id}, {"text", s.text}});
}

TextCollection read_texts(std::istream& is, const std::string& name) {
  JsonlReader rd(is, name);
  const Json h = rd.header("texts");
  std::vector<std::string> words;
  for (const auto& w : rd.array(h, "vocabulary")) {
    if (!w.is_string()) rd.fail("vocabulary", "expected strings");
    words.push_back(w.get<std::string>());
  }
  TextCollection out;
  out.vocab = Vocabulary(words);
  std::unordered_set<std::int64_t> seen;
  Json rec;
  while (rd.next(rec)) {
    const auto id = rd.integer(rec, "text_id");
    if (!seen.insert(id).second) rd.fail("text_id", "duplicate id " + std::to_string(id));
    Sentence s = make_sentence(id, rd.string(rec, "text"), out.vocab);
    if (s.token_ids.empty()) rd.fail("text", "empty sentence");
    out.sentences.push_back(std::move(s));
  }
  out.reindex();
  return out;
}

void write_pairs(std::ostream& os, const PairsFile& pf) {
  put(os, Json{{"kind", "header"}, {"schema", kSchemaVersion}, {"k", pf.k}, {"provider", pf.provider}});
  for (const auto& p : pf.pairs) {
    Json links = Json::array();
    for (const auto& l : p.links)
      links.push_back(Json{{"span", Json::array({l.phrase.start, l.phrase.end})}, {"region", l.region}, {"score", l.score}});
    put(os, Json{{"image_id", p.image_id}, {"text_id", p.text_id}, {"rank", p.rank}, {"score", p.score},
                 {"label", p.label}, {"links", std::move(links)}});
  }
}

PairsFile read_pairs(std::istream& is, const std::string& name) {
  JsonlReader rd(is, name);
  const Json h = rd.header("pairs");
  PairsFile out;
  out.k = rd.count(h, "k");
  if (out.k == 0) rd.fail("k", "must be >= 1");
  out.provider = rd.string(h, "provider");
  Json rec;
  while (rd.next(rec)) {
    WeakPair p;
    p.image_id = rd.integer(rec, "image_id");
    p.text_id = rd.integer(rec, "text_id");
    p.rank = rd.count(rec, "rank");
    if (p.rank == 0) rd.fail("rank", "ranks are 1-based");
    p.score = rd.number(rec, "score");
    const auto label = rd.integer(rec, "label");
    if (label != 0 && label != 1) rd.fail("label", "must be 0 or 1");
    p.label = static_cast<int>(label);
    const Json& links = rd.array(rec, "links");
    for (std::size_t i = 0; i < links.size(); ++i) {
      const std::string path = "links[" + std::to_string(i) + "].";
      PhraseLink l;
      l.phrase = rd.span(links[i], path);
      l.region = rd.count(links[i], "region", path);
      l.score = rd.number(links[i], "score", path);
      if (l.score < 0 || l.score > 1) rd.fail(path + "score", "must lie in [0,1]");
      p.links.push_back(l);
    }
    out.pairs.push_back(std::move(p));
  }
  return out;
}

void write_truth(std::ostream& os, const std::vector<TruthRecord>& truth) {
  put(os, Json{{"kind", "header"}, {"schema", kSchemaVersion}});
  for (const auto& t : truth) {
    Json phrases = Json::array();
    for (const auto& p : t.phrases)
      phrases.push_back(Json{{"span", Json::array({p.phrase.start, p.phrase.end})}, {"region", p.region}});
    put(os, Json{{"split", t.heldout ? "heldout" : "train"}, {"image_id", t.image_id}, {"text_id", t.text_id},
                 {"phrases", std::move(phrases)}});
  }
}

std::vector<TruthRecord> read_truth(std::istream& is, const std::string& name) {
  JsonlReader rd(is, name);
  rd.header("truth");
  std::vector<TruthRecord> out;
  Json rec;
  while (rd.next(rec)) {
    TruthRecord t;
    const auto split = rd.string(rec, "split");
    if (split != "train" && split != "heldout") rd.fail("split", "expected \"train\" or \"heldout\"");
    t.heldout = split == "heldout";
    t.image_id = rd.integer(rec, "image_id");
    t.text_id = rd.integer(rec, "text_id");
    const Json& phrases = rd.array(rec, "phrases");
    for (std::size_t i = 0; i < phrases.size(); ++i) {
      const std::string path = "phrases[" + std::to_string(i) + "].";
      t.phrases.push_back({rd.span(phrases[i], path), rd.count(phrases[i], "region", path)});
    }
    out.push_back(std::move(t));
  }
  return out;
}

void validate_pairs(const std::vector<WeakPair>& pairs, const ImageCollection& images,
                    const TextCollection& texts, const std::string& name) {
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    const std::size_t line = i + 2;  // after the header
    if (!images.index.contains(p.image_id))
      throw ValidationError(name, line, "image_id", "unknown image " + std::to_string(p.image_id));
    if (!texts.index.contains(p.text_id))
      throw ValidationError(name, line, "text_id", "unknown text " + std::to_string(p.text_id));
    const auto& img = images.get(p.image_id);
    const auto& sent = texts.get(p.text_id);
    for (std::size_t j = 0; j < p.links.size(); ++j) {
      const std::string path = "links[" + std::to_string(j) + "]";
      if (p.links[j].region >= img.size())
        throw ValidationError(name, line, path + ".region", "region index out of range");
      if (std::find(sent.noun_phrases.begin(), sent.noun_phrases.end(), p.links[j].phrase) == sent.noun_phrases.end())
        throw ValidationError(name, line, path + ".span", "not a noun-phrase span of the sentence");
    }
  }
}

ImageCollection load_images(const std::filesystem::path& path) {
  return with_file(path, [](std::istream& in, const std::string& n) { return read_images(in, n); });
}
TextCollection load_texts(const std::filesystem::path& path) {
  return with_file(path, [](std::istream& in, const std::string& n) { return read_texts(in, n); });
}
PairsFile load_pairs(const std::filesystem::path& path) {
  return with_file(path, [](std::istream& in, const std::string& n) { return read_pairs(in, n); });
}
std::vector<TruthRecord> load_truth(const std::filesystem::path& path) {
  return with_file(path, [](std::istream& in, const std::string& n) { return read_truth(in, n); });
}
void save_images(const std::filesystem::path& path, const ImageCollection& images) {
  to_file(path, [&](std::ostream& os) { write_images(os, images); });
}
void save_texts(const std::filesystem::path& path, const TextCollection& texts) {
  to_file(path, [&](std::ostream& os) { write_texts(os, texts); });
}
void save_pairs(const std::filesystem::path& path, const PairsFile& pairs) {
  to_file(path, [&](std::ostream& os) { write_pairs(os, pairs); });
}
void save_truth(const std::filesystem::path& path, const std::vector<TruthRecord>& truth) {
  to_file(path, [&](std::ostream& os) { write_truth(os, truth); });
}

PretrainData load_pretrain_data(const std::filesystem::path& images, const std::filesystem::path& texts,
                                const std::filesystem::path& pairs) {
  PretrainData d;
  d.images = load_images(images);
  d.texts = load_texts(texts);
  d.pairs = load_pairs(pairs).pairs;
  validate_pairs(d.pairs, d.images, d.texts, pairs.filename().string());
  return d;
}

ImageCollection world_images(const World& world, bool heldout) {
  ImageCollection c;
  c.region_dim = world.prototypes.empty() ? 0 : world.prototypes.front().size();
  c.classes = world.classes;
  c.images = heldout ? world.heldout_images : world.images;
  c.reindex();
  return c;
}

TextCollection world_texts(const World& world, bool heldout) {
  std::vector<std::string> raw;
  for (const auto& t : world.texts) raw.push_back(t.text);
  TextCollection c;
  c.vocab = Vocabulary::from_texts(raw);
  for (const auto& t : heldout ? world.heldout_texts : world.texts)
    c.sentences.push_back(make_sentence(t.text_id, t.text, c.vocab));
  c.reindex();
  return c;
}

void save_world(const std::filesystem::path& dir, const World& world) {
  std::filesystem::create_directories(dir);
  save_images(dir / "images.jsonl", world_images(world, false));
  save_texts(dir / "texts.jsonl", world_texts(world, false));
  save_images(dir / "heldout_images.jsonl", world_images(world, true));
  save_texts(dir / "heldout_texts.jsonl", world_texts(world, true));
  save_truth(dir / "truth.jsonl", world.truth);
}

std::vector<ProbeExample> make_probe_examples(const ImageCollection& images, const TextCollection& texts,
                                              const std::vector<TruthRecord>& truth, std::uint64_t seed) {
  std::vector<const TruthRecord*> recs;
  for (const auto& t : truth)
    if (images.index.contains(t.image_id)) recs.push_back(&t);
  if (recs.size() < 2) throw std::invalid_argument("probe: need at least two truth records with images");
  Rng rng(derive_seed(seed, {7}));
  std::vector<ProbeExample> out;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    std::size_t j = uniform_index(rng, recs.size() - 1);
    if (j >= i) ++j;
    ProbeExample ex;
    ex.image = images.get(recs[i]->image_id);
    ex.matched_tokens = texts.get(recs[i]->text_id).token_ids;
    ex.shuffled_tokens = texts.get(recs[j]->text_id).token_ids;
    ex.phrases = recs[i]->phrases;
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<ProbeExample> load_probe_examples(const std::filesystem::path& dir, std::uint64_t seed) {
  return make_probe_examples(load_images(dir / "heldout_images.jsonl"), load_texts(dir / "heldout_texts.jsonl"),
                             load_truth(dir / "truth.jsonl"), seed);
}

}  // namespace uvlp
