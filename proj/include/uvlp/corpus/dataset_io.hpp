#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "uvlp/aligner/types.hpp"
#include "uvlp/corpus/dataset.hpp"
#include "uvlp/corpus/world.hpp"
#include "uvlp/fusion/probe.hpp"

namespace uvlp {

inline constexpr int kSchemaVersion = 1;

/// Schema violation in a dataset file. `line` is 1-based; `field` is a JSON
/// path such as "regions[2].box".
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string file, std::size_t line, std::string field, const std::string& message);
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::string file_;
  std::size_t line_;
  std::string field_;
};

// images.jsonl: header {kind, schema, d_v, classes}, then one RegionSet per line.
void write_images(std::ostream& os, const ImageCollection& images);
ImageCollection read_images(std::istream& is, const std::string& name = "images.jsonl");

// texts.jsonl: header {kind, schema, vocabulary}, then {text_id, text} per line.
// Words outside the header vocabulary encode as [UNK].
void write_texts(std::ostream& os, const TextCollection& texts);
TextCollection read_texts(std::istream& is, const std::string& name = "texts.jsonl");

struct PairsFile {
  std::size_t k = 0;
  std::string provider;
  std::vector<WeakPair> pairs;
};

// pairs.jsonl: header {kind, schema, k, provider}, then one WeakPair per line.
void write_pairs(std::ostream& os, const PairsFile& pairs);
PairsFile read_pairs(std::istream& is, const std::string& name = "pairs.jsonl");

// truth.jsonl: header {kind, schema}, then one TruthRecord per line.
void write_truth(std::ostream& os, const std::vector<TruthRecord>& truth);
std::vector<TruthRecord> read_truth(std::istream& is, const std::string& name = "truth.jsonl");

/// Checks every pair against the collections: ids exist, link regions are in
/// range and link spans are noun-phrase spans. Throws ValidationError.
void validate_pairs(const std::vector<WeakPair>& pairs, const ImageCollection& images,
                    const TextCollection& texts, const std::string& name = "pairs.jsonl");

ImageCollection load_images(const std::filesystem::path& path);
TextCollection load_texts(const std::filesystem::path& path);
PairsFile load_pairs(const std::filesystem::path& path);
std::vector<TruthRecord> load_truth(const std::filesystem::path& path);
void save_images(const std::filesystem::path& path, const ImageCollection& images);
void save_texts(const std::filesystem::path& path, const TextCollection& texts);
void save_pairs(const std::filesystem::path& path, const PairsFile& pairs);
void save_truth(const std::filesystem::path& path, const std::vector<TruthRecord>& truth);

/// Images, texts and pairs from a directory, cross-validated.
PretrainData load_pretrain_data(const std::filesystem::path& images, const std::filesystem::path& texts,
                                const std::filesystem::path& pairs);

/// Converts a generated world into collections sharing one vocabulary built
/// from the training texts.
ImageCollection world_images(const World& world, bool heldout);
TextCollection world_texts(const World& world, bool heldout);

/// Writes images.jsonl, texts.jsonl, heldout_images.jsonl,
/// heldout_texts.jsonl and truth.jsonl under `dir`.
void save_world(const std::filesystem::path& dir, const World& world);

/// One probe example per held-out image: its planted caption, the planted
/// caption of a different held-out image (drawn with `seed`), and the
/// phrase-to-region truth.
std::vector<ProbeExample> make_probe_examples(const ImageCollection& images, const TextCollection& texts,
                                              const std::vector<TruthRecord>& truth, std::uint64_t seed);

/// make_probe_examples over the held-out files of a world directory.
std::vector<ProbeExample> load_probe_examples(const std::filesystem::path& dir, std::uint64_t seed);

}  // namespace uvlp
