#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "uvlp/aligner/types.hpp"
#include "uvlp/aligner/vocabulary.hpp"

namespace uvlp {

/// Region sets keyed by image id, in file order.
struct ImageCollection {
  std::size_t region_dim = 0;
  std::vector<std::string> classes;
  std::vector<RegionSet> images;

  const RegionSet& get(std::int64_t id) const {
    auto it = index.find(id);
    if (it == index.end()) throw std::out_of_range("unknown image id " + std::to_string(id));
    return images[it->second];
  }
  void reindex() {
    index.clear();
    for (std::size_t i = 0; i < images.size(); ++i) index.emplace(images[i].image_id, i);
  }

  std::unordered_map<std::int64_t, std::size_t> index;
};

/// Sentences keyed by text id, in file order, with the shared vocabulary.
struct TextCollection {
  Vocabulary vocab;
  std::vector<Sentence> sentences;

  const Sentence& get(std::int64_t id) const {
    auto it = index.find(id);
    if (it == index.end()) throw std::out_of_range("unknown text id " + std::to_string(id));
    return sentences[it->second];
  }
  void reindex() {
    index.clear();
    for (std::size_t i = 0; i < sentences.size(); ++i) index.emplace(sentences[i].text_id, i);
  }

  std::unordered_map<std::int64_t, std::size_t> index;
};

/// Everything pre-training consumes.
struct PretrainData {
  ImageCollection images;
  TextCollection texts;
  std::vector<WeakPair> pairs;
};

}  // namespace uvlp
