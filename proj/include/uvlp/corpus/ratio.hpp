#pragma once

#include <cstdint>
#include <vector>

#include "uvlp/aligner/types.hpp"
#include "uvlp/corpus/world.hpp"

namespace uvlp {

struct MixedCorpus {
  std::vector<WeakPair> pairs;  // one per training truth record, in truth order
  std::size_t aligned = 0;
};

/// Pairs every training image with exactly one planted caption. A shuffled
/// prefix of round(ratio·N) images keeps its own caption; the remaining
/// captions are permuted among the remaining images without fixed points, so
/// the multisets of images and captions are preserved. Links are left empty.
/// Throws std::invalid_argument for ratio outside [0,1] or when exactly one
/// image would have to be misaligned.
MixedCorpus mix_alignment_ratio(const std::vector<TruthRecord>& truth, double ratio, std::uint64_t seed);

}  // namespace uvlp
