#include "uvlp/corpus/ratio.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "uvlp/numkernel/random.hpp"

namespace uvlp {

MixedCorpus mix_alignment_ratio(const std::vector<TruthRecord>& truth, double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw std::invalid_argument("alignment ratio must lie in [0,1]");
  std::vector<const TruthRecord*> recs;
  for (const auto& t : truth)
    if (!t.heldout) recs.push_back(&t);
  const std::size_t n = recs.size();
  const auto keep = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 0.5));
  if (n - keep == 1) throw std::invalid_argument("alignment ratio leaves a single image to misalign");

  Rng rng(derive_seed(seed, {11}));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);

  // Sattolo's algorithm: a uniformly random single cycle, hence no fixed point.
  std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(keep), order.end());
  std::vector<std::size_t> perm = rest;
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(rng, i - 1)]);

  std::vector<std::size_t> caption_of(n);
  for (std::size_t i = 0; i < keep; ++i) caption_of[order[i]] = order[i];
  for (std::size_t i = 0; i < rest.size(); ++i) caption_of[rest[i]] = perm[i];

  MixedCorpus out;
  out.aligned = keep;
  for (std::size_t i = 0; i < n; ++i) {
    WeakPair p;
    p.image_id = recs[i]->image_id;
    p.text_id = recs[caption_of[i]]->text_id;
    p.rank = 1;
    p.score = 0.0;
    out.pairs.push_back(std::move(p));
  }
  return out;
}

}  // namespace uvlp
