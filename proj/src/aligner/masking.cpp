#include "uvlp/aligner/masking.hpp"

#include <algorithm>
#include <iostream>
#include <stdexcept>
#include <string>

#include "uvlp/aligner/vocabulary.hpp"

namespace uvlp {

std::vector<TextMask> plan_text_masks(std::span<const std::size_t> tokens, double rate,
                                      std::size_t vocab_size, Rng& rng) {
  if (!(rate > 0.0 && rate < 1.0)) {
    throw std::invalid_argument("mask rate must lie in (0,1), got " + std::to_string(rate));
  }
  std::vector<TextMask> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (uniform01(rng) >= rate) continue;
    TextMask m;
    m.position = i;
    m.target = tokens[i];
    const double u = uniform01(rng);
    if (u < 0.8 || vocab_size <= Vocabulary::kSpecialCount) {
      m.action = TextAction::Mask;
      m.replacement = Vocabulary::kMask;
    } else if (u < 0.9) {
      m.action = TextAction::Random;
      m.replacement = Vocabulary::kSpecialCount +
                      uniform_index(rng, vocab_size - Vocabulary::kSpecialCount);
    } else {
      m.action = TextAction::Keep;
      m.replacement = tokens[i];
    }
    out.push_back(m);
  }
  return out;
}

MaskPlan plan_rt_masks(std::span<const std::size_t> tag_tokens, const RegionSet& regions,
                       double rate, std::size_t vocab_size, Rng& rng) {
  MaskPlan plan;
  plan.text = plan_text_masks(tag_tokens, rate, vocab_size, rng);
  for (std::size_t r = 0; r < regions.size(); ++r) {
    if (uniform01(rng) >= rate) continue;
    const Region& reg = regions.regions[r];
    plan.regions.push_back({r, reg.class_id, reg.feature, {}});
  }
  return plan;
}

MaskPlan plan_is_masks(std::span<const std::size_t> tokens, double rate, std::size_t vocab_size,
                       Rng& rng) {
  MaskPlan plan;
  plan.text = plan_text_masks(tokens, rate, vocab_size, rng);
  plan.modality = plan.text.empty() ? MaskModality::None : MaskModality::Text;
  return plan;
}

std::vector<double> link_mask_probabilities(std::span<const PhraseLink> links, double rho) {
  std::vector<double> p(links.size(), 0.0);
  if (links.empty()) return p;
  double mean = 0.0;
  for (const auto& l : links) mean += l.score;
  mean /= static_cast<double>(links.size());
  if (mean <= 0.0) return p;
  for (std::size_t i = 0; i < links.size(); ++i) p[i] = std::min(1.0, rho * links[i].score / mean);
  return p;
}

MaskPlan plan_rn_masks(const WeakPair& pair, const Sentence& sentence, const RegionSet& regions,
                       double rho, Rng& rng) {
  if (pair.links.empty()) throw std::invalid_argument("plan_rn_masks: pair has no phrase links");
  MaskPlan plan;
  const bool text_side = uniform01(rng) < 0.5;
  plan.modality = text_side ? MaskModality::Text : MaskModality::Vision;

  const auto probs = link_mask_probabilities(pair.links, rho);
  for (std::size_t i = 0; i < probs.size(); ++i)
    if (uniform01(rng) < probs[i]) plan.drawn_links.push_back(i);

  std::vector<std::size_t> chosen = plan.drawn_links;
  if (chosen.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pair.links.size(); ++i)
      if (pair.links[i].score > pair.links[best].score) best = i;
    chosen.push_back(best);
    plan.forced = true;
  }

  if (text_side) {
    std::vector<bool> taken(sentence.token_ids.size(), false);
    for (std::size_t li : chosen) {
      const Span s = pair.links[li].phrase;
      for (std::size_t pos = s.start; pos < s.end && pos < sentence.token_ids.size(); ++pos) {
        if (taken[pos]) continue;
        taken[pos] = true;
        plan.text.push_back({pos, sentence.token_ids[pos], TextAction::Mask, Vocabulary::kMask});
      }
    }
    std::sort(plan.text.begin(), plan.text.end(),
              [](const TextMask& a, const TextMask& b) { return a.position < b.position; });
  } else {
    for (std::size_t li : chosen) {
      const PhraseLink& link = pair.links[li];
      if (link.region >= regions.size()) {
        throw std::out_of_range("plan_rn_masks: link region " + std::to_string(link.region) +
                                " >= region count " + std::to_string(regions.size()));
      }
      auto it = std::find_if(plan.regions.begin(), plan.regions.end(),
                             [&](const RegionMask& m) { return m.region == link.region; });
      if (it == plan.regions.end()) {
        const Region& reg = regions.regions[link.region];
        plan.regions.push_back({link.region, reg.class_id, reg.feature, {}});
        it = std::prev(plan.regions.end());
      }
      for (std::size_t pos = link.phrase.start; pos < link.phrase.end; ++pos)
        it->target_tokens.push_back(sentence.token_ids.at(pos));
    }
  }
  return plan;
}

std::vector<ItmSample> sample_itm_pairs(std::span<const WeakPair> batch, Rng& rng,
                                        double positive_prob) {
  std::vector<ItmSample> out;
  out.reserve(batch.size());
  if (batch.size() < 2) {
    if (!batch.empty()) std::cerr << "warning: ITM batch of 1, no negatives sampled\n";
    for (std::size_t i = 0; i < batch.size(); ++i)
      out.push_back({i, batch[i].image_id, batch[i].text_id, 1});
    return out;
  }
  std::vector<std::size_t> partners;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    ItmSample s{i, batch[i].image_id, batch[i].text_id, 1};
    if (uniform01(rng) >= positive_prob) {
      partners.clear();
      for (std::size_t j = 0; j < batch.size(); ++j) {
        if (j == i || batch[j].image_id == batch[i].image_id || batch[j].text_id == batch[i].text_id)
          continue;
        partners.push_back(j);
      }
      if (!partners.empty()) {
        const std::size_t j = partners[uniform_index(rng, partners.size())];
        s.text_id = batch[j].text_id;
        s.label = 0;
      }
    }
    out.push_back(s);
  }
  return out;
}

std::vector<std::size_t> apply_text_masks(std::span<const std::size_t> tokens,
                                          const std::vector<TextMask>& masks) {
  std::vector<std::size_t> out(tokens.begin(), tokens.end());
  for (const auto& m : masks) out.at(m.position) = m.replacement;
  return out;
}

}  // namespace uvlp
