#include "uvlp/fusion/probe.hpp"

#include <cmath>

namespace uvlp {

double logistic(double s) { return 1.0 / (1.0 + std::exp(-s)); }

template <typename T>
AttentionProbe attention_probe(FusionModel<T>& model, const FusedInput& input) {
  nk::Tape<T> tape(false);
  auto enc = model.encode(tape, input);
  AttentionProbe out;
  out.text_len = enc.text_len;
  out.region_count = enc.region_count;
  const std::size_t n = input.length();
  for (const auto& layer : enc.attention) {
    std::vector<nk::Tensor<double>> full_layer;
    std::vector<nk::Tensor<double>> t2r_layer;
    for (nk::Var p : layer) {
      const auto& v = tape.value(p);
      nk::Tensor<double> full({n, n});
      for (std::size_t i = 0; i < v.size(); ++i) full.values[i] = v[i];
      nk::Tensor<double> t2r({enc.text_len, enc.region_count});
      for (std::size_t i = 0; i < enc.text_len; ++i)
        for (std::size_t r = 0; r < enc.region_count; ++r)
          t2r.at(i, r) = full.at(i, enc.text_len + r);
      full_layer.push_back(std::move(full));
      t2r_layer.push_back(std::move(t2r));
    }
    out.full.push_back(std::move(full_layer));
    out.text_to_region.push_back(std::move(t2r_layer));
  }
  out.last_layer_mean = nk::Tensor<double>({enc.text_len, enc.region_count});
  if (!out.text_to_region.empty()) {
    const auto& last = out.text_to_region.back();
    for (const auto& head : last)
      for (std::size_t i = 0; i < head.values.size(); ++i) out.last_layer_mean.values[i] += head.values[i];
    for (auto& v : out.last_layer_mean.values) v /= static_cast<double>(last.size());
  }
  return out;
}

template <typename T>
double itm_logit(FusionModel<T>& model, const FusedInput& input) {
  nk::Tape<T> tape(false);
  auto enc = model.encode(tape, input);
  return static_cast<double>(tape.value(model.itm_score(tape, enc.hidden))[0]);
}

template <typename T>
ProbeResult itm_probe(FusionModel<T>& model, const std::vector<ProbeExample>& examples) {
  ProbeResult res;
  for (const auto& ex : examples) {
    if (itm_logit(model, make_fused_input(ex.matched_tokens, ex.image)) > 0.0) ++res.correct;
    ++res.total;
    if (itm_logit(model, make_fused_input(ex.shuffled_tokens, ex.image)) <= 0.0) ++res.correct;
    ++res.total;
  }
  return res;
}

template <typename T>
ProbeResult grounding_probe(FusionModel<T>& model, const std::vector<ProbeExample>& examples) {
  ProbeResult res;
  for (const auto& ex : examples) {
    const auto probe = attention_probe(model, make_fused_input(ex.matched_tokens, ex.image));
    const auto& m = probe.last_layer_mean;
    for (const auto& pp : ex.phrases) {
      std::vector<double> acc(probe.region_count, 0.0);
      for (std::size_t tok = pp.phrase.start; tok < pp.phrase.end; ++tok) {
        const std::size_t row = FusedInput::text_row(tok);
        for (std::size_t r = 0; r < probe.region_count; ++r) acc[r] += m.at(row, r);
      }
      std::size_t best = 0;
      for (std::size_t r = 1; r < acc.size(); ++r)
        if (acc[r] > acc[best]) best = r;
      if (best == pp.region) ++res.correct;
      ++res.total;
    }
  }
  return res;
}

template AttentionProbe attention_probe<float>(FusionModel<float>&, const FusedInput&);
template AttentionProbe attention_probe<double>(FusionModel<double>&, const FusedInput&);
template double itm_logit<float>(FusionModel<float>&, const FusedInput&);
template double itm_logit<double>(FusionModel<double>&, const FusedInput&);
template ProbeResult itm_probe<float>(FusionModel<float>&, const std::vector<ProbeExample>&);
template ProbeResult itm_probe<double>(FusionModel<double>&, const std::vector<ProbeExample>&);
template ProbeResult grounding_probe<float>(FusionModel<float>&, const std::vector<ProbeExample>&);
template ProbeResult grounding_probe<double>(FusionModel<double>&, const std::vector<ProbeExample>&);

}  // namespace uvlp
