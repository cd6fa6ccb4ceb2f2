#include "uvlp/fusion/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "uvlp/numkernel/ops.hpp"

namespace uvlp {

using nk::Tape;
using nk::Tensor;
using nk::Var;

namespace {

/// Normal(0, std) truncated at ±2 std by resampling.
double truncated_normal(Rng& rng, double std) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    const double z = normal(rng);
    if (std::abs(z) <= 2.0) return z * std;
  }
}

}  // namespace

template <typename T>
FusionModel<T>::FusionModel(ModelConfig config, std::uint64_t seed) : cfg_(std::move(config)) {
  cfg_.validate();
  Rng rng(seed);
  const std::size_t H = cfg_.hidden;

  word_embeddings_ = &make_embedding("text.word_embeddings", cfg_.vocab_size, H, rng);
  position_embeddings_ = &make_embedding("text.position_embeddings", cfg_.max_tokens, H, rng);
  modality_embeddings_ = &make_embedding("modality_embeddings", cfg_.modalities, H, rng);
  text_norm_ = make_norm("text.norm", H);
  feature_proj_ = make_linear("vision.feature_proj", cfg_.region_dim, H, rng);
  box_proj_ = make_linear("vision.box_proj", 5, H, rng);
  vision_norm_ = make_norm("vision.norm", H);

  for (std::size_t l = 0; l < cfg_.layers; ++l) {
    const std::string p = "encoder.layer" + std::to_string(l) + ".";
    Layer layer;
    layer.query = make_linear(p + "attn.query", H, H, rng);
    layer.key = make_linear(p + "attn.key", H, H, rng);
    layer.value = make_linear(p + "attn.value", H, H, rng);
    layer.output = make_linear(p + "attn.output", H, H, rng);
    layer.attn_norm = make_norm(p + "attn.norm", H);
    layer.ffn_in = make_linear(p + "ffn.in", H, cfg_.intermediate, rng);
    layer.ffn_out = make_linear(p + "ffn.out", cfg_.intermediate, H, rng);
    layer.ffn_norm = make_norm(p + "ffn.norm", H);
    layers_.push_back(layer);
  }

  mlm_transform_ = {make_linear("head.mlm.dense", H, H, rng), make_norm("head.mlm.norm", H)};
  pmrtc_transform_ = {make_linear("head.pmrtc.dense", H, H, rng), make_norm("head.pmrtc.norm", H)};
  decoder_bias_ = &params_.add("head.vocab_decoder.bias", Tensor<T>({cfg_.vocab_size}));
  mrc_transform_ = {make_linear("head.mrc.dense", H, H, rng), make_norm("head.mrc.norm", H)};
  mrc_classifier_ = make_linear("head.mrc.classifier", H, cfg_.region_classes, rng);
  mrfr_transform_ = {make_linear("head.mrfr.dense", H, H, rng), make_norm("head.mrfr.norm", H)};
  mrfr_regressor_ = make_linear("head.mrfr.regressor", H, cfg_.region_dim, rng);
  itm_head_ = make_linear("head.itm", H, 1, rng);
}

template <typename T>
typename FusionModel<T>::Linear FusionModel<T>::make_linear(const std::string& name, std::size_t in,
                                                            std::size_t out, Rng& rng) {
  Tensor<T> w({in, out});
  for (auto& v : w.values) v = static_cast<T>(truncated_normal(rng, cfg_.init_std));
  Linear l;
  l.weight = &params_.add(name + ".weight", std::move(w));
  l.bias = &params_.add(name + ".bias", Tensor<T>({out}));
  return l;
}

template <typename T>
typename FusionModel<T>::Norm FusionModel<T>::make_norm(const std::string& name, std::size_t width) {
  Norm n;
  n.gamma = &params_.add(name + ".gamma", Tensor<T>({width}, T(1)));
  n.beta = &params_.add(name + ".beta", Tensor<T>({width}));
  return n;
}

template <typename T>
Tensor<T>& FusionModel<T>::make_embedding(const std::string& name, std::size_t rows, std::size_t cols,
                                          Rng& rng) {
  Tensor<T> e({rows, cols});
  for (auto& v : e.values) v = static_cast<T>(truncated_normal(rng, cfg_.init_std));
  return params_.add(name, std::move(e));
}

template <typename T>
Var FusionModel<T>::linear(Tape<T>& tape, Var x, const Linear& l) {
  return nk::add_bias(tape, nk::matmul(tape, x, tape.param(*l.weight)), tape.param(*l.bias));
}

template <typename T>
Var FusionModel<T>::norm(Tape<T>& tape, Var x, const Norm& n) {
  return nk::layer_norm(tape, x, tape.param(*n.gamma), tape.param(*n.beta), static_cast<T>(cfg_.ln_eps));
}

template <typename T>
Var FusionModel<T>::embed_text(Tape<T>& tape, const FusedInput& in) {
  const std::size_t n = in.text_len();
  if (n == 0) throw std::invalid_argument("embed_text: empty text segment");
  if (n > cfg_.max_tokens) {
    throw std::invalid_argument("embed_text: text length " + std::to_string(n) + " exceeds max_tokens " +
                                std::to_string(cfg_.max_tokens));
  }
  for (std::size_t id : in.token_ids) {
    if (id >= cfg_.vocab_size) {
      throw std::out_of_range("embed_text: token id " + std::to_string(id) + " >= vocab size " +
                              std::to_string(cfg_.vocab_size));
    }
  }
  std::vector<std::size_t> positions(n);
  for (std::size_t i = 0; i < n; ++i) positions[i] = i;
  const std::vector<std::size_t> modality(n, 0);
  Var words = nk::gather_rows(tape, tape.param(*word_embeddings_), in.token_ids);
  Var pos = nk::gather_rows(tape, tape.param(*position_embeddings_), positions);
  Var mod = nk::gather_rows(tape, tape.param(*modality_embeddings_), modality);
  return norm(tape, nk::add(tape, nk::add(tape, words, pos), mod), text_norm_);
}

template <typename T>
Var FusionModel<T>::embed_visual(Tape<T>& tape, const FusedInput& in) {
  const std::size_t k = in.region_count();
  if (k > cfg_.max_regions) {
    throw std::invalid_argument("embed_visual: " + std::to_string(k) + " regions exceed max_regions " +
                                std::to_string(cfg_.max_regions));
  }
  if (in.region_dim != cfg_.region_dim) {
    throw std::invalid_argument("embed_visual: feature dim " + std::to_string(in.region_dim) +
                                " != model region_dim " + std::to_string(cfg_.region_dim));
  }
  Tensor<T> feats({k, cfg_.region_dim});
  for (std::size_t i = 0; i < feats.values.size(); ++i) feats.values[i] = static_cast<T>(in.region_features[i]);
  Tensor<T> geom({k, 5});
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t j = 0; j < 5; ++j) geom.at(r, j) = static_cast<T>(in.geometry[r][j]);
  const std::vector<std::size_t> modality(k, 1);
  Var f = linear(tape, tape.constant(std::move(feats)), feature_proj_);
  Var g = linear(tape, tape.constant(std::move(geom)), box_proj_);
  Var mod = nk::gather_rows(tape, tape.param(*modality_embeddings_), modality);
  return norm(tape, nk::add(tape, nk::add(tape, f, g), mod), vision_norm_);
}

template <typename T>
typename FusionModel<T>::Encoding FusionModel<T>::encode(Tape<T>& tape, const FusedInput& in) {
  if (in.attend.size() != in.length()) {
    throw std::invalid_argument("encode: attention mask length " + std::to_string(in.attend.size()) +
                                " != sequence length " + std::to_string(in.length()));
  }
  Encoding enc;
  enc.text_len = in.text_len();
  enc.region_count = in.region_count();

  Var x = embed_text(tape, in);
  if (in.region_count() > 0) x = nk::concat_rows(tape, {x, embed_visual(tape, in)});

  const std::size_t H = cfg_.hidden;
  const std::size_t dh = H / cfg_.heads;
  const T inv_sqrt_dh = T(1) / std::sqrt(static_cast<T>(dh));
  for (const Layer& layer : layers_) {
    Var q = linear(tape, x, layer.query);
    Var k = linear(tape, x, layer.key);
    Var v = linear(tape, x, layer.value);
    std::vector<Var> heads;
    std::vector<Var> probs;
    for (std::size_t h = 0; h < cfg_.heads; ++h) {
      Var qh = nk::slice_cols(tape, q, h * dh, dh);
      Var kh = nk::slice_cols(tape, k, h * dh, dh);
      Var vh = nk::slice_cols(tape, v, h * dh, dh);
      Var scores = nk::scale(tape, nk::matmul_nt(tape, qh, kh), inv_sqrt_dh);
      Var p = nk::softmax_rows(tape, scores, std::span<const std::uint8_t>(in.attend));
      probs.push_back(p);
      heads.push_back(nk::matmul(tape, p, vh));
    }
    enc.attention.push_back(std::move(probs));
    Var attn = linear(tape, heads.size() == 1 ? heads[0] : nk::concat_cols(tape, heads), layer.output);
    x = norm(tape, nk::add(tape, x, attn), layer.attn_norm);
    Var ffn = linear(tape, nk::gelu(tape, linear(tape, x, layer.ffn_in)), layer.ffn_out);
    x = norm(tape, nk::add(tape, x, ffn), layer.ffn_norm);
  }
  enc.hidden = x;
  return enc;
}

template <typename T>
Var FusionModel<T>::transform(Tape<T>& tape, Var hidden, std::span<const std::size_t> rows,
                              const Transform& t) {
  Var x = nk::gather_rows(tape, hidden, rows);
  return norm(tape, nk::gelu(tape, linear(tape, x, t.dense)), t.norm);
}

template <typename T>
Var FusionModel<T>::vocab_decode(Tape<T>& tape, Var x) {
  return nk::add_bias(tape, nk::matmul_nt(tape, x, tape.param(*word_embeddings_)),
                      tape.param(*decoder_bias_));
}

template <typename T>
Var FusionModel<T>::mlm_logits(Tape<T>& tape, Var hidden, std::span<const std::size_t> rows) {
  return vocab_decode(tape, transform(tape, hidden, rows, mlm_transform_));
}

template <typename T>
Var FusionModel<T>::pmrtc_logits(Tape<T>& tape, Var hidden, std::span<const std::size_t> rows) {
  return vocab_decode(tape, transform(tape, hidden, rows, pmrtc_transform_));
}

template <typename T>
Var FusionModel<T>::mrc_logits(Tape<T>& tape, Var hidden, std::span<const std::size_t> rows) {
  return linear(tape, transform(tape, hidden, rows, mrc_transform_), mrc_classifier_);
}

template <typename T>
Var FusionModel<T>::mrfr_regression(Tape<T>& tape, Var hidden, std::span<const std::size_t> rows) {
  return linear(tape, transform(tape, hidden, rows, mrfr_transform_), mrfr_regressor_);
}

template <typename T>
Var FusionModel<T>::itm_score(Tape<T>& tape, Var hidden) {
  const std::size_t cls[] = {0};
  return linear(tape, nk::gather_rows(tape, hidden, cls), itm_head_);
}

template class FusionModel<float>;
template class FusionModel<double>;

}  // namespace uvlp
