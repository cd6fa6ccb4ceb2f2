#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "uvlp/fusion/config.hpp"
#include "uvlp/fusion/input.hpp"
#include "uvlp/numkernel/param_store.hpp"
#include "uvlp/numkernel/random.hpp"
#include "uvlp/numkernel/tape.hpp"

namespace uvlp {

/// Single-stream vision-language transformer with the pre-training heads:
/// MLM over the vocabulary, region class (MRC), region feature regression
/// (MRFR), region-to-phrase-token classification (p-MRTC) and image-text
/// matching (ITM).
///
/// Text tokens get word + position + modality embeddings; regions get
/// feature projection + box-geometry projection + modality embedding. Both
/// pass through their own layer norm before the shared encoder. The encoder
/// is post-LN. The MLM and p-MRTC decoders share the word-embedding matrix
/// and output bias.
template <typename T>
class FusionModel {
 public:
  struct Encoding {
    nk::Var hidden;  // [length, hidden]
    std::size_t text_len = 0;
    std::size_t region_count = 0;
    /// attention[layer][head] is a [length, length] probability matrix.
    std::vector<std::vector<nk::Var>> attention;
  };

  FusionModel(ModelConfig config, std::uint64_t seed);
  FusionModel(const FusionModel&) = delete;
  FusionModel& operator=(const FusionModel&) = delete;

  const ModelConfig& config() const { return cfg_; }
  nk::ParamStore<T>& params() { return params_; }
  const nk::ParamStore<T>& params() const { return params_; }

  /// Copies every parameter value from a model of the same config.
  template <typename U>
  void copy_weights_from(const FusionModel<U>& other);

  nk::Var embed_text(nk::Tape<T>& tape, const FusedInput& in);
  nk::Var embed_visual(nk::Tape<T>& tape, const FusedInput& in);
  Encoding encode(nk::Tape<T>& tape, const FusedInput& in);

  /// Vocabulary logits [rows, V] at the given sequence rows.
  nk::Var mlm_logits(nk::Tape<T>& tape, nk::Var hidden, std::span<const std::size_t> rows);
  nk::Var pmrtc_logits(nk::Tape<T>& tape, nk::Var hidden, std::span<const std::size_t> rows);
  nk::Var mrc_logits(nk::Tape<T>& tape, nk::Var hidden, std::span<const std::size_t> rows);
  nk::Var mrfr_regression(nk::Tape<T>& tape, nk::Var hidden, std::span<const std::size_t> rows);
  /// Single ITM logit from the [CLS] row.
  nk::Var itm_score(nk::Tape<T>& tape, nk::Var hidden);

 private:
  struct Linear {
    nk::Tensor<T>* weight;  // [in, out]
    nk::Tensor<T>* bias;    // [out]
  };
  struct Norm {
    nk::Tensor<T>* gamma;
    nk::Tensor<T>* beta;
  };
  struct Layer {
    Linear query, key, value, output;
    Norm attn_norm;
    Linear ffn_in, ffn_out;
    Norm ffn_norm;
  };
  struct Transform {
    Linear dense;
    Norm norm;
  };

  Linear make_linear(const std::string& name, std::size_t in, std::size_t out, Rng& rng);
  Norm make_norm(const std::string& name, std::size_t width);
  nk::Tensor<T>& make_embedding(const std::string& name, std::size_t rows, std::size_t cols, Rng& rng);

  nk::Var linear(nk::Tape<T>& tape, nk::Var x, const Linear& l);
  nk::Var norm(nk::Tape<T>& tape, nk::Var x, const Norm& n);
  nk::Var transform(nk::Tape<T>& tape, nk::Var hidden, std::span<const std::size_t> rows,
                    const Transform& t);
  nk::Var vocab_decode(nk::Tape<T>& tape, nk::Var x);

  ModelConfig cfg_;
  nk::ParamStore<T> params_;

  nk::Tensor<T>* word_embeddings_;
  nk::Tensor<T>* position_embeddings_;
  nk::Tensor<T>* modality_embeddings_;
  Norm text_norm_;
  Linear feature_proj_;
  Linear box_proj_;
  Norm vision_norm_;
  std::vector<Layer> layers_;
  Transform mlm_transform_;
  Transform pmrtc_transform_;
  nk::Tensor<T>* decoder_bias_;
  Transform mrc_transform_;
  Linear mrc_classifier_;
  Transform mrfr_transform_;
  Linear mrfr_regressor_;
  Linear itm_head_;
};

extern template class FusionModel<float>;
extern template class FusionModel<double>;

template <typename T>
template <typename U>
void FusionModel<T>::copy_weights_from(const FusionModel<U>& other) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& src = other.params()[i].tensor.values;
    auto& dst = params_[i].tensor.values;
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = static_cast<T>(src[j]);
  }
}

}  // namespace uvlp
