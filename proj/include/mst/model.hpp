/*
   Copyright 2026 The mst Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mst/kv.hpp"
#include "mst/ops.hpp"
#include "mst/optim.hpp"
#include "mst/random.hpp"
#include "mst/tensor.hpp"

namespace mst {

struct ConvSpec {
  Index channels = 32;
  Index kernel = 8;
  Index stride = 4;
  bool operator==(const ConvSpec&) const = default;
};

struct JointModelConfig {
  Index d_model = 64;
  int n_heads = 4;
  Index ffn_dim = 256;
  // Waveform feature extractor, unpadded convolutions with ReLU.
  std::vector<ConvSpec> speech_frontend{{32, 8, 4}, {32, 4, 2}, {32, 4, 2}};
  int n_speech_bottom_layers = 2;
  int n_shared_encoder_layers = 2;
  int n_decoder_layers = 2;
  // Three stride-2 convolutions between the bottom and the shared layers.
  Index adaptor_kernel = 3;
  Index adaptor_padding = 1;
  int vocab_size = 0;
  // Language id symbols occupy [lid_first, lid_first + lid_count).
  int lid_first = 6;
  int lid_count = 0;
  double dropout = 0.1;
  Index max_positions = 1024;

  static constexpr int kAdaptorLayers = 3;
  static constexpr Index kAdaptorStride = 2;

  void validate() const;
  KvConfig to_kv() const;
  static JointModelConfig from_kv(const KvConfig& kv);
  bool operator==(const JointModelConfig&) const = default;

  bool is_lid(int id) const { return id >= lid_first && id < lid_first + lid_count; }
  // Feature frames produced by the front end for `samples` waveform samples.
  Index frontend_frames(Index samples) const;
  // Frames after the three adaptor layers.
  Index adaptor_frames(Index frames) const;
  // Shortest waveform the front end accepts.
  Index min_waveform_samples() const;
};

struct LinearParams {
  Tensor w;
  Tensor b;
};

struct NormParams {
  Tensor g;
  Tensor b;
};

struct AttentionParams {
  LinearParams q, k, v, o;
};

struct TransformerLayerParams {
  NormParams ln1;
  AttentionParams self_attn;
  NormParams ln_cross;
  AttentionParams cross_attn;  // decoder layers only
  NormParams ln2;
  LinearParams ffn1, ffn2;
};

// Joint speech/text encoder-decoder.
//
// Speech: conv front end -> linear + norm -> positions -> bottom layers ->
// 3 stride-2 convs -> shared layers. Text: embedding * sqrt(d) + positions ->
// shared layers. Both feed one decoder whose first input token selects the
// output language; its output projection is tied to the decoder embedding.
//
// Parameter names are grouped by prefix: `frontend.`, `bottom.`, `adaptor.`,
// `shared.`, `text.`, `dec.` and `ssl.` (speech pretraining head).
class JointModel {
 public:
  JointModel(JointModelConfig config, std::uint64_t seed);
  JointModel(const JointModel&) = delete;
  JointModel& operator=(const JointModel&) = delete;
  JointModel(JointModel&&) = default;

  const JointModelConfig& config() const { return config_; }
  ParameterStore& params() { return store_; }
  const ParameterStore& params() const { return store_; }

  // Enables dropout driven by `rng`; eval() disables it.
  void train(Rng& rng) { rng_ = &rng; }
  void eval() { rng_ = nullptr; }
  bool training() const { return rng_ != nullptr; }

  // Front end output [T x d], before positions and transformer layers.
  Tensor speech_features(std::span<const double> waveform) const;
  // Positions + bottom layers + norm over (possibly masked) features.
  Tensor speech_context(const Tensor& features) const;
  // Adaptor: [T x d] -> [adaptor_frames(T) x d].
  Tensor adapt(const Tensor& context) const;
  Tensor shared_encoder(const Tensor& x, const AttentionMask* mask = nullptr) const;
  // Speech pretraining head and the learned vector that replaces masked frames.
  Tensor ssl_project(const Tensor& context) const;
  const Tensor& ssl_mask_embedding() const { return ssl_mask_; }

  Tensor forward_speech(std::span<const double> waveform) const;
  // `padding`, when given, flags ids that must not be attended to.
  Tensor forward_text(std::span<const int> ids, const std::vector<bool>* padding = nullptr) const;
  // Logits [len x vocab] for every prefix position; prev_tokens[0] must be a
  // language id symbol.
  Tensor forward_decoder(const Tensor& encoder_states, std::span<const int> prev_tokens) const;

 private:
  LinearParams add_linear(const std::string& name, Index in, Index out, std::uint64_t seed);
  NormParams add_norm(const std::string& name, Index d);
  AttentionParams add_attention(const std::string& name, std::uint64_t seed);
  TransformerLayerParams add_layer(const std::string& name, bool cross, std::uint64_t seed);
  Tensor add_param(const std::string& name, Shape shape, Vector init);

  Tensor maybe_dropout(const Tensor& x) const;
  Tensor attention_block(const AttentionParams& p, const Tensor& q_in, const Tensor& kv_in,
                         const AttentionMask* mask, bool causal) const;
  Tensor layer_forward(const TransformerLayerParams& p, const Tensor& x,
                       const AttentionMask* self_mask, bool causal, const Tensor* memory) const;
  Tensor positions(Index length) const;

  JointModelConfig config_;
  ParameterStore store_;
  Rng* rng_ = nullptr;
  RowMatrix position_table_;

  std::vector<LinearParams> frontend_;
  LinearParams frontend_proj_;
  NormParams frontend_norm_;
  std::vector<TransformerLayerParams> bottom_;
  NormParams bottom_norm_;
  std::vector<LinearParams> adaptor_;
  std::vector<TransformerLayerParams> shared_;
  NormParams shared_norm_;
  Tensor text_embed_;
  Tensor dec_embed_;
  std::vector<TransformerLayerParams> decoder_;
  NormParams dec_norm_;
  LinearParams ssl_proj_;
  Tensor ssl_mask_;
};

// Sinusoidal position table [length x d].
RowMatrix sinusoidal_positions(Index length, Index d);

// Serialized parameters in single precision plus configuration.
struct Checkpoint {
  struct Entry {
    std::string name;
    Shape shape;
    std::vector<float> data;
  };
  std::vector<Entry> params;
  KvConfig config;
  std::int64_t step = 0;
  // Parameters that were not trained in the stage that wrote the checkpoint.
  std::set<std::string> frozen;

  Index parameter_count() const;
  const Entry* find(const std::string& name) const;
  JointModelConfig model_config() const { return JointModelConfig::from_kv(config); }
};

// Snapshot of every parameter whose name starts with one of `prefixes`
// (all parameters when empty).
Checkpoint make_checkpoint(const JointModel& model, std::int64_t step,
                           const std::vector<std::string>& prefixes = {},
                           const std::set<std::string>& frozen = {});
void save_checkpoint(const Checkpoint& ckpt, const std::string& dir);
Checkpoint load_checkpoint(const std::string& dir);

// Copies matching parameters into `model`. With `require_all`, every model
// parameter under `prefixes` must be present. Shape or config mismatches
// raise ConfigError naming the parameter.
void load_parameters(JointModel& model, const Checkpoint& ckpt,
                     const std::vector<std::string>& prefixes = {}, bool require_all = true);
JointModel model_from_checkpoint(const Checkpoint& ckpt);

// Front end and bottom layers from the speech checkpoint; shared layers,
// embeddings and decoder from the text checkpoint; everything else seeded.
JointModel init_from_pretrained(const Checkpoint* speech, const Checkpoint* text,
                                const JointModelConfig& config, std::uint64_t seed);

inline const std::vector<std::string> kSpeechPrefixes{"frontend.", "bottom.", "ssl."};
inline const std::vector<std::string> kTextPrefixes{"shared.", "text.", "dec."};

}  // namespace mst
