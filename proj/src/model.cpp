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

#include "mst/model.hpp"

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "mst/error.hpp"

namespace mst {

namespace fs = std::filesystem;

// --- configuration --------------------------------------------------------

void JointModelConfig::validate() const {
  auto fail = [](const std::string& why) { throw ConfigError("model config: " + why); };
  if (d_model < 1 || n_heads < 1 || d_model % n_heads != 0) {
    fail("d_model " + std::to_string(d_model) + " must be a positive multiple of n_heads " +
         std::to_string(n_heads));
  }
  if (ffn_dim < 1) fail("ffn_dim must be positive");
  if (speech_frontend.empty()) fail("speech front end needs at least one convolution");
  for (const auto& c : speech_frontend) {
    if (c.channels < 1 || c.kernel < 1 || c.stride < 1) fail("front end convolutions need positive sizes");
  }
  if (n_speech_bottom_layers < 0 || n_decoder_layers < 1) fail("layer counts out of range");
  if (n_shared_encoder_layers < 1) fail("at least one shared encoder layer is required");
  if (adaptor_kernel < 1 || adaptor_padding < 0) fail("adaptor kernel/padding out of range");
  if (lid_count < 1 || lid_first < 0) fail("at least one language id symbol is required");
  if (vocab_size < lid_first + lid_count) {
    fail("vocab_size " + std::to_string(vocab_size) + " does not cover the language ids");
  }
  if (dropout < 0.0 || dropout >= 1.0) fail("dropout must lie in [0, 1)");
  if (max_positions < 1) fail("max_positions must be positive");
}

KvConfig JointModelConfig::to_kv() const {
  KvConfig kv;
  kv.set("model.d_model", static_cast<std::int64_t>(d_model));
  kv.set("model.n_heads", n_heads);
  kv.set("model.ffn_dim", static_cast<std::int64_t>(ffn_dim));
  std::vector<std::string> fe;
  for (const auto& c : speech_frontend) {
    fe.push_back(std::to_string(c.channels) + ":" + std::to_string(c.kernel) + ":" +
                 std::to_string(c.stride));
  }
  kv.set("model.frontend", join(fe, ","));
  kv.set("model.bottom_layers", n_speech_bottom_layers);
  kv.set("model.shared_layers", n_shared_encoder_layers);
  kv.set("model.decoder_layers", n_decoder_layers);
  kv.set("model.adaptor_kernel", static_cast<std::int64_t>(adaptor_kernel));
  kv.set("model.adaptor_padding", static_cast<std::int64_t>(adaptor_padding));
  kv.set("model.vocab_size", vocab_size);
  kv.set("model.lid_first", lid_first);
  kv.set("model.lid_count", lid_count);
  kv.set("model.dropout", dropout);
  kv.set("model.max_positions", static_cast<std::int64_t>(max_positions));
  return kv;
}

JointModelConfig JointModelConfig::from_kv(const KvConfig& kv) {
  JointModelConfig c;
  c.d_model = kv.get_int("model.d_model", c.d_model);
  c.n_heads = static_cast<int>(kv.get_int("model.n_heads", c.n_heads));
  c.ffn_dim = kv.get_int("model.ffn_dim", c.ffn_dim);
  if (kv.has("model.frontend")) {
    c.speech_frontend.clear();
    for (const auto& item : kv.get_list("model.frontend")) {
      auto f = split(item, ':');
      if (f.size() != 3) throw ConfigError("model.frontend: expected channels:kernel:stride, got '" + item + "'");
      try {
        c.speech_frontend.push_back({std::stoll(f[0]), std::stoll(f[1]), std::stoll(f[2])});
      } catch (const std::logic_error&) {
        throw ConfigError("model.frontend: bad number in '" + item + "'");
      }
    }
  }
  c.n_speech_bottom_layers = static_cast<int>(kv.get_int("model.bottom_layers", c.n_speech_bottom_layers));
  c.n_shared_encoder_layers = static_cast<int>(kv.get_int("model.shared_layers", c.n_shared_encoder_layers));
  c.n_decoder_layers = static_cast<int>(kv.get_int("model.decoder_layers", c.n_decoder_layers));
  c.adaptor_kernel = kv.get_int("model.adaptor_kernel", c.adaptor_kernel);
  c.adaptor_padding = kv.get_int("model.adaptor_padding", c.adaptor_padding);
  c.vocab_size = static_cast<int>(kv.get_int("model.vocab_size", c.vocab_size));
  c.lid_first = static_cast<int>(kv.get_int("model.lid_first", c.lid_first));
  c.lid_count = static_cast<int>(kv.get_int("model.lid_count", c.lid_count));
  c.dropout = kv.get_double("model.dropout", c.dropout);
  c.max_positions = kv.get_int("model.max_positions", c.max_positions);
  return c;
}

Index JointModelConfig::frontend_frames(Index samples) const {
  Index len = samples;
  for (const auto& c : speech_frontend) len = conv1d_output_length(len, c.kernel, c.stride, 0);
  return len;
}

Index JointModelConfig::adaptor_frames(Index frames) const {
  Index len = frames;
  for (int i = 0; i < kAdaptorLayers; ++i) {
    len = conv1d_output_length(len, adaptor_kernel, kAdaptorStride, adaptor_padding);
  }
  return len;
}

Index JointModelConfig::min_waveform_samples() const {
  Index frames = 1;
  // Smallest frame count the adaptor accepts.
  for (;; ++frames) {
    Index len = frames;
    bool ok = true;
    for (int i = 0; i < kAdaptorLayers && ok; ++i) {
      ok = adaptor_kernel <= len + 2 * adaptor_padding;
      if (ok) len = (len + 2 * adaptor_padding - adaptor_kernel) / kAdaptorStride + 1;
    }
    if (ok) break;
  }
  Index len = frames;
  for (auto it = speech_frontend.rbegin(); it != speech_frontend.rend(); ++it) {
    len = (len - 1) * it->stride + it->kernel;
  }
  return len;
}

RowMatrix sinusoidal_positions(Index length, Index d) {
  RowMatrix p(length, d);
  for (Index pos = 0; pos < length; ++pos) {
    for (Index i = 0; i < d; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(d));
      p(pos, i) = (i % 2 == 0) ? std::sin(pos * rate) : std::cos(pos * rate);
    }
  }
  return p;
}

// --- construction ---------------------------------------------------------

namespace {

Vector uniform_init(Index n, double bound, Rng& rng) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.uniform(-bound, bound);
  return v;
}

}  // namespace

Tensor JointModel::add_param(const std::string& name, Shape shape, Vector init) {
  return store_.add(name, Tensor::parameter(std::move(shape), std::move(init)));
}

LinearParams JointModel::add_linear(const std::string& name, Index in, Index out, std::uint64_t seed) {
  Rng rng(derive_seed(seed, hash_string(name + ".w")));
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  LinearParams p;
  p.w = add_param(name + ".w", {in, out}, uniform_init(in * out, bound, rng));
  p.b = add_param(name + ".b", {out}, Vector::Zero(out));
  return p;
}

NormParams JointModel::add_norm(const std::string& name, Index d) {
  return {add_param(name + ".g", {d}, Vector::Ones(d)), add_param(name + ".b", {d}, Vector::Zero(d))};
}

AttentionParams JointModel::add_attention(const std::string& name, std::uint64_t seed) {
  const Index d = config_.d_model;
  return {add_linear(name + ".q", d, d, seed), add_linear(name + ".k", d, d, seed),
          add_linear(name + ".v", d, d, seed), add_linear(name + ".o", d, d, seed)};
}

TransformerLayerParams JointModel::add_layer(const std::string& name, bool cross, std::uint64_t seed) {
  TransformerLayerParams p;
  p.ln1 = add_norm(name + ".ln1", config_.d_model);
  p.self_attn = add_attention(name + ".self_attn", seed);
  if (cross) {
    p.ln_cross = add_norm(name + ".ln_cross", config_.d_model);
    p.cross_attn = add_attention(name + ".cross_attn", seed);
  }
  p.ln2 = add_norm(name + ".ln2", config_.d_model);
  p.ffn1 = add_linear(name + ".ffn1", config_.d_model, config_.ffn_dim, seed);
  p.ffn2 = add_linear(name + ".ffn2", config_.ffn_dim, config_.d_model, seed);
  return p;
}

JointModel::JointModel(JointModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  const Index d = config_.d_model;
  position_table_ = sinusoidal_positions(config_.max_positions, d);

  Index cin = 1;
  for (std::size_t i = 0; i < config_.speech_frontend.size(); ++i) {
    const auto& c = config_.speech_frontend[i];
    const std::string name = "frontend.conv" + std::to_string(i);
    Rng rng(derive_seed(seed, hash_string(name + ".w")));
    const double bound = std::sqrt(6.0 / static_cast<double>(cin * c.kernel));
    frontend_.push_back({add_param(name + ".w", {c.channels, cin, c.kernel},
                                   uniform_init(c.channels * cin * c.kernel, bound, rng)),
                         add_param(name + ".b", {c.channels}, Vector::Zero(c.channels))});
    cin = c.channels;
  }
  frontend_proj_ = add_linear("frontend.proj", cin, d, seed);
  frontend_norm_ = add_norm("frontend.norm", d);
  for (int i = 0; i < config_.n_speech_bottom_layers; ++i) {
    bottom_.push_back(add_layer("bottom." + std::to_string(i), false, seed));
  }
  bottom_norm_ = add_norm("bottom.norm", d);

  for (int i = 0; i < JointModelConfig::kAdaptorLayers; ++i) {
    const std::string name = "adaptor.conv" + std::to_string(i);
    Rng rng(derive_seed(seed, hash_string(name + ".w")));
    const double bound = std::sqrt(6.0 / static_cast<double>(d * config_.adaptor_kernel));
    adaptor_.push_back({add_param(name + ".w", {d, d, config_.adaptor_kernel},
                                  uniform_init(d * d * config_.adaptor_kernel, bound, rng)),
                        add_param(name + ".b", {d}, Vector::Zero(d))});
  }

  for (int i = 0; i < config_.n_shared_encoder_layers; ++i) {
    shared_.push_back(add_layer("shared." + std::to_string(i), false, seed));
  }
  shared_norm_ = add_norm("shared.norm", d);

  const Index vocab = config_.vocab_size;
  const double emb_sd = 1.0 / std::sqrt(static_cast<double>(d));
  {
    Rng rng(derive_seed(seed, hash_string("text.embed")));
    Vector v(vocab * d);
    for (Index i = 0; i < v.size(); ++i) v[i] = rng.normal(0.0, emb_sd);
    text_embed_ = add_param("text.embed", {vocab, d}, std::move(v));
  }
  {
    Rng rng(derive_seed(seed, hash_string("dec.embed")));
    Vector v(vocab * d);
    for (Index i = 0; i < v.size(); ++i) v[i] = rng.normal(0.0, emb_sd);
    dec_embed_ = add_param("dec.embed", {vocab, d}, std::move(v));
  }
  for (int i = 0; i < config_.n_decoder_layers; ++i) {
    decoder_.push_back(add_layer("dec." + std::to_string(i), true, seed));
  }
  dec_norm_ = add_norm("dec.norm", d);

  ssl_proj_ = add_linear("ssl.proj", d, d, seed);
  {
    Rng rng(derive_seed(seed, hash_string("ssl.mask")));
    ssl_mask_ = add_param("ssl.mask", {1, d}, uniform_init(d, 1.0, rng));
  }
}

// --- forward --------------------------------------------------------------

Tensor JointModel::maybe_dropout(const Tensor& x) const {
  if (rng_ == nullptr) return x;
  return dropout(x, config_.dropout, *rng_);
}

Tensor JointModel::positions(Index length) const {
  if (length > config_.max_positions) {
    throw DataError("sequence of length " + std::to_string(length) + " exceeds max_positions " +
                    std::to_string(config_.max_positions));
  }
  return Tensor::matrix(position_table_.topRows(length));
}

Tensor JointModel::attention_block(const AttentionParams& p, const Tensor& q_in, const Tensor& kv_in,
                                   const AttentionMask* mask, bool causal) const {
  Tensor q = linear(q_in, p.q.w, p.q.b);
  Tensor k = linear(kv_in, p.k.w, p.k.b);
  Tensor v = linear(kv_in, p.v.w, p.v.b);
  Tensor a = multi_head_attention(q, k, v, config_.n_heads, mask, causal);
  return linear(a, p.o.w, p.o.b);
}

Tensor JointModel::layer_forward(const TransformerLayerParams& p, const Tensor& x,
                                 const AttentionMask* self_mask, bool causal,
                                 const Tensor* memory) const {
  Tensor h = layer_norm(x, p.ln1.g, p.ln1.b);
  Tensor y = x + maybe_dropout(attention_block(p.self_attn, h, h, self_mask, causal));
  if (memory != nullptr) {
    h = layer_norm(y, p.ln_cross.g, p.ln_cross.b);
    y = y + maybe_dropout(attention_block(p.cross_attn, h, *memory, nullptr, false));
  }
  h = layer_norm(y, p.ln2.g, p.ln2.b);
  h = relu(linear(h, p.ffn1.w, p.ffn1.b));
  return y + maybe_dropout(linear(h, p.ffn2.w, p.ffn2.b));
}

Tensor JointModel::speech_features(std::span<const double> waveform) const {
  const auto n = static_cast<Index>(waveform.size());
  const Index min_len = config_.min_waveform_samples();
  if (n < min_len) {
    throw DataError("waveform has " + std::to_string(n) + " samples; the speech front end needs at least " +
                    std::to_string(min_len));
  }
  Tensor x = Tensor::constant({1, n}, Eigen::Map<const Vector>(waveform.data(), n));
  for (std::size_t i = 0; i < frontend_.size(); ++i) {
    x = relu(conv1d(x, frontend_[i].w, frontend_[i].b, config_.speech_frontend[i].stride, 0));
  }
  x = linear(transpose(x), frontend_proj_.w, frontend_proj_.b);
  return layer_norm(x, frontend_norm_.g, frontend_norm_.b);
}

Tensor JointModel::speech_context(const Tensor& features) const {
  Tensor x = maybe_dropout(features + positions(features.rows()));
  for (const auto& layer : bottom_) x = layer_forward(layer, x, nullptr, false, nullptr);
  return layer_norm(x, bottom_norm_.g, bottom_norm_.b);
}

Tensor JointModel::adapt(const Tensor& context) const {
  Tensor x = transpose(context);
  for (std::size_t i = 0; i < adaptor_.size(); ++i) {
    x = conv1d(x, adaptor_[i].w, adaptor_[i].b, JointModelConfig::kAdaptorStride, config_.adaptor_padding);
    if (i + 1 < adaptor_.size()) x = relu(x);
  }
  return transpose(x);
}

Tensor JointModel::shared_encoder(const Tensor& x, const AttentionMask* mask) const {
  Tensor h = x;
  for (const auto& layer : shared_) h = layer_forward(layer, h, mask, false, nullptr);
  return layer_norm(h, shared_norm_.g, shared_norm_.b);
}

Tensor JointModel::ssl_project(const Tensor& context) const {
  return linear(context, ssl_proj_.w, ssl_proj_.b);
}

Tensor JointModel::forward_speech(std::span<const double> waveform) const {
  return shared_encoder(adapt(speech_context(speech_features(waveform))));
}

Tensor JointModel::forward_text(std::span<const int> ids, const std::vector<bool>* padding) const {
  if (ids.empty()) throw DataError("forward_text: empty token sequence");
  const auto n = static_cast<Index>(ids.size());
  const double scale_factor = std::sqrt(static_cast<double>(config_.d_model));
  Tensor x = maybe_dropout(scale(embedding(text_embed_, ids), scale_factor) + positions(n));
  if (padding == nullptr) return shared_encoder(x);
  if (static_cast<Index>(padding->size()) != n) {
    throw DimensionError("forward_text: padding flags " + std::to_string(padding->size()) +
                         " for " + std::to_string(n) + " ids");
  }
  AttentionMask mask(n, n);
  for (Index j = 0; j < n; ++j) mask.col(j).setConstant((*padding)[static_cast<std::size_t>(j)]);
  return shared_encoder(x, &mask);
}

Tensor JointModel::forward_decoder(const Tensor& encoder_states, std::span<const int> prev_tokens) const {
  if (prev_tokens.empty() || !config_.is_lid(prev_tokens[0])) {
    throw UsageError("forward_decoder: the decoder input must start with a language id symbol");
  }
  if (encoder_states.dim() != 2 || encoder_states.cols() != config_.d_model) {
    throw DimensionError("forward_decoder: encoder states " + shape_string(encoder_states.shape()) +
                         " do not have width " + std::to_string(config_.d_model));
  }
  const auto n = static_cast<Index>(prev_tokens.size());
  const double scale_factor = std::sqrt(static_cast<double>(config_.d_model));
  Tensor x = maybe_dropout(scale(embedding(dec_embed_, prev_tokens), scale_factor) + positions(n));
  for (const auto& layer : decoder_) x = layer_forward(layer, x, nullptr, true, &encoder_states);
  x = layer_norm(x, dec_norm_.g, dec_norm_.b);
  return matmul_transposed(x, dec_embed_);
}

// --- checkpoints ----------------------------------------------------------

Index Checkpoint::parameter_count() const {
  Index n = 0;
  for (const auto& e : params) n += shape_size(e.shape);
  return n;
}

const Checkpoint::Entry* Checkpoint::find(const std::string& name) const {
  for (const auto& e : params) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

namespace {

bool has_prefix(const std::string& name, const std::vector<std::string>& prefixes) {
  if (prefixes.empty()) return true;
  for (const auto& p : prefixes) {
    if (name.rfind(p, 0) == 0) return true;
  }
  return false;
}

std::string shape_field(const Shape& shape) {
  std::string s;
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "x" : "") + std::to_string(shape[i]);
  return s;
}

}  // namespace

Checkpoint make_checkpoint(const JointModel& model, std::int64_t step,
                           const std::vector<std::string>& prefixes,
                           const std::set<std::string>& frozen) {
  Checkpoint ckpt;
  ckpt.config = model.config().to_kv();
  ckpt.step = step;
  for (const auto& [name, t] : model.params().entries()) {
    if (!has_prefix(name, prefixes)) continue;
    Checkpoint::Entry e{name, t.shape(), std::vector<float>(static_cast<std::size_t>(t.size()))};
    for (Index i = 0; i < t.size(); ++i) e.data[static_cast<std::size_t>(i)] = static_cast<float>(t.value()[i]);
    if (frozen.count(name)) ckpt.frozen.insert(name);
    ckpt.params.push_back(std::move(e));
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& dir) {
  fs::create_directories(dir);
  std::ofstream tsv(fs::path(dir) / "params.tsv", std::ios::binary);
  std::ofstream bin(fs::path(dir) / "params.bin", std::ios::binary);
  if (!tsv || !bin) throw DataError("cannot write checkpoint into '" + dir + "'");
  tsv << "name\tdtype\tshape\n";
  for (const auto& e : ckpt.params) {
    tsv << e.name << "\tf32\t" << shape_field(e.shape) << '\n';
    std::vector<char> bytes(e.data.size() * 4);
    for (std::size_t i = 0; i < e.data.size(); ++i) {
      const auto u = std::bit_cast<std::uint32_t>(e.data[i]);
      for (int b = 0; b < 4; ++b) bytes[i * 4 + b] = static_cast<char>((u >> (8 * b)) & 0xFF);
    }
    bin.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  KvConfig cfg = ckpt.config;
  cfg.set("ckpt.step", ckpt.step);
  cfg.set("ckpt.frozen", join({ckpt.frozen.begin(), ckpt.frozen.end()}, ","));
  cfg.save((fs::path(dir) / "config.kv").string());
}

Checkpoint load_checkpoint(const std::string& dir) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw DataError("checkpoint directory '" + dir + "' does not exist");
  Checkpoint ckpt;
  ckpt.config = KvConfig::load((root / "config.kv").string());
  ckpt.step = ckpt.config.get_int("ckpt.step", 0);
  for (const auto& name : ckpt.config.get_list("ckpt.frozen")) ckpt.frozen.insert(name);
  KvConfig model_only;
  for (const auto& [k, v] : ckpt.config.values()) {
    if (k.rfind("ckpt.", 0) != 0) model_only.set(k, v);
  }
  ckpt.config = model_only;

  const std::string tsv_path = (root / "params.tsv").string();
  std::ifstream tsv(tsv_path, std::ios::binary);
  if (!tsv) throw DataError("cannot open '" + tsv_path + "'");
  std::string line;
  if (!std::getline(tsv, line) || line != "name\tdtype\tshape") {
    throw DataError(tsv_path + ":1: header must be 'name<TAB>dtype<TAB>shape'");
  }
  int lineno = 1;
  while (std::getline(tsv, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = tsv_path + ":" + std::to_string(lineno);
    auto f = split(line, '\t');
    if (f.size() != 3) throw DataError(where + ": expected 3 columns");
    if (f[1] != "f32") throw DataError(where + ": unsupported dtype '" + f[1] + "'");
    Checkpoint::Entry e;
    e.name = f[0];
    for (const auto& dim : split(f[2], 'x')) {
      try {
        e.shape.push_back(std::stoll(dim));
      } catch (const std::logic_error&) {
        throw DataError(where + ": bad shape '" + f[2] + "'");
      }
      if (e.shape.back() < 1) throw DataError(where + ": bad shape '" + f[2] + "'");
    }
    if (ckpt.find(e.name) != nullptr) throw DataError(where + ": duplicate parameter '" + e.name + "'");
    ckpt.params.push_back(std::move(e));
  }

  const std::string bin_path = (root / "params.bin").string();
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw DataError("cannot open '" + bin_path + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
  std::size_t offset = 0;
  for (auto& e : ckpt.params) {
    const auto n = static_cast<std::size_t>(shape_size(e.shape));
    if (offset + 4 * n > bytes.size()) {
      throw DataError(bin_path + ": parameter '" + e.name + "' needs " + std::to_string(4 * n) +
                      " bytes at offset " + std::to_string(offset) + " but the file has " +
                      std::to_string(bytes.size()) + " bytes");
    }
    e.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t u = 0;
      for (int b = 0; b < 4; ++b) {
        u |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + 4 * i + b])) << (8 * b);
      }
      e.data[i] = std::bit_cast<float>(u);
    }
    offset += 4 * n;
  }
  if (offset != bytes.size()) {
    throw DataError(bin_path + ": unexpected trailing data at offset " + std::to_string(offset));
  }
  return ckpt;
}

void load_parameters(JointModel& model, const Checkpoint& ckpt, const std::vector<std::string>& prefixes,
                     bool require_all) {
  for (auto& [name, t] : model.params().entries()) {
    if (!has_prefix(name, prefixes)) continue;
    const auto* e = ckpt.find(name);
    if (e == nullptr) {
      if (require_all) throw ConfigError("checkpoint lacks parameter '" + name + "'");
      continue;
    }
    if (e->shape != t.shape()) {
      throw ConfigError("parameter '" + name + "' has shape " + shape_string(e->shape) +
                        " in the checkpoint but " + shape_string(t.shape()) + " in the model");
    }
    Vector& v = t.mutable_value();
    for (Index i = 0; i < v.size(); ++i) v[i] = static_cast<double>(e->data[static_cast<std::size_t>(i)]);
  }
  for (const auto& e : ckpt.params) {
    if (has_prefix(e.name, prefixes) && !model.params().contains(e.name)) {
      throw ConfigError("checkpoint parameter '" + e.name + "' does not exist in the model");
    }
  }
}

JointModel model_from_checkpoint(const Checkpoint& ckpt) {
  JointModel model(ckpt.model_config(), 0);
  load_parameters(model, ckpt, {}, false);
  return model;
}

namespace {

// Settings that change the computation without changing any parameter shape.
void check_compatible(const Checkpoint& ckpt, const JointModelConfig& config, const std::string& what,
                      bool speech) {
  const auto c = ckpt.model_config();
  auto fail = [&](const std::string& key) {
    throw ConfigError(what + " checkpoint was trained with a different " + key);
  };
  if (c.n_heads != config.n_heads) fail("n_heads");
  if (speech && c.speech_frontend != config.speech_frontend) fail("front end");
  if (!speech && (c.lid_first != config.lid_first || c.lid_count != config.lid_count)) fail("language id range");
}

}  // namespace

JointModel init_from_pretrained(const Checkpoint* speech, const Checkpoint* text,
                                const JointModelConfig& config, std::uint64_t seed) {
  if (speech != nullptr) check_compatible(*speech, config, "speech", true);
  if (text != nullptr) check_compatible(*text, config, "text", false);
  JointModel model(config, seed);
  if (speech != nullptr) load_parameters(model, *speech, kSpeechPrefixes, true);
  if (text != nullptr) load_parameters(model, *text, kTextPrefixes, true);
  return model;
}

}  // namespace mst
