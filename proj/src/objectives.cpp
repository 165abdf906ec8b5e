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

#include "mst/objectives.hpp"

#include <algorithm>
#include <cmath>

#include "mst/error.hpp"
#include "mst/random.hpp"

namespace mst {

void ObjectiveConfig::validate() const {
  if (!(label_smoothing >= 0.0 && label_smoothing < 1.0)) {
    throw ConfigError("label_smoothing must lie in [0, 1)");
  }
  if (lambda_car < 0.0 || lambda_kd < 0.0 || lambda_kd > 1.0) {
    throw ConfigError("need lambda_car >= 0 and 0 <= lambda_kd <= 1");
  }
  if (car_temperature <= 0.0 || contrastive_temperature <= 0.0) {
    throw ConfigError("temperatures must be positive");
  }
  if (n_distractors < 1) throw ConfigError("n_distractors must be at least 1");
  if (mask_ratio < 0.0 || mask_ratio > 1.0 || span_length < 1) {
    throw ConfigError("mask_ratio must lie in [0, 1] and span_length be positive");
  }
}

void ObjectiveConfig::write(KvConfig& kv) const {
  kv.set("loss.label_smoothing", label_smoothing);
  kv.set("loss.lambda_car", lambda_car);
  kv.set("loss.lambda_kd", lambda_kd);
  kv.set("loss.car_temperature", car_temperature);
  kv.set("loss.contrastive_temperature", contrastive_temperature);
  kv.set("loss.n_distractors", n_distractors);
  kv.set("loss.mask_ratio", mask_ratio);
  kv.set("loss.span_length", span_length);
  kv.set("loss.permute_sentences", permute_sentences);
}

ObjectiveConfig ObjectiveConfig::read(const KvConfig& kv) {
  ObjectiveConfig c;
  c.label_smoothing = kv.get_double("loss.label_smoothing", c.label_smoothing);
  c.lambda_car = kv.get_double("loss.lambda_car", c.lambda_car);
  c.lambda_kd = kv.get_double("loss.lambda_kd", c.lambda_kd);
  c.car_temperature = kv.get_double("loss.car_temperature", c.car_temperature);
  c.contrastive_temperature = kv.get_double("loss.contrastive_temperature", c.contrastive_temperature);
  c.n_distractors = static_cast<int>(kv.get_int("loss.n_distractors", c.n_distractors));
  c.mask_ratio = kv.get_double("loss.mask_ratio", c.mask_ratio);
  c.span_length = static_cast<int>(kv.get_int("loss.span_length", c.span_length));
  c.permute_sentences = kv.get_bool("loss.permute_sentences", c.permute_sentences);
  c.validate();
  return c;
}

namespace {

Index count_active(Index rows, const std::vector<bool>* pad, const char* op) {
  if (pad != nullptr && static_cast<Index>(pad->size()) != rows) {
    throw DimensionError(std::string(op) + ": " + std::to_string(pad->size()) + " pad flags for " +
                         std::to_string(rows) + " positions");
  }
  Index active = rows;
  if (pad != nullptr) active -= static_cast<Index>(std::count(pad->begin(), pad->end(), true));
  if (active == 0) throw UsageError(std::string(op) + ": every position is padding");
  return active;
}

}  // namespace

Tensor label_smoothed_ce(const Tensor& logits, std::span<const int> targets, double epsilon,
                         const std::vector<bool>* pad) {
  if (logits.dim() != 2 || static_cast<Index>(targets.size()) != logits.rows()) {
    throw DimensionError("label_smoothed_ce: logits " + shape_string(logits.shape()) + " for " +
                         std::to_string(targets.size()) + " targets");
  }
  const Index n = logits.rows(), v = logits.cols();
  const Index active = count_active(n, pad, "label_smoothed_ce");
  RowMatrix w = RowMatrix::Zero(n, v);
  const double inv = 1.0 / static_cast<double>(active);
  for (Index t = 0; t < n; ++t) {
    if (pad != nullptr && (*pad)[static_cast<std::size_t>(t)]) continue;
    const int y = targets[static_cast<std::size_t>(t)];
    if (y < 0 || y >= v) {
      throw DataError("label_smoothed_ce: target " + std::to_string(y) + " outside vocabulary of " +
                      std::to_string(v));
    }
    w.row(t).setConstant(-inv * epsilon / static_cast<double>(v));
    w(t, y) -= inv * (1.0 - epsilon);
  }
  return weighted_sum(log_softmax(logits), Eigen::Map<const Vector>(w.data(), w.size()));
}

Tensor car_loss(const Tensor& text_states, const Tensor& speech_states, double temperature) {
  if (text_states.dim() != 2 || speech_states.dim() != 2 || text_states.cols() != speech_states.cols()) {
    throw DimensionError("car_loss: text " + shape_string(text_states.shape()) + " vs speech " +
                         shape_string(speech_states.shape()));
  }
  const Index m = text_states.rows(), d = text_states.cols();
  const double inv_t = 1.0 / temperature;
  Tensor t = stop_gradient(l2_normalize_rows(text_states));
  Tensor s = l2_normalize_rows(speech_states);
  Tensor self_recon = stop_gradient(matmul(softmax(scale(matmul_transposed(t, t), inv_t)), t));
  Tensor cross_recon = matmul(softmax(scale(matmul_transposed(t, s), inv_t)), s);
  Tensor diff = cross_recon - self_recon;
  return scale(sum(mul(diff, diff)), 1.0 / static_cast<double>(m * d));
}

Tensor online_kd_loss(const Tensor& text_logits, const Tensor& speech_logits, const std::vector<bool>* pad) {
  if (text_logits.shape() != speech_logits.shape() || text_logits.dim() != 2) {
    throw DimensionError("online_kd_loss: teacher " + shape_string(text_logits.shape()) +
                         " vs student " + shape_string(speech_logits.shape()));
  }
  const Index n = text_logits.rows(), v = text_logits.cols();
  const Index active = count_active(n, pad, "online_kd_loss");
  const double inv = 1.0 / static_cast<double>(active);
  RowMatrix p(n, v);
  double entropy_term = 0.0;
  auto tm = text_logits.mat();
  for (Index t = 0; t < n; ++t) {
    if (pad != nullptr && (*pad)[static_cast<std::size_t>(t)]) {
      p.row(t).setZero();
      continue;
    }
    const double mx = tm.row(t).maxCoeff();
    const double lse = mx + std::log((tm.row(t).array() - mx).exp().sum());
    for (Index j = 0; j < v; ++j) {
      const double lp = tm(t, j) - lse;
      const double pj = std::exp(lp);
      p(t, j) = pj;
      if (pj > 0.0) entropy_term += pj * lp;
    }
  }
  p *= -inv;
  Tensor cross = weighted_sum(log_softmax(speech_logits), Eigen::Map<const Vector>(p.data(), p.size()));
  return cross + Tensor::scalar(inv * entropy_term);
}

DaeSample dae_corrupt(std::span<const int> tokens, double mask_ratio, int span_length,
                      bool permute_sentences, std::uint64_t seed, int mask_id, int sentence_end) {
  DaeSample out;
  out.original.assign(tokens.begin(), tokens.end());
  const auto n = out.original.size();
  Rng rng(seed);

  std::vector<int> seq = out.original;
  if (permute_sentences && sentence_end >= 0 && n > 0) {
    std::vector<std::vector<int>> sentences(1);
    for (int tok : seq) {
      sentences.back().push_back(tok);
      if (tok == sentence_end) sentences.emplace_back();
    }
    if (sentences.back().empty()) sentences.pop_back();
    rng.shuffle(sentences);
    seq.clear();
    for (const auto& s : sentences) seq.insert(seq.end(), s.begin(), s.end());
  }

  std::vector<bool> masked(n, false);
  const auto goal = static_cast<std::size_t>(std::ceil(mask_ratio * static_cast<double>(n) - 1e-9));
  const auto span = static_cast<std::size_t>(std::max(1, span_length));
  while (out.masked < goal) {
    // Starts may hang off the left edge so every position is equally coverable.
    const auto start = static_cast<std::ptrdiff_t>(rng.index(n + span - 1)) - static_cast<std::ptrdiff_t>(span - 1);
    for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(start, 0);
         i < std::min<std::ptrdiff_t>(start + static_cast<std::ptrdiff_t>(span), static_cast<std::ptrdiff_t>(n)); ++i) {
      if (!masked[static_cast<std::size_t>(i)]) {
        masked[static_cast<std::size_t>(i)] = true;
        ++out.masked;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!masked[i]) {
      out.noisy.push_back(seq[i]);
    } else if (i == 0 || !masked[i - 1]) {
      out.noisy.push_back(mask_id);
    }
  }
  return out;
}

Tensor contrastive_speech_loss(const Tensor& context, const Tensor& targets, std::span<const Index> masked,
                               int n_distractors, double temperature, std::uint64_t seed) {
  if (context.shape() != targets.shape() || context.dim() != 2) {
    throw DimensionError("contrastive_speech_loss: context " + shape_string(context.shape()) +
                         " vs targets " + shape_string(targets.shape()));
  }
  const Index frames = context.rows();
  if (masked.empty()) throw UsageError("contrastive_speech_loss: no masked frames");
  if (n_distractors < 1 || frames < n_distractors + 1) {
    throw DataError("contrastive_speech_loss: " + std::to_string(frames) + " frames cannot supply " +
                    std::to_string(n_distractors) + " distractors");
  }
  const auto m = static_cast<Index>(masked.size());
  Rng rng(seed);
  IndexMatrix cols(m, n_distractors + 1);
  std::vector<Index> pool;
  for (Index i = 0; i < m; ++i) {
    const Index t = masked[static_cast<std::size_t>(i)];
    if (t < 0 || t >= frames) throw DimensionError("contrastive_speech_loss: masked frame out of range");
    pool.clear();
    if (m - 1 >= n_distractors) {
      for (Index j : masked) if (j != t) pool.push_back(j);
    } else {
      for (Index j = 0; j < frames; ++j) if (j != t) pool.push_back(j);
    }
    // Partial Fisher-Yates: the first n_distractors entries form the sample.
    for (int k = 0; k < n_distractors; ++k) {
      const std::size_t r = static_cast<std::size_t>(k) + rng.index(pool.size() - static_cast<std::size_t>(k));
      std::swap(pool[static_cast<std::size_t>(k)], pool[r]);
    }
    cols(i, 0) = t;
    for (int k = 0; k < n_distractors; ++k) cols(i, k + 1) = pool[static_cast<std::size_t>(k)];
  }
  Tensor c = gather_rows(l2_normalize_rows(context), masked);
  Tensor z = l2_normalize_rows(targets);
  Tensor scores = take_along_rows(scale(matmul_transposed(c, z), 1.0 / temperature), cols);
  Vector w = Vector::Zero(m * (n_distractors + 1));
  for (Index i = 0; i < m; ++i) w[i * (n_distractors + 1)] = -1.0 / static_cast<double>(m);
  return weighted_sum(log_softmax(scores), w);
}

Tensor joint_loss(const Tensor& speech_ce, const Tensor& text_ce, const Tensor& car, const Tensor& kd,
                  const ObjectiveConfig& cfg) {
  return scale(speech_ce, 1.0 - cfg.lambda_kd) + scale(kd, cfg.lambda_kd) + text_ce +
         scale(car, cfg.lambda_car);
}

}  // namespace mst
