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
#include <span>
#include <vector>

#include "mst/kv.hpp"
#include "mst/ops.hpp"
#include "mst/tensor.hpp"

namespace mst {

struct ObjectiveConfig {
  double label_smoothing = 0.1;
  double lambda_car = 0.02;
  double lambda_kd = 0.8;
  double car_temperature = 1.0;
  double contrastive_temperature = 0.1;
  int n_distractors = 8;
  // Text denoising.
  double mask_ratio = 0.3;
  int span_length = 3;
  bool permute_sentences = true;

  void validate() const;
  void write(KvConfig& kv) const;
  static ObjectiveConfig read(const KvConfig& kv);
};

// Mean over non-pad positions of the smoothed negative log-likelihood,
// (1 - eps) * -log p(y) + eps * mean_v(-log p(v)). `pad` flags positions to
// skip; all-pad raises UsageError.
Tensor label_smoothed_ce(const Tensor& logits, std::span<const int> targets, double epsilon,
                         const std::vector<bool>* pad = nullptr);

// Cross-attentive regularization on row-normalized states. Text states are
// treated as constants.
Tensor car_loss(const Tensor& text_states, const Tensor& speech_states, double temperature);

// Token-mean KL(softmax(text) || softmax(speech)); the text branch is the
// detached teacher.
Tensor online_kd_loss(const Tensor& text_logits, const Tensor& speech_logits,
                      const std::vector<bool>* pad = nullptr);

struct DaeSample {
  std::vector<int> noisy;
  std::vector<int> original;
  // Original tokens covered by masks.
  std::size_t masked = 0;
};

// Fixed-length span masking (each masked run collapses to one `mask_id`)
// after an optional shuffle of sentences ending in `sentence_end`.
DaeSample dae_corrupt(std::span<const int> tokens, double mask_ratio, int span_length,
                      bool permute_sentences, std::uint64_t seed, int mask_id,
                      int sentence_end = -1);

// Contrastive prediction of latents z at masked frames from contexts c:
// each masked frame scores its own latent against `n_distractors` latents
// from other masked frames (other frames when too few are masked) with
// cosine / temperature.
Tensor contrastive_speech_loss(const Tensor& context, const Tensor& targets,
                               std::span<const Index> masked, int n_distractors,
                               double temperature, std::uint64_t seed);

// (1 - lambda_kd) * speech_ce + lambda_kd * kd + text_ce + lambda_car * car.
Tensor joint_loss(const Tensor& speech_ce, const Tensor& text_ce, const Tensor& car,
                  const Tensor& kd, const ObjectiveConfig& cfg);

}  // namespace mst
