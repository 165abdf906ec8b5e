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

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mst/data.hpp"
#include "mst/model.hpp"
#include "mst/vocab.hpp"

namespace mst {

struct Hypothesis {
  std::vector<int> tokens;  // starts with the language id symbol
  double log_prob = 0.0;
  bool finished = false;
  // log_prob / generated_length^alpha, set when finished.
  double score = 0.0;
};

struct BeamConfig {
  int beam = 5;
  int max_len = 64;
  double length_penalty = 1.0;
};

// Mean over models of per-model next-token log-probabilities after `prefix`.
// `encoder_states[i]` belongs to `models[i]`.
Vector ensemble_log_probs(const std::vector<const JointModel*>& models,
                          const std::vector<Tensor>& encoder_states, const std::vector<int>& prefix);

// Beam search with the first token forced to `lid`. Decoding length is
// capped at min(max_len, 4 * encoder frames + 8). The greedy hypothesis is
// always among the final candidates, so a wider beam never returns a lower
// normalized score than beam 1.
Hypothesis beam_search(const std::vector<const JointModel*>& models,
                       const std::vector<Tensor>& encoder_states, int lid, const BeamConfig& cfg);

struct DecodeResult {
  std::map<std::string, std::string> outputs;
  std::vector<std::pair<std::string, std::string>> failures;  // id, message
};

// Decodes each sample into its own target language (the source language for
// speech recognition samples) unless `target_lang` is given. Failures are
// recorded per sample and decoding continues.
DecodeResult decode_corpus(const std::vector<const JointModel*>& models, const Vocabulary& vocab,
                           const std::vector<SampleManifest>& samples, const WaveformStore& audio,
                           const BeamConfig& cfg, const std::string& target_lang = "");

}  // namespace mst
