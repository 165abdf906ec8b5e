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

#include "mst/decoding.hpp"

#include <algorithm>
#include <cmath>

#include "mst/error.hpp"

namespace mst {

namespace {

void check_models(const std::vector<const JointModel*>& models, const std::vector<Tensor>& states) {
  if (models.empty()) throw UsageError("decoding needs at least one model");
  if (states.size() != models.size()) throw UsageError("one encoder output per model is required");
  const auto& first = models.front()->config();
  for (const auto* m : models) {
    const auto& c = m->config();
    if (c.vocab_size != first.vocab_size || c.lid_first != first.lid_first || c.lid_count != first.lid_count) {
      throw ConfigError("ensemble members use different vocabularies");
    }
  }
}

}  // namespace

Vector ensemble_log_probs(const std::vector<const JointModel*>& models,
                          const std::vector<Tensor>& encoder_states, const std::vector<int>& prefix) {
  check_models(models, encoder_states);
  NoGradGuard guard;
  Vector total;
  for (std::size_t i = 0; i < models.size(); ++i) {
    Tensor logits = models[i]->forward_decoder(encoder_states[i], prefix);
    const Index last = logits.rows() - 1;
    Vector row = logits.mat().row(last).transpose();
    const double mx = row.maxCoeff();
    const double lse = mx + std::log((row.array() - mx).exp().sum());
    row.array() -= lse;
    if (i == 0) {
      total = row;
    } else {
      total += row;
    }
  }
  return total / static_cast<double>(models.size());
}

Hypothesis beam_search(const std::vector<const JointModel*>& models,
                       const std::vector<Tensor>& encoder_states, int lid, const BeamConfig& cfg) {
  check_models(models, encoder_states);
  if (cfg.beam < 1) throw UsageError("beam size must be at least 1");
  if (!models.front()->config().is_lid(lid)) throw UsageError("beam search must start with a language id symbol");
  const int eos = Vocabulary::kEos;
  const Index frames = encoder_states.front().rows();
  const int max_len = static_cast<int>(std::min<Index>(cfg.max_len, 4 * frames + 8));
  auto normalized = [&](const Hypothesis& h) {
    const auto generated = static_cast<double>(h.tokens.size() - 1);
    return h.log_prob / std::pow(std::max(generated, 1.0), cfg.length_penalty);
  };

  std::vector<Hypothesis> live{Hypothesis{{lid}, 0.0, false, 0.0}};
  std::vector<Hypothesis> finished;
  for (int step = 0; step < max_len && !live.empty(); ++step) {
    struct Candidate {
      double log_prob;
      std::size_t parent;
      int token;
    };
    std::vector<Candidate> cands;
    for (std::size_t h = 0; h < live.size(); ++h) {
      const Vector lp = ensemble_log_probs(models, encoder_states, live[h].tokens);
      for (Index v = 0; v < lp.size(); ++v) {
        // Specials other than end-of-sentence are never generated.
        if (v != eos && v < models.front()->config().lid_first + models.front()->config().lid_count) continue;
        cands.push_back({live[h].log_prob + lp[v], h, static_cast<int>(v)});
      }
    }
    const auto keep = std::min(cands.size(), static_cast<std::size_t>(cfg.beam));
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(),
                      [](const Candidate& a, const Candidate& b) {
                        if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
                        if (a.parent != b.parent) return a.parent < b.parent;
                        return a.token < b.token;
                      });
    std::vector<Hypothesis> next;
    for (std::size_t i = 0; i < keep; ++i) {
      Hypothesis h = live[cands[i].parent];
      h.tokens.push_back(cands[i].token);
      h.log_prob = cands[i].log_prob;
      const bool last_step = step + 1 == max_len;
      if (cands[i].token == eos || last_step) {
        h.finished = cands[i].token == eos;
        h.score = normalized(h);
        finished.push_back(std::move(h));
      } else {
        next.push_back(std::move(h));
      }
    }
    live = std::move(next);
    if (finished.size() >= static_cast<std::size_t>(cfg.beam)) break;
  }
  for (auto& h : live) {
    h.score = normalized(h);
    finished.push_back(std::move(h));
  }
  // Pruning can drop the greedy path, which then may outscore every survivor
  // after length normalization; keep it as a candidate.
  if (cfg.beam > 1) {
    BeamConfig greedy = cfg;
    greedy.beam = 1;
    finished.push_back(beam_search(models, encoder_states, lid, greedy));
  }
  return *std::max_element(finished.begin(), finished.end(), [](const Hypothesis& a, const Hypothesis& b) {
    if (a.score != b.score) return a.score < b.score;
    return a.tokens > b.tokens;
  });
}

DecodeResult decode_corpus(const std::vector<const JointModel*>& models, const Vocabulary& vocab,
                           const std::vector<SampleManifest>& samples, const WaveformStore& audio,
                           const BeamConfig& cfg, const std::string& target_lang) {
  DecodeResult result;
  if (models.empty()) throw UsageError("decoding needs at least one model");
  for (const auto* m : models) {
    if (m->config().vocab_size != vocab.size()) {
      throw ConfigError("model vocabulary size " + std::to_string(m->config().vocab_size) +
                        " does not match the vocabulary file (" + std::to_string(vocab.size()) + ")");
    }
  }
  NoGradGuard guard;
  for (const auto& s : samples) {
    try {
      const auto wav = audio.get(s);
      std::vector<Tensor> states;
      for (const auto* m : models) states.push_back(m->forward_speech(wav));
      const std::string lang = target_lang.empty() ? s.tgt_lang : target_lang;
      const auto best = beam_search(models, states, vocab.lid(lang), cfg);
      result.outputs[s.id] = decode(best.tokens, vocab);
    } catch (const Error& e) {
      result.failures.emplace_back(s.id, e.what());
    }
  }
  return result;
}

}  // namespace mst
