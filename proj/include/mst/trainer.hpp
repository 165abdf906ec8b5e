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
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mst/data.hpp"
#include "mst/kv.hpp"
#include "mst/model.hpp"
#include "mst/objectives.hpp"
#include "mst/vocab.hpp"

namespace mst {

enum class Stage { PretrainText, PretrainSpeech, Joint, Finetune };

std::string to_string(Stage stage);
Stage parse_stage(const std::string& s);

struct TrainConfig {
  Stage stage = Stage::Joint;
  int epochs = 10;
  double learning_rate = 1e-3;
  int warmup_steps = 100;
  std::uint64_t seed = 1;
  // Batch limits: target tokens and waveform samples, each counted as
  // batch size x longest item.
  Index max_tokens = 256;
  Index max_frames = 60000;
  // Steps between checkpoints; 0 writes one at the end of each epoch.
  int checkpoint_every = 0;
  int keep_last = 5;
  // Input files, as the command line passes them.
  std::vector<std::string> data;
  // "src-tgt" pairs; recognition is "xx-xx". Empty means every direction
  // present in the data.
  std::vector<std::string> directions;
  // Text pretraining: translation epochs on parallel text after denoising.
  int parallel_epochs = 0;
  // Speech pretraining: share of feature frames masked, in spans.
  double ssl_mask_ratio = 0.4;
  int ssl_mask_span = 4;
  double clip_norm = 0.0;

  void validate() const;
  void write(KvConfig& kv) const;
  static TrainConfig read(const KvConfig& kv);
};

// Linear warmup to `learning_rate`, then decay with 1 / sqrt(step).
double learning_rate_at(const TrainConfig& cfg, std::int64_t step);

struct EpochStats {
  std::string phase;
  int epoch = 0;
  std::int64_t steps = 0;  // global step count after the epoch
  std::size_t samples = 0;
  // Sample-mean of the total loss and of each logged component.
  double loss = 0.0;
  std::map<std::string, double> components;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochStats> epochs;
  std::vector<std::string> saved;  // checkpoint directories still on disk
  std::int64_t steps = 0;
};

// Where checkpoints and log lines go. Empty `out_dir` keeps everything in
// memory; a null `log` discards log lines.
struct TrainOutput {
  std::string out_dir;
  std::ostream* log = nullptr;
};

// Denoising autoencoder on monolingual lines, then `parallel_epochs` of text
// translation. The checkpoint holds the shared layers, embeddings and
// decoder.
TrainResult pretrain_text(JointModel& model, const Vocabulary& vocab, const std::vector<TextLine>& mono,
                          const std::vector<TextPair>& parallel, const TrainConfig& cfg,
                          const ObjectiveConfig& objectives, const TrainOutput& out = {});

// Frame indices masked for one utterance of `frames` feature frames: spans
// of `span` frames at random starts until `ratio` of the frames are covered.
// Sorted, unique, at least one frame.
std::vector<Index> sample_mask(Index frames, double ratio, int span, Rng& rng);

// Contrastive prediction of masked front-end features. Utterances too short
// for the front end or for the distractor count are skipped; a corpus of
// only such utterances raises DataError.
TrainResult pretrain_speech(JointModel& model, const std::vector<SampleManifest>& samples,
                            const WaveformStore& audio, const TrainConfig& cfg,
                            const ObjectiveConfig& objectives, const TrainOutput& out = {});

// Per-sample terms of the joint objective. Speech recognition samples have
// no text-path teacher: `text_ce` is zero and `kd` equals `speech_ce`.
struct JointTerms {
  Tensor speech_ce;
  Tensor text_ce;
  Tensor car;
  Tensor kd;
  Tensor total;
};

JointTerms joint_sample_loss(const JointModel& model, const Vocabulary& vocab, const SampleManifest& sample,
                             std::span<const double> waveform, const ObjectiveConfig& objectives);

// Speech and text translation trained together. Speech recognition samples
// decode their transcript behind the source language id.
TrainResult train_joint(JointModel& model, const Vocabulary& vocab, const std::vector<SampleManifest>& samples,
                        const WaveformStore& audio, const TrainConfig& cfg, const ObjectiveConfig& objectives,
                        const TrainOutput& out = {});

// Speech translation loss only. Text input parameters are left untouched
// and listed as frozen in the emitted checkpoints.
TrainResult finetune_speech(JointModel& model, const Vocabulary& vocab, const std::vector<SampleManifest>& samples,
                            const WaveformStore& audio, const TrainConfig& cfg, const ObjectiveConfig& objectives,
                            const TrainOutput& out = {});

// Parameter-wise mean; config, step and frozen set come from the last entry.
Checkpoint average_checkpoints(const std::vector<Checkpoint>& ckpts);

// Samples whose direction is listed (all when `directions` is empty). Every
// language involved must have a language id symbol.
std::vector<SampleManifest> select_directions(const std::vector<SampleManifest>& samples,
                                              const std::vector<std::string>& directions,
                                              const Vocabulary& vocab);

std::string direction_of(const SampleManifest& s);

}  // namespace mst
