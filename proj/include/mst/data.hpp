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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mst/kv.hpp"
#include "mst/vocab.hpp"

namespace mst {

// One audio / transcript / translation record. An empty translation marks a
// speech recognition sample, whose target language equals its source.
struct SampleManifest {
  std::string id;
  std::string audio_path;
  std::int64_t n_samples = 0;
  int sample_rate = 800;
  std::string src_lang;
  std::string tgt_lang;
  std::string transcript;
  std::string translation;

  double duration_seconds() const {
    return static_cast<double>(n_samples) / static_cast<double>(sample_rate);
  }
  bool is_asr() const { return translation.empty(); }
  // Decoder target text: the translation, or the transcript for ASR.
  const std::string& target_text() const { return is_asr() ? transcript : translation; }

  bool operator==(const SampleManifest&) const = default;
};

inline constexpr const char* kManifestHeader =
    "id\taudio_path\tn_samples\tsample_rate\tsrc_lang\ttgt_lang\ttranscript\ttranslation";

std::vector<SampleManifest> load_manifest(const std::string& path);
void save_manifest(const std::string& path, const std::vector<SampleManifest>& samples);
// Checks field-level invariants; throws DataError naming the sample.
void validate_sample(const SampleManifest& s);

// Little-endian 32-bit float mono.
std::vector<double> read_waveform(const std::string& path);
void write_waveform(const std::string& path, std::span<const double> samples);

// Resolves sample audio: `synth:` tags from memory, other paths from disk
// relative to `base_dir`.
class WaveformStore {
 public:
  explicit WaveformStore(std::string base_dir = ".") : base_dir_(std::move(base_dir)) {}

  void put(const std::string& tag, std::vector<double> samples);
  std::vector<double> get(const SampleManifest& sample) const;
  const std::map<std::string, std::vector<double>>& memory() const { return memory_; }
  const std::string& base_dir() const { return base_dir_; }

 private:
  std::string base_dir_;
  std::map<std::string, std::vector<double>> memory_;
};

// Word-for-word bijection from one language to another.
struct RewriteRule {
  std::string src_lang;
  std::string tgt_lang;
  std::map<std::string, std::string> words;

  std::string apply(const std::string& text) const;
};

struct SynthDirection {
  std::string src;
  std::string tgt;
  int train = 0;
  int dev = 0;
  // Zero-shot directions get dev samples only.
  bool zero_shot = false;
};

struct SynthSpec {
  std::vector<SynthDirection> directions;
  // Speech recognition samples per source language.
  std::map<std::string, int> asr_train;
  std::map<std::string, int> asr_dev;
  int words_per_language = 16;
  int min_len = 2;
  int max_len = 5;
  int mono_per_language = 600;
  int parallel_per_direction = 600;
  int sample_rate = 800;
  int segment_samples = 40;
  // Speech units: one segment per word and language ("word"), or one per
  // consonant-vowel syllable shared by all languages ("syllable"), in which
  // case a word sounds like its syllables in sequence.
  std::string codebook = "word";
  double noise = 0.02;
  std::uint64_t seed = 1;
  // Concept-indexed words per language; generated from `seed` when empty.
  std::map<std::string, std::vector<std::string>> lexicon;

  std::vector<std::string> languages() const;
};

struct TextLine {
  std::string lang;
  std::string text;
};

struct TextPair {
  std::string src_lang;
  std::string tgt_lang;
  std::string src;
  std::string tgt;
};

struct SynthCorpus {
  std::vector<SampleManifest> train;
  std::vector<SampleManifest> dev;
  std::vector<TextLine> mono;
  std::vector<TextPair> parallel;
  std::map<std::string, std::vector<std::string>> lexicon;
  G2PTable g2p;
  WaveformStore audio;
};

// `synth.*` keys. Directions are "src-tgt:train:dev" with an optional
// ":zero" suffix, recognition counts "lang:n". The lexicon is not stored.
void write_synth_spec(const SynthSpec& spec, KvConfig& kv);
SynthSpec read_synth_spec(const KvConfig& kv);

RewriteRule rewrite_rule(const SynthSpec& spec, const std::string& src, const std::string& tgt);

// Builds a deterministic toy multilingual corpus: each word owns a fixed
// waveform segment, utterances concatenate segments plus seeded noise, and
// translations follow the per-direction rewrite rules.
SynthCorpus generate_corpus(SynthSpec spec);

// Writes train.tsv, dev.tsv, mono.tsv, parallel.tsv, g2p.tsv and wav/*.f32.
void write_corpus(const SynthCorpus& corpus, const std::string& dir);

std::vector<TextLine> load_text_lines(const std::string& path);
void save_text_lines(const std::string& path, const std::vector<TextLine>& lines);
std::vector<TextPair> load_text_pairs(const std::string& path);
void save_text_pairs(const std::string& path, const std::vector<TextPair>& pairs);

// --- batching -------------------------------------------------------------

using PaddingMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ItemSize {
  Eigen::Index tokens = 0;
  Eigen::Index frames = 0;
};

struct Batch {
  std::vector<std::size_t> indices;
  Eigen::Index token_len = 0;
  Eigen::Index frame_len = 0;
  // [batch x token_len] and [batch x frame_len]; true marks padding.
  PaddingMask token_padding;
  PaddingMask frame_padding;
};

// Length-bucketed batches whose padded size (batch * longest) stays within
// both limits. Order is a deterministic function of (seed, epoch).
std::vector<Batch> make_batches(std::span<const ItemSize> sizes, Eigen::Index max_tokens,
                                Eigen::Index max_frames, std::uint64_t seed, std::int64_t epoch);

}  // namespace mst
