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
#include <vector>

#include "mst/data.hpp"
#include "mst/model.hpp"
#include "mst/vocab.hpp"

namespace mst {

struct SentenceEmbedding {
  std::string id;
  std::string lang;
  Vector vector;  // unit norm
};

struct TextRecord {
  std::string id;
  std::string lang;
  std::string text;
};

// `id<TAB>lang<TAB>text` rows.
std::vector<TextRecord> load_text_records(const std::string& path);
void save_text_records(const std::string& path, const std::vector<TextRecord>& records);

// Mean-pooled text encoder states, L2-normalized.
std::vector<SentenceEmbedding> embed_sentences(const JointModel& model, const Vocabulary& vocab,
                                               const std::vector<TextRecord>& texts);

// Header `d=<dim>`, then `id<TAB>lang<TAB>v1 v2 ...`. Loading normalizes;
// zero vectors raise DataError naming the sentence.
std::vector<SentenceEmbedding> load_embeddings(const std::string& path);
void save_embeddings(const std::string& path, const std::vector<SentenceEmbedding>& embeddings);

struct Neighbor {
  std::size_t index = 0;
  double cosine = 0.0;
};

// Exact top-k by cosine, descending, ties by candidate id. A query never
// lists a candidate with its own id.
std::vector<std::vector<Neighbor>> knn(const std::vector<SentenceEmbedding>& queries,
                                       const std::vector<SentenceEmbedding>& candidates, int k);

// cos(x, y) / (sum(nn_x) / 2k + sum(nn_y) / 2k).
double margin_score(double cos_xy, const std::vector<double>& nn_x, const std::vector<double>& nn_y, int k);

enum class MiningStrategy { Intersection, ForwardMax };

struct MiningConfig {
  int k = 4;
  double threshold = 1.06;
  MiningStrategy strategy = MiningStrategy::Intersection;

  void validate() const;
};

MiningStrategy parse_mining_strategy(const std::string& s);

struct MinedPair {
  std::string src_id;
  std::string tgt_id;
  double score = 0.0;
};

// Best-margin alignment of sources to targets, sorted by descending score.
std::vector<MinedPair> mine_pairs(const std::vector<SentenceEmbedding>& src,
                                  const std::vector<SentenceEmbedding>& tgt, const MiningConfig& cfg);

// `src_id<TAB>tgt_id<TAB>score`, six decimals.
void save_mined_pairs(const std::string& path, const std::vector<MinedPair>& pairs);
std::vector<MinedPair> load_mined_pairs(const std::string& path);

// Speech translation rows built from speech recognition rows and the mined
// target sentences. Missing ids raise one DataError listing all of them.
std::vector<SampleManifest> attach_audio(const std::vector<MinedPair>& pairs,
                                         const std::vector<SampleManifest>& asr_manifest,
                                         const std::vector<TextRecord>& targets);

// Audio hours per direction, rows of labelled manifests, printed like the
// data-size table: directions as columns, one decimal, "-" when absent.
class HoursTable {
 public:
  static const std::vector<std::string>& default_columns();

  void add_row(const std::string& label, const std::vector<SampleManifest>& samples);
  void add_row(const std::string& label, std::map<std::string, double> hours);
  std::string format() const;

  const std::vector<std::pair<std::string, std::map<std::string, double>>>& rows() const { return rows_; }

 private:
  std::vector<std::pair<std::string, std::map<std::string, double>>> rows_;
};

std::map<std::string, double> hours_by_direction(const std::vector<SampleManifest>& samples);

}  // namespace mst
