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

namespace mst {

// Whitespace tokenization after isolating ASCII punctuation.
std::vector<std::string> bleu_tokenize(const std::string& text);

// Corpus BLEU-4 in [0, 100]: clipped n-gram precisions pooled over the corpus,
// zero counts for n > 1 smoothed to 1 / (total + 1), times the brevity penalty.
double bleu(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references);

// Word-level edit distance.
std::size_t edit_distance(const std::vector<std::string>& a, const std::vector<std::string>& b);

// 100 * total word edits / total reference words.
double wer(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references);

// `id<TAB>text` files as written by the decoder.
std::map<std::string, std::string> load_id_text(const std::string& path);
void save_id_text(const std::string& path, const std::map<std::string, std::string>& rows);

struct DirectionScore {
  double value = 0.0;
  std::size_t samples = 0;
};

// Per-direction scores for one metric, printed as a table with directions as
// columns and the average last.
struct EvalReport {
  std::string metric;  // "BLEU" or "WER"
  std::map<std::string, DirectionScore> directions;

  double average() const;
  std::string format(const std::string& row_label = "") const;
};

// Scores hypotheses against references by id. `direction_of` maps ids to a
// direction label; ids without one are grouped under "all". Missing
// hypotheses count as empty output.
EvalReport evaluate(const std::map<std::string, std::string>& hypotheses,
                    const std::map<std::string, std::string>& references, const std::string& metric,
                    const std::map<std::string, std::string>& direction_of = {});

}  // namespace mst
