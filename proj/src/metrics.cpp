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

#include "mst/metrics.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "mst/error.hpp"
#include "mst/kv.hpp"
#include "mst/vocab.hpp"

namespace mst {

std::vector<std::string> bleu_tokenize(const std::string& text) {
  std::string spaced;
  for (char ch : text) {
    if (std::ispunct(static_cast<unsigned char>(ch))) {
      spaced.push_back(' ');
      spaced.push_back(ch);
      spaced.push_back(' ');
    } else {
      spaced.push_back(ch);
    }
  }
  return split_words(spaced);
}

double bleu(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references) {
  if (hypotheses.size() != references.size()) {
    throw UsageError("bleu: " + std::to_string(hypotheses.size()) + " hypotheses for " +
                     std::to_string(references.size()) + " references");
  }
  constexpr int kOrder = 4;
  std::array<double, kOrder> matches{}, totals{};
  double hyp_len = 0.0, ref_len = 0.0;
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    const auto hyp = bleu_tokenize(hypotheses[s]);
    const auto ref = bleu_tokenize(references[s]);
    hyp_len += static_cast<double>(hyp.size());
    ref_len += static_cast<double>(ref.size());
    for (int n = 1; n <= kOrder; ++n) {
      std::map<std::vector<std::string>, int> ref_counts, hyp_counts;
      for (std::size_t i = 0; i + n <= ref.size(); ++i) ++ref_counts[{ref.begin() + i, ref.begin() + i + n}];
      for (std::size_t i = 0; i + n <= hyp.size(); ++i) ++hyp_counts[{hyp.begin() + i, hyp.begin() + i + n}];
      for (const auto& [gram, c] : hyp_counts) {
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) matches[n - 1] += std::min(c, it->second);
        totals[n - 1] += c;
      }
    }
  }
  if (hyp_len == 0.0 || matches[0] == 0.0) return 0.0;
  double log_sum = 0.0;
  for (int n = 0; n < kOrder; ++n) {
    const double p = (n > 0 && matches[n] == 0.0) ? 1.0 / (totals[n] + 1.0) : matches[n] / totals[n];
    log_sum += std::log(p) / kOrder;
  }
  const double bp = hyp_len > ref_len ? 1.0 : std::exp(1.0 - ref_len / hyp_len);
  return 100.0 * bp * std::exp(log_sum);
}

std::size_t edit_distance(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double wer(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references) {
  if (hypotheses.size() != references.size()) {
    throw UsageError("wer: " + std::to_string(hypotheses.size()) + " hypotheses for " +
                     std::to_string(references.size()) + " references");
  }
  std::size_t edits = 0, words = 0;
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    const auto ref = split_words(references[s]);
    edits += edit_distance(split_words(hypotheses[s]), ref);
    words += ref.size();
  }
  if (words == 0) throw UsageError("wer: the reference corpus has no words");
  return 100.0 * static_cast<double>(edits) / static_cast<double>(words);
}

std::map<std::string, std::string> load_id_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::map<std::string, std::string> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(path + ":" + std::to_string(lineno) + ": expected 'id<TAB>text'");
    auto [it, fresh] = rows.emplace(line.substr(0, tab), line.substr(tab + 1));
    if (!fresh) throw DataError(path + ":" + std::to_string(lineno) + ": duplicate id '" + it->first + "'");
  }
  return rows;
}

void save_id_text(const std::string& path, const std::map<std::string, std::string>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  for (const auto& [id, text] : rows) out << id << '\t' << text << '\n';
}

double EvalReport::average() const {
  if (directions.empty()) return 0.0;
  double s = 0.0;
  for (const auto& [d, score] : directions) s += score.value;
  return s / static_cast<double>(directions.size());
}

std::string EvalReport::format(const std::string& row_label) const {
  auto cell = [](const std::string& s) {
    std::string out = s;
    if (out.size() < 8) out.insert(0, 8 - out.size(), ' ');
    return out;
  };
  auto number = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  const std::string label = row_label.empty() ? metric : row_label;
  const std::size_t width = std::max<std::size_t>(label.size(), 6);
  std::string head = std::string(width, ' ');
  std::string row = label + std::string(width - label.size(), ' ');
  for (const auto& [d, score] : directions) {
    head += cell(d);
    row += cell(number(score.value));
  }
  head += cell("Ave.");
  row += cell(number(average()));
  return head + "\n" + row + "\n";
}

EvalReport evaluate(const std::map<std::string, std::string>& hypotheses,
                    const std::map<std::string, std::string>& references, const std::string& metric,
                    const std::map<std::string, std::string>& direction_of) {
  if (metric != "bleu" && metric != "wer") throw UsageError("unknown metric '" + metric + "' (bleu|wer)");
  std::map<std::string, std::pair<std::vector<std::string>, std::vector<std::string>>> groups;
  for (const auto& [id, ref] : references) {
    auto d = direction_of.find(id);
    auto& g = groups[d == direction_of.end() ? "all" : d->second];
    auto h = hypotheses.find(id);
    g.first.push_back(h == hypotheses.end() ? std::string() : h->second);
    g.second.push_back(ref);
  }
  EvalReport report;
  report.metric = metric == "bleu" ? "BLEU" : "WER";
  for (const auto& [d, g] : groups) {
    report.directions[d] = {metric == "bleu" ? bleu(g.first, g.second) : wer(g.first, g.second), g.first.size()};
  }
  return report;
}

}  // namespace mst
