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

#include "mst/mining.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "mst/error.hpp"
#include "mst/kv.hpp"

namespace mst {

std::vector<TextRecord> load_text_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<TextRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split(line, '\t');
    if (f.size() != 3) throw DataError(path + ":" + std::to_string(lineno) + ": expected 'id<TAB>lang<TAB>text'");
    out.push_back({f[0], f[1], f[2]});
  }
  return out;
}

void save_text_records(const std::string& path, const std::vector<TextRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  for (const auto& r : records) out << r.id << '\t' << r.lang << '\t' << r.text << '\n';
}

std::vector<SentenceEmbedding> embed_sentences(const JointModel& model, const Vocabulary& vocab,
                                               const std::vector<TextRecord>& texts) {
  if (texts.empty()) throw DataError("embed_sentences: no sentences");
  NoGradGuard guard;
  std::vector<SentenceEmbedding> out;
  for (const auto& t : texts) {
    const auto ids = encode(t.text, t.lang, vocab, Side::Source);
    Vector pooled = mean_rows(model.forward_text(ids)).value();
    const double norm = pooled.norm();
    if (!(norm > 0.0)) throw DataError("sentence '" + t.id + "' has a zero embedding");
    out.push_back({t.id, t.lang, pooled / norm});
  }
  return out;
}

std::vector<SentenceEmbedding> load_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding file '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("d=", 0) != 0) throw DataError(path + ":1: expected 'd=<dim>'");
  Index dim = 0;
  try {
    dim = std::stoll(line.substr(2));
  } catch (const std::logic_error&) {
    throw DataError(path + ":1: bad dimension");
  }
  if (dim < 1) throw DataError(path + ":1: bad dimension");
  std::vector<SentenceEmbedding> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    auto f = split(line, '\t');
    if (f.size() != 3) throw DataError(where + ": expected 'id<TAB>lang<TAB>values'");
    std::istringstream vs(f[2]);
    std::vector<double> values;
    for (std::string tok; vs >> tok;) {
      try {
        values.push_back(std::stod(tok));
      } catch (const std::logic_error&) {
        throw DataError(where + ": bad number '" + tok + "'");
      }
    }
    if (static_cast<Index>(values.size()) != dim) {
      throw DimensionError(where + ": " + std::to_string(values.size()) + " values, header says " +
                           std::to_string(dim));
    }
    Vector v = Eigen::Map<const Vector>(values.data(), dim);
    const double norm = v.norm();
    if (!(norm > 0.0)) throw DataError(where + ": sentence '" + f[0] + "' has a zero embedding");
    out.push_back({f[0], f[1], v / norm});
  }
  return out;
}

void save_embeddings(const std::string& path, const std::vector<SentenceEmbedding>& embeddings) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  const Index dim = embeddings.empty() ? 0 : embeddings.front().vector.size();
  out << "d=" << dim << '\n';
  for (const auto& e : embeddings) {
    if (e.vector.size() != dim) throw DimensionError("save_embeddings: mixed dimensions");
    out << e.id << '\t' << e.lang << '\t';
    for (Index i = 0; i < dim; ++i) out << (i ? " " : "") << format_double(e.vector[i]);
    out << '\n';
  }
}

namespace {

void check_dims(const std::vector<SentenceEmbedding>& a, const std::vector<SentenceEmbedding>& b) {
  if (a.empty() || b.empty()) return;
  const Index d = a.front().vector.size();
  for (const auto* set : {&a, &b}) {
    for (const auto& e : *set) {
      if (e.vector.size() != d) {
        throw DimensionError("embedding '" + e.id + "' has dimension " + std::to_string(e.vector.size()) +
                             ", expected " + std::to_string(d));
      }
    }
  }
}

// Descending cosine, then ascending id.
bool neighbor_before(const Neighbor& a, const Neighbor& b, const std::vector<SentenceEmbedding>& cands) {
  if (a.cosine != b.cosine) return a.cosine > b.cosine;
  return cands[a.index].id < cands[b.index].id;
}

}  // namespace

std::vector<std::vector<Neighbor>> knn(const std::vector<SentenceEmbedding>& queries,
                                       const std::vector<SentenceEmbedding>& candidates, int k) {
  if (k < 1) throw UsageError("knn: k must be at least 1");
  check_dims(queries, candidates);
  std::vector<std::vector<Neighbor>> out(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    std::vector<Neighbor> all;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (candidates[c].id == queries[q].id) continue;
      all.push_back({c, queries[q].vector.dot(candidates[c].vector)});
    }
    const auto keep = std::min(all.size(), static_cast<std::size_t>(k));
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                      [&](const Neighbor& a, const Neighbor& b) { return neighbor_before(a, b, candidates); });
    all.resize(keep);
    out[q] = std::move(all);
  }
  return out;
}

double margin_score(double cos_xy, const std::vector<double>& nn_x, const std::vector<double>& nn_y, int k) {
  double sx = 0.0, sy = 0.0;
  for (double c : nn_x) sx += c;
  for (double c : nn_y) sy += c;
  const double denom = sx / (2.0 * k) + sy / (2.0 * k);
  if (denom == 0.0) throw DataError("margin_score: zero neighborhood denominator");
  return cos_xy / denom;
}

void MiningConfig::validate() const {
  if (k < 1) throw ConfigError("mining k must be at least 1");
  if (!(threshold > 0.0)) throw ConfigError("mining threshold must be positive");
}

MiningStrategy parse_mining_strategy(const std::string& s) {
  if (s == "intersection") return MiningStrategy::Intersection;
  if (s == "forward-max") return MiningStrategy::ForwardMax;
  throw ConfigError("unknown mining strategy '" + s + "' (intersection|forward-max)");
}

std::vector<MinedPair> mine_pairs(const std::vector<SentenceEmbedding>& src,
                                  const std::vector<SentenceEmbedding>& tgt, const MiningConfig& cfg) {
  cfg.validate();
  if (src.empty() || tgt.empty()) return {};
  check_dims(src, tgt);
  const std::size_t ns = src.size(), nt = tgt.size();
  RowMatrix cos(static_cast<Index>(ns), static_cast<Index>(nt));
  for (std::size_t i = 0; i < ns; ++i) {
    for (std::size_t j = 0; j < nt; ++j) {
      cos(static_cast<Index>(i), static_cast<Index>(j)) = src[i].vector.dot(tgt[j].vector);
    }
  }
  // Each side's neighborhood: its k best cosines on the other side.
  auto top_k = [&](std::vector<double> row) {
    const auto keep = std::min(row.size(), static_cast<std::size_t>(cfg.k));
    std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(keep), row.end(), std::greater<>());
    row.resize(keep);
    return row;
  };
  std::vector<std::vector<double>> nn_src(ns), nn_tgt(nt);
  for (std::size_t i = 0; i < ns; ++i) {
    nn_src[i] = top_k({cos.row(static_cast<Index>(i)).data(), cos.row(static_cast<Index>(i)).data() + nt});
  }
  for (std::size_t j = 0; j < nt; ++j) {
    std::vector<double> col(ns);
    for (std::size_t i = 0; i < ns; ++i) col[i] = cos(static_cast<Index>(i), static_cast<Index>(j));
    nn_tgt[j] = top_k(std::move(col));
  }
  RowMatrix margin(static_cast<Index>(ns), static_cast<Index>(nt));
  for (std::size_t i = 0; i < ns; ++i) {
    const int kx = static_cast<int>(nn_src[i].size());
    for (std::size_t j = 0; j < nt; ++j) {
      const int ky = static_cast<int>(nn_tgt[j].size());
      // Clipped neighborhoods average over what exists.
      double sx = 0.0, sy = 0.0;
      for (double c : nn_src[i]) sx += c;
      for (double c : nn_tgt[j]) sy += c;
      const double denom = sx / (2.0 * kx) + sy / (2.0 * ky);
      if (denom == 0.0) throw DataError("mine_pairs: zero neighborhood denominator for '" + src[i].id + "'");
      margin(static_cast<Index>(i), static_cast<Index>(j)) = cos(static_cast<Index>(i), static_cast<Index>(j)) / denom;
    }
  }
  auto best_target = [&](std::size_t i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < nt; ++j) {
      const double a = margin(static_cast<Index>(i), static_cast<Index>(j));
      const double b = margin(static_cast<Index>(i), static_cast<Index>(best));
      if (a > b || (a == b && tgt[j].id < tgt[best].id)) best = j;
    }
    return best;
  };
  auto best_source = [&](std::size_t j) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < ns; ++i) {
      const double a = margin(static_cast<Index>(i), static_cast<Index>(j));
      const double b = margin(static_cast<Index>(best), static_cast<Index>(j));
      if (a > b || (a == b && src[i].id < src[best].id)) best = i;
    }
    return best;
  };
  std::vector<MinedPair> pairs;
  for (std::size_t i = 0; i < ns; ++i) {
    const std::size_t j = best_target(i);
    const double score = margin(static_cast<Index>(i), static_cast<Index>(j));
    if (score < cfg.threshold) continue;
    if (cfg.strategy == MiningStrategy::Intersection && best_source(j) != i) continue;
    pairs.push_back({src[i].id, tgt[j].id, score});
  }
  std::sort(pairs.begin(), pairs.end(), [](const MinedPair& a, const MinedPair& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.src_id != b.src_id) return a.src_id < b.src_id;
    return a.tgt_id < b.tgt_id;
  });
  return pairs;
}

void save_mined_pairs(const std::string& path, const std::vector<MinedPair>& pairs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  char buf[64];
  for (const auto& p : pairs) {
    std::snprintf(buf, sizeof buf, "%.6f", p.score);
    out << p.src_id << '\t' << p.tgt_id << '\t' << buf << '\n';
  }
}

std::vector<MinedPair> load_mined_pairs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<MinedPair> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split(line, '\t');
    if (f.size() != 3) throw DataError(path + ":" + std::to_string(lineno) + ": expected 'src_id<TAB>tgt_id<TAB>score'");
    try {
      out.push_back({f[0], f[1], std::stod(f[2])});
    } catch (const std::logic_error&) {
      throw DataError(path + ":" + std::to_string(lineno) + ": bad score '" + f[2] + "'");
    }
  }
  return out;
}

std::vector<SampleManifest> attach_audio(const std::vector<MinedPair>& pairs,
                                         const std::vector<SampleManifest>& asr_manifest,
                                         const std::vector<TextRecord>& targets) {
  std::map<std::string, const SampleManifest*> by_id;
  for (const auto& s : asr_manifest) by_id[s.id] = &s;
  std::map<std::string, const TextRecord*> text_by_id;
  for (const auto& t : targets) text_by_id[t.id] = &t;
  std::vector<std::string> missing;
  std::vector<SampleManifest> out;
  for (const auto& p : pairs) {
    auto s = by_id.find(p.src_id);
    auto t = text_by_id.find(p.tgt_id);
    if (s == by_id.end()) {
      missing.push_back(p.src_id);
      continue;
    }
    if (t == text_by_id.end()) {
      missing.push_back(p.tgt_id);
      continue;
    }
    SampleManifest row = *s->second;
    row.id = p.src_id + "+" + p.tgt_id;
    row.tgt_lang = t->second->lang;
    row.translation = t->second->text;
    out.push_back(std::move(row));
  }
  if (!missing.empty()) throw DataError("mined pairs reference unknown ids: " + join(missing, ", "));
  std::sort(out.begin(), out.end(), [](const SampleManifest& a, const SampleManifest& b) { return a.id < b.id; });
  return out;
}

std::map<std::string, double> hours_by_direction(const std::vector<SampleManifest>& samples) {
  std::map<std::string, double> seconds;
  for (const auto& s : samples) seconds[s.src_lang + "-" + s.tgt_lang] += s.duration_seconds();
  for (auto& [d, v] : seconds) v /= 3600.0;
  return seconds;
}

const std::vector<std::string>& HoursTable::default_columns() {
  static const std::vector<std::string> cols{"es-en", "fr-en", "it-en", "pt-en", "fr-es", "pt-es", "it-es"};
  return cols;
}

void HoursTable::add_row(const std::string& label, const std::vector<SampleManifest>& samples) {
  add_row(label, hours_by_direction(samples));
}

void HoursTable::add_row(const std::string& label, std::map<std::string, double> hours) {
  rows_.emplace_back(label, std::move(hours));
}

std::string HoursTable::format() const {
  std::vector<std::string> columns = default_columns();
  std::set<std::string> extra;
  for (const auto& [label, hours] : rows_) {
    for (const auto& [d, h] : hours) {
      if (std::find(columns.begin(), columns.end(), d) == columns.end()) extra.insert(d);
    }
  }
  columns.insert(columns.end(), extra.begin(), extra.end());
  std::size_t label_width = 0;
  for (const auto& [label, hours] : rows_) label_width = std::max(label_width, label.size());
  auto pad_left = [](const std::string& s, std::size_t w) {
    return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
  };
  std::string out = std::string(label_width, ' ') + " |";
  for (const auto& c : columns) out += " " + pad_left(c, 6);
  out += "\n";
  for (const auto& [label, hours] : rows_) {
    out += label + std::string(label_width - label.size(), ' ') + " |";
    for (const auto& c : columns) {
      auto it = hours.find(c);
      std::string cell = "-";
      if (it != hours.end() && it->second > 0.0) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.1f", it->second);
        cell = buf;
      }
      out += " " + pad_left(cell, 6);
    }
    out += "\n";
  }
  return out;
}

}  // namespace mst
