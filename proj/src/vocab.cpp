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

#include "mst/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "mst/error.hpp"

namespace mst {

std::string to_string(VocabMode mode) {
  switch (mode) {
    case VocabMode::Subword:
      return "subword";
    case VocabMode::Phoneme:
      return "phoneme";
    case VocabMode::Char:
      return "char";
  }
  return "subword";
}

VocabMode parse_vocab_mode(std::string_view s) {
  if (s == "subword") return VocabMode::Subword;
  if (s == "phoneme") return VocabMode::Phoneme;
  if (s == "char") return VocabMode::Char;
  throw ConfigError("unknown vocabulary mode '" + std::string(s) + "' (subword, phoneme, char)");
}

std::vector<std::string> utf8_chars(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if ((c & 0xE0) == 0xC0) {
      len = 2;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
    }
    if (i + len > text.size()) len = 1;
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (char ch : text) {
    if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  for (const auto& w : split_words(text)) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

// --- G2PTable -------------------------------------------------------------

G2PTable G2PTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open pronunciation table '" + path + "'");
  G2PTable table;
  std::string line, lang;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("#lang:", 0) == 0) {
      lang = line.substr(6);
      table.entries_[lang];
      continue;
    }
    if (line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (lang.empty() || tab == std::string::npos) {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": expected 'word<TAB>phonemes' after a #lang: header");
    }
    auto phonemes = split_words(std::string_view(line).substr(tab + 1));
    for (const auto& p : phonemes) {
      if (p.rfind(kPhonemeWordStart, 0) == 0) {
        throw DataError(path + ":" + std::to_string(lineno) + ": phoneme '" + p +
                        "' must not carry the word-start mark");
      }
    }
    if (phonemes.empty()) throw DataError(path + ":" + std::to_string(lineno) + ": no phonemes");
    table.add(lang, line.substr(0, tab), std::move(phonemes));
  }
  return table;
}

void G2PTable::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write pronunciation table '" + path + "'");
  for (const auto& [lang, words] : entries_) {
    out << "#lang:" << lang << '\n';
    for (const auto& [word, phonemes] : words) {
      out << word << '\t';
      for (std::size_t i = 0; i < phonemes.size(); ++i) out << (i ? " " : "") << phonemes[i];
      out << '\n';
    }
  }
}

void G2PTable::add(const std::string& lang, const std::string& word,
                   std::vector<std::string> phonemes) {
  entries_[lang][word] = std::move(phonemes);
}

const std::vector<std::string>* G2PTable::lookup(const std::string& lang,
                                                 const std::string& word) const {
  auto l = entries_.find(lang);
  if (l == entries_.end()) return nullptr;
  auto w = l->second.find(word);
  return w == l->second.end() ? nullptr : &w->second;
}

std::vector<std::string> G2PTable::languages() const {
  std::vector<std::string> out;
  for (const auto& [lang, words] : entries_) out.push_back(lang);
  return out;
}

std::vector<std::string> G2PTable::inventory() const {
  std::set<std::string> all;
  for (const auto& [lang, words] : entries_)
    for (const auto& [word, phonemes] : words) all.insert(phonemes.begin(), phonemes.end());
  return {all.begin(), all.end()};
}

std::vector<std::string> phonemize(std::string_view text, const std::string& lang,
                                   const G2PTable& table) {
  if (!table.covers(lang)) {
    throw ConfigError("pronunciation table has no entries for language '" + lang + "'");
  }
  std::vector<std::string> out;
  for (const auto& word : split_words(text)) {
    std::vector<std::string> units;
    if (const auto* ph = table.lookup(lang, word)) {
      units = *ph;
    } else {
      units = utf8_chars(word);
    }
    for (std::size_t i = 0; i < units.size(); ++i) {
      out.push_back(i == 0 ? std::string(kPhonemeWordStart) + units[i] : units[i]);
    }
  }
  return out;
}

// --- Vocabulary -----------------------------------------------------------

std::string lid_symbol(const std::string& lang) { return "<lid:" + lang + ">"; }

Vocabulary::Vocabulary(VocabMode mode, std::vector<std::string> languages,
                       std::vector<std::string> symbols)
    : mode_(mode), languages_(std::move(languages)) {
  symbols_ = {"<pad>", "<s>", "</s>", "<unk>", "<mask>", "<sep>"};
  for (const auto& lang : languages_) {
    if (lid_.count(lang)) throw ConfigError("language '" + lang + "' configured twice");
    lid_[lang] = static_cast<int>(symbols_.size());
    symbols_.push_back(lid_symbol(lang));
  }
  for (auto& s : symbols) symbols_.push_back(std::move(s));
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (!index_.emplace(symbols_[i], static_cast<int>(i)).second) {
      throw ConfigError("duplicate vocabulary symbol '" + symbols_[i] + "'");
    }
  }
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open vocabulary '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("#mode=", 0) != 0) {
    throw DataError(path + ":1: expected '#mode=<subword|phoneme|char>' header");
  }
  const VocabMode mode = parse_vocab_mode(line.substr(6));
  std::vector<std::string> all;
  while (std::getline(in, line)) all.push_back(line);
  static const std::vector<std::string> fixed = {"<pad>", "<s>", "</s>", "<unk>", "<mask>", "<sep>"};
  if (all.size() < fixed.size() || !std::equal(fixed.begin(), fixed.end(), all.begin())) {
    throw DataError(path + ": specials missing or out of order");
  }
  std::vector<std::string> langs;
  std::size_t i = fixed.size();
  for (; i < all.size() && all[i].rfind("<lid:", 0) == 0 && all[i].back() == '>'; ++i) {
    langs.push_back(all[i].substr(5, all[i].size() - 6));
  }
  return Vocabulary(mode, std::move(langs), std::vector<std::string>(all.begin() + static_cast<long>(i), all.end()));
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write vocabulary '" + path + "'");
  out << "#mode=" << to_string(mode_) << '\n';
  for (const auto& s : symbols_) out << s << '\n';
}

int Vocabulary::lid(const std::string& lang) const {
  auto it = lid_.find(lang);
  if (it == lid_.end()) throw ConfigError("language '" + lang + "' has no LID symbol in the vocabulary");
  return it->second;
}

std::string Vocabulary::language_of(int id) const {
  for (const auto& [lang, lid] : lid_) {
    if (lid == id) return lang;
  }
  return {};
}

const std::string& Vocabulary::symbol(int id) const {
  if (id < 0 || id >= size()) {
    throw DataError("token id " + std::to_string(id) + " outside vocabulary of " + std::to_string(size()));
  }
  return symbols_[static_cast<std::size_t>(id)];
}

int Vocabulary::id(const std::string& symbol) const {
  auto it = index_.find(symbol);
  return it == index_.end() ? kUnk : it->second;
}

// --- build ----------------------------------------------------------------

namespace {

std::vector<std::string> word_units(const std::string& word) {
  auto units = utf8_chars(word);
  units.front() = std::string(kWordStart) + units.front();
  return units;
}

std::vector<std::string> learn_subwords(const std::vector<std::string>& corpus, int budget) {
  std::map<std::string, long> freq;
  for (const auto& line : corpus)
    for (const auto& w : split_words(line)) ++freq[w];

  std::vector<std::pair<std::vector<std::string>, long>> words;
  std::set<std::string> alphabet;
  for (const auto& [w, f] : freq) {
    auto units = word_units(w);
    alphabet.insert(units.begin(), units.end());
    words.emplace_back(std::move(units), f);
  }
  std::vector<std::string> symbols(alphabet.begin(), alphabet.end());
  std::set<std::string> known(alphabet.begin(), alphabet.end());

  while (static_cast<int>(symbols.size()) < budget) {
    std::map<std::pair<std::string, std::string>, long> pairs;
    for (const auto& [units, f] : words)
      for (std::size_t i = 0; i + 1 < units.size(); ++i) pairs[{units[i], units[i + 1]}] += f;
    if (pairs.empty()) break;
    // std::map iterates in lexicographic order, so the first maximum wins ties.
    auto best = pairs.begin();
    for (auto it = pairs.begin(); it != pairs.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    const auto [left, right] = best->first;
    const std::string merged = left + right;
    for (auto& [units, f] : words) {
      std::vector<std::string> next;
      for (std::size_t i = 0; i < units.size(); ++i) {
        if (i + 1 < units.size() && units[i] == left && units[i + 1] == right) {
          next.push_back(merged);
          ++i;
        } else {
          next.push_back(units[i]);
        }
      }
      units = std::move(next);
    }
    if (known.insert(merged).second) symbols.push_back(merged);
  }
  return symbols;
}

}  // namespace

Vocabulary build_vocab(const std::vector<std::string>& corpus, int size, VocabMode mode,
                       const std::vector<std::string>& languages,
                       std::shared_ptr<const G2PTable> table) {
  bool any = false;
  for (const auto& line : corpus) any = any || !split_words(line).empty();
  if (!any) throw DataError("build_vocab: corpus is empty");
  const int specials = Vocabulary::kFixedSpecials + static_cast<int>(languages.size());
  if (size <= specials) {
    throw ConfigError("build_vocab: size " + std::to_string(size) + " leaves no room beyond " +
                      std::to_string(specials) + " specials");
  }

  std::vector<std::string> symbols;
  if (mode == VocabMode::Subword) {
    symbols = learn_subwords(corpus, size - specials);
  } else if (mode == VocabMode::Char) {
    std::set<std::string> chars;
    for (const auto& line : corpus)
      for (const auto& w : split_words(line))
        for (auto& c : utf8_chars(w)) chars.insert(std::move(c));
    symbols.assign(chars.begin(), chars.end());
  } else {
    if (!table) throw ConfigError("build_vocab: phoneme mode needs a pronunciation table");
    std::set<std::string> units;
    for (const auto& p : table->inventory()) units.insert(p);
    for (const auto& line : corpus)
      for (const auto& w : split_words(line))
        for (auto& c : utf8_chars(w)) units.insert(std::move(c));
    for (const auto& u : units) {
      symbols.push_back(std::string(kPhonemeWordStart) + u);
      symbols.push_back(u);
    }
  }
  Vocabulary vocab(mode, languages, std::move(symbols));
  vocab.attach_table(std::move(table));
  return vocab;
}

// --- encode / decode ------------------------------------------------------

namespace {

void encode_subword_word(const std::string& word, const Vocabulary& vocab, std::vector<int>& out) {
  const auto units = word_units(word);
  std::size_t i = 0;
  while (i < units.size()) {
    // Longest match over the learned inventory.
    std::size_t best_len = 0;
    int best_id = Vocabulary::kUnk;
    std::string piece;
    for (std::size_t j = i; j < units.size(); ++j) {
      piece += units[j];
      const int id = vocab.id(piece);
      if (id != Vocabulary::kUnk && !vocab.is_special(id)) {
        best_len = j - i + 1;
        best_id = id;
      }
    }
    out.push_back(best_id);
    i += best_len == 0 ? 1 : best_len;
  }
}

int plain_id(const Vocabulary& vocab, const std::string& s) {
  const int id = vocab.id(s);
  return vocab.is_special(id) ? Vocabulary::kUnk : id;
}

}  // namespace

std::vector<int> encode(std::string_view text, const std::string& lang, const Vocabulary& vocab,
                        Side side) {
  const int lid = vocab.lid(lang);
  std::vector<int> out;
  if (side == Side::Target) out.push_back(lid);
  const auto words = split_words(text);
  switch (vocab.mode()) {
    case VocabMode::Subword:
      for (const auto& w : words) encode_subword_word(w, vocab, out);
      break;
    case VocabMode::Char:
      for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out.push_back(Vocabulary::kSep);
        for (const auto& c : utf8_chars(words[i])) out.push_back(plain_id(vocab, c));
      }
      break;
    case VocabMode::Phoneme: {
      if (vocab.table() == nullptr) {
        throw ConfigError("phoneme vocabulary has no pronunciation table attached");
      }
      for (const auto& p : phonemize(text, lang, *vocab.table())) out.push_back(plain_id(vocab, p));
      break;
    }
  }
  out.push_back(Vocabulary::kEos);
  return out;
}

std::string decode(const std::vector<int>& ids, const Vocabulary& vocab) {
  std::string out;
  for (int id : ids) {
    const std::string& s = vocab.symbol(id);
    if (id == Vocabulary::kSep) {
      if (vocab.mode() == VocabMode::Char && !out.empty()) out.push_back(' ');
      continue;
    }
    if (vocab.is_special(id)) continue;
    switch (vocab.mode()) {
      case VocabMode::Subword:
        if (s.rfind(kWordStart, 0) == 0) {
          if (!out.empty()) out.push_back(' ');
          out += s.substr(kWordStart.size());
        } else {
          out += s;
        }
        break;
      case VocabMode::Phoneme:
        if (s.rfind(kPhonemeWordStart, 0) == 0) {
          if (!out.empty()) out.push_back(' ');
          out += s.substr(kPhonemeWordStart.size());
        } else {
          out += s;
        }
        break;
      case VocabMode::Char:
        out += s;
        break;
    }
  }
  return out;
}

}  // namespace mst
