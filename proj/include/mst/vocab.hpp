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
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mst {

enum class VocabMode { Subword, Phoneme, Char };
enum class Side { Source, Target };

std::string to_string(VocabMode mode);
VocabMode parse_vocab_mode(std::string_view s);

// Word-start marker for subword units ("▁", as in SentencePiece).
inline constexpr std::string_view kWordStart = "\xE2\x96\x81";
// Word-start marker for phonemes.
inline constexpr std::string_view kPhonemeWordStart = "_";

// Splits UTF-8 text into code points; invalid bytes pass through singly.
std::vector<std::string> utf8_chars(std::string_view text);
std::vector<std::string> split_words(std::string_view text);
std::string normalize_whitespace(std::string_view text);

// Pronunciation lookup, word -> phonemes, per language.
//
// File format: a `#lang:xx` line opens a section, followed by
// `word<TAB>ph ph ...` rows. Phonemes are stored without word-start marks.
class G2PTable {
 public:
  static G2PTable load(const std::string& path);
  void save(const std::string& path) const;

  void add(const std::string& lang, const std::string& word, std::vector<std::string> phonemes);
  bool covers(const std::string& lang) const { return entries_.count(lang) > 0; }
  const std::vector<std::string>* lookup(const std::string& lang, const std::string& word) const;
  std::vector<std::string> languages() const;
  // Every phoneme used by any entry, sorted.
  std::vector<std::string> inventory() const;

 private:
  std::map<std::string, std::map<std::string, std::vector<std::string>>> entries_;
};

// Per-word lookup; the first phoneme of every word carries the "_" mark.
// Words missing from the table fall back to one pseudo-phoneme per character.
std::vector<std::string> phonemize(std::string_view text, const std::string& lang,
                                   const G2PTable& table);

// Symbol inventory with fixed specials at the lowest ids:
//   <pad> <s> </s> <unk> <mask> <sep> <lid:xx>...
// followed by the learned symbols. <sep> separates words in char mode.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kMask = 4;
  static constexpr int kSep = 5;
  static constexpr int kFixedSpecials = 6;

  Vocabulary() = default;
  Vocabulary(VocabMode mode, std::vector<std::string> languages, std::vector<std::string> symbols);

  static Vocabulary load(const std::string& path);
  void save(const std::string& path) const;

  VocabMode mode() const { return mode_; }
  int size() const { return static_cast<int>(symbols_.size()); }
  int num_specials() const { return kFixedSpecials + static_cast<int>(languages_.size()); }
  bool is_special(int id) const { return id >= 0 && id < num_specials(); }
  const std::vector<std::string>& languages() const { return languages_; }
  bool has_language(const std::string& lang) const { return lid_.count(lang) > 0; }
  // Id of <lid:lang>; ConfigError for unconfigured languages.
  int lid(const std::string& lang) const;
  // Language of a LID id, or empty.
  std::string language_of(int id) const;

  const std::string& symbol(int id) const;
  // Id of a symbol, or kUnk.
  int id(const std::string& symbol) const;
  bool contains(const std::string& symbol) const { return index_.count(symbol) > 0; }
  const std::vector<std::string>& symbols() const { return symbols_; }

  // Phoneme mode needs a pronunciation table to encode raw text.
  void attach_table(std::shared_ptr<const G2PTable> table) { table_ = std::move(table); }
  const G2PTable* table() const { return table_.get(); }

  bool operator==(const Vocabulary& other) const {
    return mode_ == other.mode_ && symbols_ == other.symbols_;
  }

 private:
  VocabMode mode_ = VocabMode::Subword;
  std::vector<std::string> languages_;
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
  std::unordered_map<std::string, int> lid_;
  std::shared_ptr<const G2PTable> table_;
};

std::string lid_symbol(const std::string& lang);

// Subword mode learns greedy pair merges (most frequent first, ties broken
// lexicographically) until `size` symbols exist. Char mode keeps characters,
// phoneme mode enumerates the table inventory plus character fallbacks, both
// marked and unmarked. `size` only bounds subword mode.
Vocabulary build_vocab(const std::vector<std::string>& corpus, int size, VocabMode mode,
                       const std::vector<std::string>& languages,
                       std::shared_ptr<const G2PTable> table = nullptr);

// Target side: [<lid:lang>, tokens..., </s>]. Source side: [tokens..., </s>].
std::vector<int> encode(std::string_view text, const std::string& lang, const Vocabulary& vocab,
                        Side side);

// Drops specials and undoes segmentation.
std::string decode(const std::vector<int>& ids, const Vocabulary& vocab);

}  // namespace mst
