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

#include "mst/data.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

#include "mst/error.hpp"
#include "mst/kv.hpp"
#include "mst/random.hpp"

namespace mst {

namespace fs = std::filesystem;

// --- manifest -------------------------------------------------------------

void validate_sample(const SampleManifest& s) {
  auto fail = [&](const std::string& why) {
    throw DataError("sample '" + s.id + "': " + why);
  };
  if (s.id.empty()) throw DataError("sample with empty id");
  if (s.n_samples < 0) fail("n_samples must be >= 0, got " + std::to_string(s.n_samples));
  if (s.sample_rate <= 0) fail("sample_rate must be positive");
  if (s.src_lang.empty() || s.tgt_lang.empty()) fail("language codes must be nonempty");
  if (s.is_asr() && s.tgt_lang != s.src_lang) {
    fail("speech recognition sample (empty translation) needs tgt_lang == src_lang");
  }
  for (const std::string* f : {&s.id, &s.audio_path, &s.src_lang, &s.tgt_lang, &s.transcript, &s.translation}) {
    if (f->find_first_of("\t\n\r") != std::string::npos) fail("field contains a tab or newline");
  }
}

namespace {

template <typename T>
T parse_number(const std::string& field, const std::string& where, const char* column) {
  T out{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw DataError(where + ": column '" + column + "' is not an integer: '" + field + "'");
  }
  return out;
}

}  // namespace

std::vector<SampleManifest> load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open manifest '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ":1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kManifestHeader) {
    throw DataError(path + ":1: header must be '" + std::string(kManifestHeader) + "'");
  }
  std::vector<SampleManifest> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    auto f = split(line, '\t');
    if (f.size() != 8) {
      throw DataError(where + ": expected 8 columns, found " + std::to_string(f.size()));
    }
    SampleManifest s;
    s.id = f[0];
    s.audio_path = f[1];
    s.n_samples = parse_number<std::int64_t>(f[2], where, "n_samples");
    s.sample_rate = parse_number<int>(f[3], where, "sample_rate");
    s.src_lang = f[4];
    s.tgt_lang = f[5];
    s.transcript = f[6];
    s.translation = f[7];
    try {
      validate_sample(s);
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    out.push_back(std::move(s));
  }
  return out;
}

void save_manifest(const std::string& path, const std::vector<SampleManifest>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write manifest '" + path + "'");
  out << kManifestHeader << '\n';
  for (const auto& s : samples) {
    validate_sample(s);
    out << s.id << '\t' << s.audio_path << '\t' << s.n_samples << '\t' << s.sample_rate << '\t'
        << s.src_lang << '\t' << s.tgt_lang << '\t' << s.transcript << '\t' << s.translation << '\n';
  }
}

// --- waveforms ------------------------------------------------------------

std::vector<double> read_waveform(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open waveform '" + path + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % 4 != 0) {
    throw DataError("waveform '" + path + "' has " + std::to_string(bytes.size()) +
                    " bytes, not a multiple of 4");
  }
  std::vector<double> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t u = 0;
    for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * 4 + b])) << (8 * b);
    out[i] = static_cast<double>(std::bit_cast<float>(u));
  }
  return out;
}

void write_waveform(const std::string& path, std::span<const double> samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write waveform '" + path + "'");
  std::vector<char> bytes(samples.size() * 4);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto u = std::bit_cast<std::uint32_t>(static_cast<float>(samples[i]));
    for (int b = 0; b < 4; ++b) bytes[i * 4 + b] = static_cast<char>((u >> (8 * b)) & 0xFF);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void WaveformStore::put(const std::string& tag, std::vector<double> samples) {
  memory_[tag] = std::move(samples);
}

std::vector<double> WaveformStore::get(const SampleManifest& sample) const {
  std::vector<double> wav;
  if (sample.audio_path.rfind("synth:", 0) == 0) {
    auto it = memory_.find(sample.audio_path);
    if (it == memory_.end()) {
      throw DataError("sample '" + sample.id + "': no in-memory audio for '" + sample.audio_path + "'");
    }
    wav = it->second;
  } else {
    fs::path p(sample.audio_path);
    if (p.is_relative()) p = fs::path(base_dir_) / p;
    wav = read_waveform(p.string());
  }
  if (static_cast<std::int64_t>(wav.size()) != sample.n_samples) {
    throw DataError("sample '" + sample.id + "': audio has " + std::to_string(wav.size()) +
                    " samples, manifest says " + std::to_string(sample.n_samples));
  }
  return wav;
}

// --- synthetic corpus -----------------------------------------------------

std::string RewriteRule::apply(const std::string& text) const {
  std::string out;
  for (const auto& w : split_words(text)) {
    auto it = words.find(w);
    if (it == words.end()) {
      throw DataError("rewrite " + src_lang + "-" + tgt_lang + ": no rule for word '" + w + "'");
    }
    if (!out.empty()) out.push_back(' ');
    out += it->second;
  }
  return out;
}

std::vector<std::string> SynthSpec::languages() const {
  std::set<std::string> langs;
  for (const auto& d : directions) {
    langs.insert(d.src);
    langs.insert(d.tgt);
  }
  for (const auto& [l, n] : asr_train) langs.insert(l);
  for (const auto& [l, n] : asr_dev) langs.insert(l);
  return {langs.begin(), langs.end()};
}

namespace {

constexpr const char* kConsonants = "bdfgklmnprstvz";
constexpr const char* kVowels = "aeiou";

// Distinct pseudo-words built from consonant-vowel syllables.
std::vector<std::string> make_words(int n, Rng& rng, std::set<std::string>& taken) {
  std::vector<std::string> out;
  while (static_cast<int>(out.size()) < n) {
    const int syllables = 2 + static_cast<int>(rng.index(2));
    std::string w;
    for (int s = 0; s < syllables; ++s) {
      w.push_back(kConsonants[rng.index(14)]);
      w.push_back(kVowels[rng.index(5)]);
    }
    if (taken.insert(w).second) out.push_back(w);
  }
  return out;
}

std::vector<double> make_segment(int length, int sample_rate, Rng& rng) {
  const double nyquist = 0.5 * sample_rate;
  std::vector<double> seg(static_cast<std::size_t>(length), 0.0);
  for (int comp = 0; comp < 2; ++comp) {
    const double freq = rng.uniform(0.05, 0.45) * 2.0 * nyquist;
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double amp = rng.uniform(0.3, 0.7);
    for (int t = 0; t < length; ++t) {
      seg[static_cast<std::size_t>(t)] +=
          amp * std::sin(2.0 * std::numbers::pi * freq * t / sample_rate + phase);
    }
  }
  return seg;
}

std::string pad_index(int i) {
  std::string s = std::to_string(i);
  return std::string(s.size() < 5 ? 5 - s.size() : 0, '0') + s;
}

}  // namespace

void write_synth_spec(const SynthSpec& spec, KvConfig& kv) {
  std::vector<std::string> dirs, asr_train, asr_dev;
  for (const auto& d : spec.directions) {
    dirs.push_back(d.src + "-" + d.tgt + ":" + std::to_string(d.train) + ":" + std::to_string(d.dev) +
                   (d.zero_shot ? ":zero" : ""));
  }
  for (const auto& [l, n] : spec.asr_train) asr_train.push_back(l + ":" + std::to_string(n));
  for (const auto& [l, n] : spec.asr_dev) asr_dev.push_back(l + ":" + std::to_string(n));
  kv.set("synth.directions", join(dirs, ","));
  kv.set("synth.asr_train", join(asr_train, ","));
  kv.set("synth.asr_dev", join(asr_dev, ","));
  kv.set("synth.words_per_language", spec.words_per_language);
  kv.set("synth.min_len", spec.min_len);
  kv.set("synth.max_len", spec.max_len);
  kv.set("synth.mono_per_language", spec.mono_per_language);
  kv.set("synth.parallel_per_direction", spec.parallel_per_direction);
  kv.set("synth.sample_rate", spec.sample_rate);
  kv.set("synth.segment_samples", spec.segment_samples);
  kv.set("synth.codebook", spec.codebook);
  kv.set("synth.noise", spec.noise);
  kv.set("synth.seed", static_cast<std::int64_t>(spec.seed));
}

SynthSpec read_synth_spec(const KvConfig& kv) {
  SynthSpec s;
  auto count = [](const std::string& field, const std::string& item) {
    int n = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), n);
    if (ec != std::errc() || ptr != field.data() + field.size() || n < 0) {
      throw ConfigError("synth: bad count in '" + item + "'");
    }
    return n;
  };
  for (const auto& item : kv.get_list("synth.directions")) {
    const auto f = split(item, ':');
    const auto dash = f[0].find('-');
    if (f.size() < 3 || f.size() > 4 || dash == std::string::npos || (f.size() == 4 && f[3] != "zero")) {
      throw ConfigError("synth.directions: expected src-tgt:train:dev[:zero], got '" + item + "'");
    }
    s.directions.push_back({f[0].substr(0, dash), f[0].substr(dash + 1), count(f[1], item), count(f[2], item),
                            f.size() == 4});
  }
  for (const auto* key : {"synth.asr_train", "synth.asr_dev"}) {
    if (!kv.has(key)) continue;
    auto& target = std::string(key) == "synth.asr_train" ? s.asr_train : s.asr_dev;
    for (const auto& item : kv.get_list(key)) {
      const auto f = split(item, ':');
      if (f.size() != 2) throw ConfigError(std::string(key) + ": expected lang:count, got '" + item + "'");
      target[f[0]] = count(f[1], item);
    }
  }
  s.words_per_language = static_cast<int>(kv.get_int("synth.words_per_language", s.words_per_language));
  s.min_len = static_cast<int>(kv.get_int("synth.min_len", s.min_len));
  s.max_len = static_cast<int>(kv.get_int("synth.max_len", s.max_len));
  s.mono_per_language = static_cast<int>(kv.get_int("synth.mono_per_language", s.mono_per_language));
  s.parallel_per_direction = static_cast<int>(kv.get_int("synth.parallel_per_direction", s.parallel_per_direction));
  s.sample_rate = static_cast<int>(kv.get_int("synth.sample_rate", s.sample_rate));
  s.segment_samples = static_cast<int>(kv.get_int("synth.segment_samples", s.segment_samples));
  s.codebook = kv.get("synth.codebook", s.codebook);
  s.noise = kv.get_double("synth.noise", s.noise);
  s.seed = static_cast<std::uint64_t>(kv.get_int("synth.seed", static_cast<std::int64_t>(s.seed)));
  return s;
}

RewriteRule rewrite_rule(const SynthSpec& spec, const std::string& src, const std::string& tgt) {
  auto s = spec.lexicon.find(src);
  auto t = spec.lexicon.find(tgt);
  if (s == spec.lexicon.end() || t == spec.lexicon.end() || s->second.size() != t->second.size()) {
    throw ConfigError("no rewrite rule for direction " + src + "-" + tgt);
  }
  RewriteRule rule{src, tgt, {}};
  for (std::size_t i = 0; i < s->second.size(); ++i) rule.words[s->second[i]] = t->second[i];
  return rule;
}

SynthCorpus generate_corpus(SynthSpec spec) {
  if (spec.min_len < 1 || spec.max_len < spec.min_len) {
    throw ConfigError("synthetic sentence length range must satisfy 1 <= min <= max");
  }
  if (spec.words_per_language < 1 || spec.segment_samples < 1 || spec.sample_rate < 1) {
    throw ConfigError("synthetic spec needs positive word count, segment length and sample rate");
  }
  if (spec.codebook != "word" && spec.codebook != "syllable") {
    throw ConfigError("synth.codebook must be 'word' or 'syllable', got '" + spec.codebook + "'");
  }
  const auto langs = spec.languages();
  if (spec.lexicon.empty()) {
    Rng rng(derive_seed(spec.seed, 1));
    std::set<std::string> taken;
    for (const auto& l : langs) spec.lexicon[l] = make_words(spec.words_per_language, rng, taken);
  }
  for (const auto& d : spec.directions) (void)rewrite_rule(spec, d.src, d.tgt);
  for (const auto& l : langs) {
    if (!spec.lexicon.count(l)) throw ConfigError("no lexicon for language '" + l + "'");
  }

  SynthCorpus corpus;
  corpus.lexicon = spec.lexicon;
  const int concepts = static_cast<int>(spec.lexicon.begin()->second.size());

  // Pronunciations: one pseudo-phoneme per consonant-vowel syllable.
  auto syllables = [](const std::string& w) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < w.size(); i += 2) out.push_back(w.substr(i, 2));
    return out;
  };
  for (const auto& [lang, words] : spec.lexicon) {
    for (const auto& w : words) corpus.g2p.add(lang, w, syllables(w));
  }

  // Waveform codebook: word -> fixed waveform.
  std::map<std::string, std::vector<std::vector<double>>> codebook;
  if (spec.codebook == "word") {
    Rng rng(derive_seed(spec.seed, 2));
    for (const auto& [lang, words] : spec.lexicon) {
      for (std::size_t i = 0; i < words.size(); ++i) {
        codebook[lang].push_back(make_segment(spec.segment_samples, spec.sample_rate, rng));
      }
    }
  } else {
    std::set<std::string> inventory;
    for (const auto& [lang, words] : spec.lexicon) {
      for (const auto& w : words) {
        for (auto& syl : syllables(w)) inventory.insert(std::move(syl));
      }
    }
    Rng rng(derive_seed(spec.seed, 3));
    std::map<std::string, std::vector<double>> unit;
    for (const auto& syl : inventory) unit[syl] = make_segment(spec.segment_samples, spec.sample_rate, rng);
    for (const auto& [lang, words] : spec.lexicon) {
      for (const auto& w : words) {
        std::vector<double> wav;
        for (const auto& syl : syllables(w)) wav.insert(wav.end(), unit[syl].begin(), unit[syl].end());
        codebook[lang].push_back(std::move(wav));
      }
    }
  }

  auto sentence = [&](Rng& rng) {
    const int len = spec.min_len + static_cast<int>(rng.index(static_cast<std::size_t>(spec.max_len - spec.min_len + 1)));
    std::vector<int> c(static_cast<std::size_t>(len));
    for (auto& x : c) x = static_cast<int>(rng.index(static_cast<std::size_t>(concepts)));
    return c;
  };
  auto render = [&](const std::string& lang, const std::vector<int>& c) {
    std::string out;
    for (int x : c) {
      if (!out.empty()) out.push_back(' ');
      out += spec.lexicon.at(lang)[static_cast<std::size_t>(x)];
    }
    return out;
  };
  auto speak = [&](const std::string& lang, const std::vector<int>& c, Rng& rng) {
    std::vector<double> wav;
    const double gain = rng.uniform(0.8, 1.2);
    for (int x : c) {
      const auto& seg = codebook.at(lang)[static_cast<std::size_t>(x)];
      for (double v : seg) wav.push_back(gain * v + spec.noise * rng.normal());
    }
    return wav;
  };
  auto emit = [&](std::vector<SampleManifest>& out, const std::string& split_name,
                  const std::string& src, const std::string& tgt, int n, bool asr) {
    const std::string stem = split_name + "-" + (asr ? "asr-" + src : src + "-" + tgt);
    Rng rng(derive_seed(spec.seed, hash_string(stem)));
    RewriteRule rule = asr ? RewriteRule{} : rewrite_rule(spec, src, tgt);
    for (int i = 0; i < n; ++i) {
      auto c = sentence(rng);
      SampleManifest s;
      s.id = stem + "-" + pad_index(i);
      s.audio_path = "synth:" + s.id;
      s.sample_rate = spec.sample_rate;
      s.src_lang = src;
      s.tgt_lang = asr ? src : tgt;
      s.transcript = render(src, c);
      s.translation = asr ? std::string() : rule.apply(s.transcript);
      auto wav = speak(src, c, rng);
      s.n_samples = static_cast<std::int64_t>(wav.size());
      corpus.audio.put(s.audio_path, std::move(wav));
      out.push_back(std::move(s));
    }
  };

  for (const auto& d : spec.directions) {
    if (!d.zero_shot) emit(corpus.train, "train", d.src, d.tgt, d.train, false);
    emit(corpus.dev, "dev", d.src, d.tgt, d.dev, false);
  }
  for (const auto& [lang, n] : spec.asr_train) emit(corpus.train, "train", lang, lang, n, true);
  for (const auto& [lang, n] : spec.asr_dev) emit(corpus.dev, "dev", lang, lang, n, true);

  // Text-only data: monolingual lines for every language, parallel text for
  // every direction (zero-shot ones included).
  for (const auto& l : langs) {
    Rng rng(derive_seed(spec.seed, hash_string("mono-" + l)));
    for (int i = 0; i < spec.mono_per_language; ++i) corpus.mono.push_back({l, render(l, sentence(rng))});
  }
  for (const auto& d : spec.directions) {
    Rng rng(derive_seed(spec.seed, hash_string("text-" + d.src + "-" + d.tgt)));
    for (int i = 0; i < spec.parallel_per_direction; ++i) {
      auto c = sentence(rng);
      corpus.parallel.push_back({d.src, d.tgt, render(d.src, c), render(d.tgt, c)});
    }
  }
  return corpus;
}

std::vector<TextLine> load_text_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open text file '" + path + "'");
  std::vector<TextLine> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split(line, '\t');
    if (f.size() != 2) throw DataError(path + ":" + std::to_string(lineno) + ": expected 'lang<TAB>text'");
    out.push_back({f[0], f[1]});
  }
  return out;
}

void save_text_lines(const std::string& path, const std::vector<TextLine>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  for (const auto& l : lines) out << l.lang << '\t' << l.text << '\n';
}

std::vector<TextPair> load_text_pairs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open text file '" + path + "'");
  std::vector<TextPair> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split(line, '\t');
    if (f.size() != 4) {
      throw DataError(path + ":" + std::to_string(lineno) + ": expected 'src_lang<TAB>tgt_lang<TAB>src<TAB>tgt'");
    }
    out.push_back({f[0], f[1], f[2], f[3]});
  }
  return out;
}

void save_text_pairs(const std::string& path, const std::vector<TextPair>& pairs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  for (const auto& p : pairs) out << p.src_lang << '\t' << p.tgt_lang << '\t' << p.src << '\t' << p.tgt << '\n';
}

void write_corpus(const SynthCorpus& corpus, const std::string& dir) {
  fs::create_directories(fs::path(dir) / "wav");
  auto materialize = [&](std::vector<SampleManifest> samples) {
    for (auto& s : samples) {
      const std::string rel = "wav/" + s.id + ".f32";
      write_waveform((fs::path(dir) / rel).string(), corpus.audio.get(s));
      s.audio_path = rel;
    }
    return samples;
  };
  save_manifest((fs::path(dir) / "train.tsv").string(), materialize(corpus.train));
  save_manifest((fs::path(dir) / "dev.tsv").string(), materialize(corpus.dev));
  save_text_lines((fs::path(dir) / "mono.tsv").string(), corpus.mono);
  save_text_pairs((fs::path(dir) / "parallel.tsv").string(), corpus.parallel);
  corpus.g2p.save((fs::path(dir) / "g2p.tsv").string());
}

// --- batching -------------------------------------------------------------

std::vector<Batch> make_batches(std::span<const ItemSize> sizes, Eigen::Index max_tokens,
                                Eigen::Index max_frames, std::uint64_t seed, std::int64_t epoch) {
  if (max_tokens <= 0 || max_frames <= 0) throw ConfigError("batch limits must be positive");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i].tokens > max_tokens || sizes[i].frames > max_frames) {
      throw DataError("item " + std::to_string(i) + " (" + std::to_string(sizes[i].tokens) +
                      " tokens, " + std::to_string(sizes[i].frames) +
                      " frames) exceeds the batch limits");
    }
  }
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(epoch) + 0x5EED));
  std::vector<std::size_t> order(sizes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sizes[a].frames != sizes[b].frames) return sizes[a].frames < sizes[b].frames;
    return sizes[a].tokens < sizes[b].tokens;
  });

  std::vector<Batch> batches;
  Batch cur;
  auto flush = [&] {
    if (cur.indices.empty()) return;
    const auto n = static_cast<Eigen::Index>(cur.indices.size());
    cur.token_padding = PaddingMask::Constant(n, std::max<Eigen::Index>(cur.token_len, 1), true);
    cur.frame_padding = PaddingMask::Constant(n, std::max<Eigen::Index>(cur.frame_len, 1), true);
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto& s = sizes[cur.indices[static_cast<std::size_t>(r)]];
      cur.token_padding.row(r).head(s.tokens).setConstant(false);
      cur.frame_padding.row(r).head(s.frames).setConstant(false);
    }
    batches.push_back(std::move(cur));
    cur = Batch{};
  };
  for (std::size_t idx : order) {
    const auto n = static_cast<Eigen::Index>(cur.indices.size()) + 1;
    const auto tl = std::max(cur.token_len, sizes[idx].tokens);
    const auto fl = std::max(cur.frame_len, sizes[idx].frames);
    if (!cur.indices.empty() && (n * tl > max_tokens || n * fl > max_frames)) flush();
    cur.indices.push_back(idx);
    cur.token_len = std::max(cur.token_len, sizes[idx].tokens);
    cur.frame_len = std::max(cur.frame_len, sizes[idx].frames);
  }
  flush();
  rng.shuffle(batches);
  return batches;
}

}  // namespace mst
