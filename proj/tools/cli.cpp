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

#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <set>

#include "mst/data.hpp"
#include "mst/decoding.hpp"
#include "mst/error.hpp"
#include "mst/metrics.hpp"
#include "mst/mining.hpp"
#include "mst/model.hpp"
#include "mst/trainer.hpp"
#include "mst/vocab.hpp"

namespace mst::cli {

namespace fs = std::filesystem;

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"gen-data", "build-vocab", "pretrain-text", "pretrain-speech",
                                              "train-joint", "finetune", "average-ckpt", "decode",
                                              "mine", "score", "report-hours"};
  return names;
}

namespace {

// Writes to two streams; training progress goes to the console and a log file.
class TeeBuf : public std::streambuf {
 public:
  TeeBuf(std::streambuf* a, std::streambuf* b) : a_(a), b_(b) {}

 protected:
  int overflow(int c) override {
    if (c == EOF) return !EOF;
    const int r1 = a_->sputc(static_cast<char>(c));
    const int r2 = b_->sputc(static_cast<char>(c));
    return r1 == EOF || r2 == EOF ? EOF : c;
  }
  int sync() override { return a_->pubsync() | b_->pubsync(); }

 private:
  std::streambuf* a_;
  std::streambuf* b_;
};

// Option values are collected as strings under their config keys and layered
// over defaults and the config file once parsing is done.
struct Command {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> given;
  std::string config_path;
  std::vector<std::string> sets;
  std::function<KvConfig()> defaults;
  std::function<void(const KvConfig&, std::ostream&)> run;
  bool needs_out = false;

  void opt(const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(flag, [this, key](const std::string& v) { given[key] = v; }, help);
  }
  void opt_list(const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::vector<std::string>>(
        flag, [this, key](const std::vector<std::string>& v) { given[key] = join(v, ","); }, help);
  }

  void common(const std::string& seed_key) {
    app->add_option("--config", config_path, "key=value file; flags override its values");
    opt("--out", "out", "output directory");
    if (!seed_key.empty()) opt("--seed", seed_key, "random seed");
    app->add_option("--set", sets, "extra key=value overrides");
  }

  KvConfig resolve() const {
    KvConfig kv = defaults ? defaults() : KvConfig{};
    if (!config_path.empty()) kv.merge(KvConfig::load(config_path));
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + s + "'");
      kv.set(s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [k, v] : given) kv.set(k, v);
    return kv;
  }
};

std::string require(const KvConfig& kv, const std::string& key, const std::string& flag) {
  const auto v = kv.get(key, "");
  if (v.empty()) throw UsageError("missing " + flag);
  return v;
}

std::vector<std::string> require_list(const KvConfig& kv, const std::string& key, const std::string& flag) {
  auto v = kv.has(key) ? kv.get_list(key) : std::vector<std::string>{};
  if (v.empty()) throw UsageError("missing " + flag);
  return v;
}

std::string out_dir(const KvConfig& kv) {
  const auto dir = require(kv, "out", "--out");
  fs::create_directories(dir);
  return dir;
}

void write_run_kv(const KvConfig& kv) {
  const auto dir = kv.get("out", "");
  if (dir.empty()) return;
  fs::create_directories(dir);
  kv.save((fs::path(dir) / "run.kv").string());
}

Vocabulary load_vocab(const KvConfig& kv) {
  Vocabulary v = Vocabulary::load(require(kv, "vocab", "--vocab"));
  const auto g2p = kv.get("g2p", "");
  if (!g2p.empty()) v.attach_table(std::make_shared<const G2PTable>(G2PTable::load(g2p)));
  return v;
}

JointModelConfig model_config(const KvConfig& kv, const Vocabulary& vocab) {
  JointModelConfig c = JointModelConfig::from_kv(kv);
  c.vocab_size = vocab.size();
  c.lid_first = Vocabulary::kFixedSpecials;
  c.lid_count = static_cast<int>(vocab.languages().size());
  c.validate();
  return c;
}

// Manifests from several directories; relative audio paths are rebased so
// one store serves them all.
std::vector<SampleManifest> load_manifests(const std::vector<std::string>& paths) {
  std::vector<SampleManifest> out;
  for (const auto& p : paths) {
    const auto base = fs::path(p).parent_path();
    for (auto s : load_manifest(p)) {
      if (s.audio_path.rfind("synth:", 0) != 0 && fs::path(s.audio_path).is_relative()) {
        s.audio_path = (base / s.audio_path).lexically_normal().string();
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

KvConfig training_defaults(Stage stage) {
  KvConfig kv;
  TrainConfig t;
  t.stage = stage;
  t.write(kv);
  ObjectiveConfig{}.write(kv);
  kv.merge(JointModelConfig{}.to_kv());
  return kv;
}

void finish_training(const TrainResult& r, const std::string& dir, std::ostream& out) {
  const auto final_dir = (fs::path(dir) / "checkpoint.d").string();
  save_checkpoint(r.checkpoint, final_dir);
  out << "steps " << r.steps << "\n";
  out << "checkpoint " << final_dir << "\n";
}

struct LogFile {
  std::ofstream file;
  std::unique_ptr<TeeBuf> buf;
  std::unique_ptr<std::ostream> stream;

  LogFile(const std::string& dir, std::ostream& console) : file((fs::path(dir) / "train.log").string(), std::ios::binary) {
    buf = std::make_unique<TeeBuf>(console.rdbuf(), file.rdbuf());
    stream = std::make_unique<std::ostream>(buf.get());
  }
};

// --- subcommands -----------------------------------------------------------

void gen_data(const KvConfig& kv, std::ostream& out) {
  const auto dir = out_dir(kv);
  const auto spec = read_synth_spec(kv);
  const auto corpus = generate_corpus(spec);
  write_corpus(corpus, dir);
  out << "train " << corpus.train.size() << " dev " << corpus.dev.size() << " mono " << corpus.mono.size()
      << " parallel " << corpus.parallel.size() << "\n";
}

void build_vocab_cmd(const KvConfig& kv, std::ostream& out) {
  const auto dir = out_dir(kv);
  std::vector<std::string> text;
  std::set<std::string> langs;
  for (const auto& p : kv.get_list("mono")) {
    for (const auto& l : load_text_lines(p)) {
      text.push_back(l.text);
      langs.insert(l.lang);
    }
  }
  for (const auto& p : kv.get_list("parallel")) {
    for (const auto& t : load_text_pairs(p)) {
      text.push_back(t.src);
      text.push_back(t.tgt);
      langs.insert(t.src_lang);
      langs.insert(t.tgt_lang);
    }
  }
  for (const auto& s : load_manifests(kv.get_list("manifest"))) {
    text.push_back(s.transcript);
    if (!s.translation.empty()) text.push_back(s.translation);
    langs.insert(s.src_lang);
    langs.insert(s.tgt_lang);
  }
  if (text.empty()) throw UsageError("build-vocab needs --mono, --parallel or --manifest input");
  std::vector<std::string> languages = kv.get_list("vocab.languages");
  if (languages.empty()) languages.assign(langs.begin(), langs.end());
  const auto mode = parse_vocab_mode(kv.get("vocab.mode"));
  std::shared_ptr<const G2PTable> table;
  if (!kv.get("g2p", "").empty()) table = std::make_shared<const G2PTable>(G2PTable::load(kv.get("g2p")));
  const auto vocab = build_vocab(text, static_cast<int>(kv.get_int("vocab.size")), mode, languages, table);
  const auto path = (fs::path(dir) / "vocab.txt").string();
  vocab.save(path);
  out << "symbols " << vocab.size() << " languages " << join(vocab.languages(), ",") << "\n";
  out << "vocab " << path << "\n";
}

void pretrain_text_cmd(const KvConfig& kv, std::ostream& out) {
  const auto dir = out_dir(kv);
  const auto vocab = load_vocab(kv);
  const auto cfg = TrainConfig::read(kv);
  std::vector<TextLine> mono;
  for (const auto& p : require_list(kv, "mono", "--mono")) {
    auto lines = load_text_lines(p);
    mono.insert(mono.end(), lines.begin(), lines.end());
  }
  std::vector<TextPair> parallel;
  for (const auto& p : kv.get_list("parallel")) {
    auto pairs = load_text_pairs(p);
    parallel.insert(parallel.end(), pairs.begin(), pairs.end());
  }
  JointModel model(model_config(kv, vocab), cfg.seed);
  LogFile log(dir, out);
  const auto r = pretrain_text(model, vocab, mono, parallel, cfg, ObjectiveConfig::read(kv), {dir, log.stream.get()});
  finish_training(r, dir, out);
}

void pretrain_speech_cmd(const KvConfig& kv, std::ostream& out) {
  const auto dir = out_dir(kv);
  const auto vocab = load_vocab(kv);
  const auto cfg = TrainConfig::read(kv);
  const auto samples = load_manifests(require_list(kv, "train", "--train"));
  JointModel model(model_config(kv, vocab), cfg.seed);
  LogFile log(dir, out);
  const auto r = pretrain_speech(model, samples, WaveformStore("."), cfg, ObjectiveConfig::read(kv),
                                 {dir, log.stream.get()});
  finish_training(r, dir, out);
}

void train_joint_cmd(const KvConfig& kv, std::ostream& out) {
  const auto dir = out_dir(kv);
  const auto vocab = load_vocab(kv);
  const auto cfg = TrainConfig::read(kv);
  const auto samples = load_manifests(require_list(kv, "train", "--train"));
  std::unique_ptr<Checkpoint> speech, text;
  if (!kv.get("speech_ckpt", "").empty()) speech = std::make_unique<Checkpoint>(load_checkpoint(kv.get("speech_ckpt")));
  if (!kv.get("text_ckpt", "").empty()) text = std::make_unique<Checkpoint>(load_checkpoint(kv.get("text_ckpt")));
  JointModel model = init_from_pretrained(speech.get(), text.get(), model_config(kv, vocab), cfg.seed);
  LogFile log(dir, out);
  const auto r = train_joint(model, vocab, samples, WaveformStore("."), cfg, ObjectiveConfig::read(kv),
                             {dir, log.stream.get()});
  finish_training(r, dir, out);
}

void finetune_cmd(const KvConfig& kv, std::ostream& out) {
  const auto dir = out_dir(kv);
  const auto vocab = load_vocab(kv);
  const auto cfg = TrainConfig::read(kv);
  const auto samples = load_manifests(require_list(kv, "train", "--train"));
  JointModel model = model_from_checkpoint(load_checkpoint(require(kv, "init", "--init")));
  LogFile log(dir, out);
  const auto r = finetune_speech(model, vocab, samples, WaveformStore("."), cfg, ObjectiveConfig::read(kv),
                                 {dir, log.stream.get()});
  finish_training(r, dir, out);
}

// ckpt_<step>.d directories under `dir`, oldest first.
std::vector<std::string> step_checkpoints(const std::string& dir) {
  std::vector<std::pair<long long, std::string>> found;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.rfind("ckpt_", 0) != 0 || e.path().extension() != ".d") continue;
    try {
      found.emplace_back(std::stoll(name.substr(5)), e.path().string());
    } catch (const std::logic_error&) {
    }
  }
  std::sort(found.begin(), found.end());
  std::vector<std::string> out;
  for (auto& [step, p] : found) out.push_back(std::move(p));
  return out;
}

void average_cmd(const KvConfig& kv, std::ostream& out) {
  auto inputs = kv.get_list("inputs");
  const auto from = kv.get("avg.from_dir", "");
  if (!from.empty()) {
    auto found = step_checkpoints(from);
    const auto last = static_cast<std::size_t>(kv.get_int("avg.last", 5));
    if (found.size() > last) found.erase(found.begin(), found.end() - static_cast<std::ptrdiff_t>(last));
    inputs.insert(inputs.end(), found.begin(), found.end());
  }
  if (inputs.empty()) throw UsageError("average-ckpt needs checkpoint directories or --from-dir");
  const auto dir = out_dir(kv);
  std::vector<Checkpoint> ckpts;
  for (const auto& p : inputs) ckpts.push_back(load_checkpoint(p));
  save_checkpoint(average_checkpoints(ckpts), dir);
  out << "averaged " << inputs.size() << " checkpoints into " << dir << "\n";
}

void decode_cmd(const KvConfig& kv, std::ostream& out) {
  const auto dir = out_dir(kv);
  const auto vocab = load_vocab(kv);
  std::vector<JointModel> models;
  for (const auto& p : require_list(kv, "ckpt", "--ckpt")) models.push_back(model_from_checkpoint(load_checkpoint(p)));
  std::vector<const JointModel*> ptrs;
  for (const auto& m : models) ptrs.push_back(&m);
  BeamConfig beam;
  beam.beam = static_cast<int>(kv.get_int("beam.size", beam.beam));
  beam.max_len = static_cast<int>(kv.get_int("beam.max_len", beam.max_len));
  beam.length_penalty = kv.get_double("beam.length_penalty", beam.length_penalty);
  const auto samples = load_manifests(require_list(kv, "manifest", "--manifest"));
  const auto r = decode_corpus(ptrs, vocab, samples, WaveformStore("."), beam, kv.get("target_lang", ""));
  save_id_text((fs::path(dir) / "hyp.tsv").string(), r.outputs);
  std::ofstream failures((fs::path(dir) / "failures.tsv").string(), std::ios::binary);
  for (const auto& [id, msg] : r.failures) failures << id << '\t' << msg << '\n';
  out << "decoded " << r.outputs.size() << " failed " << r.failures.size() << "\n";
  if (!samples.empty() && r.outputs.empty()) throw DataError("every sample failed to decode");
}

void mine_cmd(const KvConfig& kv, std::ostream& out) {
  const auto dir = out_dir(kv);
  std::vector<SentenceEmbedding> src, tgt;
  std::vector<TextRecord> tgt_text;
  if (!kv.get("ckpt", "").empty()) {
    const auto vocab = load_vocab(kv);
    const auto model = model_from_checkpoint(load_checkpoint(kv.get("ckpt")));
    const auto src_text = load_text_records(require(kv, "src_text", "--src-text"));
    tgt_text = load_text_records(require(kv, "tgt_text", "--tgt-text"));
    src = embed_sentences(model, vocab, src_text);
    tgt = embed_sentences(model, vocab, tgt_text);
    save_embeddings((fs::path(dir) / "src_emb.tsv").string(), src);
    save_embeddings((fs::path(dir) / "tgt_emb.tsv").string(), tgt);
  } else {
    src = load_embeddings(require(kv, "src_emb", "--src-emb or --ckpt"));
    tgt = load_embeddings(require(kv, "tgt_emb", "--tgt-emb or --ckpt"));
    if (!kv.get("tgt_text", "").empty()) tgt_text = load_text_records(kv.get("tgt_text"));
  }
  MiningConfig cfg;
  cfg.k = static_cast<int>(kv.get_int("mine.k", cfg.k));
  cfg.threshold = kv.get_double("mine.threshold", cfg.threshold);
  cfg.strategy = parse_mining_strategy(kv.get("mine.strategy", "intersection"));
  const auto pairs = mine_pairs(src, tgt, cfg);
  save_mined_pairs((fs::path(dir) / "pairs.tsv").string(), pairs);
  out << "mined " << pairs.size() << " pairs from " << src.size() << " x " << tgt.size() << "\n";
  const auto asr = kv.get("asr_manifest", "");
  if (!asr.empty()) {
    if (tgt_text.empty()) throw UsageError("--asr-manifest needs --tgt-text");
    auto rows = attach_audio(pairs, load_manifests({asr}), tgt_text);
    const auto abs_dir = fs::absolute(dir);
    for (auto& s : rows) {
      if (s.audio_path.rfind("synth:", 0) != 0) {
        s.audio_path = fs::absolute(s.audio_path).lexically_relative(abs_dir).string();
      }
    }
    save_manifest((fs::path(dir) / "mined.tsv").string(), rows);
    HoursTable table;
    table.add_row("Mined", rows);
    out << table.format();
  }
}

void score_cmd(const KvConfig& kv, std::ostream& out) {
  const auto hyps = load_id_text(require(kv, "hyp", "--hyp"));
  const auto refs = load_id_text(require(kv, "ref", "--ref"));
  std::map<std::string, std::string> directions;
  for (const auto& s : load_manifests(kv.get_list("manifest"))) directions[s.id] = direction_of(s);
  const auto report = evaluate(hyps, refs, kv.get("metric", "bleu"), directions);
  const auto text = report.format(kv.get("label", ""));
  out << text;
  const auto dir = kv.get("out", "");
  if (!dir.empty()) {
    fs::create_directories(dir);
    std::ofstream((fs::path(dir) / "report.txt").string(), std::ios::binary) << text;
  }
}

void report_hours_cmd(const KvConfig& kv, std::ostream& out) {
  const auto manifests = require_list(kv, "manifest", "--manifest");
  const auto labels = kv.get_list("label");
  if (!labels.empty() && labels.size() != manifests.size()) {
    throw UsageError("give one --label per --manifest (" + std::to_string(manifests.size()) + " manifests, " +
                     std::to_string(labels.size()) + " labels)");
  }
  HoursTable table;
  for (std::size_t i = 0; i < manifests.size(); ++i) {
    table.add_row(labels.empty() ? fs::path(manifests[i]).stem().string() : labels[i], load_manifest(manifests[i]));
  }
  const auto text = table.format();
  out << text;
  const auto dir = kv.get("out", "");
  if (!dir.empty()) {
    fs::create_directories(dir);
    std::ofstream((fs::path(dir) / "hours.txt").string(), std::ios::binary) << text;
  }
}

void add_training_flags(Command& c) {
  c.opt("--vocab", "vocab", "vocabulary file");
  c.opt("--g2p", "g2p", "pronunciation table (phoneme vocabularies)");
  c.opt("--epochs", "train.epochs", "training epochs");
  c.opt("--lr", "train.learning_rate", "peak learning rate");
  c.opt("--warmup", "train.warmup_steps", "warmup steps");
  c.opt("--max-tokens", "train.max_tokens", "batch limit in target tokens");
  c.opt("--max-frames", "train.max_frames", "batch limit in waveform samples");
  c.opt("--checkpoint-every", "train.checkpoint_every", "steps between checkpoints (0: every epoch)");
  c.opt("--keep-last", "train.keep_last", "checkpoints kept on disk");
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto& names = subcommands();
  if (args.empty() || (args[0].rfind('-', 0) != 0 && std::find(names.begin(), names.end(), args[0]) == names.end())) {
    err << (args.empty() ? std::string("no subcommand given") : "unknown subcommand '" + args[0] + "'")
        << "; expected one of: " << join(names, ", ") << "\n";
    return kUsageError;
  }

  CLI::App app{"Multilingual speech translation toolkit"};
  app.require_subcommand(1);
  std::vector<std::unique_ptr<Command>> commands;
  auto add = [&](const std::string& name, const std::string& help) -> Command& {
    commands.push_back(std::make_unique<Command>());
    commands.back()->app = app.add_subcommand(name, help);
    return *commands.back();
  };

  {
    auto& c = add("gen-data", "generate the synthetic multilingual corpus");
    c.common("synth.seed");
    c.opt_list("--directions", "synth.directions", "src-tgt:train:dev[:zero] entries");
    c.opt_list("--asr-train", "synth.asr_train", "lang:count recognition samples for training");
    c.opt_list("--asr-dev", "synth.asr_dev", "lang:count recognition samples for dev");
    c.opt("--words", "synth.words_per_language", "words per language");
    c.opt("--mono", "synth.mono_per_language", "monolingual lines per language");
    c.opt("--parallel", "synth.parallel_per_direction", "parallel lines per direction");
    c.opt("--segment", "synth.segment_samples", "waveform samples per word");
    c.defaults = [] {
      SynthSpec s;
      s.directions = {{"es", "en", 200, 20, false}, {"fr", "en", 200, 20, false}};
      KvConfig kv;
      write_synth_spec(s, kv);
      return kv;
    };
    c.run = gen_data;
  }
  {
    auto& c = add("build-vocab", "build a shared vocabulary");
    c.common("");
    c.opt_list("--mono", "mono", "monolingual text files");
    c.opt_list("--parallel", "parallel", "parallel text files");
    c.opt_list("--manifest", "manifest", "sample manifests");
    c.opt("--mode", "vocab.mode", "subword | phoneme | char");
    c.opt("--size", "vocab.size", "subword vocabulary size");
    c.opt_list("--languages", "vocab.languages", "language codes (default: all seen)");
    c.opt("--g2p", "g2p", "pronunciation table");
    c.defaults = [] {
      KvConfig kv;
      kv.set("vocab.mode", "subword");
      kv.set("vocab.size", 1000);
      return kv;
    };
    c.run = build_vocab_cmd;
  }
  {
    auto& c = add("pretrain-text", "denoising (then translation) pretraining of the text model");
    c.common("train.seed");
    add_training_flags(c);
    c.opt_list("--mono", "mono", "monolingual text files");
    c.opt_list("--parallel", "parallel", "parallel text files");
    c.opt("--parallel-epochs", "train.parallel_epochs", "translation epochs after denoising");
    c.defaults = [] { return training_defaults(Stage::PretrainText); };
    c.run = pretrain_text_cmd;
  }
  {
    auto& c = add("pretrain-speech", "contrastive pretraining of the speech encoder");
    c.common("train.seed");
    add_training_flags(c);
    c.opt_list("--train", "train", "sample manifests (audio only is used)");
    c.defaults = [] { return training_defaults(Stage::PretrainSpeech); };
    c.run = pretrain_speech_cmd;
  }
  {
    auto& c = add("train-joint", "joint speech and text training");
    c.common("train.seed");
    add_training_flags(c);
    c.opt_list("--train", "train", "sample manifests");
    c.opt("--speech-ckpt", "speech_ckpt", "pretrained speech checkpoint");
    c.opt("--text-ckpt", "text_ckpt", "pretrained text checkpoint");
    c.opt_list("--directions", "train.directions", "src-tgt directions to train on");
    c.defaults = [] { return training_defaults(Stage::Joint); };
    c.run = train_joint_cmd;
  }
  {
    auto& c = add("finetune", "speech-only finetuning");
    c.common("train.seed");
    add_training_flags(c);
    c.opt_list("--train", "train", "sample manifests");
    c.opt("--init", "init", "checkpoint to start from");
    c.opt_list("--directions", "train.directions", "src-tgt directions to train on");
    c.defaults = [] { return training_defaults(Stage::Finetune); };
    c.run = finetune_cmd;
  }
  {
    auto& c = add("average-ckpt", "average checkpoints parameter-wise");
    c.common("");
    c.app->add_option_function<std::vector<std::string>>(
        "inputs", [&c](const std::vector<std::string>& v) { c.given["inputs"] = join(v, ","); },
        "checkpoint directories");
    c.opt("--from-dir", "avg.from_dir", "directory holding ckpt_<step>.d checkpoints");
    c.opt("--last", "avg.last", "number of newest checkpoints taken from --from-dir");
    c.run = average_cmd;
  }
  {
    auto& c = add("decode", "beam search decoding (several --ckpt form an ensemble)");
    c.common("");
    c.opt("--vocab", "vocab", "vocabulary file");
    c.opt("--g2p", "g2p", "pronunciation table (phoneme vocabularies)");
    c.opt_list("--ckpt", "ckpt", "checkpoint directories");
    c.opt_list("--manifest", "manifest", "sample manifests");
    c.opt("--beam", "beam.size", "beam size");
    c.opt("--max-len", "beam.max_len", "maximum output length");
    c.opt("--lenpen", "beam.length_penalty", "length penalty exponent");
    c.opt("--target-lang", "target_lang", "force one output language");
    c.defaults = [] {
      KvConfig kv;
      BeamConfig b;
      kv.set("beam.size", b.beam);
      kv.set("beam.max_len", b.max_len);
      kv.set("beam.length_penalty", b.length_penalty);
      return kv;
    };
    c.run = decode_cmd;
  }
  {
    auto& c = add("mine", "margin-based mining of sentence pairs");
    c.common("");
    c.opt("--ckpt", "ckpt", "checkpoint whose text encoder embeds sentences");
    c.opt("--vocab", "vocab", "vocabulary file");
    c.opt("--src-text", "src_text", "id<TAB>lang<TAB>text source sentences");
    c.opt("--tgt-text", "tgt_text", "id<TAB>lang<TAB>text target sentences");
    c.opt("--src-emb", "src_emb", "precomputed source embeddings");
    c.opt("--tgt-emb", "tgt_emb", "precomputed target embeddings");
    c.opt("--asr-manifest", "asr_manifest", "recognition manifest whose audio the source ids name");
    c.opt("--k", "mine.k", "neighbors per side");
    c.opt("--threshold", "mine.threshold", "minimum margin score");
    c.opt("--strategy", "mine.strategy", "intersection | forward-max");
    c.defaults = [] {
      KvConfig kv;
      MiningConfig m;
      kv.set("mine.k", m.k);
      kv.set("mine.threshold", m.threshold);
      kv.set("mine.strategy", "intersection");
      return kv;
    };
    c.run = mine_cmd;
  }
  {
    auto& c = add("score", "BLEU or WER of hypotheses against references");
    c.common("");
    c.opt("--hyp", "hyp", "id<TAB>text hypotheses");
    c.opt("--ref", "ref", "id<TAB>text references");
    c.opt("--metric", "metric", "bleu | wer");
    c.opt_list("--manifest", "manifest", "manifests giving each id's direction");
    c.opt("--label", "label", "row label");
    c.run = score_cmd;
  }
  {
    auto& c = add("report-hours", "audio hours per direction");
    c.common("");
    c.opt_list("--manifest", "manifest", "sample manifests, one table row each");
    c.opt_list("--label", "label", "row labels");
    c.run = report_hours_cmd;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  for (auto& c : commands) {
    if (!c->app->parsed()) continue;
    try {
      const KvConfig kv = c->resolve();
      write_run_kv(kv);
      c->run(kv, out);
      return kOk;
    } catch (const UsageError& e) {
      err << "error: " << e.what() << "\n";
      return kUsageError;
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return kDataOrConfigError;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kDataOrConfigError;
    }
  }
  return kUsageError;
}

}  // namespace mst::cli
