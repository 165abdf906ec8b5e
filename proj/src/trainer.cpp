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

#include "mst/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>

#include "mst/error.hpp"

namespace mst {

namespace fs = std::filesystem;

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::PretrainText: return "pretrain_text";
    case Stage::PretrainSpeech: return "pretrain_speech";
    case Stage::Joint: return "joint";
    case Stage::Finetune: return "finetune";
  }
  return "joint";
}

Stage parse_stage(const std::string& s) {
  if (s == "pretrain_text") return Stage::PretrainText;
  if (s == "pretrain_speech") return Stage::PretrainSpeech;
  if (s == "joint") return Stage::Joint;
  if (s == "finetune") return Stage::Finetune;
  throw ConfigError("unknown stage '" + s + "' (pretrain_text|pretrain_speech|joint|finetune)");
}

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("train.epochs must be >= 0");
  if (parallel_epochs < 0) throw ConfigError("train.parallel_epochs must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be positive");
  if (warmup_steps < 0) throw ConfigError("train.warmup_steps must be >= 0");
  if (max_tokens < 1 || max_frames < 1) throw ConfigError("train batch limits must be positive");
  if (checkpoint_every < 0) throw ConfigError("train.checkpoint_every must be >= 0");
  if (keep_last < 1) throw ConfigError("train.keep_last must be at least 1, got " + std::to_string(keep_last));
  if (!(ssl_mask_ratio > 0.0 && ssl_mask_ratio < 1.0)) throw ConfigError("train.ssl_mask_ratio must be in (0, 1)");
  if (ssl_mask_span < 1) throw ConfigError("train.ssl_mask_span must be at least 1");
  if (clip_norm < 0.0) throw ConfigError("train.clip_norm must be >= 0");
}

void TrainConfig::write(KvConfig& kv) const {
  kv.set("train.stage", to_string(stage));
  kv.set("train.epochs", epochs);
  kv.set("train.learning_rate", learning_rate);
  kv.set("train.warmup_steps", warmup_steps);
  kv.set("train.seed", static_cast<std::int64_t>(seed));
  kv.set("train.max_tokens", static_cast<std::int64_t>(max_tokens));
  kv.set("train.max_frames", static_cast<std::int64_t>(max_frames));
  kv.set("train.checkpoint_every", checkpoint_every);
  kv.set("train.keep_last", keep_last);
  kv.set("train.data", join(data, ","));
  kv.set("train.directions", join(directions, ","));
  kv.set("train.parallel_epochs", parallel_epochs);
  kv.set("train.ssl_mask_ratio", ssl_mask_ratio);
  kv.set("train.ssl_mask_span", ssl_mask_span);
  kv.set("train.clip_norm", clip_norm);
}

TrainConfig TrainConfig::read(const KvConfig& kv) {
  TrainConfig c;
  c.stage = parse_stage(kv.get("train.stage", to_string(c.stage)));
  c.epochs = static_cast<int>(kv.get_int("train.epochs", c.epochs));
  c.learning_rate = kv.get_double("train.learning_rate", c.learning_rate);
  c.warmup_steps = static_cast<int>(kv.get_int("train.warmup_steps", c.warmup_steps));
  c.seed = static_cast<std::uint64_t>(kv.get_int("train.seed", static_cast<std::int64_t>(c.seed)));
  c.max_tokens = kv.get_int("train.max_tokens", c.max_tokens);
  c.max_frames = kv.get_int("train.max_frames", c.max_frames);
  c.checkpoint_every = static_cast<int>(kv.get_int("train.checkpoint_every", c.checkpoint_every));
  c.keep_last = static_cast<int>(kv.get_int("train.keep_last", c.keep_last));
  if (kv.has("train.data")) c.data = kv.get_list("train.data");
  if (kv.has("train.directions")) c.directions = kv.get_list("train.directions");
  c.parallel_epochs = static_cast<int>(kv.get_int("train.parallel_epochs", c.parallel_epochs));
  c.ssl_mask_ratio = kv.get_double("train.ssl_mask_ratio", c.ssl_mask_ratio);
  c.ssl_mask_span = static_cast<int>(kv.get_int("train.ssl_mask_span", c.ssl_mask_span));
  c.clip_norm = kv.get_double("train.clip_norm", c.clip_norm);
  c.validate();
  return c;
}

double learning_rate_at(const TrainConfig& cfg, std::int64_t step) {
  const double s = static_cast<double>(std::max<std::int64_t>(step, 1));
  if (cfg.warmup_steps == 0) return cfg.learning_rate / std::sqrt(s);
  const double w = cfg.warmup_steps;
  return cfg.learning_rate * std::min(s / w, std::sqrt(w / s));
}

std::string direction_of(const SampleManifest& s) { return s.src_lang + "-" + s.tgt_lang; }

std::vector<SampleManifest> select_directions(const std::vector<SampleManifest>& samples,
                                              const std::vector<std::string>& directions,
                                              const Vocabulary& vocab) {
  std::set<std::string> wanted(directions.begin(), directions.end());
  for (const auto& d : directions) {
    const auto dash = d.find('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 == d.size()) {
      throw ConfigError("direction '" + d + "' is not of the form src-tgt");
    }
    for (const auto& lang : {d.substr(0, dash), d.substr(dash + 1)}) {
      if (!vocab.has_language(lang)) throw ConfigError("direction " + d + ": no language id for '" + lang + "'");
    }
  }
  std::vector<SampleManifest> out;
  for (const auto& s : samples) {
    if (!wanted.empty() && !wanted.count(direction_of(s))) continue;
    for (const auto* lang : {&s.src_lang, &s.tgt_lang}) {
      if (!vocab.has_language(*lang)) {
        throw ConfigError("direction " + direction_of(s) + ": no language id for '" + *lang + "'");
      }
    }
    out.push_back(s);
  }
  return out;
}

namespace {

const std::vector<std::string> kJointPrefixes{"frontend.", "bottom.", "adaptor.", "shared.", "text.", "dec."};
const std::vector<std::string> kFinetunePrefixes{"frontend.", "bottom.", "adaptor.", "shared.", "dec."};

bool has_prefix(const std::string& name, const std::vector<std::string>& prefixes) {
  for (const auto& p : prefixes) {
    if (name.rfind(p, 0) == 0) return true;
  }
  return false;
}

NamedParameters trainable(JointModel& model, const std::vector<std::string>& prefixes) {
  NamedParameters out;
  for (auto& [name, t] : model.params().entries()) {
    if (has_prefix(name, prefixes)) out.emplace_back(name, t);
  }
  return out;
}

struct SampleLoss {
  Tensor loss;
  std::vector<std::pair<std::string, double>> parts;
};

// Shared optimization loop: batches, per-sample gradient accumulation,
// Adam, checkpoints and logging. One instance spans all phases of a stage.
class Loop {
 public:
  Loop(JointModel& model, const TrainConfig& cfg, const TrainOutput& out, std::vector<std::string> prefixes,
       std::vector<std::string> ckpt_prefixes, std::set<std::string> frozen)
      : model_(model),
        cfg_(cfg),
        out_(out),
        params_(trainable(model, prefixes)),
        ckpt_prefixes_(std::move(ckpt_prefixes)),
        frozen_(std::move(frozen)),
        dropout_rng_(derive_seed(cfg.seed, 0xD0)) {
    state_.config.learning_rate = cfg.learning_rate;
    if (!out_.out_dir.empty()) fs::create_directories(out_.out_dir);
  }

  void run(const std::string& phase, int epochs, const std::vector<ItemSize>& sizes,
           const std::function<SampleLoss(std::size_t, std::uint64_t)>& sample_loss) {
    for (int epoch = 1; epoch <= epochs; ++epoch) {
      const auto batches = make_batches(sizes, cfg_.max_tokens, cfg_.max_frames,
                                        derive_seed(cfg_.seed, hash_string(phase)), epoch);
      EpochStats stats;
      stats.phase = phase;
      stats.epoch = epoch;
      double loss_sum = 0.0;
      std::map<std::string, double> part_sums;
      model_.train(dropout_rng_);
      for (const auto& batch : batches) {
        for (auto& [name, p] : params_) p.zero_grad();
        const double inv = 1.0 / static_cast<double>(batch.indices.size());
        double batch_loss = 0.0;
        for (std::size_t i : batch.indices) {
          const std::uint64_t sample_seed = derive_seed(derive_seed(cfg_.seed, static_cast<std::uint64_t>(step_)), i);
          SampleLoss sl = sample_loss(i, sample_seed);
          scale(sl.loss, inv).backward();
          const double v = sl.loss.item();
          if (!std::isfinite(v)) throw DataError(phase + ": non-finite loss at step " + std::to_string(step_ + 1));
          batch_loss += v;
          for (const auto& [k, x] : sl.parts) part_sums[k] += x;
        }
        loss_sum += batch_loss;
        stats.samples += batch.indices.size();
        clip();
        ++step_;
        optimizer_step(params_, state_, learning_rate_at(cfg_, step_));
        if (cfg_.checkpoint_every > 0 && step_ % cfg_.checkpoint_every == 0) save();
      }
      model_.eval();
      if (stats.samples > 0) {
        stats.loss = loss_sum / static_cast<double>(stats.samples);
        for (const auto& [k, x] : part_sums) stats.components[k] = x / static_cast<double>(stats.samples);
      }
      stats.steps = step_;
      log_epoch(stats);
      epochs_.push_back(std::move(stats));
      if (cfg_.checkpoint_every == 0) save();
    }
  }

  TrainResult finish() {
    model_.eval();
    TrainResult r;
    r.checkpoint = make_checkpoint(model_, step_, ckpt_prefixes_, frozen_);
    r.epochs = std::move(epochs_);
    r.saved = saved_;
    r.steps = step_;
    return r;
  }

 private:
  void clip() {
    if (cfg_.clip_norm <= 0.0) return;
    double sq = 0.0;
    for (const auto& [name, p] : params_) sq += p.grad().squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm <= cfg_.clip_norm) return;
    const double f = cfg_.clip_norm / norm;
    for (auto& [name, p] : params_) p.node()->grad *= f;
  }

  void save() {
    if (out_.out_dir.empty()) return;
    if (!saved_.empty() && saved_.back() == ckpt_dir(step_)) return;
    save_checkpoint(make_checkpoint(model_, step_, ckpt_prefixes_, frozen_), ckpt_dir(step_));
    saved_.push_back(ckpt_dir(step_));
    while (saved_.size() > static_cast<std::size_t>(cfg_.keep_last)) {
      fs::remove_all(saved_.front());
      saved_.erase(saved_.begin());
    }
  }

  std::string ckpt_dir(std::int64_t step) const {
    return (fs::path(out_.out_dir) / ("ckpt_" + std::to_string(step) + ".d")).string();
  }

  void log_epoch(const EpochStats& s) const {
    if (out_.log == nullptr) return;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", s.loss);
    *out_.log << s.phase << " epoch " << s.epoch << " step " << s.steps << " samples " << s.samples << " loss "
              << buf;
    for (const auto& [k, v] : s.components) {
      std::snprintf(buf, sizeof buf, "%.6f", v);
      *out_.log << ' ' << k << ' ' << buf;
    }
    *out_.log << '\n';
  }

  JointModel& model_;
  const TrainConfig& cfg_;
  TrainOutput out_;
  NamedParameters params_;
  std::vector<std::string> ckpt_prefixes_;
  std::set<std::string> frozen_;
  OptimizerState state_;
  Rng dropout_rng_;
  std::int64_t step_ = 0;
  std::vector<EpochStats> epochs_;
  std::vector<std::string> saved_;
};

void check_vocab(const JointModel& model, const Vocabulary& vocab) {
  const auto& c = model.config();
  if (c.vocab_size != vocab.size() || c.lid_first != vocab.num_specials() - static_cast<int>(vocab.languages().size()) ||
      c.lid_count != static_cast<int>(vocab.languages().size())) {
    throw ConfigError("model vocabulary (" + std::to_string(c.vocab_size) + " symbols, " +
                      std::to_string(c.lid_count) + " languages) does not match the vocabulary file (" +
                      std::to_string(vocab.size()) + " symbols, " + std::to_string(vocab.languages().size()) +
                      " languages)");
  }
}

// Decoder input and output for a target-side encoding [lid, ..., </s>].
std::pair<std::vector<int>, std::vector<int>> shift(const std::vector<int>& target) {
  return {{target.begin(), target.end() - 1}, {target.begin() + 1, target.end()}};
}

Tensor decoder_ce(const JointModel& model, const Tensor& enc, const std::vector<int>& target, double eps) {
  const auto [prev, next] = shift(target);
  return label_smoothed_ce(model.forward_decoder(enc, prev), next, eps);
}

std::vector<std::vector<double>> load_waveforms(const std::vector<SampleManifest>& samples,
                                                const WaveformStore& audio) {
  std::vector<std::vector<double>> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(audio.get(s));
  return out;
}

}  // namespace

TrainResult pretrain_text(JointModel& model, const Vocabulary& vocab, const std::vector<TextLine>& mono,
                          const std::vector<TextPair>& parallel, const TrainConfig& cfg,
                          const ObjectiveConfig& objectives, const TrainOutput& out) {
  cfg.validate();
  objectives.validate();
  check_vocab(model, vocab);
  if (mono.empty()) throw DataError("text pretraining: the monolingual corpus is empty");
  Loop loop(model, cfg, out, kTextPrefixes, kTextPrefixes, {});

  std::vector<std::vector<int>> tokens, targets;
  std::vector<ItemSize> sizes;
  for (const auto& line : mono) {
    auto src = encode(line.text, line.lang, vocab, Side::Source);
    src.pop_back();  // </s> is re-appended after corruption
    targets.push_back(encode(line.text, line.lang, vocab, Side::Target));
    sizes.push_back({static_cast<Index>(targets.back().size()), 1});
    tokens.push_back(std::move(src));
  }
  loop.run("dae", cfg.epochs, sizes, [&](std::size_t i, std::uint64_t seed) {
    DaeSample d = dae_corrupt(tokens[i], objectives.mask_ratio, objectives.span_length,
                              objectives.permute_sentences, seed, Vocabulary::kMask);
    d.noisy.push_back(Vocabulary::kEos);
    Tensor loss = decoder_ce(model, model.forward_text(d.noisy), targets[i], objectives.label_smoothing);
    return SampleLoss{loss, {}};
  });

  if (cfg.parallel_epochs > 0 && !parallel.empty()) {
    std::vector<std::vector<int>> srcs, tgts;
    std::vector<ItemSize> psizes;
    for (const auto& p : parallel) {
      srcs.push_back(encode(p.src, p.src_lang, vocab, Side::Source));
      tgts.push_back(encode(p.tgt, p.tgt_lang, vocab, Side::Target));
      psizes.push_back({static_cast<Index>(std::max(srcs.back().size(), tgts.back().size())), 1});
    }
    loop.run("mt", cfg.parallel_epochs, psizes, [&](std::size_t i, std::uint64_t) {
      Tensor loss = decoder_ce(model, model.forward_text(srcs[i]), tgts[i], objectives.label_smoothing);
      return SampleLoss{loss, {}};
    });
  }
  return loop.finish();
}

std::vector<Index> sample_mask(Index frames, double ratio, int span, Rng& rng) {
  if (frames < 1) throw UsageError("sample_mask: no frames");
  const Index want = std::max<Index>(1, static_cast<Index>(std::lround(ratio * static_cast<double>(frames))));
  std::vector<bool> masked(static_cast<std::size_t>(frames), false);
  Index covered = 0;
  const Index starts = std::max<Index>(1, frames - span + 1);
  while (covered < want) {
    const auto s = static_cast<Index>(rng.index(static_cast<std::size_t>(starts)));
    for (Index t = s; t < std::min<Index>(frames, s + span) && covered < want; ++t) {
      if (!masked[static_cast<std::size_t>(t)]) {
        masked[static_cast<std::size_t>(t)] = true;
        ++covered;
      }
    }
  }
  std::vector<Index> out;
  for (Index t = 0; t < frames; ++t) {
    if (masked[static_cast<std::size_t>(t)]) out.push_back(t);
  }
  return out;
}

TrainResult pretrain_speech(JointModel& model, const std::vector<SampleManifest>& samples,
                            const WaveformStore& audio, const TrainConfig& cfg,
                            const ObjectiveConfig& objectives, const TrainOutput& out) {
  cfg.validate();
  objectives.validate();
  const auto& mc = model.config();
  std::vector<SampleManifest> usable;
  for (const auto& s : samples) {
    if (s.n_samples < mc.min_waveform_samples()) continue;
    if (mc.frontend_frames(s.n_samples) < objectives.n_distractors + 1) continue;
    usable.push_back(s);
  }
  if (usable.empty()) {
    throw DataError("speech pretraining: all " + std::to_string(samples.size()) +
                    " utterances are too short (need " +
                    std::to_string(std::max(mc.min_waveform_samples(), Index{1})) + "+ samples and " +
                    std::to_string(objectives.n_distractors + 1) + "+ frames)");
  }
  const auto waves = load_waveforms(usable, audio);
  std::vector<ItemSize> sizes;
  for (const auto& s : usable) sizes.push_back({1, static_cast<Index>(s.n_samples)});

  Loop loop(model, cfg, out, kSpeechPrefixes, kSpeechPrefixes, {});
  loop.run("ssl", cfg.epochs, sizes, [&](std::size_t i, std::uint64_t seed) {
    Tensor features = model.speech_features(waves[i]);
    Rng rng(seed);
    const auto masked = sample_mask(features.rows(), cfg.ssl_mask_ratio, cfg.ssl_mask_span, rng);
    Tensor context = model.ssl_project(model.speech_context(replace_rows(features, masked, model.ssl_mask_embedding())));
    Tensor loss = contrastive_speech_loss(context, stop_gradient(features), masked, objectives.n_distractors,
                                          objectives.contrastive_temperature, derive_seed(seed, 1));
    return SampleLoss{loss, {}};
  });
  return loop.finish();
}

JointTerms joint_sample_loss(const JointModel& model, const Vocabulary& vocab, const SampleManifest& sample,
                             std::span<const double> waveform, const ObjectiveConfig& objectives) {
  const auto target = encode(sample.target_text(), sample.tgt_lang, vocab, Side::Target);
  const auto [prev, next] = shift(target);
  const auto source = encode(sample.transcript, sample.src_lang, vocab, Side::Source);

  Tensor speech = model.forward_speech(waveform);
  Tensor text = model.forward_text(source);
  Tensor speech_logits = model.forward_decoder(speech, prev);

  JointTerms t;
  t.speech_ce = label_smoothed_ce(speech_logits, next, objectives.label_smoothing);
  t.car = car_loss(text, speech, objectives.car_temperature);
  if (sample.is_asr()) {
    // No text-path teacher: distillation falls back to the transcript labels.
    t.text_ce = Tensor::scalar(0.0);
    t.kd = t.speech_ce;
  } else {
    Tensor text_logits = model.forward_decoder(text, prev);
    t.text_ce = label_smoothed_ce(text_logits, next, objectives.label_smoothing);
    t.kd = online_kd_loss(text_logits, speech_logits);
  }
  t.total = joint_loss(t.speech_ce, t.text_ce, t.car, t.kd, objectives);
  return t;
}

TrainResult train_joint(JointModel& model, const Vocabulary& vocab, const std::vector<SampleManifest>& samples,
                        const WaveformStore& audio, const TrainConfig& cfg, const ObjectiveConfig& objectives,
                        const TrainOutput& out) {
  cfg.validate();
  objectives.validate();
  check_vocab(model, vocab);
  const auto data = select_directions(samples, cfg.directions, vocab);
  if (data.empty()) throw DataError("joint training: no samples for the configured directions");
  for (const auto& s : data) {
    if (s.transcript.empty()) throw DataError("sample '" + s.id + "' has no transcript");
  }
  const auto waves = load_waveforms(data, audio);
  std::vector<ItemSize> sizes;
  for (const auto& s : data) {
    sizes.push_back({static_cast<Index>(split_words(s.target_text()).size() + 2), static_cast<Index>(s.n_samples)});
  }
  Loop loop(model, cfg, out, kJointPrefixes, {}, {"ssl.mask", "ssl.proj.w", "ssl.proj.b"});
  loop.run("joint", cfg.epochs, sizes, [&](std::size_t i, std::uint64_t) {
    JointTerms t = joint_sample_loss(model, vocab, data[i], waves[i], objectives);
    return SampleLoss{t.total,
                      {{"speech_ce", t.speech_ce.item()},
                       {"text_ce", t.text_ce.item()},
                       {"car", t.car.item()},
                       {"kd", t.kd.item()}}};
  });
  return loop.finish();
}

TrainResult finetune_speech(JointModel& model, const Vocabulary& vocab, const std::vector<SampleManifest>& samples,
                            const WaveformStore& audio, const TrainConfig& cfg, const ObjectiveConfig& objectives,
                            const TrainOutput& out) {
  cfg.validate();
  objectives.validate();
  check_vocab(model, vocab);
  const auto data = select_directions(samples, cfg.directions, vocab);
  if (data.empty()) throw DataError("finetuning: no samples for the configured directions");
  const auto waves = load_waveforms(data, audio);
  std::vector<ItemSize> sizes;
  for (const auto& s : data) {
    sizes.push_back({static_cast<Index>(split_words(s.target_text()).size() + 2), static_cast<Index>(s.n_samples)});
  }
  std::set<std::string> frozen;
  for (const auto& [name, t] : model.params().entries()) {
    if (!has_prefix(name, kFinetunePrefixes)) frozen.insert(name);
  }
  Loop loop(model, cfg, out, kFinetunePrefixes, {}, frozen);
  loop.run("finetune", cfg.epochs, sizes, [&](std::size_t i, std::uint64_t) {
    const auto target = encode(data[i].target_text(), data[i].tgt_lang, vocab, Side::Target);
    Tensor ce = decoder_ce(model, model.forward_speech(waves[i]), target, objectives.label_smoothing);
    return SampleLoss{ce, {{"speech_ce", ce.item()}}};
  });
  return loop.finish();
}

Checkpoint average_checkpoints(const std::vector<Checkpoint>& ckpts) {
  if (ckpts.empty()) throw UsageError("average_checkpoints: no checkpoints given");
  const Checkpoint& first = ckpts.front();
  for (std::size_t c = 1; c < ckpts.size(); ++c) {
    const auto& other = ckpts[c];
    const std::size_t n = std::max(first.params.size(), other.params.size());
    for (std::size_t i = 0; i < n; ++i) {
      const auto* a = i < first.params.size() ? &first.params[i] : nullptr;
      const auto* b = i < other.params.size() ? &other.params[i] : nullptr;
      if (a == nullptr || b == nullptr || a->name != b->name) {
        throw ConfigError("checkpoint " + std::to_string(c + 1) + " differs from the first at parameter " +
                          std::to_string(i + 1) + ": '" + (a ? a->name : "<none>") + "' vs '" +
                          (b ? b->name : "<none>") + "'");
      }
      if (a->shape != b->shape) {
        throw ConfigError("checkpoint " + std::to_string(c + 1) + ": parameter '" + a->name + "' has shape " +
                          shape_string(b->shape) + ", expected " + shape_string(a->shape));
      }
    }
  }
  Checkpoint avg = ckpts.back();
  const double inv = 1.0 / static_cast<double>(ckpts.size());
  for (std::size_t i = 0; i < avg.params.size(); ++i) {
    auto& data = avg.params[i].data;
    for (std::size_t j = 0; j < data.size(); ++j) {
      double s = 0.0;
      for (const auto& c : ckpts) s += static_cast<double>(c.params[i].data[j]);
      data[j] = static_cast<float>(s * inv);
    }
  }
  return avg;
}

}  // namespace mst
