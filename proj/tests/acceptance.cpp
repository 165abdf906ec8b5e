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

// Acceptance run: one PASS/FAIL line per criterion. Criteria 5-7 train the
// full pipeline through the command-line front end; 9 repeats it in a
// second directory and compares every emitted file.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli.hpp"
#include "gradcheck.hpp"
#include "metric_oracles.hpp"
#include "mining_oracles.hpp"
#include "mst/data.hpp"
#include "mst/error.hpp"
#include "mst/metrics.hpp"
#include "mst/mining.hpp"
#include "mst/model.hpp"
#include "mst/objectives.hpp"
#include "mst/ops.hpp"
#include "mst/trainer.hpp"

namespace fs = std::filesystem;
using mst::Index;
using mst::RowMatrix;
using mst::Tensor;
using mst::testing::gradient_error;
using mst::testing::random_param;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
  std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << "  " << name << "  " << o.detail << std::endl;
  if (!o.pass) ++failures;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// --- 1: gradients ------------------------------------------------------------

Outcome gradients() {
  const auto t0 = Clock::now();
  mst::Rng rng(2024);
  auto proj = [](const Tensor& t) {
    mst::Vector w(t.size());
    for (Index i = 0; i < w.size(); ++i) w[i] = std::sin(0.7 * static_cast<double>(i) + 0.3);
    return mst::weighted_sum(t, w);
  };
  std::map<std::string, double> err;
  auto a = random_param({4, 5}, rng), b = random_param({5, 3}, rng), c = random_param({4, 5}, rng);
  auto w = random_param({5, 6}, rng), bias = random_param({6}, rng), bt = random_param({3, 5}, rng);
  err["matmul"] = gradient_error([&] { return proj(mst::matmul(a, b)); }, {a, b});
  err["matmul_transposed"] = gradient_error([&] { return proj(mst::matmul_transposed(a, bt)); }, {a, bt});
  err["linear"] = gradient_error([&] { return proj(mst::linear(a, w, bias)); }, {a, w, bias});
  err["transpose"] = gradient_error([&] { return proj(mst::transpose(a)); }, {a});
  err["add"] = gradient_error([&] { return proj(mst::add(a, c)); }, {a, c});
  err["sub"] = gradient_error([&] { return proj(mst::sub(a, c)); }, {a, c});
  err["mul"] = gradient_error([&] { return proj(mst::mul(a, c)); }, {a, c});
  err["scale"] = gradient_error([&] { return proj(mst::scale(a, -2.5)); }, {a});
  err["relu"] = gradient_error([&] { return proj(mst::relu(a)); }, {a});
  auto gamma = random_param({5}, rng), beta = random_param({5}, rng);
  err["layer_norm"] = gradient_error([&] { return proj(mst::layer_norm(a, gamma, beta)); }, {a, gamma, beta});
  err["softmax"] = gradient_error([&] { return proj(mst::softmax(a)); }, {a});
  err["softmax_axis0"] = gradient_error([&] { return proj(mst::softmax(a, 0)); }, {a});
  err["log_softmax"] = gradient_error([&] { return proj(mst::log_softmax(a)); }, {a});
  auto q = random_param({3, 6}, rng), k = random_param({4, 6}, rng), v = random_param({4, 6}, rng);
  err["attention"] = gradient_error([&] { return proj(mst::attention(q, k, v)); }, {q, k, v});
  mst::AttentionMask mask = mst::AttentionMask::Constant(3, 4, false);
  mask(0, 1) = mask(2, 3) = true;
  err["multi_head_attention"] =
      gradient_error([&] { return proj(mst::multi_head_attention(q, k, v, 2, &mask, false)); }, {q, k, v});
  auto s = random_param({4, 6}, rng);
  err["causal_attention"] =
      gradient_error([&] { return proj(mst::multi_head_attention(s, s, s, 3, nullptr, true)); }, {s});
  auto x = random_param({2, 9}, rng), cw = random_param({3, 2, 3}, rng), cb = random_param({3}, rng);
  err["conv1d"] = gradient_error([&] { return proj(mst::conv1d(x, cw, cb, 2, 1)); }, {x, cw, cb});
  auto table = random_param({6, 4}, rng);
  std::vector<int> ids{1, 4, 1, 0};
  err["embedding"] = gradient_error([&] { return proj(mst::embedding(table, ids)); }, {table});
  std::vector<Index> rows{2, 0};
  err["gather_rows"] = gradient_error([&] { return proj(mst::gather_rows(a, rows)); }, {a});
  err["slice_rows"] = gradient_error([&] { return proj(mst::slice_rows(a, 1, 2)); }, {a});
  mst::IndexMatrix picks(4, 3);
  picks << 0, 4, 0, 1, 2, 3, 4, 4, 1, 2, 0, 3;
  err["take_along_rows"] = gradient_error([&] { return proj(mst::take_along_rows(a, picks)); }, {a});
  auto row = random_param({1, 5}, rng);
  err["replace_rows"] = gradient_error([&] { return proj(mst::replace_rows(a, rows, row)); }, {a, row});
  err["l2_normalize_rows"] = gradient_error([&] { return proj(mst::l2_normalize_rows(a)); }, {a});
  err["mean_rows"] = gradient_error([&] { return proj(mst::mean_rows(a)); }, {a});
  err["sum"] = gradient_error([&] { return mst::sum(mst::mul(a, c)); }, {a, c});
  err["mean"] = gradient_error([&] { return mst::mean(mst::mul(a, a)); }, {a});
  err["dropout"] = gradient_error(
      [&] {
        mst::Rng r(11);
        return proj(mst::dropout(a, 0.3, r));
      },
      {a});

  auto logits = random_param({4, 6}, rng);
  std::vector<int> y{1, 5, 0, 3};
  std::vector<bool> pad{false, false, true, false};
  err["ce"] = gradient_error([&] { return mst::label_smoothed_ce(logits, y, 0.1, &pad); }, {logits});
  auto ts = random_param({3, 5}, rng), ss = random_param({4, 5}, rng);
  err["car"] = gradient_error([&] { return mst::car_loss(ts, ss, 0.5); }, {ss});
  auto teacher = random_param({4, 6}, rng), student = random_param({4, 6}, rng);
  err["kd"] = gradient_error([&] { return mst::online_kd_loss(teacher, student, &pad); }, {student});
  auto ctx = random_param({7, 4}, rng), z = random_param({7, 4}, rng);
  std::vector<Index> masked{0, 2, 3, 6};
  err["contrastive"] =
      gradient_error([&] { return mst::contrastive_speech_loss(ctx, z, masked, 2, 0.3, 5); }, {ctx, z});

  const double elapsed = seconds_since(t0);
  std::string worst_name;
  double worst = 0.0;
  for (const auto& [name, e] : err) {
    if (!(e <= worst)) {
      worst = e;
      worst_name = name;
    }
  }
  Outcome o;
  o.pass = worst < 1e-4 && elapsed < 60.0;
  o.detail = std::to_string(err.size()) + " checks, worst " + worst_name + " " + fmt("%.2e", worst) + " (< 1e-4), " +
             fmt("%.2f", elapsed) + " s (< 60)";
  return o;
}

// --- 2: shapes and topology ---------------------------------------------------

std::vector<double> random_wave(Index n, std::uint64_t seed) {
  mst::Rng rng(seed);
  std::vector<double> w(static_cast<std::size_t>(n));
  for (auto& x : w) x = rng.normal(0.0, 0.5);
  return w;
}

Outcome topology(const fs::path& work) {
  mst::JointModelConfig cfg;
  cfg.vocab_size = 40;
  cfg.lid_count = 4;
  mst::JointModel m(cfg, 3);
  std::vector<std::string> bad;

  for (auto [in, out] : {std::pair<Index, Index>{64, 8}, {65, 9}}) {
    const auto adapted = m.adapt(Tensor::matrix(RowMatrix::Random(in, cfg.d_model)));
    if (adapted.rows() != out || cfg.adaptor_frames(in) != out) bad.push_back("adaptor " + std::to_string(in));
  }

  const auto wav = random_wave(4000, 5);
  const auto enc = m.forward_speech(wav);
  std::vector<int> p1{7, 12, 13, 14, 15}, p2{7, 12, 13, 30, 31};
  const auto l1 = m.forward_decoder(enc, p1), l2 = m.forward_decoder(enc, p2);
  if ((l1.mat().topRows(3) - l2.mat().topRows(3)).cwiseAbs().maxCoeff() != 0.0 ||
      (l1.mat().row(3) - l2.mat().row(3)).cwiseAbs().maxCoeff() == 0.0) {
    bad.push_back("causality");
  }

  // One step on a shared parameter through the text path moves the speech
  // output; the parameter is stored once.
  const auto before = m.forward_speech(wav);
  auto t = m.forward_text(std::vector<int>{20, 21, 2});
  m.params().zero_grad();
  mst::sum(mst::mul(t, t)).backward();
  auto& shared_w = m.params().get("shared.0.ffn1.w");
  shared_w.mutable_value() -= 0.1 * shared_w.grad();
  const double moved = (m.forward_speech(wav).mat() - before.mat()).cwiseAbs().maxCoeff();
  const auto ckpt = mst::make_checkpoint(m, 1);
  std::map<std::string, int> seen;
  for (const auto& e : ckpt.params) ++seen[e.name];
  bool once = true;
  for (const auto& [name, n] : seen) once = once && n == 1;
  if (moved <= 1e-9 || !once || !seen.count("shared.0.ffn1.w")) bad.push_back("tying");

  const auto dir = work / "roundtrip.d";
  mst::save_checkpoint(ckpt, dir.string());
  auto m2 = mst::model_from_checkpoint(mst::load_checkpoint(dir.string()));
  const auto y1 = m.forward_decoder(m.forward_speech(wav), p1);
  const auto y2 = m2.forward_decoder(m2.forward_speech(wav), p1);
  const auto t1 = m.forward_decoder(m.forward_text(std::vector<int>{20, 21, 2}), p1);
  const auto t2 = m2.forward_decoder(m2.forward_text(std::vector<int>{20, 21, 2}), p1);
  auto rel = [](const Tensor& a, const Tensor& b) {
    return (a.value() - b.value()).cwiseAbs().maxCoeff() / std::max(1e-30, a.value().cwiseAbs().maxCoeff());
  };
  const double delta = std::max(rel(y1, y2), rel(t1, t2));
  if (!(delta < 1e-6)) bad.push_back("round trip");

  Outcome o;
  o.pass = bad.empty();
  o.detail = "adaptor 64->" + std::to_string(cfg.adaptor_frames(64)) + " 65->" +
             std::to_string(cfg.adaptor_frames(65)) + ", round-trip forward delta " + fmt("%.2e", delta) +
             " (< 1e-6)";
  for (const auto& b : bad) o.detail += ", failed: " + b;
  return o;
}

// --- 3: oracles -------------------------------------------------------------

RowMatrix random_matrix(Index r, Index c, mst::Rng& rng) {
  RowMatrix m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

Outcome oracles() {
  mst::Rng rng(99);
  double mm = 0.0, conv = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.index(12)), k = 1 + static_cast<Index>(rng.index(12)),
                p = 1 + static_cast<Index>(rng.index(12));
    RowMatrix a = random_matrix(n, k, rng), b = random_matrix(k, p, rng);
    const auto c = mst::matmul(Tensor::matrix(a), Tensor::matrix(b));
    RowMatrix ref = RowMatrix::Zero(n, p);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < p; ++j)
        for (Index t = 0; t < k; ++t) ref(i, j) += a(i, t) * b(t, j);
    mm = std::max(mm, (c.mat() - ref).cwiseAbs().maxCoeff() / std::max(1.0, ref.cwiseAbs().maxCoeff()));

    const Index cin = 1 + static_cast<Index>(rng.index(4)), cout = 1 + static_cast<Index>(rng.index(4));
    const Index kernel = 1 + static_cast<Index>(rng.index(5)), stride = 1 + static_cast<Index>(rng.index(3));
    const Index padding = static_cast<Index>(rng.index(3)), len = kernel + static_cast<Index>(rng.index(20));
    RowMatrix x = random_matrix(cin, len, rng);
    mst::Vector wv(cout * cin * kernel);
    for (Index i = 0; i < wv.size(); ++i) wv[i] = rng.normal();
    const auto y = mst::conv1d(Tensor::matrix(x), Tensor::constant({cout, cin, kernel}, wv), stride, padding);
    const Index out_len = (len + 2 * padding - kernel) / stride + 1;
    RowMatrix yr = RowMatrix::Zero(cout, out_len);
    for (Index o = 0; o < cout; ++o)
      for (Index t = 0; t < out_len; ++t)
        for (Index ch = 0; ch < cin; ++ch)
          for (Index kk = 0; kk < kernel; ++kk) {
            const Index pos = t * stride + kk - padding;
            if (pos >= 0 && pos < len) yr(o, t) += wv[(o * cin + ch) * kernel + kk] * x(ch, pos);
          }
    if (y.rows() != cout || y.cols() != out_len) {
      conv = 1.0;
    } else {
      conv = std::max(conv, (y.mat() - yr).cwiseAbs().maxCoeff() / std::max(1.0, yr.cwiseAbs().maxCoeff()));
    }
  }

  // Mining at the default threshold and at a permissive one, so the
  // pair-for-pair comparison also covers many accepted pairs.
  bool pairs_match = true;
  double score_diff = 0.0;
  std::size_t compared = 0;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    mst::Rng r(seed);
    auto x = oracle::random_embeddings(r, 120 + 20 * seed, 16, "x", "fr");
    auto y = oracle::random_embeddings(r, 200 - 20 * seed, 16, "y", "en");
    for (double threshold : {1.06, 0.9}) {
      mst::MiningConfig cfg;
      cfg.threshold = threshold;
      const auto got = mst::mine_pairs(x, y, cfg);
      const auto want = oracle::mine(x, y, cfg.k, threshold);
      std::map<std::string, std::pair<std::string, double>> w;
      for (const auto& p : want) w[p.src] = {p.tgt, p.score};
      if (got.size() != want.size()) pairs_match = false;
      for (const auto& p : got) {
        auto it = w.find(p.src_id);
        if (it == w.end() || it->second.first != p.tgt_id) {
          pairs_match = false;
          continue;
        }
        score_diff = std::max(score_diff, std::abs(it->second.second - p.score));
        ++compared;
      }
    }
  }

  double bleu_diff = 0.0;
  bool wer_exact = true;
  std::vector<std::string> hyps, refs;
  for (int i = 0; i < 20; ++i) {
    hyps.push_back(mst::oracle::random_sentence(rng, 12));
    refs.push_back(mst::oracle::random_sentence(rng, 12));
    const auto hw = mst::split_words_for_test(hyps.back()), rw = mst::split_words_for_test(refs.back());
    if (mst::edit_distance(hw, rw) != mst::oracle::edit_distance(hw, rw)) wer_exact = false;
    const double single = mst::bleu({hyps.back()}, {refs.back()});
    bleu_diff = std::max(bleu_diff, std::abs(single - mst::oracle::bleu({hyps.back()}, {refs.back()})));
  }
  bleu_diff = std::max(bleu_diff, std::abs(mst::bleu(hyps, refs) - mst::oracle::bleu(hyps, refs)));
  std::size_t edits = 0, words = 0;
  for (int i = 0; i < 20; ++i) {
    const auto rw = mst::split_words_for_test(refs[static_cast<std::size_t>(i)]);
    edits += mst::oracle::edit_distance(mst::split_words_for_test(hyps[static_cast<std::size_t>(i)]), rw);
    words += rw.size();
  }
  const double wer_oracle = 100.0 * static_cast<double>(edits) / static_cast<double>(words);
  if (mst::wer(hyps, refs) != wer_oracle) wer_exact = false;

  Outcome o;
  o.pass = mm <= 1e-12 && conv <= 1e-12 && pairs_match && compared > 0 && score_diff <= 1e-12 &&
           bleu_diff < 0.01 && wer_exact;
  o.detail = "matmul " + fmt("%.1e", mm) + ", conv1d " + fmt("%.1e", conv) + " (<= 1e-12); mining " +
             (pairs_match ? "matches" : "DIFFERS") + " on " + std::to_string(compared) + " pairs, score " +
             fmt("%.1e", score_diff) + " (<= 1e-12); BLEU diff " + fmt("%.1e", bleu_diff) + " (< 0.01), WER " +
             (wer_exact ? "exact" : "DIFFERS");
  return o;
}

// --- 4: planted mining ----------------------------------------------------------

Outcome planted() {
  const auto t0 = Clock::now();
  const auto p = oracle::planted_permutation(2026, 100, 64, 0.05);
  const auto pairs = mst::mine_pairs(p.src, p.tgt, mst::MiningConfig{});
  const double elapsed = seconds_since(t0);
  std::size_t correct = 0, wrong = 0;
  for (const auto& pr : pairs) {
    const std::size_t i = std::stoul(pr.src_id.substr(1));
    (pr.tgt_id == "t" + std::to_string(p.truth[i]) ? correct : wrong)++;
  }
  Outcome o;
  o.pass = correct >= 95 && wrong == 0 && elapsed < 10.0;
  o.detail = "recovered " + std::to_string(correct) + "/100 (>= 95), false " + std::to_string(wrong) + " (0), " +
             fmt("%.3f", elapsed) + " s (< 10)";
  return o;
}

// --- 5-7, 9: training pipeline ---------------------------------------------------

// Corpus: two speech translation directions plus a zero-shot one whose
// source language only has recognition data.
const std::vector<std::string> kGenData{
    "gen-data",  "--out",       "data",         "--directions", "es-en:2000:100", "fr-de:2000:100",
    "pt-en:0:100:zero", "--asr-train", "pt:1000", "--words", "100", "--mono", "4000", "--parallel", "4000",
    "--segment", "128", "--set", "synth.min_len=3", "--set", "synth.max_len=8", "--seed", "1"};
constexpr int kVocabSize = 400;
constexpr int kTextDaeEpochs = 3;
constexpr int kTextMtEpochs = 3;
constexpr int kTextWarmup = 1000;
constexpr int kSpeechEpochs = 2;
constexpr int kJointEpochs = 4;
constexpr int kFinetuneEpochs = 2;
constexpr int kBeam = 4;
const std::vector<std::string> kSpeechDirections{"es-en", "fr-de"};
const std::string kZeroShot = "pt-en";

struct PipelineResult {
  bool ok = true;
  std::string error;
  double seconds = 0.0;
  double core_seconds = 0.0;  // data through the baseline decode
  std::map<std::string, mst::EvalReport> bleu;  // by system
  bool ensemble_of_one_identical = false;
  bool average_identity = false;
};

class Pipeline {
 public:
  Pipeline(fs::path root, std::ostream& log) : root_(std::move(root)), log_(log) {}

  PipelineResult run() {
    PipelineResult r;
    const auto t0 = Clock::now();
    const auto cwd = fs::current_path();
    fs::remove_all(root_);
    fs::create_directories(root_);
    // Relative paths only, so both repetitions write identical run files.
    fs::current_path(root_);
    try {
      steps(r, t0);
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = e.what();
    }
    fs::current_path(cwd);
    r.seconds = seconds_since(t0);
    return r;
  }

 private:
  void call(std::vector<std::string> args) {
    std::ostringstream out, err;
    log_ << "$ mst";
    for (const auto& a : args) log_ << ' ' << a;
    log_ << std::endl;
    const int code = mst::cli::dispatch(args, out, err);
    log_ << out.str() << err.str();
    if (code != 0) throw std::runtime_error("'" + args[0] + "' exited with " + std::to_string(code) + ": " + err.str());
  }

  std::vector<std::string> vocab() const { return {"--vocab", "vocab/vocab.txt"}; }

  void joint(const std::string& out, int seed, int epochs, const std::vector<std::string>& extra = {}) {
    std::vector<std::string> a{"train-joint", "--out", out, "--train", "data/train.tsv", "--speech-ckpt",
                               "speech/checkpoint.d", "--text-ckpt", "text/checkpoint.d", "--epochs",
                               std::to_string(epochs), "--seed", std::to_string(seed)};
    for (const auto& v : vocab()) a.push_back(v);
    for (const auto& v : extra) a.push_back(v);
    call(a);
  }

  void finetune(const std::string& out, const std::string& init, int seed, int epochs) {
    std::vector<std::string> a{"finetune", "--out", out, "--train", "data/train.tsv", "--init", init,
                               "--epochs", std::to_string(epochs), "--seed", std::to_string(seed)};
    for (const auto& v : vocab()) a.push_back(v);
    call(a);
  }

  mst::EvalReport decode(const std::string& out, const std::vector<std::string>& ckpts) {
    std::vector<std::string> a{"decode", "--out", out, "--manifest", "data/dev.tsv", "--beam", std::to_string(kBeam),
                               "--ckpt"};
    for (const auto& c : ckpts) a.push_back(c);
    for (const auto& v : vocab()) a.push_back(v);
    call(a);
    return mst::evaluate(mst::load_id_text(out + "/hyp.tsv"), refs_, "bleu", directions_);
  }

  void steps(PipelineResult& r, Clock::time_point t0) {
    call(kGenData);
    for (const auto& s : mst::load_manifest("data/dev.tsv")) {
      refs_[s.id] = s.target_text();
      directions_[s.id] = mst::direction_of(s);
    }
    call({"build-vocab", "--out", "vocab", "--mono", "data/mono.tsv", "--parallel", "data/parallel.tsv", "--size",
          std::to_string(kVocabSize)});
    call({"pretrain-text", "--out", "text", "--vocab", "vocab/vocab.txt", "--mono", "data/mono.tsv", "--parallel",
          "data/parallel.tsv", "--epochs", std::to_string(kTextDaeEpochs), "--parallel-epochs",
          std::to_string(kTextMtEpochs), "--warmup", std::to_string(kTextWarmup), "--seed", "1"});
    call({"pretrain-speech", "--out", "speech", "--vocab", "vocab/vocab.txt", "--train", "data/train.tsv", "--epochs",
          std::to_string(kSpeechEpochs), "--seed", "1"});

    // Joint training then speech-only finetuning, against finetuning alone
    // for the same total number of epochs.
    joint("joint_s1", 1, kJointEpochs);
    finetune("ft_s1", "joint_s1/checkpoint.d", 1, kFinetuneEpochs);
    joint("init", 1, 0);
    finetune("baseline", "init/checkpoint.d", 1, kJointEpochs + kFinetuneEpochs);
    r.bleu["joint+ft"] = decode("dec_ft_s1", {"ft_s1/checkpoint.d"});
    r.bleu["baseline"] = decode("dec_baseline", {"baseline/checkpoint.d"});
    r.core_seconds = seconds_since(t0);

    // Zero-shot: the same joint stage without the recognition data.
    joint("joint_noasr", 1, kJointEpochs, {"--directions", "es-en", "fr-de"});
    r.bleu["joint"] = decode("dec_joint_s1", {"joint_s1/checkpoint.d"});
    r.bleu["joint-noasr"] = decode("dec_joint_noasr", {"joint_noasr/checkpoint.d"});

    // Ensembles and averaging.
    for (int seed : {2, 3}) {
      const auto s = std::to_string(seed);
      joint("joint_s" + s, seed, kJointEpochs);
      finetune("ft_s" + s, "joint_s" + s + "/checkpoint.d", seed, kFinetuneEpochs);
      r.bleu["seed" + s] = decode("dec_ft_s" + s, {"ft_s" + s + "/checkpoint.d"});
    }
    r.bleu["seed1"] = r.bleu["joint+ft"];
    r.bleu["ensemble"] = decode("dec_ensemble", {"ft_s1/checkpoint.d", "ft_s2/checkpoint.d", "ft_s3/checkpoint.d"});
    decode("dec_ft_s1_x3", {"ft_s1/checkpoint.d", "ft_s1/checkpoint.d", "ft_s1/checkpoint.d"});
    r.ensemble_of_one_identical = slurp("dec_ft_s1_x3/hyp.tsv") == slurp("dec_ft_s1/hyp.tsv") &&
                                  slurp("dec_ft_s1_x3/failures.tsv") == slurp("dec_ft_s1/failures.tsv");
    call({"average-ckpt", "--out", "avg_same", "ft_s1/checkpoint.d", "ft_s1/checkpoint.d", "ft_s1/checkpoint.d"});
    r.average_identity = slurp("avg_same/params.bin") == slurp("ft_s1/checkpoint.d/params.bin") &&
                         slurp("avg_same/params.tsv") == slurp("ft_s1/checkpoint.d/params.tsv");
  }

  fs::path root_;
  std::ostream& log_;
  std::map<std::string, std::string> refs_;
  std::map<std::string, std::string> directions_;
};

double mean_over(const mst::EvalReport& r, const std::vector<std::string>& dirs) {
  double s = 0.0;
  for (const auto& d : dirs) {
    auto it = r.directions.find(d);
    s += it == r.directions.end() ? 0.0 : it->second.value;
  }
  return s / static_cast<double>(dirs.size());
}

double at(const mst::EvalReport& r, const std::string& dir) {
  auto it = r.directions.find(dir);
  return it == r.directions.end() ? 0.0 : it->second.value;
}

Outcome trend(const PipelineResult& r) {
  Outcome o;
  if (!r.ok) return {false, "pipeline failed: " + r.error};
  const double joint = mean_over(r.bleu.at("joint+ft"), kSpeechDirections);
  const double base = mean_over(r.bleu.at("baseline"), kSpeechDirections);
  o.pass = joint >= base + 2.0 && r.core_seconds < 1800.0;
  o.detail = "dev BLEU joint+finetune " + fmt("%.2f", joint) + " vs baseline " + fmt("%.2f", base) + " (gain " +
             fmt("%+.2f", joint - base) + ", >= +2), pipeline " + fmt("%.0f", r.core_seconds) + " s (< 1800)";
  return o;
}

Outcome zero_shot(const PipelineResult& r) {
  if (!r.ok) return {false, "pipeline failed: " + r.error};
  const double with = at(r.bleu.at("joint"), kZeroShot);
  const double without = at(r.bleu.at("joint-noasr"), kZeroShot);
  Outcome o;
  o.pass = with >= without + 2.0;
  o.detail = kZeroShot + " dev BLEU with recognition data " + fmt("%.2f", with) + " vs without " +
             fmt("%.2f", without) + " (gain " + fmt("%+.2f", with - without) + ", >= +2)";
  return o;
}

Outcome ensembles(const PipelineResult& r) {
  if (!r.ok) return {false, "pipeline failed: " + r.error};
  double best = 0.0;
  std::string singles;
  for (const char* s : {"seed1", "seed2", "seed3"}) {
    const double v = mean_over(r.bleu.at(s), kSpeechDirections);
    best = std::max(best, v);
    singles += (singles.empty() ? "" : "/") + fmt("%.2f", v);
  }
  const double ens = mean_over(r.bleu.at("ensemble"), kSpeechDirections);
  Outcome o;
  o.pass = r.ensemble_of_one_identical && r.average_identity && ens >= best - 0.5;
  o.detail = std::string("ensemble of one x3 ") + (r.ensemble_of_one_identical ? "identical" : "DIFFERS") +
             ", average of identical " + (r.average_identity ? "identical" : "DIFFERS") + ", 3-seed ensemble " +
             fmt("%.2f", ens) + " vs singles " + singles + " (>= best - 0.5)";
  return o;
}

Outcome determinism(const fs::path& a, const fs::path& b) {
  std::set<std::string> files_a, files_b;
  auto collect = [](const fs::path& root, std::set<std::string>& out) {
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (e.is_regular_file()) out.insert(fs::relative(e.path(), root).generic_string());
    }
  };
  collect(a, files_a);
  collect(b, files_b);
  std::vector<std::string> differ;
  for (const auto& f : files_a) {
    if (!files_b.count(f) || slurp(a / f) != slurp(b / f)) differ.push_back(f);
  }
  for (const auto& f : files_b) {
    if (!files_a.count(f)) differ.push_back(f);
  }
  Outcome o;
  o.pass = differ.empty() && !files_a.empty();
  o.detail = std::to_string(files_a.size()) + " files compared, " + std::to_string(differ.size()) + " differ";
  if (!differ.empty()) o.detail += " (first: " + differ.front() + ")";
  return o;
}

// --- 8: hours table ---------------------------------------------------------------

Outcome hours(const fs::path& work) {
  const auto dir = work / "hours";
  fs::create_directories(dir);
  std::vector<mst::SampleManifest> rows;
  const auto total = static_cast<std::int64_t>(std::llround(163.7 * 3600 * 800));
  for (int i = 0; i < 250; ++i) {
    mst::SampleManifest s;
    s.id = "tedx-es-en-" + std::to_string(i);
    s.audio_path = "wav/" + s.id + ".f32";
    s.n_samples = total / 250 + (i < total % 250 ? 1 : 0);
    s.src_lang = "es";
    s.tgt_lang = "en";
    s.transcript = "hola";
    s.translation = "hello";
    rows.push_back(s);
  }
  mst::save_manifest((dir / "tedx.tsv").string(), rows);
  std::ostringstream out, err;
  const int code = mst::cli::dispatch(
      {"report-hours", "--manifest", (dir / "tedx.tsv").string(), "--label", "TEDx"}, out, err);
  const std::string text = out.str();
  std::istringstream lines(text);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  const bool layout = header.find("es-en  fr-en  it-en  pt-en  fr-es  pt-es  it-es") != std::string::npos &&
                      row.rfind("TEDx |", 0) == 0 &&
                      row.find("163.7      -      -      -      -      -      -") != std::string::npos;
  Outcome o;
  o.pass = code == 0 && layout;
  o.detail = "row '" + row + "'";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance run"};
  std::string work = "acceptance_work";
  std::vector<int> only;
  app.add_option("--work", work, "Scratch directory")->capture_default_str();
  app.add_option("--only", only, "Criteria to run (default: all)");
  CLI11_PARSE(app, argc, argv);
  auto wanted = [&](int c) { return only.empty() || std::find(only.begin(), only.end(), c) != only.end(); };

  const fs::path root = fs::absolute(work);
  fs::create_directories(root);
  std::ofstream log(root / "acceptance.log");

  if (wanted(1)) report(1, "gradients", gradients());
  if (wanted(2)) report(2, "shapes and topology", topology(root));
  if (wanted(3)) report(3, "oracle equivalence", oracles());
  if (wanted(4)) report(4, "planted mining", planted());

  const bool pipeline = wanted(5) || wanted(6) || wanted(7) || wanted(9);
  PipelineResult first;
  if (pipeline) {
    first = Pipeline(root / "run1", log).run();
    log << "pipeline 1: " << first.seconds << " s" << std::endl;
    for (const auto& [name, rep] : first.bleu) log << name << '\n' << rep.format() << '\n';
  }
  if (wanted(5)) report(5, "joint training trend", trend(first));
  if (wanted(6)) report(6, "zero-shot trend", zero_shot(first));
  if (wanted(7)) report(7, "ensembles and averaging", ensembles(first));
  if (wanted(8)) report(8, "hours table", hours(root));
  if (wanted(9)) {
    const auto second = Pipeline(root / "run2", log).run();
    log << "pipeline 2: " << second.seconds << " s" << std::endl;
    if (!first.ok || !second.ok) {
      report(9, "determinism", {false, "pipeline failed: " + (first.ok ? second.error : first.error)});
    } else {
      report(9, "determinism", determinism(root / "run1", root / "run2"));
    }
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
