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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "cli.hpp"
#include "mst/data.hpp"
#include "mst/kv.hpp"

using namespace mst;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("mst_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

}  // namespace

TEST_CASE("unknown subcommands list every choice") {
  const auto r = run({"train-everything"});
  CHECK(r.code == cli::kUsageError);
  for (const auto& name : cli::subcommands()) CHECK(r.err.find(name) != std::string::npos);
  CHECK(run({}).code == cli::kUsageError);
  CHECK(run({"score", "--no-such-flag"}).code == cli::kUsageError);
  CHECK(run({"score", "--ref", "r.tsv"}).code == cli::kUsageError);
}

TEST_CASE("scoring identical files gives 100") {
  const auto dir = scratch("score");
  write(dir / "h.tsv", "a\tthe cat sat\nb\ton the mat today\n");
  const auto r = run({"score", "--hyp", (dir / "h.tsv").string(), "--ref", (dir / "h.tsv").string(), "--metric",
                      "bleu"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("100.00") != std::string::npos);
  CHECK(r.out.find("Ave.") != std::string::npos);
  const auto w = run({"score", "--hyp", (dir / "h.tsv").string(), "--ref", (dir / "h.tsv").string(), "--metric",
                      "wer"});
  CHECK(w.out.find("0.00") != std::string::npos);
  CHECK(run({"score", "--hyp", (dir / "missing.tsv").string(), "--ref", (dir / "h.tsv").string()}).code ==
        cli::kDataOrConfigError);
}

TEST_CASE("report-hours prints the hours table") {
  const auto dir = scratch("hours");
  // 163.7 h of es-en in 100 utterances at 800 Hz.
  std::vector<SampleManifest> rows;
  const std::int64_t total = static_cast<std::int64_t>(163.7 * 3600 * 800);
  for (int i = 0; i < 100; ++i) {
    SampleManifest s;
    s.id = "u" + std::to_string(i);
    s.audio_path = "wav/" + s.id + ".f32";
    s.n_samples = total / 100 + (i < total % 100 ? 1 : 0);
    s.sample_rate = 800;
    s.src_lang = "es";
    s.tgt_lang = "en";
    s.transcript = "hola";
    s.translation = "hello";
    rows.push_back(s);
  }
  save_manifest((dir / "tedx.tsv").string(), rows);
  const auto r = run({"report-hours", "--manifest", (dir / "tedx.tsv").string(), "--label", "TEDx"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("163.7") != std::string::npos);
  CHECK(r.out.find("es-en  fr-en  it-en  pt-en  fr-es  pt-es  it-es") != std::string::npos);
  CHECK(r.out.find("TEDx |  163.7      -      -      -      -      -      -") != std::string::npos);
}

TEST_CASE("end-to-end pipeline on a tiny corpus") {
  const auto w = scratch("pipeline");
  const auto p = [&](const std::string& rel) { return (w / rel).string(); };
  const std::vector<std::string> small{"--set", "model.d_model=16", "--set", "model.ffn_dim=32",
                                       "--set", "model.n_heads=2",   "--set", "model.frontend=8:4:2,8:3:2"};
  auto with = [&](std::vector<std::string> a, bool model_flags) {
    if (model_flags) a.insert(a.end(), small.begin(), small.end());
    return run(a);
  };
  REQUIRE(with({"gen-data", "--out", p("data"), "--directions", "es-en:30:6", "--asr-train", "es:10", "--words",
                "6", "--mono", "20", "--parallel", "20", "--segment", "40", "--seed", "4"},
               false)
              .code == 0);
  REQUIRE(with({"build-vocab", "--out", p("vocab"), "--mono", p("data/mono.tsv"), "--size", "60"}, false).code == 0);
  const std::string vocab = p("vocab/vocab.txt");
  REQUIRE(with({"pretrain-text", "--out", p("text"), "--vocab", vocab, "--mono", p("data/mono.tsv"), "--parallel",
                p("data/parallel.tsv"), "--parallel-epochs", "1", "--epochs", "1"},
               true)
              .code == 0);
  REQUIRE(with({"pretrain-speech", "--out", p("speech"), "--vocab", vocab, "--train", p("data/train.tsv"),
                "--epochs", "1", "--set", "loss.n_distractors=3"},
               true)
              .code == 0);
  REQUIRE(with({"train-joint", "--out", p("joint"), "--vocab", vocab, "--train", p("data/train.tsv"),
                "--speech-ckpt", p("speech/checkpoint.d"), "--text-ckpt", p("text/checkpoint.d"), "--epochs", "2",
                "--checkpoint-every", "1", "--keep-last", "3"},
               true)
              .code == 0);
  REQUIRE(with({"finetune", "--out", p("ft"), "--vocab", vocab, "--train", p("data/train.tsv"), "--init",
                p("joint/checkpoint.d"), "--epochs", "1"},
               false)
              .code == 0);
  REQUIRE(with({"average-ckpt", "--out", p("avg"), "--from-dir", p("joint"), "--last", "3"}, false).code == 0);
  REQUIRE(with({"decode", "--out", p("dec"), "--vocab", vocab, "--ckpt", p("avg"), p("ft/checkpoint.d"),
                "--manifest", p("data/dev.tsv"), "--beam", "2"},
               false)
              .code == 0);
  std::ostringstream refs;
  for (const auto& s : load_manifest(p("data/dev.tsv"))) refs << s.id << '\t' << s.target_text() << '\n';
  write(w / "ref.tsv", refs.str());
  const auto score = run({"score", "--hyp", p("dec/hyp.tsv"), "--ref", p("ref.tsv"), "--manifest",
                          p("data/dev.tsv")});
  CHECK(score.code == 0);
  CHECK(score.out.find("es-en") != std::string::npos);
  CHECK(score.out.find("Ave.") != std::string::npos);

  SUBCASE("averaging one checkpoint three times reproduces it") {
    const auto ckpt = p("joint/checkpoint.d");
    REQUIRE(run({"average-ckpt", ckpt, ckpt, ckpt, "--out", p("same")}).code == 0);
    CHECK(slurp(w / "same/params.bin") == slurp(w / "joint/checkpoint.d/params.bin"));
    CHECK(slurp(w / "same/params.tsv") == slurp(w / "joint/checkpoint.d/params.tsv"));
  }
  SUBCASE("run.kv replays a run byte for byte") {
    REQUIRE(run({"train-joint", "--config", p("joint/run.kv"), "--out", p("replay")}).code == 0);
    for (const auto* f : {"checkpoint.d/params.bin", "checkpoint.d/config.kv", "train.log"}) {
      CHECK(slurp(w / "replay" / f) == slurp(w / "joint" / f));
    }
    auto a = KvConfig::load(p("joint/run.kv"));
    auto b = KvConfig::load(p("replay/run.kv"));
    a.set("out", "");
    b.set("out", "");
    CHECK(a == b);
  }
  SUBCASE("errors map to exit codes") {
    CHECK(run({"finetune", "--out", p("bad"), "--vocab", vocab, "--train", p("data/train.tsv"), "--init",
               p("nowhere.d")})
              .code == cli::kDataOrConfigError);
    CHECK(run({"train-joint", "--out", p("bad"), "--vocab", vocab, "--train", p("data/train.tsv"), "--directions",
               "es-zz"})
              .code == cli::kDataOrConfigError);
    CHECK(run({"decode", "--out", p("bad"), "--vocab", vocab, "--manifest", p("data/dev.tsv")}).code ==
          cli::kUsageError);
  }
}
