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

#include "mst/error.hpp"
#include "mst/model.hpp"

using namespace mst;
namespace fs = std::filesystem;

namespace {

JointModelConfig tiny_config() {
  JointModelConfig c;
  c.d_model = 16;
  c.n_heads = 2;
  c.ffn_dim = 32;
  c.speech_frontend = {{8, 4, 2}, {8, 3, 2}};
  c.n_speech_bottom_layers = 1;
  c.n_shared_encoder_layers = 1;
  c.n_decoder_layers = 1;
  c.vocab_size = 20;
  c.lid_count = 2;
  c.dropout = 0.0;
  return c;
}

std::vector<double> random_wave(Index n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> w(static_cast<std::size_t>(n));
  for (auto& x : w) x = rng.normal(0.0, 0.5);
  return w;
}

double max_rel_diff(const Tensor& a, const Tensor& b) {
  REQUIRE(a.shape() == b.shape());
  return (a.value() - b.value()).cwiseAbs().maxCoeff() / std::max(1e-30, a.value().cwiseAbs().maxCoeff());
}

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("mst_model_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("adaptor lengths") {
  JointModel m(tiny_config(), 1);
  for (auto [in, out] : {std::pair<Index, Index>{64, 8}, {65, 9}}) {
    CHECK(m.config().adaptor_frames(in) == out);
    RowMatrix x = RowMatrix::Random(in, 16);
    CHECK(m.adapt(Tensor::matrix(x)).rows() == out);
  }
  // 65 -> 33 -> 17 -> 9, one layer at a time.
  CHECK(conv1d_output_length(65, 3, 2, 1) == 33);
  CHECK(conv1d_output_length(33, 3, 2, 1) == 17);
  CHECK(conv1d_output_length(17, 3, 2, 1) == 9);
}

TEST_CASE("speech path shapes") {
  JointModel m(tiny_config(), 1);
  const auto wav = random_wave(200, 3);
  auto feats = m.speech_features(wav);
  CHECK(feats.rows() == m.config().frontend_frames(200));
  auto out = m.forward_speech(wav);
  CHECK(out.rows() == m.config().adaptor_frames(feats.rows()));
  CHECK(out.cols() == 16);
  CHECK(out.value().allFinite());

  const Index min_len = m.config().min_waveform_samples();
  CHECK_NOTHROW(m.forward_speech(random_wave(min_len, 4)));
  try {
    m.forward_speech(random_wave(min_len - 1, 4));
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(std::to_string(min_len)) != std::string::npos);
  }
}

TEST_CASE("text path") {
  JointModel m(tiny_config(), 2);
  std::vector<int> ids{7, 9, 10, 2};
  auto out = m.forward_text(ids);
  CHECK(out.shape() == Shape{4, 16});
  CHECK_THROWS_AS(m.forward_text(std::vector<int>{25}), DataError);

  std::vector<int> padded{7, 9, 10, 2, 0, 0, 0};
  std::vector<bool> pad{false, false, false, false, true, true, true};
  auto p = m.forward_text(padded, &pad);
  CHECK((p.mat().topRows(4) - out.mat()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("shared layers are tied between the two encoder paths") {
  JointModel m(tiny_config(), 3);
  const auto wav = random_wave(160, 5);
  auto before = m.forward_speech(wav);
  // One gradient step through the text path only.
  auto t = m.forward_text(std::vector<int>{8, 9, 2});
  auto loss = sum(mul(t, t));
  m.params().zero_grad();
  loss.backward();
  auto& w = m.params().get("shared.0.ffn1.w");
  CHECK(w.grad().norm() > 0.0);
  w.mutable_value() -= 0.1 * w.grad();
  auto after = m.forward_speech(wav);
  CHECK(max_rel_diff(before, after) > 1e-6);

  int count = 0;
  for (const auto& [name, t] : m.params().entries()) count += name == "shared.0.ffn1.w";
  CHECK(count == 1);
}

TEST_CASE("decoder causality and language id prefix") {
  JointModel m(tiny_config(), 4);
  auto enc = m.forward_speech(random_wave(160, 6));
  std::vector<int> a{6, 10, 11, 12, 13};
  std::vector<int> b{6, 10, 11, 15, 19};
  auto la = m.forward_decoder(enc, a);
  auto lb = m.forward_decoder(enc, b);
  CHECK(la.shape() == Shape{5, 20});
  CHECK(la.value().allFinite());
  CHECK((la.mat().topRows(3) - lb.mat().topRows(3)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((la.mat().row(3) - lb.mat().row(3)).cwiseAbs().maxCoeff() > 0.0);
  CHECK_THROWS_AS(m.forward_decoder(enc, std::vector<int>{10, 11}), UsageError);
  CHECK_THROWS_AS(m.forward_decoder(enc, std::vector<int>{}), UsageError);

  // The same decoder serves text encoder states.
  auto text = m.forward_text(std::vector<int>{9, 2});
  CHECK(m.forward_decoder(text, a).value().allFinite());
}

TEST_CASE("translation loss reaches the speech front end") {
  JointModel m(tiny_config(), 5);
  auto enc = m.forward_speech(random_wave(160, 7));
  auto logits = m.forward_decoder(enc, std::vector<int>{6, 10, 11});
  auto loss = mean(log_softmax(logits));
  m.params().zero_grad();
  loss.backward();
  CHECK(m.params().get("frontend.conv0.w").grad().norm() > 0.0);
  CHECK(m.params().get("adaptor.conv0.w").grad().norm() > 0.0);
}

TEST_CASE("checkpoint round trip") {
  JointModel m(tiny_config(), 6);
  const auto dir = temp_dir("rt");
  auto ckpt = make_checkpoint(m, 42);
  save_checkpoint(ckpt, dir.string());
  auto loaded = load_checkpoint(dir.string());
  CHECK(loaded.step == 42);
  CHECK(loaded.parameter_count() == m.params().count());
  Index by_shape = 0;
  for (const auto& e : loaded.params) by_shape += shape_size(e.shape);
  CHECK(loaded.parameter_count() == by_shape);

  auto m2 = model_from_checkpoint(loaded);
  const auto wav = random_wave(180, 8);
  std::vector<int> prev{7, 12, 13};
  auto y1 = m.forward_decoder(m.forward_speech(wav), prev);
  auto y2 = m2.forward_decoder(m2.forward_speech(wav), prev);
  CHECK(max_rel_diff(y1, y2) < 1e-6);

  // Saving the loaded checkpoint reproduces the files byte for byte.
  const auto dir2 = temp_dir("rt2");
  save_checkpoint(loaded, dir2.string());
  for (const char* f : {"params.tsv", "params.bin", "config.kv"}) {
    std::ifstream a(dir / f, std::ios::binary), b(dir2 / f, std::ios::binary);
    std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
    CHECK(sa == sb);
  }
}

TEST_CASE("checkpoint errors") {
  JointModel m(tiny_config(), 7);
  const auto dir = temp_dir("err");
  save_checkpoint(make_checkpoint(m, 1), dir.string());
  auto other = tiny_config();
  other.d_model = 8;
  JointModel small(other, 1);
  CHECK_THROWS_AS(load_parameters(small, load_checkpoint(dir.string())), ConfigError);

  fs::resize_file(dir / "params.bin", fs::file_size(dir / "params.bin") - 8);
  try {
    load_checkpoint(dir.string());
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("offset") != std::string::npos);
  }
  CHECK_THROWS_AS(load_checkpoint((dir / "missing").string()), DataError);
}

TEST_CASE("init from pretrained") {
  auto cfg = tiny_config();
  JointModel text_model(cfg, 11);
  JointModel speech_model(cfg, 12);
  auto text = make_checkpoint(text_model, 0, kTextPrefixes);
  auto speech = make_checkpoint(speech_model, 0, kSpeechPrefixes);

  auto a = init_from_pretrained(&speech, &text, cfg, 100);
  auto b = init_from_pretrained(&speech, &text, cfg, 200);
  std::vector<int> ids{8, 9, 10, 2};
  // Text encoder matches the text model up to single-precision storage.
  CHECK(max_rel_diff(a.forward_text(ids), text_model.forward_text(ids)) < 1e-6);
  for (const auto& [name, t] : a.params().entries()) {
    const bool same = t.value() == b.params().get(name).value();
    if (name.rfind("adaptor.", 0) == 0 && name.back() == 'w') {
      CHECK_MESSAGE(!same, name);
    } else if (name.rfind("adaptor.", 0) != 0) {
      CHECK_MESSAGE(same, name);
    }
  }

  auto fresh = init_from_pretrained(nullptr, nullptr, cfg, 100);
  JointModel seeded(cfg, 100);
  for (const auto& [name, t] : fresh.params().entries()) CHECK(t.value() == seeded.params().get(name).value());

  auto bad = cfg;
  bad.ffn_dim = 24;
  try {
    init_from_pretrained(nullptr, &text, bad, 1);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("shared.0.ffn1") != std::string::npos);
  }

  // Same shapes, different strides.
  auto strided = cfg;
  strided.speech_frontend.back().stride = 1;
  CHECK_THROWS_AS(init_from_pretrained(&speech, nullptr, strided, 1), ConfigError);
  CHECK_NOTHROW(init_from_pretrained(nullptr, &text, strided, 1));
  auto lids = cfg;
  lids.lid_count = 1;
  CHECK_THROWS_AS(init_from_pretrained(nullptr, &text, lids, 1), ConfigError);
}

TEST_CASE("config round trip") {
  auto cfg = tiny_config();
  CHECK(JointModelConfig::from_kv(cfg.to_kv()) == cfg);
  auto bad = cfg;
  bad.n_shared_encoder_layers = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.n_heads = 3;
  CHECK_THROWS_AS(JointModel(bad, 1), ConfigError);
}
