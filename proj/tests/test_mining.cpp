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

#include <cstdio>
#include <filesystem>
#include <map>

#include "mining_oracles.hpp"
#include "mst/error.hpp"
#include "mst/mining.hpp"

using namespace mst;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("mst_test_mining_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("margin mining matches the brute-force oracle") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    Rng rng(seed);
    const std::size_t n = 20 + rng.index(180), m = 20 + rng.index(180);
    const int dim = 4 + static_cast<int>(rng.index(12));
    auto x = oracle::random_embeddings(rng, n, dim, "x", "es");
    auto y = oracle::random_embeddings(rng, m, dim, "y", "en");
    // Low threshold so random data yields pairs to compare.
    MiningConfig cfg;
    cfg.threshold = 0.5;
    const auto got = mine_pairs(x, y, cfg);
    const auto want = oracle::mine(x, y, cfg.k, cfg.threshold);
    REQUIRE(got.size() == want.size());
    std::map<std::string, oracle::Pair> by_src;
    for (const auto& p : want) by_src[p.src] = p;
    for (const auto& p : got) {
      REQUIRE(by_src.count(p.src_id) == 1);
      CHECK(by_src[p.src_id].tgt == p.tgt_id);
      CHECK(std::abs(by_src[p.src_id].score - p.score) <= 1e-12);
    }
  }
}

TEST_CASE("planted permutation is recovered without false pairs") {
  const auto p = oracle::planted_permutation(7, 100, 64, 0.05);
  const auto pairs = mine_pairs(p.src, p.tgt, MiningConfig{});
  std::size_t correct = 0;
  for (const auto& pr : pairs) {
    const std::size_t i = std::stoul(pr.src_id.substr(1));
    CHECK(pr.tgt_id == "t" + std::to_string(p.truth[i]));
    if (pr.tgt_id == "t" + std::to_string(p.truth[i])) ++correct;
  }
  CHECK(correct >= 95);
}

TEST_CASE("mined pairs are one-to-one and sorted") {
  Rng rng(3);
  auto x = oracle::random_embeddings(rng, 60, 6, "x", "fr");
  auto y = oracle::random_embeddings(rng, 40, 6, "y", "en");
  for (auto strategy : {MiningStrategy::Intersection, MiningStrategy::ForwardMax}) {
    MiningConfig cfg;
    cfg.threshold = 0.8;
    cfg.strategy = strategy;
    const auto pairs = mine_pairs(x, y, cfg);
    std::map<std::string, int> src_seen, tgt_seen;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      CHECK(pairs[i].score >= cfg.threshold);
      if (i > 0) CHECK(pairs[i - 1].score >= pairs[i].score);
      CHECK(++src_seen[pairs[i].src_id] == 1);
      if (strategy == MiningStrategy::Intersection) CHECK(++tgt_seen[pairs[i].tgt_id] == 1);
    }
  }
  // Forward-max keeps a superset of the intersection.
  MiningConfig inter, fwd;
  inter.threshold = fwd.threshold = 0.8;
  fwd.strategy = MiningStrategy::ForwardMax;
  CHECK(mine_pairs(x, y, fwd).size() >= mine_pairs(x, y, inter).size());
  CHECK_THROWS_AS(parse_mining_strategy("greedy"), ConfigError);
  MiningConfig bad;
  bad.k = 0;
  CHECK_THROWS_AS(mine_pairs(x, y, bad), ConfigError);
}

TEST_CASE("knn and margin score") {
  std::vector<SentenceEmbedding> e{{"a", "en", Vector::Unit(2, 0)},
                                   {"b", "en", Vector::Unit(2, 1)},
                                   {"c", "en", Vector(Vector::Ones(2) / std::sqrt(2.0))}};
  const auto nn = knn(e, e, 5);
  REQUIRE(nn[0].size() == 2);
  CHECK(e[nn[0][0].index].id == "c");
  CHECK(e[nn[0][1].index].id == "b");
  // Ties between b and a for query c break by id.
  CHECK(e[nn[2][0].index].id == "a");
  CHECK(margin_score(0.9, {0.8, 0.6}, {0.4, 0.2}, 2) == doctest::Approx(0.9 / 0.5));
  CHECK_THROWS_AS(margin_score(0.5, {0.0}, {0.0}, 1), DataError);
  CHECK_THROWS_AS(knn(e, e, 0), UsageError);
}

TEST_CASE("embedding and pair files round-trip") {
  const auto dir = scratch("files");
  Rng rng(11);
  auto e = oracle::random_embeddings(rng, 5, 3, "u", "pt");
  save_embeddings((dir / "e.tsv").string(), e);
  const auto back = load_embeddings((dir / "e.tsv").string());
  REQUIRE(back.size() == e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    CHECK(back[i].id == e[i].id);
    CHECK((back[i].vector - e[i].vector).norm() < 1e-14);
  }
  {
    std::FILE* f = std::fopen((dir / "zero.tsv").c_str(), "w");
    std::fputs("d=2\nz0\ten\t0 0\n", f);
    std::fclose(f);
  }
  try {
    load_embeddings((dir / "zero.tsv").string());
    FAIL("expected DataError");
  } catch (const DataError& err) {
    CHECK(std::string(err.what()).find("z0") != std::string::npos);
  }
  std::vector<MinedPair> pairs{{"a", "b", 1.234567891}, {"c", "d", 1.1}};
  save_mined_pairs((dir / "p.tsv").string(), pairs);
  const auto pb = load_mined_pairs((dir / "p.tsv").string());
  REQUIRE(pb.size() == 2);
  CHECK(pb[0].score == doctest::Approx(1.234568).epsilon(1e-12));
}

TEST_CASE("attaching audio and counting hours") {
  SampleManifest s;
  s.id = "asr-es-1";
  s.audio_path = "synth:asr-es-1";
  s.n_samples = 8000;
  s.sample_rate = 800;
  s.src_lang = "es";
  s.tgt_lang = "es";
  s.transcript = "hola";
  std::vector<TextRecord> targets{{"en-7", "en", "hello"}};
  const auto rows = attach_audio({{"asr-es-1", "en-7", 1.2}}, {s}, targets);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].tgt_lang == "en");
  CHECK(rows[0].translation == "hello");
  CHECK(rows[0].transcript == "hola");
  try {
    attach_audio({{"nope", "en-7", 1.2}, {"asr-es-1", "gone", 1.1}}, {s}, targets);
    FAIL("expected DataError");
  } catch (const DataError& err) {
    const std::string msg = err.what();
    CHECK(msg.find("nope") != std::string::npos);
    CHECK(msg.find("gone") != std::string::npos);
  }

  HoursTable table;
  table.add_row("Mined", {{"es-en", 163.7}, {"pt-es", 0.04}});
  const auto text = table.format();
  CHECK(text.find("163.7") != std::string::npos);
  CHECK(text.find("es-en  fr-en  it-en  pt-en  fr-es  pt-es  it-es") != std::string::npos);
  // 0.04 rounds to 0.0 and is still reported as present.
  CHECK(text.find("0.0") != std::string::npos);
  const auto hours = hours_by_direction(rows);
  CHECK(hours.at("es-en") == doctest::Approx(10.0 / 3600.0));
}
