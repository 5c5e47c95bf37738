/* Copyright 2026 The Latkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "latkit/eval.h"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "latkit/dataset.h"
#include "latkit/encoder.h"
#include "latkit/error.h"

namespace latkit {
namespace {

// Reference Levenshtein distance written as the plain full-table recurrence,
// with none of the tie-breaking bookkeeping of the library version.
int PlainDistance(const std::vector<std::string>& a,
                  const std::vector<std::string>& b) {
  const size_t n = a.size();
  const size_t m = b.size();
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1, 0));
  for (size_t i = 0; i <= n; ++i) d[i][0] = static_cast<int>(i);
  for (size_t j = 0; j <= m; ++j) d[0][j] = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      const int sub = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      const int del = d[i - 1][j] + 1;
      const int ins = d[i][j - 1] + 1;
      d[i][j] = std::min(sub, std::min(del, ins));
    }
  }
  return d[n][m];
}

std::vector<std::string> RandomWords(std::mt19937_64& rng, int min_len,
                                     int max_len) {
  static const std::vector<std::string> kPool = {"a", "b", "c", "ab"};
  std::uniform_int_distribution<int> len(min_len, max_len);
  std::uniform_int_distribution<size_t> pick(0, kPool.size() - 1);
  std::vector<std::string> words(static_cast<size_t>(len(rng)));
  for (std::string& w : words) w = kPool[pick(rng)];
  return words;
}

TEST_CASE("SplitWords splits on any whitespace") {
  CHECK(SplitWords("a b c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(SplitWords("  a \t b\nc  ") ==
        std::vector<std::string>{"a", "b", "c"});
  CHECK(SplitWords("").empty());
  CHECK(SplitWords("   \t ").empty());
}

TEST_CASE("Wer on identical sequences is zero") {
  const std::vector<std::string> ref = {"the", "cat", "sat"};
  const WerBreakdown wb = Wer(ref, ref);
  CHECK(wb.substitutions == 0);
  CHECK(wb.insertions == 0);
  CHECK(wb.deletions == 0);
  CHECK(wb.reference_length == 3);
  CHECK(wb.errors() == 0);
  CHECK(wb.rate == 0.0);
}

TEST_CASE("Wer counts one substitution in three words as one third") {
  const std::vector<std::string> ref = {"a", "b", "c"};
  const std::vector<std::string> hyp = {"a", "x", "c"};
  const WerBreakdown wb = Wer(ref, hyp);
  CHECK(wb.substitutions == 1);
  CHECK(wb.insertions == 0);
  CHECK(wb.deletions == 0);
  CHECK(wb.rate == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("Wer separates insertions and deletions") {
  const std::vector<std::string> ref = {"a", "b"};
  const std::vector<std::string> ins_hyp = {"a", "x", "b"};
  const WerBreakdown ins = Wer(ref, ins_hyp);
  CHECK(ins.substitutions == 0);
  CHECK(ins.insertions == 1);
  CHECK(ins.deletions == 0);
  CHECK(ins.rate == doctest::Approx(0.5));

  const std::vector<std::string> del_hyp = {"a"};
  const WerBreakdown del = Wer(ref, del_hyp);
  CHECK(del.substitutions == 0);
  CHECK(del.insertions == 0);
  CHECK(del.deletions == 1);

  const std::vector<std::string> empty;
  const WerBreakdown all = Wer(ref, empty);
  CHECK(all.deletions == 2);
  CHECK(all.rate == doctest::Approx(1.0));
  CHECK_THROWS_AS((void)Wer(empty, ref), DataError);
}

TEST_CASE("Wer rate can exceed one") {
  const std::vector<std::string> ref = {"a"};
  const std::vector<std::string> hyp = {"x", "y", "z"};
  const WerBreakdown wb = Wer(ref, hyp);
  CHECK(wb.errors() == 3);
  CHECK(wb.rate == doctest::Approx(3.0));
}

TEST_CASE("Swapping reference and hypothesis swaps I and D") {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<std::string> a = RandomWords(rng, 1, 6);
    const std::vector<std::string> b = RandomWords(rng, 1, 6);
    const WerBreakdown ab = Wer(a, b);
    const WerBreakdown ba = Wer(b, a);
    CHECK(ab.substitutions == ba.substitutions);
    CHECK(ab.insertions == ba.deletions);
    CHECK(ab.deletions == ba.insertions);
    CHECK(ab.errors() == ba.errors());
  }
}

TEST_CASE("Wer components are internally consistent and match the plain DP") {
  std::mt19937_64 rng(405);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::vector<std::string> ref = RandomWords(rng, 1, 7);
    const std::vector<std::string> hyp = RandomWords(rng, 0, 7);
    const WerBreakdown wb = Wer(ref, hyp);
    CHECK(wb.errors() == PlainDistance(ref, hyp));
    CHECK(wb.reference_length == static_cast<int>(ref.size()));
    // Alignment length bookkeeping: diagonal steps seen from either side.
    CHECK(static_cast<int>(ref.size()) - wb.deletions ==
          static_cast<int>(hyp.size()) - wb.insertions);
    CHECK(wb.substitutions >= 0);
    CHECK(wb.insertions >= 0);
    CHECK(wb.deletions >= 0);
    CHECK(wb.rate == doctest::Approx(static_cast<double>(wb.errors()) /
                                     static_cast<double>(ref.size()))
                         .epsilon(1e-15));
  }
}

TEST_CASE("Edit distance obeys the triangle inequality") {
  std::mt19937_64 rng(406);
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<std::string> a = RandomWords(rng, 1, 5);
    const std::vector<std::string> b = RandomWords(rng, 1, 5);
    const std::vector<std::string> c = RandomWords(rng, 1, 5);
    const int ab = Wer(a, b).errors();
    const int bc = Wer(b, c).errors();
    const int ac = Wer(a, c).errors();
    CHECK(ac <= ab + bc);
  }
}

TEST_CASE("EditDistance on token ids matches the plain DP") {
  const std::vector<int> a = {1, 2, 3};
  CHECK(EditDistance(a, a) == 0);
  CHECK(EditDistance(a, std::vector<int>{}) == 3);
  CHECK(EditDistance(a, std::vector<int>{1, 4, 3}) == 1);
  CHECK(EditDistance(std::vector<int>{}, std::vector<int>{}) == 0);

  std::mt19937_64 rng(407);
  std::uniform_int_distribution<int> len(0, 8);
  std::uniform_int_distribution<int> tok(0, 3);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<int> x(static_cast<size_t>(len(rng)));
    std::vector<int> y(static_cast<size_t>(len(rng)));
    for (int& v : x) v = tok(rng);
    for (int& v : y) v = tok(rng);
    std::vector<std::string> xs, ys;
    for (int v : x) xs.push_back(std::to_string(v));
    for (int v : y) ys.push_back(std::to_string(v));
    CHECK(EditDistance(x, y) == PlainDistance(xs, ys));
  }
}

TEST_CASE("RenderTable emits a header for empty input") {
  const std::string table = RenderTable({});
  CHECK(table.find("frame_rate_ms") != std::string::npos);
  CHECK(table.find("wer") != std::string::npos);
  // Header plus separator, nothing else.
  CHECK(std::count(table.begin(), table.end(), '\n') == 2);
}

TEST_CASE("RenderTable formats one record per row") {
  BenchRecord rec;
  rec.frame_rate_ms = 40.0;
  rec.factors = "2x2";
  rec.start_layer = 1;
  rec.wall_ms_per_utt = 1.25;
  rec.modeled_mflops = 12.5;
  rec.wer = 0.125;
  const std::vector<BenchRecord> records = {rec};
  const std::string table = RenderTable(records);
  CHECK(std::count(table.begin(), table.end(), '\n') == 3);
  CHECK(table.find("40") != std::string::npos);
  CHECK(table.find("2x2") != std::string::npos);
  CHECK(table.find("1.250") != std::string::npos);
  CHECK(table.find("12.50") != std::string::npos);
  CHECK(table.find("0.1250") != std::string::npos);
}

TEST_CASE("Bench records round trip through csv exactly") {
  std::vector<BenchRecord> records(3);
  records[0] = {20.0, "none", -1, 0.1, 1.0 / 3.0, 0.07142857142857142};
  records[1] = {40.0, "2x2", 1, 1e-17, 123456789.123456789, 0.0};
  records[2] = {160.0, "2x2x2", 0, 3.5, 0.1, 1.5};
  const std::string csv = ToCsv(records);
  const std::vector<BenchRecord> parsed = FromCsv(csv);
  REQUIRE(parsed.size() == records.size());
  for (size_t i = 0; i < records.size(); ++i) CHECK(parsed[i] == records[i]);
  // Serialization itself is stable.
  CHECK(ToCsv(parsed) == csv);
}

TEST_CASE("FromCsv rejects malformed input") {
  CHECK_THROWS_AS((void)FromCsv(""), DataError);
  CHECK_THROWS_AS((void)FromCsv("only,three,columns\n"), DataError);
  const std::string header =
      "frame_rate_ms,factors,start_layer,wall_ms_per_utt,modeled_mflops,wer\n";
  CHECK_THROWS_AS((void)FromCsv(header + "20,none,-1,0.1\n"), DataError);
  CHECK_THROWS_AS((void)FromCsv(header + "soup,none,-1,0.1,1.0,0.0\n"),
                  DataError);
  // Header alone is a valid empty table.
  CHECK(FromCsv(header).empty());
}

EncoderConfig BenchEncoder(std::vector<PoolingStep> pooling) {
  EncoderConfig cfg;
  cfg.input_dim = 8;
  cfg.num_layers = 2;
  cfg.model_dim = 8;
  cfg.num_heads = 2;
  cfg.ffn_multiplier = 2;
  cfg.conv_kernel_size = 3;
  cfg.attention_window = -1;
  cfg.frontend_strides = {{2, 2}};
  cfg.pooling_schedule = std::move(pooling);
  cfg.seed = 11;
  return cfg;
}

TEST_CASE("RunBench sweeps configs and sorts by frame rate") {
  SynthTaskConfig synth;
  synth.alphabet_size = 4;
  synth.min_tokens = 2;
  synth.max_tokens = 3;
  synth.min_frames_per_token = 6;
  synth.max_frames_per_token = 8;
  synth.feature_dim = 8;
  synth.seed = 21;
  const std::vector<UtteranceRecord> records = GenerateSynthetic(synth, 4);
  const Vocabulary vocab = SynthVocabulary(synth);

  // Listed coarse-first on purpose: the result must come back fine-first.
  const std::vector<EncoderConfig> sweep = {
      BenchEncoder({{0, 2}, {1, 2}}), BenchEncoder({})};
  BenchOptions options;
  options.repetitions = 3;
  options.cost_input_frames = 64;

  const std::vector<BenchRecord> out = RunBench(sweep, records, vocab, options);
  REQUIRE(out.size() == 2);
  CHECK(out[0].frame_rate_ms == doctest::Approx(20.0));
  CHECK(out[0].factors == "none");
  CHECK(out[0].start_layer == -1);
  CHECK(out[1].frame_rate_ms == doctest::Approx(80.0));
  CHECK(out[1].factors == "2x2");
  CHECK(out[1].start_layer == 0);
  for (const BenchRecord& rec : out) {
    CHECK(rec.wall_ms_per_utt > 0.0);
    CHECK(rec.wer >= 0.0);
  }
  // More reduction means a cheaper modeled encoder.
  CHECK(out[1].modeled_mflops < out[0].modeled_mflops);

  // WER comes from a deterministic decode, so a rerun reproduces it.
  const std::vector<BenchRecord> again =
      RunBench(sweep, records, vocab, options);
  REQUIRE(again.size() == out.size());
  for (size_t i = 0; i < out.size(); ++i) {
    CHECK(again[i].wer == out[i].wer);
    CHECK(again[i].modeled_mflops == out[i].modeled_mflops);
    CHECK(again[i].frame_rate_ms == out[i].frame_rate_ms);
  }
}

TEST_CASE("RunBench validates its inputs") {
  SynthTaskConfig synth;
  synth.alphabet_size = 4;
  synth.feature_dim = 8;
  synth.seed = 22;
  const std::vector<UtteranceRecord> records = GenerateSynthetic(synth, 2);
  const Vocabulary vocab = SynthVocabulary(synth);
  const std::vector<EncoderConfig> sweep = {BenchEncoder({})};

  BenchOptions too_few;
  too_few.repetitions = 2;
  CHECK_THROWS_AS((void)RunBench(sweep, records, vocab, too_few), ConfigError);

  BenchOptions options;
  CHECK_THROWS_AS(
      (void)RunBench(sweep, std::vector<UtteranceRecord>{}, vocab, options),
      DataError);
}

}  // namespace
}  // namespace latkit
