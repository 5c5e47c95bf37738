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

#include "latkit/lm.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <vector>

#include "doctest.h"
#include "latkit/error.h"
#include "latkit/numerics.h"

namespace latkit {
namespace {

std::vector<TokenSequence> RepeatedSeq(const TokenSequence& y, int copies) {
  return std::vector<TokenSequence>(static_cast<size_t>(copies), y);
}

TEST_CASE("MixedCorpus with ratio one draws only from source a") {
  MixedCorpus mix({{2}, {3}}, {{4}}, 1.0, 9);
  for (int i = 0; i < 50; ++i) {
    const TokenSequence& y = mix.Next();
    CHECK((y == TokenSequence{2} || y == TokenSequence{3}));
  }
  MixedCorpus only_b({{2}}, {{4}}, 0.0, 9);
  for (int i = 0; i < 20; ++i) {
    CHECK(only_b.Next() == TokenSequence{4});
  }
}

TEST_CASE("MixedCorpus half ratio lands within one percent over 1e4 draws") {
  MixedCorpus mix({{2}}, {{3}}, 0.5, 17);
  int from_a = 0;
  for (int i = 0; i < 10000; ++i) {
    if (mix.Next() == TokenSequence{2}) ++from_a;
  }
  const double frac = from_a / 10000.0;
  CHECK(frac >= 0.49);
  CHECK(frac <= 0.51);
}

TEST_CASE("MixedCorpus is deterministic under a fixed seed") {
  MixedCorpus m1({{2}, {3}}, {{4}, {5}}, 0.4, 33);
  MixedCorpus m2({{2}, {3}}, {{4}, {5}}, 0.4, 33);
  const std::vector<TokenSequence> a = m1.Draw(200);
  const std::vector<TokenSequence> b = m2.Draw(200);
  CHECK(a == b);
}

TEST_CASE("MixedCorpus rejects an empty required source") {
  CHECK_THROWS_AS(MixedCorpus({}, {{4}}, 0.5, 1), DataError);
  CHECK_THROWS_AS(MixedCorpus({{2}}, {}, 0.5, 1), DataError);
  CHECK_NOTHROW(MixedCorpus({{2}}, {}, 1.0, 1));
  CHECK_THROWS_AS(MixCorpora({{2}}, {{3}}, 1.5, 1), ConfigError);
}

TEST_CASE("Order two training smooths a point mass toward the unigram") {
  // One repeated sequence [2,3,2,3]; lambda 0.8; 4 labels.
  // Unigram: ML(2)=ML(3)=0.5; smoothed p1 = 0.8*ML + 0.2*(1/4).
  // Bigram after context [2]: ML(3|2)=1; p2 = 0.8*ML + 0.2*p1.
  const NGramLm lm = NGramLm::Train(RepeatedSeq({2, 3, 2, 3}, 3), 2, 4, 0.8);
  const TokenSequence ctx = {2};
  const std::vector<double> p = lm.NextLogProbs(ctx);
  REQUIRE(p.size() == 4);
  CHECK(std::exp(p[ToLabelIndex(3)]) == doctest::Approx(0.89).epsilon(1e-12));
  CHECK(std::exp(p[ToLabelIndex(2)]) == doctest::Approx(0.09).epsilon(1e-12));
  CHECK(std::exp(p[ToLabelIndex(1)]) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(std::exp(p[ToLabelIndex(4)]) == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("Order one is a context-free unigram") {
  const NGramLm lm =
      NGramLm::Train(RepeatedSeq({2, 2, 3}, 2), 1, 3, 0.8);
  const TokenSequence empty;
  const TokenSequence ctx1 = {3};
  const TokenSequence ctx2 = {2, 2, 3, 2};
  const std::vector<double> p0 = lm.NextLogProbs(empty);
  const std::vector<double> p1 = lm.NextLogProbs(ctx1);
  const std::vector<double> p2 = lm.NextLogProbs(ctx2);
  CHECK(p0 == p1);
  CHECK(p0 == p2);
  // ML(2) = 2/3, smoothed 0.8*2/3 + 0.2/3.
  CHECK(std::exp(p0[ToLabelIndex(2)]) ==
        doctest::Approx(0.8 * 2.0 / 3.0 + 0.2 / 3.0).epsilon(1e-12));
}

TEST_CASE("Next token distributions normalize at random contexts") {
  std::mt19937_64 rng(25);
  std::uniform_int_distribution<int> token(1, 6);
  std::uniform_int_distribution<int> len(3, 10);
  std::vector<TokenSequence> corpus;
  for (int i = 0; i < 50; ++i) {
    TokenSequence y(static_cast<size_t>(len(rng)));
    for (int& id : y) id = token(rng);
    corpus.push_back(y);
  }
  const NGramLm lm = NGramLm::Train(corpus, 3, 6, 0.7);
  std::uniform_int_distribution<int> ctx_len(0, 6);
  for (int trial = 0; trial < 100; ++trial) {
    TokenSequence prefix(static_cast<size_t>(ctx_len(rng)));
    for (int& id : prefix) id = token(rng);
    const std::vector<double> p = lm.NextLogProbs(prefix);
    CHECK(LogSumExp(p) == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("Context equivalence beyond order minus one tokens") {
  const NGramLm lm = NGramLm::Train(
      {{2, 3, 4}, {4, 3, 2}, {3, 3, 3}}, 3, 4, 0.8);
  const TokenSequence a = {2, 4, 3, 2};
  const TokenSequence b = {4, 4, 3, 2};  // same last two tokens
  CHECK(lm.NextLogProbs(a) == lm.NextLogProbs(b));
}

TEST_CASE("Empty prefix scores from the sos context") {
  const NGramLm lm = NGramLm::Train(RepeatedSeq({2, 3}, 4), 2, 3, 0.8);
  // Every training sequence starts with 2 after sos, so the sos context
  // concentrates on piece 2: 0.8*1 + 0.2*p1(2).
  const TokenSequence empty;
  const std::vector<double> p = lm.NextLogProbs(empty);
  const double p1_of_2 = 0.8 * 0.5 + 0.2 / 3.0;
  CHECK(std::exp(p[ToLabelIndex(2)]) ==
        doctest::Approx(0.8 + 0.2 * p1_of_2).epsilon(1e-12));
}

TEST_CASE("Score telescopes the incremental log probs") {
  const NGramLm lm = NGramLm::Train(
      {{2, 3, 2}, {3, 2, 3}, {2, 2, 3}}, 2, 3, 0.6);
  std::mt19937_64 rng(37);
  std::uniform_int_distribution<int> token(2, 3);
  for (int trial = 0; trial < 20; ++trial) {
    TokenSequence y(5);
    for (int& id : y) id = token(rng);
    double sum = 0.0;
    for (size_t u = 0; u < y.size(); ++u) {
      const std::span<const int> prefix(y.data(), u);
      sum += lm.NextLogProbs(prefix)[static_cast<size_t>(ToLabelIndex(y[u]))];
    }
    CHECK(lm.Score(y) == doctest::Approx(sum).epsilon(1e-12));
  }
  const TokenSequence empty;
  CHECK(lm.Score(empty) == 0.0);
}

TEST_CASE("Unsmoothed bigram reproduces count ratios") {
  // Corpus: [2,3], [2,2]. Contexts: sos->2 twice; 2->3 once; 2->2 once.
  const NGramLm lm = NGramLm::Train({{2, 3}, {2, 2}}, 2, 3, 1.0);
  const TokenSequence y = {2, 3};
  // P(2|sos) = 1, P(3|2) = 1/2.
  CHECK(lm.Score(y) == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  const TokenSequence yy = {2, 2};
  CHECK(lm.Score(yy) == doctest::Approx(std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("Training perplexity never exceeds the label count") {
  std::mt19937_64 rng(45);
  std::uniform_int_distribution<int> token(1, 5);
  std::vector<TokenSequence> corpus;
  for (int i = 0; i < 30; ++i) {
    TokenSequence y(6);
    for (int& id : y) id = token(rng);
    corpus.push_back(y);
  }
  const NGramLm lm = NGramLm::Train(corpus, 2, 5, 0.8);
  double total_logprob = 0.0;
  int total_tokens = 0;
  for (const TokenSequence& y : corpus) {
    total_logprob += lm.Score(y);
    total_tokens += static_cast<int>(y.size());
  }
  const double perplexity = std::exp(-total_logprob / total_tokens);
  CHECK(perplexity <= 5.0);
}

TEST_CASE("Serialization round trips bit exactly") {
  const NGramLm lm = NGramLm::Train(
      {{2, 3, 4, 2}, {4, 2, 3, 3}, {3, 4, 2, 2}}, 3, 4, 0.75);
  const std::string text = lm.Serialize();
  const NGramLm parsed = NGramLm::Parse(text);
  CHECK(parsed.order() == lm.order());
  CHECK(parsed.num_labels() == lm.num_labels());
  CHECK(parsed.lambda() == lm.lambda());
  CHECK(parsed.Serialize() == text);
  // Scores are bit identical, not merely close.
  std::mt19937_64 rng(55);
  std::uniform_int_distribution<int> token(1, 4);
  for (int trial = 0; trial < 20; ++trial) {
    TokenSequence y(4);
    for (int& id : y) id = token(rng);
    CHECK(parsed.Score(y) == lm.Score(y));
  }

  const std::string path =
      (std::filesystem::temp_directory_path() / "latkit_lm_test.txt")
          .string();
  lm.Save(path);
  const NGramLm loaded = NGramLm::Load(path);
  CHECK(loaded.Serialize() == text);
  std::remove(path.c_str());
}

TEST_CASE("Parse rejects malformed models") {
  CHECK_THROWS_AS((void)NGramLm::Parse("not an lm"), DataError);
  CHECK_THROWS_AS((void)NGramLm::Parse(""), DataError);
}

TEST_CASE("Training validates its arguments") {
  const std::vector<TokenSequence> corpus = {{2, 3}};
  CHECK_THROWS_AS((void)NGramLm::Train(corpus, 0, 3, 0.8), ConfigError);
  CHECK_THROWS_AS((void)NGramLm::Train(corpus, 2, 3, 1.5), ConfigError);
  CHECK_THROWS_AS(
      (void)NGramLm::Train(std::vector<TokenSequence>{}, 2, 3, 0.8),
      DataError);
  // Token outside the label space.
  const std::vector<TokenSequence> bad = {{9}};
  CHECK_THROWS_AS((void)NGramLm::Train(bad, 2, 3, 0.8), DataError);
}

TEST_CASE("Training from a mixed corpus is deterministic") {
  MixedCorpus m1({{2, 3}, {3, 2}}, {{4, 4}}, 0.5, 77);
  MixedCorpus m2({{2, 3}, {3, 2}}, {{4, 4}}, 0.5, 77);
  const NGramLm a = NGramLm::Train(m1, 100, 2, 4, 0.8);
  const NGramLm b = NGramLm::Train(m2, 100, 2, 4, 0.8);
  CHECK(a.Serialize() == b.Serialize());
}

}  // namespace
}  // namespace latkit
