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

#include "latkit/vocab.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "latkit/error.h"

namespace latkit {
namespace {

bool HasPiece(const Vocabulary& v, const std::string& s) {
  for (int i = 0; i < v.num_pieces(); ++i) {
    if (v.piece(i) == s) return true;
  }
  return false;
}

TEST_CASE("Build on abab learns the pair merges") {
  const Vocabulary v = Vocabulary::Build({"abab"}, 6);
  CHECK(v.num_pieces() == 6);
  CHECK(v.piece(kBlankId) == "<b>");
  CHECK(v.piece(kSosId) == "<s>");
  CHECK(HasPiece(v, "a"));
  CHECK(HasPiece(v, "b"));
  CHECK(HasPiece(v, "ab"));
  // Second merge joins the two "ab" units; frozen deterministic output.
  CHECK(HasPiece(v, "abab"));
}

TEST_CASE("Build with alphabet-only budget keeps just the characters") {
  const Vocabulary v = Vocabulary::Build({"a"}, 3);
  REQUIRE(v.num_pieces() == 3);
  CHECK(v.piece(0) == "<b>");
  CHECK(v.piece(1) == "<s>");
  CHECK(v.piece(2) == "a");
  CHECK(v.num_labels() == 2);
}

TEST_CASE("Build is deterministic") {
  const std::vector<std::string> corpus = {"the cat", "the hat", "that cat"};
  const Vocabulary a = Vocabulary::Build(corpus, 24);
  const Vocabulary b = Vocabulary::Build(corpus, 24);
  REQUIRE(a.num_pieces() == b.num_pieces());
  for (int i = 0; i < a.num_pieces(); ++i) {
    CHECK(a.piece(i) == b.piece(i));
  }
}

TEST_CASE("Build rejects an empty corpus and an undersized target") {
  CHECK_THROWS_AS(Vocabulary::Build({}, 8), DataError);
  // "ab" needs 2 chars + 2 reserved symbols; 3 cannot hold the alphabet.
  // The undersized target is a data error because the bound depends on the
  // corpus alphabet, not on configuration alone.
  CHECK_THROWS_AS(Vocabulary::Build({"ab"}, 3), DataError);
}

TEST_CASE("Build hits requested sizes of interest") {
  std::mt19937_64 rng(19);
  std::uniform_int_distribution<int> letter(0, 9);
  std::uniform_int_distribution<int> len(3, 20);
  std::vector<std::string> corpus;
  for (int i = 0; i < 400; ++i) {
    std::string line;
    const int n = len(rng);
    for (int j = 0; j < n; ++j) {
      line += static_cast<char>('a' + letter(rng));
      if (j % 5 == 4) line += ' ';
    }
    corpus.push_back(line);
  }
  for (int target : {64, 256}) {
    const Vocabulary v = Vocabulary::Build(corpus, target);
    CHECK(v.num_pieces() == target);
    // Round trip through the learned pieces.
    for (int i = 0; i < 20; ++i) {
      const std::string& text = corpus[static_cast<size_t>(i)];
      CHECK(v.Detokenize(v.Tokenize(text)) == text);
    }
  }
}

TEST_CASE("Tokenize of empty text is empty") {
  const Vocabulary v = Vocabulary::FromPieces({"a", "b"});
  CHECK(v.Tokenize("").empty());
}

TEST_CASE("Tokenize prefers the longest match") {
  const Vocabulary v = Vocabulary::FromPieces({"a", "b", "ab"});
  const TokenSequence ids = v.Tokenize("ab");
  REQUIRE(ids.size() == 1);
  CHECK(v.piece(ids[0]) == "ab");
  // "aab" must fall back to "a" + "ab" under greedy left-to-right matching.
  const TokenSequence aab = v.Tokenize("aab");
  REQUIRE(aab.size() == 2);
  CHECK(v.piece(aab[0]) == "a");
  CHECK(v.piece(aab[1]) == "ab");
}

TEST_CASE("Tokenize never emits reserved ids") {
  const Vocabulary v = Vocabulary::FromPieces({"a", "b"});
  const TokenSequence ids = v.Tokenize("abba");
  for (int id : ids) {
    CHECK(id != kBlankId);
    CHECK(id != kSosId);
    CHECK(id >= 2);
  }
}

TEST_CASE("Tokenize names the unknown character and offset") {
  const Vocabulary v = Vocabulary::FromPieces({"a", "b"});
  try {
    (void)v.Tokenize("axb");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find('x') != std::string::npos);
    CHECK(msg.find('1') != std::string::npos);
  }
}

TEST_CASE("Round trip holds on 1000 random strings") {
  const Vocabulary v = Vocabulary::Build(
      {"abc cab bac", "aa bb cc", "cba abc"}, 16);
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> letter(0, 3);
  std::uniform_int_distribution<int> len(0, 24);
  for (int trial = 0; trial < 1000; ++trial) {
    std::string text;
    const int n = len(rng);
    for (int j = 0; j < n; ++j) {
      const int c = letter(rng);
      text += c == 3 ? ' ' : static_cast<char>('a' + c);
    }
    const TokenSequence ids = v.Tokenize(text);
    CHECK(v.Detokenize(ids) == text);
    CHECK(std::none_of(ids.begin(), ids.end(),
                       [](int id) { return id == kBlankId; }));
  }
}

TEST_CASE("Detokenize handles edge forms") {
  const Vocabulary v = Vocabulary::FromPieces({"a", "b"});
  CHECK(v.Detokenize(TokenSequence{}) == "");
  // Leading sos is stripped.
  const TokenSequence with_sos = {kSosId, 2, 3};
  CHECK(v.Detokenize(with_sos) == "ab");
  // Blank and out-of-range ids are malformed input.
  const TokenSequence with_blank = {2, kBlankId};
  CHECK_THROWS_AS((void)v.Detokenize(with_blank), DataError);
  const TokenSequence out_of_range = {2, 99};
  CHECK_THROWS_AS((void)v.Detokenize(out_of_range), DataError);
}

TEST_CASE("Label index mapping is the fixed off-by-one") {
  CHECK(ToLabelIndex(kSosId) == 0);
  CHECK(ToLabelIndex(2) == 1);
  CHECK(ToPieceId(0) == kSosId);
  CHECK(ToPieceId(1) == 2);
  const Vocabulary v = Vocabulary::FromPieces({"a", "b", "c"});
  CHECK(v.num_pieces() == 5);
  CHECK(v.num_labels() == 4);
}

TEST_CASE("Save writes one piece per line with fixed reserved rows") {
  const Vocabulary v = Vocabulary::FromPieces({"a", "ab"});
  const std::string path =
      (std::filesystem::temp_directory_path() / "latkit_vocab_test.txt")
          .string();
  v.Save(path);
  std::ifstream in(path);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "<b>");
  CHECK(lines[1] == "<s>");
  CHECK(lines[2] == "a");
  CHECK(lines[3] == "ab");

  const Vocabulary loaded = Vocabulary::Load(path);
  REQUIRE(loaded.num_pieces() == v.num_pieces());
  for (int i = 0; i < v.num_pieces(); ++i) {
    CHECK(loaded.piece(i) == v.piece(i));
  }
  std::remove(path.c_str());
}

TEST_CASE("Load rejects files without the reserved header") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "latkit_vocab_bad.txt")
          .string();
  std::ofstream(path) << "a\nb\n";
  CHECK_THROWS_AS((void)Vocabulary::Load(path), DataError);
  std::remove(path.c_str());
}

}  // namespace
}  // namespace latkit
