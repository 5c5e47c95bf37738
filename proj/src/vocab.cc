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
#include <fstream>
#include <map>
#include <sstream>

#include "latkit/error.h"

namespace latkit {
namespace {

constexpr char kBlankPiece[] = "<b>";
constexpr char kSosPiece[] = "<s>";
// U+2581 LOWER ONE EIGHTH BLOCK, the conventional visible space marker.
constexpr char kSpaceMarker[] = "\xe2\x96\x81";

std::string MapSpaces(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (c == ' ') {
      out += kSpaceMarker;
    } else {
      out += c;
    }
  }
  return out;
}

std::string UnmapSpaces(const std::string& text) {
  std::string out;
  size_t i = 0;
  const std::string marker = kSpaceMarker;
  while (i < text.size()) {
    if (text.compare(i, marker.size(), marker) == 0) {
      out += ' ';
      i += marker.size();
    } else {
      out += text[i++];
    }
  }
  return out;
}

// Splits UTF-8 text into codepoint strings. Malformed bytes raise DataError
// with the byte offset.
std::vector<std::string> SplitCodepoints(const std::string& text) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < text.size()) {
    const unsigned char lead = static_cast<unsigned char>(text[i]);
    size_t len = 0;
    if (lead < 0x80) {
      len = 1;
    } else if ((lead >> 5) == 0x6) {
      len = 2;
    } else if ((lead >> 4) == 0xe) {
      len = 3;
    } else if ((lead >> 3) == 0x1e) {
      len = 4;
    } else {
      throw DataError("invalid UTF-8 lead byte at offset " +
                      std::to_string(i));
    }
    if (i + len > text.size()) {
      throw DataError("truncated UTF-8 sequence at offset " +
                      std::to_string(i));
    }
    for (size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(text[i + k]) >> 6) != 0x2) {
        throw DataError("invalid UTF-8 continuation at offset " +
                        std::to_string(i + k));
      }
    }
    out.push_back(text.substr(i, len));
    i += len;
  }
  return out;
}

}  // namespace

void Vocabulary::Index() {
  piece_to_id_.clear();
  max_piece_bytes_ = 0;
  for (size_t i = 0; i < pieces_.size(); ++i) {
    if (pieces_[i].empty()) {
      throw DataError("vocabulary piece " + std::to_string(i) + " is empty");
    }
    if (!piece_to_id_.emplace(pieces_[i], static_cast<int>(i)).second) {
      throw DataError("duplicate vocabulary piece: " + pieces_[i]);
    }
    max_piece_bytes_ = std::max(max_piece_bytes_, pieces_[i].size());
  }
}

Vocabulary Vocabulary::Build(const std::vector<std::string>& corpus,
                             int target_size) {
  if (corpus.empty()) throw DataError("build_vocab: empty corpus");

  // Each corpus line becomes a symbol sequence; merging operates on these.
  std::vector<std::vector<std::string>> lines;
  lines.reserve(corpus.size());
  std::map<std::string, int> alphabet;  // ordered for determinism
  for (const std::string& raw : corpus) {
    std::vector<std::string> cps = SplitCodepoints(MapSpaces(raw));
    for (const std::string& c : cps) ++alphabet[c];
    if (!cps.empty()) lines.push_back(std::move(cps));
  }
  if (alphabet.empty()) throw DataError("build_vocab: corpus has no symbols");

  const int base = 2 + static_cast<int>(alphabet.size());
  if (target_size < base) {
    throw DataError("build_vocab: target_size " + std::to_string(target_size) +
                    " below alphabet+reserved size " + std::to_string(base));
  }

  Vocabulary v;
  v.pieces_ = {kBlankPiece, kSosPiece};
  for (const auto& [cp, count] : alphabet) v.pieces_.push_back(cp);

  while (static_cast<int>(v.pieces_.size()) < target_size) {
    // Count adjacent pairs; the map key (merged string) is ordered, so the
    // max_element scan below resolves count ties toward the lexicographically
    // smallest merge.
    std::map<std::string, std::pair<int, std::pair<std::string, std::string>>>
        pairs;
    for (const auto& line : lines) {
      for (size_t i = 0; i + 1 < line.size(); ++i) {
        auto& slot = pairs[line[i] + line[i + 1]];
        ++slot.first;
        slot.second = {line[i], line[i + 1]};
      }
    }
    if (pairs.empty()) break;  // nothing left to merge
    auto best = pairs.begin();
    for (auto it = std::next(pairs.begin()); it != pairs.end(); ++it) {
      if (it->second.first > best->second.first) best = it;
    }
    const std::string merged = best->first;
    const auto [left, right] = best->second.second;
    v.pieces_.push_back(merged);
    for (auto& line : lines) {
      std::vector<std::string> next;
      next.reserve(line.size());
      for (size_t i = 0; i < line.size(); ++i) {
        if (i + 1 < line.size() && line[i] == left && line[i + 1] == right) {
          next.push_back(merged);
          ++i;
        } else {
          next.push_back(line[i]);
        }
      }
      line = std::move(next);
    }
  }
  v.Index();
  return v;
}

Vocabulary Vocabulary::FromPieces(const std::vector<std::string>& pieces) {
  Vocabulary v;
  v.pieces_ = {kBlankPiece, kSosPiece};
  v.pieces_.insert(v.pieces_.end(), pieces.begin(), pieces.end());
  v.Index();
  return v;
}

Vocabulary Vocabulary::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocabulary file: " + path);
  Vocabulary v;
  std::string line;
  while (std::getline(in, line)) v.pieces_.push_back(line);
  if (v.pieces_.size() < 2 || v.pieces_[kBlankId] != kBlankPiece ||
      v.pieces_[kSosId] != kSosPiece) {
    throw DataError("vocabulary file " + path +
                    " must start with reserved lines <b>, <s>");
  }
  v.Index();
  return v;
}

void Vocabulary::Save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write vocabulary file: " + path);
  for (const std::string& p : pieces_) out << p << '\n';
}

TokenSequence Vocabulary::Tokenize(const std::string& text) const {
  const std::string mapped = MapSpaces(text);
  TokenSequence out;
  size_t i = 0;
  while (i < mapped.size()) {
    int match = -1;
    size_t match_len = 0;
    const size_t limit = std::min(max_piece_bytes_, mapped.size() - i);
    for (size_t len = limit; len >= 1; --len) {
      auto it = piece_to_id_.find(mapped.substr(i, len));
      if (it != piece_to_id_.end() && it->second > kSosId) {
        match = it->second;
        match_len = len;
        break;
      }
    }
    if (match < 0) {
      // Report the original-text character; offsets are over the mapped
      // stream the tokenizer actually consumed.
      const std::string cp = SplitCodepoints(mapped.substr(i)).front();
      throw DataError("tokenize: unknown character '" + cp +
                      "' at byte offset " + std::to_string(i));
    }
    out.push_back(match);
    i += match_len;
  }
  return out;
}

std::string Vocabulary::Detokenize(std::span<const int> ids) const {
  std::string joined;
  for (size_t i = 0; i < ids.size(); ++i) {
    const int id = ids[i];
    if (id == kSosId && i == 0) continue;
    if (id <= kSosId || id >= num_pieces()) {
      throw DataError("detokenize: invalid token id " + std::to_string(id) +
                      " at position " + std::to_string(i));
    }
    joined += pieces_[id];
  }
  return UnmapSpaces(joined);
}

}  // namespace latkit
