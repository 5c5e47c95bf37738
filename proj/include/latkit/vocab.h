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

#ifndef LATKIT_VOCAB_H_
#define LATKIT_VOCAB_H_

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace latkit {

// Token ids ("piece ids") index the vocabulary piece list directly:
// id 0 is the blank <b>, id 1 is the start symbol <s>, real pieces follow.
// Vectors over the non-blank label space (HAT label distributions, LM
// outputs, prediction-network tables) have length num_labels() and are
// indexed by piece_id - 1; see ToLabelIndex / ToPieceId.
using TokenSequence = std::vector<int>;

inline constexpr int kBlankId = 0;
inline constexpr int kSosId = 1;

inline int ToLabelIndex(int piece_id) { return piece_id - 1; }
inline int ToPieceId(int label_index) { return label_index + 1; }

// Word-piece inventory built by greedy pair merging. Immutable after build.
class Vocabulary {
 public:
  // Learns a vocabulary from raw text lines. Spaces are mapped to a visible
  // marker character; merging then proceeds BPE-style over the character
  // stream until target_size pieces exist or no adjacent pair remains.
  // Merge ties are broken by lexicographic order of the merged string.
  static Vocabulary Build(const std::vector<std::string>& corpus,
                          int target_size);

  // Wraps an explicit piece list (reserved symbols prepended). Test helper
  // and synthetic-task constructor.
  static Vocabulary FromPieces(const std::vector<std::string>& pieces);

  static Vocabulary Load(const std::string& path);
  void Save(const std::string& path) const;

  // Piece count including the two reserved symbols.
  int num_pieces() const { return static_cast<int>(pieces_.size()); }
  // |V|: every piece except blank (sos included; it owns label index 0 so
  // the prediction network can embed it, but decoders never emit it).
  int num_labels() const { return num_pieces() - 1; }
  const std::string& piece(int id) const { return pieces_.at(id); }

  // Greedy longest-match segmentation. Reserved pieces never match text.
  // Throws DataError naming the offending character and byte offset when
  // text is not covered by the piece alphabet.
  TokenSequence Tokenize(const std::string& text) const;

  // Inverse of Tokenize on covered text. A leading sos is stripped; blank
  // or out-of-range ids raise DataError.
  std::string Detokenize(std::span<const int> ids) const;

 private:
  Vocabulary() = default;
  void Index();

  std::vector<std::string> pieces_;
  std::unordered_map<std::string, int> piece_to_id_;
  size_t max_piece_bytes_ = 0;
};

}  // namespace latkit

#endif  // LATKIT_VOCAB_H_
