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
#include <fstream>
#include <sstream>

#include "latkit/error.h"
#include "latkit/numerics.h"

namespace latkit {
namespace {

constexpr char kSeparator[] = " \xe2\x96\xb8 ";  // " ▸ "
constexpr char kEmptyContext[] = "-";

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void CheckPrefixIds(std::span<const int> prefix, int num_labels) {
  for (int id : prefix) {
    if (id <= kBlankId || ToLabelIndex(id) >= num_labels) {
      throw DataError("lm: token id " + std::to_string(id) + " out of range");
    }
  }
}

}  // namespace

MixedCorpus::MixedCorpus(std::vector<TokenSequence> a,
                         std::vector<TokenSequence> b, double ratio,
                         uint64_t seed)
    : a_(std::move(a)), b_(std::move(b)), ratio_(ratio), rng_(seed) {
  if (ratio_ < 0.0 || ratio_ > 1.0) {
    throw ConfigError("mix_corpora: ratio must be in [0, 1]");
  }
  if (ratio_ > 0.0 && a_.empty()) {
    throw DataError("mix_corpora: source a is empty but has positive ratio");
  }
  if (ratio_ < 1.0 && b_.empty()) {
    throw DataError("mix_corpora: source b is empty but has positive ratio");
  }
}

const TokenSequence& MixedCorpus::Next() {
  std::bernoulli_distribution pick_a(ratio_);
  if (pick_a(rng_)) {
    const TokenSequence& s = a_[next_a_];
    next_a_ = (next_a_ + 1) % a_.size();
    return s;
  }
  const TokenSequence& s = b_[next_b_];
  next_b_ = (next_b_ + 1) % b_.size();
  return s;
}

std::vector<TokenSequence> MixedCorpus::Draw(int count) {
  std::vector<TokenSequence> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(Next());
  return out;
}

MixedCorpus MixCorpora(std::vector<TokenSequence> a,
                       std::vector<TokenSequence> b, double ratio,
                       uint64_t seed) {
  return MixedCorpus(std::move(a), std::move(b), ratio, seed);
}

NGramLm NGramLm::Train(std::span<const TokenSequence> corpus, int order,
                       int num_labels, double lambda) {
  if (order < 1) throw ConfigError("train_lm: order must be >= 1");
  if (num_labels < 1) throw ConfigError("train_lm: num_labels must be >= 1");
  if (lambda < 0.0 || lambda > 1.0) {
    throw ConfigError("train_lm: lambda must be in [0, 1]");
  }
  if (corpus.empty()) throw DataError("train_lm: empty corpus");

  // counts[c][ctx][label]: occurrences of label after the length-c context.
  std::vector<std::map<TokenSequence, std::vector<double>>> counts(order);
  for (const TokenSequence& seq : corpus) {
    CheckPrefixIds(seq, num_labels);
    TokenSequence padded(order - 1, kSosId);
    padded.insert(padded.end(), seq.begin(), seq.end());
    for (size_t i = order - 1; i < padded.size(); ++i) {
      const int label = ToLabelIndex(padded[i]);
      for (int c = 0; c < order; ++c) {
        TokenSequence ctx(padded.begin() + i - c, padded.begin() + i);
        auto& row = counts[c][ctx];
        if (row.empty()) row.assign(num_labels, 0.0);
        row[label] += 1.0;
      }
    }
  }
  if (counts[0].empty()) throw DataError("train_lm: corpus has no tokens");

  NGramLm lm;
  lm.order_ = order;
  lm.num_labels_ = num_labels;
  lm.lambda_ = lambda;
  lm.tables_.resize(order);

  // Interpolate bottom-up; each seen context's shorter suffix is seen too,
  // so the lower-order lookup always hits.
  const double uniform = 1.0 / num_labels;
  for (int c = 0; c < order; ++c) {
    for (const auto& [ctx, row] : counts[c]) {
      double total = 0.0;
      for (double v : row) total += v;
      std::vector<double> probs(num_labels);
      for (int k = 0; k < num_labels; ++k) {
        double lower = uniform;
        if (c > 0) {
          const TokenSequence suffix(ctx.begin() + 1, ctx.end());
          lower = std::pow(10.0, lm.tables_[c - 1].at(suffix)[k]);
        }
        probs[k] = lambda * (row[k] / total) + (1.0 - lambda) * lower;
      }
      auto& out = lm.tables_[c][ctx];
      out.resize(num_labels);
      for (int k = 0; k < num_labels; ++k) out[k] = std::log10(probs[k]);
    }
  }
  return lm;
}

NGramLm NGramLm::Train(MixedCorpus& corpus, int draws, int order,
                       int num_labels, double lambda) {
  const std::vector<TokenSequence> drawn = corpus.Draw(draws);
  return Train(drawn, order, num_labels, lambda);
}

std::vector<double> NGramLm::NextLogProbs(std::span<const int> prefix) const {
  CheckPrefixIds(prefix, num_labels_);
  TokenSequence padded(order_ - 1, kSosId);
  padded.insert(padded.end(), prefix.begin(), prefix.end());
  for (int c = order_ - 1; c >= 0; --c) {
    const TokenSequence ctx(padded.end() - c, padded.end());
    const auto it = tables_[c].find(ctx);
    if (it == tables_[c].end()) continue;
    std::vector<double> nats(num_labels_);
    for (int k = 0; k < num_labels_; ++k) nats[k] = it->second[k] * M_LN10;
    return nats;
  }
  // Unreachable: the empty context exists whenever training saw a token.
  throw DataError("lm: no context table (untrained model)");
}

std::string NGramLm::Serialize() const {
  std::ostringstream out;
  out << "latkit-ngram 1\n";
  out << "order " << order_ << "\n";
  out << "labels " << num_labels_ << "\n";
  out << "lambda " << FormatDouble(lambda_) << "\n";
  size_t rows = 0;
  for (const auto& table : tables_) rows += table.size();
  out << "rows " << rows * num_labels_ << "\n";
  for (const auto& table : tables_) {
    for (const auto& [ctx, row] : table) {
      std::string ctx_text;
      if (ctx.empty()) {
        ctx_text = kEmptyContext;
      } else {
        for (size_t i = 0; i < ctx.size(); ++i) {
          if (i > 0) ctx_text += ' ';
          ctx_text += std::to_string(ctx[i]);
        }
      }
      for (int k = 0; k < num_labels_; ++k) {
        out << ctx_text << kSeparator << ToPieceId(k) << kSeparator
            << FormatDouble(row[k]) << "\n";
      }
    }
  }
  return out.str();
}

NGramLm NGramLm::Parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  const auto next_line = [&](const char* what) {
    if (!std::getline(in, line)) {
      throw DataError(std::string("lm parse: missing ") + what);
    }
    return line;
  };
  if (next_line("magic") != "latkit-ngram 1") {
    throw DataError("lm parse: bad magic line");
  }

  NGramLm lm;
  long expected_rows = 0;
  {
    std::istringstream s(next_line("order"));
    std::string key;
    if (!(s >> key >> lm.order_) || key != "order" || lm.order_ < 1) {
      throw DataError("lm parse: bad order line");
    }
  }
  {
    std::istringstream s(next_line("labels"));
    std::string key;
    if (!(s >> key >> lm.num_labels_) || key != "labels" ||
        lm.num_labels_ < 1) {
      throw DataError("lm parse: bad labels line");
    }
  }
  {
    std::istringstream s(next_line("lambda"));
    std::string key;
    if (!(s >> key >> lm.lambda_) || key != "lambda") {
      throw DataError("lm parse: bad lambda line");
    }
  }
  {
    std::istringstream s(next_line("rows"));
    std::string key;
    if (!(s >> key >> expected_rows) || key != "rows") {
      throw DataError("lm parse: bad rows line");
    }
  }

  lm.tables_.resize(lm.order_);
  const std::string sep = kSeparator;
  long seen = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const size_t p1 = line.find(sep);
    const size_t p2 = p1 == std::string::npos
                          ? std::string::npos
                          : line.find(sep, p1 + sep.size());
    if (p2 == std::string::npos) {
      throw DataError("lm parse: malformed row: " + line);
    }
    const std::string ctx_text = line.substr(0, p1);
    const std::string tok_text =
        line.substr(p1 + sep.size(), p2 - p1 - sep.size());
    const std::string prob_text = line.substr(p2 + sep.size());

    TokenSequence ctx;
    if (ctx_text != kEmptyContext) {
      std::istringstream cs(ctx_text);
      int id;
      while (cs >> id) ctx.push_back(id);
    }
    if (static_cast<int>(ctx.size()) >= lm.order_) {
      throw DataError("lm parse: context longer than order-1: " + line);
    }
    const int tok = std::stoi(tok_text);
    const int label = ToLabelIndex(tok);
    if (label < 0 || label >= lm.num_labels_) {
      throw DataError("lm parse: token id out of range: " + line);
    }
    auto& row = lm.tables_[ctx.size()][ctx];
    if (row.empty()) row.assign(lm.num_labels_, kLogZero);
    row[label] = std::strtod(prob_text.c_str(), nullptr);
    ++seen;
  }
  if (seen != expected_rows) {
    throw DataError("lm parse: row count mismatch");
  }
  if (lm.tables_[0].empty()) throw DataError("lm parse: no unigram table");
  return lm;
}

void NGramLm::Save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write lm file: " + path);
  out << Serialize();
}

NGramLm NGramLm::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lm file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return Parse(buf.str());
}

}  // namespace latkit
