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
#include <chrono>
#include <cstdio>
#include <sstream>

#include "latkit/ctc.h"
#include "latkit/error.h"

namespace latkit {
namespace {

// Levenshtein DP cell: minimum edit cost, and among minimum-cost paths the
// maximum number of diagonal moves. Preferring diagonal (substitution)
// globally rather than per-cell keeps the S/I/D decomposition canonical:
// a per-cell preference can pick alignments whose counts change when ref
// and hyp are swapped.
struct Cell {
  int cost = 0;
  int diag = 0;
};

std::string FormatDouble(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

double Median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string FactorsLabel(const EncoderConfig& cfg) {
  if (cfg.pooling_schedule.empty()) return "none";
  std::string label;
  for (size_t i = 0; i < cfg.pooling_schedule.size(); ++i) {
    if (i > 0) label.push_back('x');
    label += std::to_string(cfg.pooling_schedule[i].stride);
  }
  return label;
}

TokenSequence StripReserved(const TokenSequence& tokens) {
  TokenSequence out;
  for (int id : tokens) {
    if (id != kBlankId && id != kSosId) out.push_back(id);
  }
  return out;
}

std::vector<std::string> SplitFields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double ParseCsvDouble(const std::string& field) {
  size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &pos);
  } catch (const std::exception&) {
    throw DataError("bench csv: bad numeric field '" + field + "'");
  }
  if (pos != field.size()) {
    throw DataError("bench csv: trailing characters in '" + field + "'");
  }
  return v;
}

}  // namespace

std::vector<std::string> SplitWords(const std::string& text) {
  std::vector<std::string> words;
  std::istringstream in(text);
  std::string word;
  while (in >> word) words.push_back(word);
  return words;
}

WerBreakdown Wer(std::span<const std::string> reference,
                 std::span<const std::string> hypothesis) {
  if (reference.empty()) throw DataError("wer: empty reference");
  const int rows = static_cast<int>(reference.size());
  const int cols = static_cast<int>(hypothesis.size());
  std::vector<std::vector<Cell>> dp(
      static_cast<size_t>(rows) + 1,
      std::vector<Cell>(static_cast<size_t>(cols) + 1));
  for (int i = 1; i <= rows; ++i) dp[i][0] = {i, 0};
  for (int j = 1; j <= cols; ++j) dp[0][j] = {j, 0};
  for (int i = 1; i <= rows; ++i) {
    for (int j = 1; j <= cols; ++j) {
      const int sub = reference[i - 1] == hypothesis[j - 1] ? 0 : 1;
      const Cell diag{dp[i - 1][j - 1].cost + sub, dp[i - 1][j - 1].diag + 1};
      const Cell del{dp[i - 1][j].cost + 1, dp[i - 1][j].diag};
      const Cell ins{dp[i][j - 1].cost + 1, dp[i][j - 1].diag};
      Cell best = diag;
      for (const Cell& c : {del, ins}) {
        if (c.cost < best.cost || (c.cost == best.cost && c.diag > best.diag)) {
          best = c;
        }
      }
      dp[i][j] = best;
    }
  }
  const int dist = dp[rows][cols].cost;
  const int diag = dp[rows][cols].diag;
  WerBreakdown out;
  // Diagonal moves split into matches and substitutions; the remaining row
  // and column steps are deletions and insertions.
  out.substitutions = dist - rows - cols + 2 * diag;
  out.deletions = rows - diag;
  out.insertions = cols - diag;
  out.reference_length = rows;
  out.rate = static_cast<double>(dist) / rows;
  return out;
}

int EditDistance(std::span<const int> a, std::span<const int> b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= b.size(); ++j) {
      const int sub = a[i - 1] == b[j - 1] ? 0 : 1;
      cur[j] = std::min({prev[j - 1] + sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::vector<BenchRecord> RunBench(std::span<const EncoderConfig> sweep,
                                  std::span<const UtteranceRecord> records,
                                  const Vocabulary& vocab,
                                  const BenchOptions& options) {
  if (records.empty()) throw DataError("bench: dataset must be non-empty");
  if (options.repetitions < 3) {
    throw ConfigError("bench: need at least 3 repetitions");
  }
  using Clock = std::chrono::steady_clock;

  std::vector<BenchRecord> out;
  for (const EncoderConfig& cfg : sweep) {
    cfg.Validate();
    const EncoderParams params = InitEncoderParams(cfg);
    const CtcHead head =
        InitCtcHead(vocab.num_pieces(), cfg.model_dim, options.head_seed);

    auto pass = [&](bool score) {
      int errors = 0;
      int ref_words = 0;
      double frame_ms = 10.0;
      for (const UtteranceRecord& rec : records) {
        FeatureSequence feat{rec.features, frame_ms};
        const EncoderOutput enc = Encode(feat, cfg, params);
        const CtcPosteriorGrid grid = HeadGrid(head, enc.embeddings);
        const TokenSequence hyp = GreedyDecode(grid);
        if (score) {
          const std::string text = vocab.Detokenize(StripReserved(hyp));
          const std::vector<std::string> ref = SplitWords(rec.transcript);
          const std::vector<std::string> got = SplitWords(text);
          const WerBreakdown wb = Wer(ref, got);
          errors += wb.errors();
          ref_words += wb.reference_length;
        }
      }
      return std::pair<int, int>(errors, ref_words);
    };

    // Warm-up pass, discarded; it also computes the deterministic WER.
    const auto [errors, ref_words] = pass(/*score=*/true);
    std::vector<double> walls;
    walls.reserve(static_cast<size_t>(options.repetitions));
    for (int rep = 0; rep < options.repetitions; ++rep) {
      const auto start = Clock::now();
      pass(/*score=*/false);
      const auto stop = Clock::now();
      walls.push_back(
          std::chrono::duration<double, std::milli>(stop - start).count());
    }

    BenchRecord rec;
    rec.frame_rate_ms = 10.0 * cfg.ReductionFactor();
    rec.factors = FactorsLabel(cfg);
    rec.start_layer =
        cfg.pooling_schedule.empty() ? -1 : cfg.pooling_schedule.front().layer;
    rec.wall_ms_per_utt = Median(walls) / static_cast<double>(records.size());
    rec.modeled_mflops = ModeledCost(cfg, options.cost_input_frames).total / 1e6;
    rec.wer = ref_words > 0 ? static_cast<double>(errors) / ref_words : 0.0;
    out.push_back(std::move(rec));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const BenchRecord& a, const BenchRecord& b) {
                     return a.frame_rate_ms < b.frame_rate_ms;
                   });
  return out;
}

std::string RenderTable(std::span<const BenchRecord> records) {
  const std::vector<std::string> headers = {"frame_rate_ms", "factors",
                                            "start_layer",   "wall_ms_per_utt",
                                            "modeled_mflops", "wer"};
  std::vector<std::vector<std::string>> rows;
  for (const BenchRecord& r : records) {
    rows.push_back({FormatDouble("%.0f", r.frame_rate_ms), r.factors,
                    std::to_string(r.start_layer),
                    FormatDouble("%.3f", r.wall_ms_per_utt),
                    FormatDouble("%.2f", r.modeled_mflops),
                    FormatDouble("%.4f", r.wer)});
  }
  std::vector<size_t> width(headers.size());
  for (size_t c = 0; c < headers.size(); ++c) width[c] = headers[c].size();
  for (const auto& row : rows) {
    for (size_t c = 0; c < row.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out << " | ";
      out << row[c] << std::string(width[c] - row[c].size(), ' ');
    }
    out << "\n";
  };
  emit(headers);
  for (size_t c = 0; c < headers.size(); ++c) {
    if (c > 0) out << "-+-";
    out << std::string(width[c], '-');
  }
  out << "\n";
  for (const auto& row : rows) emit(row);
  return out.str();
}

std::string ToCsv(std::span<const BenchRecord> records) {
  std::ostringstream out;
  out << "frame_rate_ms,factors,start_layer,wall_ms_per_utt,modeled_mflops,"
         "wer\n";
  for (const BenchRecord& r : records) {
    out << FormatDouble("%.17g", r.frame_rate_ms) << ',' << r.factors << ','
        << r.start_layer << ',' << FormatDouble("%.17g", r.wall_ms_per_utt)
        << ',' << FormatDouble("%.17g", r.modeled_mflops) << ','
        << FormatDouble("%.17g", r.wer) << "\n";
  }
  return out.str();
}

std::vector<BenchRecord> FromCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("bench csv: empty input");
  if (SplitFields(line).size() != 6) {
    throw DataError("bench csv: expected 6 header columns");
  }
  std::vector<BenchRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = SplitFields(line);
    if (fields.size() != 6) throw DataError("bench csv: expected 6 columns");
    BenchRecord r;
    r.frame_rate_ms = ParseCsvDouble(fields[0]);
    r.factors = fields[1];
    r.start_layer = static_cast<int>(ParseCsvDouble(fields[2]));
    r.wall_ms_per_utt = ParseCsvDouble(fields[3]);
    r.modeled_mflops = ParseCsvDouble(fields[4]);
    r.wer = ParseCsvDouble(fields[5]);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace latkit
