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

// latkit command-line driver. Every verb reads one flat key=value config
// (--config) and writes artifacts to the configured paths. Exit codes:
// 1 usage, 2 config, 3 data, 4 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "latkit/config.h"
#include "latkit/ctc.h"
#include "latkit/dataset.h"
#include "latkit/error.h"
#include "latkit/eval.h"
#include "latkit/lm.h"
#include "latkit/oracle.h"
#include "latkit/train.h"
#include "latkit/transducer.h"

namespace latkit {
namespace {

namespace fs = std::filesystem;

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << text;
}

std::string OutPath(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.paths.out_dir);
  return (fs::path(cfg.paths.out_dir) / name).string();
}

std::string EncoderArtifact(const RunConfig& cfg) {
  return OutPath(cfg, "encoder.ltk");
}

TokenSequence StripReserved(const TokenSequence& tokens) {
  TokenSequence out;
  for (int id : tokens) {
    if (id != kBlankId && id != kSosId) out.push_back(id);
  }
  return out;
}

std::vector<TokenSequence> TokenizeTranscripts(
    const Vocabulary& vocab, const std::vector<UtteranceRecord>& records) {
  std::vector<TokenSequence> out;
  out.reserve(records.size());
  for (const UtteranceRecord& rec : records) {
    out.push_back(vocab.Tokenize(rec.transcript));
  }
  return out;
}

int RunBuildVocab(const RunConfig& cfg, const std::string& text_path) {
  std::vector<std::string> corpus;
  if (!text_path.empty()) {
    std::ifstream in(text_path);
    if (!in) throw DataError("cannot open " + text_path);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) corpus.push_back(line);
    }
  } else {
    const Dataset ds = ReadDataset(cfg.paths.dataset);
    for (const UtteranceRecord& rec : ds.records) {
      corpus.push_back(rec.transcript);
    }
  }
  const Vocabulary vocab = Vocabulary::Build(corpus, cfg.vocab_size);
  if (cfg.paths.vocab.empty()) throw ConfigError("paths.vocab is required");
  vocab.Save(cfg.paths.vocab);
  std::cout << "built vocabulary with " << vocab.num_pieces() << " pieces -> "
            << cfg.paths.vocab << "\n";
  return 0;
}

int RunGenerate(const RunConfig& cfg, int count, bool blob) {
  const std::vector<UtteranceRecord> records =
      GenerateSynthetic(cfg.synth, count);
  if (cfg.paths.dataset.empty()) throw ConfigError("paths.dataset is required");
  WriteDataset(cfg.paths.dataset, records, cfg.synth.frame_shift_ms, blob);
  if (!cfg.paths.vocab.empty()) {
    SynthVocabulary(cfg.synth).Save(cfg.paths.vocab);
  }
  std::cout << "wrote " << records.size() << " utterances -> "
            << cfg.paths.dataset << "\n";
  return 0;
}

int RunTrainLm(const RunConfig& cfg) {
  const Vocabulary vocab = Vocabulary::Load(cfg.paths.vocab);
  const Dataset ds = ReadDataset(cfg.paths.dataset);
  const std::vector<TokenSequence> corpus =
      TokenizeTranscripts(vocab, ds.records);
  const NGramLm lm =
      NGramLm::Train(corpus, cfg.lm.order, vocab.num_labels(), cfg.lm.lambda);
  if (cfg.paths.lm.empty()) throw ConfigError("paths.lm is required");
  lm.Save(cfg.paths.lm);
  std::cout << "trained order-" << cfg.lm.order << " lm on " << corpus.size()
            << " sequences -> " << cfg.paths.lm << "\n";
  return 0;
}

int RunTrainToy(const RunConfig& cfg) {
  const Vocabulary vocab = Vocabulary::Load(cfg.paths.vocab);
  const Dataset ds = ReadDataset(cfg.paths.dataset);
  const EncoderParams enc_params = InitEncoderParams(cfg.encoder);

  ToyTrainOptions opts;
  opts.steps = cfg.train.steps;
  opts.step_size = cfg.train.step_size;
  opts.batch_size = cfg.train.batch_size;
  opts.holdout_fraction = cfg.train.holdout_fraction;
  opts.pred_dim = cfg.train.pred_dim;
  opts.joint_hidden = cfg.train.joint_hidden;
  opts.beam = cfg.decoder.beam;
  opts.max_symbols_per_frame = cfg.decoder.max_symbols_per_frame;
  opts.seed = cfg.seed;

  const LossKind kind =
      cfg.model_kind == "rnnt" ? LossKind::kRnnt : LossKind::kCtc;
  const ToyTrainResult result =
      ToyTrain(kind, cfg.encoder, enc_params, ds.records, vocab, opts);

  SaveEncoderParams(EncoderArtifact(cfg), cfg.encoder, enc_params);
  if (cfg.paths.model.empty()) throw ConfigError("paths.model is required");
  if (kind == LossKind::kCtc) {
    SaveCtcHead(cfg.paths.model, result.head);
  } else {
    SaveTransducerModel(cfg.paths.model, result.model);
  }

  std::ostringstream curve;
  for (size_t i = 0; i < result.loss_curve.size(); ++i) {
    curve << i << " " << result.loss_curve[i] << "\n";
  }
  WriteTextFile(OutPath(cfg, "loss_curve.txt"), curve.str());

  std::cout << "trained " << cfg.model_kind << " head for "
            << result.loss_curve.size() << " steps; final loss "
            << (result.loss_curve.empty() ? 0.0 : result.loss_curve.back())
            << "; holdout token accuracy " << result.holdout_token_accuracy
            << " on " << result.holdout_count << " utterances\n";
  return 0;
}

struct LoadedFusion {
  FusionConfig fusion;
  // unique_ptr keeps the scorer address stable; fusion.external_lm points
  // into it.
  std::unique_ptr<NGramLm> lm;
  bool active = false;
};

LoadedFusion MakeFusion(const RunConfig& cfg,
                        const std::vector<CtcPosteriorGrid>& grids,
                        int num_symbols) {
  LoadedFusion out;
  out.fusion.alpha = cfg.fusion.alpha;
  out.fusion.beta = cfg.fusion.beta;
  if (!cfg.fusion.lm_path.empty()) {
    out.lm = std::make_unique<NGramLm>(NGramLm::Load(cfg.fusion.lm_path));
    out.fusion.external_lm = out.lm.get();
  }
  if (cfg.model_kind == "ctc" && cfg.fusion.prior != "none") {
    const PriorKind kind = cfg.fusion.prior == "blank_downscale"
                               ? PriorKind::kBlankDownscale
                               : PriorKind::kModelUnigram;
    out.fusion.log_prior =
        MakePrior(kind, grids, num_symbols, cfg.fusion.blank_penalty);
  }
  out.active = out.lm != nullptr || !out.fusion.log_prior.empty() ||
               cfg.fusion.alpha != 0.0 || cfg.fusion.beta != 0.0;
  return out;
}

int RunDecode(const RunConfig& cfg) {
  const Vocabulary vocab = Vocabulary::Load(cfg.paths.vocab);
  const Dataset ds = ReadDataset(cfg.paths.dataset);
  EncoderConfig enc_cfg;
  const EncoderParams enc_params =
      LoadEncoderParams(EncoderArtifact(cfg), &enc_cfg);

  std::vector<Matrix> encodings;
  encodings.reserve(ds.records.size());
  for (const UtteranceRecord& rec : ds.records) {
    FeatureSequence feat{rec.features, ds.frame_shift_ms};
    encodings.push_back(Encode(feat, enc_cfg, enc_params).embeddings);
  }

  std::ostringstream decodes;
  int errors = 0;
  int ref_words = 0;
  if (cfg.model_kind == "ctc") {
    const CtcHead head = LoadCtcHead(cfg.paths.model);
    std::vector<CtcPosteriorGrid> grids;
    grids.reserve(encodings.size());
    for (const Matrix& enc : encodings) grids.push_back(HeadGrid(head, enc));
    const LoadedFusion fused =
        MakeFusion(cfg, grids, vocab.num_pieces());
    for (size_t i = 0; i < grids.size(); ++i) {
      TokenSequence tokens;
      if (cfg.decoder.kind == "prefix_beam" || fused.active) {
        PrefixBeamOptions opts;
        opts.beam = cfg.decoder.beam;
        opts.expand_topk = cfg.decoder.expand_topk;
        const std::vector<Hypothesis> nbest = PrefixBeamSearch(
            grids[i], opts, fused.active ? &fused.fusion : nullptr);
        if (!nbest.empty()) tokens = nbest.front().tokens;
      } else {
        tokens = GreedyDecode(grids[i]);
      }
      const std::string text = vocab.Detokenize(StripReserved(tokens));
      decodes << ds.records[i].id << "\t" << text << "\n";
      const WerBreakdown wb = Wer(SplitWords(ds.records[i].transcript),
                                  SplitWords(text));
      errors += wb.errors();
      ref_words += wb.reference_length;
    }
  } else {
    const TransducerModel model = LoadTransducerModel(cfg.paths.model);
    const LoadedFusion fused = MakeFusion(cfg, {}, vocab.num_pieces());
    LabelSyncOptions opts;
    opts.beam = cfg.decoder.beam;
    opts.max_symbols_per_frame = cfg.decoder.max_symbols_per_frame;
    for (size_t i = 0; i < encodings.size(); ++i) {
      const std::vector<Hypothesis> nbest = LabelSyncBeamSearch(
          model, encodings[i], opts, fused.active ? &fused.fusion : nullptr);
      const TokenSequence tokens =
          nbest.empty() ? TokenSequence{} : nbest.front().tokens;
      const std::string text = vocab.Detokenize(StripReserved(tokens));
      decodes << ds.records[i].id << "\t" << text << "\n";
      const WerBreakdown wb = Wer(SplitWords(ds.records[i].transcript),
                                  SplitWords(text));
      errors += wb.errors();
      ref_words += wb.reference_length;
    }
  }
  const std::string out_path = OutPath(cfg, "decodes.tsv");
  WriteTextFile(out_path, decodes.str());
  const double wer =
      ref_words > 0 ? static_cast<double>(errors) / ref_words : 0.0;
  std::cout << "decoded " << ds.records.size() << " utterances -> " << out_path
            << "; corpus WER " << wer << "\n";
  return 0;
}

int RunEval(const RunConfig& cfg, std::string hyp_path) {
  if (hyp_path.empty()) hyp_path = OutPath(cfg, "decodes.tsv");
  const Dataset ds = ReadDataset(cfg.paths.dataset);
  std::map<std::string, std::string> hyp;
  std::ifstream in(hyp_path);
  if (!in) throw DataError("cannot open " + hyp_path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError("eval: line without tab separator in " + hyp_path);
    }
    hyp[line.substr(0, tab)] = line.substr(tab + 1);
  }
  int subs = 0, ins = 0, dels = 0, ref_words = 0;
  for (const UtteranceRecord& rec : ds.records) {
    auto it = hyp.find(rec.id);
    if (it == hyp.end()) throw DataError("eval: missing hypothesis for " + rec.id);
    const WerBreakdown wb =
        Wer(SplitWords(rec.transcript), SplitWords(it->second));
    subs += wb.substitutions;
    ins += wb.insertions;
    dels += wb.deletions;
    ref_words += wb.reference_length;
  }
  const double rate =
      ref_words > 0 ? static_cast<double>(subs + ins + dels) / ref_words : 0.0;
  std::printf("WER %.4f  (S=%d I=%d D=%d N=%d)\n", rate, subs, ins, dels,
              ref_words);
  return 0;
}

std::vector<std::vector<int>> ParseSchedules(const std::string& text) {
  // "2x2,3x2" -> {{2,2},{3,2}}; factors applied at consecutive layers from 0.
  std::vector<std::vector<int>> schedules;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::vector<int> factors;
    std::istringstream parts(item);
    std::string factor;
    while (std::getline(parts, factor, 'x')) {
      try {
        factors.push_back(std::stoi(factor));
      } catch (const std::exception&) {
        throw ConfigError("bench: bad schedule item '" + item + "'");
      }
    }
    if (factors.empty()) throw ConfigError("bench: empty schedule item");
    schedules.push_back(std::move(factors));
  }
  return schedules;
}

int RunBenchVerb(const RunConfig& cfg, const std::string& schedule_flag) {
  const Vocabulary vocab = Vocabulary::Load(cfg.paths.vocab);
  const Dataset ds = ReadDataset(cfg.paths.dataset);

  std::vector<std::vector<int>> schedules = {
      {2, 2}, {3, 2}, {2, 2, 2}, {5, 2}, {3, 2, 2}, {2, 2, 2, 2}};
  if (!schedule_flag.empty()) schedules = ParseSchedules(schedule_flag);

  std::vector<EncoderConfig> sweep;
  for (const std::vector<int>& factors : schedules) {
    EncoderConfig variant = cfg.encoder;
    variant.pooling_schedule.clear();
    if (static_cast<int>(factors.size()) > variant.num_layers) {
      throw ConfigError("bench: schedule longer than encoder depth");
    }
    for (size_t i = 0; i < factors.size(); ++i) {
      variant.pooling_schedule.push_back({static_cast<int>(i), factors[i]});
    }
    sweep.push_back(std::move(variant));
  }

  BenchOptions opts;
  opts.head_seed = cfg.seed;
  const std::vector<BenchRecord> records =
      RunBench(sweep, ds.records, vocab, opts);
  std::cout << RenderTable(records);
  WriteTextFile(OutPath(cfg, "bench.csv"), ToCsv(records));
  return 0;
}

// Random instances per (T, U, |V|) cell, comparing the dynamic programs
// against direct-domain enumeration.
int RunOracleCheck(const RunConfig& cfg, int instances, double tol) {
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> logit(0.0, 2.0);
  bool all_pass = true;
  std::printf("%-4s %-4s %-4s %-14s %-14s %s\n", "T", "U", "V", "ctc_max_err",
              "rnnt_max_err", "status");
  for (int frames = 1; frames <= 4; ++frames) {
    for (int target = 0; target <= 3; ++target) {
      for (int labels = 1; labels <= 3; ++labels) {
        double ctc_err = 0.0;
        double rnnt_err = 0.0;
        for (int inst = 0; inst < instances; ++inst) {
          // CTC cell: random grid, random target over piece ids.
          Matrix logits(frames, labels + 1);
          for (Eigen::Index r = 0; r < logits.rows(); ++r) {
            for (Eigen::Index c = 0; c < logits.cols(); ++c) {
              logits(r, c) = logit(rng);
            }
          }
          const CtcPosteriorGrid grid = GridFromLogits(logits);
          std::uniform_int_distribution<int> pick(1, labels);
          TokenSequence y(static_cast<size_t>(target));
          for (int& id : y) id = pick(rng);
          const double brute = oracle::BruteCtcProb(grid, y);
          double impl = kLogZero;
          if (CtcIsFeasible(y, frames)) impl = CtcLoss(grid, y);
          if (brute == kLogZero && impl == kLogZero) {
            // Both agree the target is unreachable.
          } else {
            ctc_err = std::max(ctc_err, std::abs(impl - brute));
          }

          // Transducer cell: random tiny model, same target sizes.
          const TransducerModel model = InitTransducerModel(
              labels, 4, 3, 5, rng());
          Matrix enc(frames, 4);
          for (Eigen::Index r = 0; r < enc.rows(); ++r) {
            for (Eigen::Index c = 0; c < enc.cols(); ++c) enc(r, c) = logit(rng);
          }
          const RnntLattice lattice = BuildLattice(model, enc, y);
          const double rnnt_brute = oracle::BruteRnntProb(lattice, y);
          const double rnnt_impl = -RnntLoss(lattice, y);
          rnnt_err = std::max(rnnt_err, std::abs(rnnt_impl - rnnt_brute));
        }
        const bool pass = ctc_err <= tol && rnnt_err <= tol;
        all_pass = all_pass && pass;
        std::printf("%-4d %-4d %-4d %-14.3e %-14.3e %s\n", frames, target,
                    labels, ctc_err, rnnt_err, pass ? "PASS" : "FAIL");
      }
    }
  }
  if (!all_pass) {
    throw NumericalError("oracle-check: at least one cell failed");
  }
  std::cout << "oracle-check: all cells pass\n";
  return 0;
}

int Dispatch(int argc, char** argv) {
  CLI::App app{"latkit: toy attention-based speech recognition toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::string text_path;
  std::string hyp_path;
  std::string schedule_flag;
  int count = 200;
  bool blob = false;
  int instances = 20;
  double tol = 1e-10;
  double alpha_override = 0.0, beta_override = 0.0;
  int beam_override = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "run config file")->required();
    cmd->add_option("--out", out_override, "override paths.out_dir");
  };

  CLI::App* v_vocab = app.add_subcommand("build-vocab", "build a vocabulary");
  add_common(v_vocab);
  v_vocab->add_option("--text", text_path,
                      "text corpus (default: dataset transcripts)");

  CLI::App* v_gen = app.add_subcommand("generate", "generate synthetic data");
  add_common(v_gen);
  v_gen->add_option("--count", count, "number of utterances");
  v_gen->add_flag("--blob", blob, "write features to a sidecar blob");

  CLI::App* v_lm = app.add_subcommand("train-lm", "train the n-gram lm");
  add_common(v_lm);

  CLI::App* v_train = app.add_subcommand("train-toy", "train a toy decoder");
  add_common(v_train);

  CLI::App* v_decode = app.add_subcommand("decode", "decode a dataset");
  add_common(v_decode);
  v_decode->add_option("--alpha", alpha_override, "fusion alpha override");
  v_decode->add_option("--beta", beta_override, "fusion beta override");
  v_decode->add_option("--beam", beam_override, "beam override");

  CLI::App* v_eval = app.add_subcommand("eval", "score decodes against refs");
  add_common(v_eval);
  v_eval->add_option("--hyp", hyp_path, "hypothesis tsv (id<TAB>text)");

  CLI::App* v_bench = app.add_subcommand("bench", "frame-rate sweep");
  add_common(v_bench);
  v_bench->add_option("--frame-schedule", schedule_flag,
                      "comma list of pooling factor stacks, e.g. 2x2,3x2");

  CLI::App* v_oracle = app.add_subcommand("oracle-check",
                                          "compare DPs against enumeration");
  add_common(v_oracle);
  v_oracle->add_option("--instances", instances, "instances per sweep cell");
  v_oracle->add_option("--tol", tol, "log-domain tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // app.exit prints help or the usage diagnostic; fold errors to 1.
    return app.exit(e) == 0 ? 0 : 1;
  }

  RunConfig cfg = LoadRunConfig(config_path);
  if (!out_override.empty()) cfg.paths.out_dir = out_override;
  if (v_decode->count("--alpha") > 0) cfg.fusion.alpha = alpha_override;
  if (v_decode->count("--beta") > 0) cfg.fusion.beta = beta_override;
  if (v_decode->count("--beam") > 0) cfg.decoder.beam = beam_override;

  if (v_vocab->parsed()) return RunBuildVocab(cfg, text_path);
  if (v_gen->parsed()) return RunGenerate(cfg, count, blob);
  if (v_lm->parsed()) return RunTrainLm(cfg);
  if (v_train->parsed()) return RunTrainToy(cfg);
  if (v_decode->parsed()) return RunDecode(cfg);
  if (v_eval->parsed()) return RunEval(cfg, hyp_path);
  if (v_bench->parsed()) return RunBenchVerb(cfg, schedule_flag);
  if (v_oracle->parsed()) return RunOracleCheck(cfg, instances, tol);
  return 1;
}

}  // namespace
}  // namespace latkit

int main(int argc, char** argv) {
  try {
    return latkit::Dispatch(argc, argv);
  } catch (const latkit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const latkit::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const latkit::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
