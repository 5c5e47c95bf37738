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

#include "latkit/config.h"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "latkit/error.h"

namespace latkit {
namespace {

std::string Trim(const std::string& s) {
  const size_t first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const size_t last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

int ToInt(const std::string& key, const std::string& value) {
  size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(value, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for " + key + ": '" + value + "'");
  }
  if (pos != value.size()) {
    throw ConfigError("config: bad integer for " + key + ": '" + value + "'");
  }
  return v;
}

uint64_t ToU64(const std::string& key, const std::string& value) {
  size_t pos = 0;
  uint64_t v = 0;
  try {
    v = std::stoull(value, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: bad seed for " + key + ": '" + value + "'");
  }
  if (pos != value.size()) {
    throw ConfigError("config: bad seed for " + key + ": '" + value + "'");
  }
  return v;
}

double ToDouble(const std::string& key, const std::string& value) {
  size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: bad number for " + key + ": '" + value + "'");
  }
  if (pos != value.size()) {
    throw ConfigError("config: bad number for " + key + ": '" + value + "'");
  }
  return v;
}

bool ToBool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError("config: bad bool for " + key + ": '" + value + "'");
}

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> SplitList(const std::string& value) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) items.push_back(Trim(item));
  return items;
}

std::vector<PoolingStep> ParsePooling(const std::string& value) {
  std::vector<PoolingStep> steps;
  if (value.empty() || value == "none") return steps;
  for (const std::string& item : SplitList(value)) {
    const size_t colon = item.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("config: pooling step needs layer:stride, got '" +
                        item + "'");
    }
    PoolingStep step;
    step.layer = ToInt("encoder.pooling_schedule", item.substr(0, colon));
    step.stride = ToInt("encoder.pooling_schedule", item.substr(colon + 1));
    steps.push_back(step);
  }
  return steps;
}

std::string PoolingString(const std::vector<PoolingStep>& steps) {
  if (steps.empty()) return "none";
  std::string out;
  for (size_t i = 0; i < steps.size(); ++i) {
    if (i > 0) out.push_back(',');
    out += std::to_string(steps[i].layer) + ":" +
           std::to_string(steps[i].stride);
  }
  return out;
}

std::vector<ConvStride> ParseStrides(const std::string& value) {
  std::vector<ConvStride> strides;
  if (value.empty() || value == "none") return strides;
  for (const std::string& item : SplitList(value)) {
    const size_t x = item.find('x');
    if (x == std::string::npos) {
      throw ConfigError("config: frontend stride needs TxF, got '" + item +
                        "'");
    }
    ConvStride stride;
    stride.time = ToInt("encoder.frontend_strides", item.substr(0, x));
    stride.freq = ToInt("encoder.frontend_strides", item.substr(x + 1));
    strides.push_back(stride);
  }
  return strides;
}

std::string StridesString(const std::vector<ConvStride>& strides) {
  if (strides.empty()) return "none";
  std::string out;
  for (size_t i = 0; i < strides.size(); ++i) {
    if (i > 0) out.push_back(',');
    out += std::to_string(strides[i].time) + "x" +
           std::to_string(strides[i].freq);
  }
  return out;
}

}  // namespace

RunConfig ParseRunConfig(const std::string& text) {
  std::map<std::string, std::string> entries;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = Trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: line " + std::to_string(line_no) +
                        " is not key = value");
    }
    const std::string key = Trim(stripped.substr(0, eq));
    const std::string value = Trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config: empty key on line " + std::to_string(line_no));
    }
    if (!entries.emplace(key, value).second) {
      throw ConfigError("config: duplicate key " + key);
    }
  }

  RunConfig cfg;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::vector<std::pair<std::string, Setter>> setters = {
      {"model_kind", [&](const std::string& k, const std::string& v) {
         if (v != "ctc" && v != "rnnt") {
           throw ConfigError("config: " + k + " must be ctc or rnnt");
         }
         cfg.model_kind = v;
       }},
      {"vocab_size", [&](const std::string& k, const std::string& v) {
         cfg.vocab_size = ToInt(k, v);
       }},
      {"seed", [&](const std::string& k, const std::string& v) {
         cfg.seed = ToU64(k, v);
       }},
      {"encoder.input_dim", [&](const std::string& k, const std::string& v) {
         cfg.encoder.input_dim = ToInt(k, v);
       }},
      {"encoder.num_layers", [&](const std::string& k, const std::string& v) {
         cfg.encoder.num_layers = ToInt(k, v);
       }},
      {"encoder.model_dim", [&](const std::string& k, const std::string& v) {
         cfg.encoder.model_dim = ToInt(k, v);
       }},
      {"encoder.num_heads", [&](const std::string& k, const std::string& v) {
         cfg.encoder.num_heads = ToInt(k, v);
       }},
      {"encoder.ffn_multiplier",
       [&](const std::string& k, const std::string& v) {
         cfg.encoder.ffn_multiplier = ToInt(k, v);
       }},
      {"encoder.conv_kernel_size",
       [&](const std::string& k, const std::string& v) {
         cfg.encoder.conv_kernel_size = ToInt(k, v);
       }},
      {"encoder.attention_window",
       [&](const std::string& k, const std::string& v) {
         cfg.encoder.attention_window = ToInt(k, v);
       }},
      {"encoder.pooling_schedule",
       [&](const std::string&, const std::string& v) {
         cfg.encoder.pooling_schedule = ParsePooling(v);
       }},
      {"encoder.frontend_strides",
       [&](const std::string&, const std::string& v) {
         cfg.encoder.frontend_strides = ParseStrides(v);
       }},
      {"encoder.seed", [&](const std::string& k, const std::string& v) {
         cfg.encoder.seed = ToU64(k, v);
       }},
      {"decoder.kind", [&](const std::string& k, const std::string& v) {
         if (v != "greedy" && v != "prefix_beam" && v != "label_sync") {
           throw ConfigError("config: unknown " + k + " '" + v + "'");
         }
         cfg.decoder.kind = v;
       }},
      {"decoder.beam", [&](const std::string& k, const std::string& v) {
         cfg.decoder.beam = ToInt(k, v);
       }},
      {"decoder.max_symbols_per_frame",
       [&](const std::string& k, const std::string& v) {
         cfg.decoder.max_symbols_per_frame = ToInt(k, v);
       }},
      {"decoder.expand_topk", [&](const std::string& k, const std::string& v) {
         cfg.decoder.expand_topk = ToInt(k, v);
       }},
      {"fusion.alpha", [&](const std::string& k, const std::string& v) {
         cfg.fusion.alpha = ToDouble(k, v);
       }},
      {"fusion.beta", [&](const std::string& k, const std::string& v) {
         cfg.fusion.beta = ToDouble(k, v);
       }},
      {"fusion.prior", [&](const std::string& k, const std::string& v) {
         if (v != "none" && v != "blank_downscale" && v != "model_unigram") {
           throw ConfigError("config: unknown " + k + " '" + v + "'");
         }
         cfg.fusion.prior = v;
       }},
      {"fusion.blank_penalty", [&](const std::string& k, const std::string& v) {
         cfg.fusion.blank_penalty = ToDouble(k, v);
       }},
      {"fusion.lm_path", [&](const std::string&, const std::string& v) {
         cfg.fusion.lm_path = v;
       }},
      {"synth.alphabet_size", [&](const std::string& k, const std::string& v) {
         cfg.synth.alphabet_size = ToInt(k, v);
       }},
      {"synth.min_tokens", [&](const std::string& k, const std::string& v) {
         cfg.synth.min_tokens = ToInt(k, v);
       }},
      {"synth.max_tokens", [&](const std::string& k, const std::string& v) {
         cfg.synth.max_tokens = ToInt(k, v);
       }},
      {"synth.min_frames_per_token",
       [&](const std::string& k, const std::string& v) {
         cfg.synth.min_frames_per_token = ToInt(k, v);
       }},
      {"synth.max_frames_per_token",
       [&](const std::string& k, const std::string& v) {
         cfg.synth.max_frames_per_token = ToInt(k, v);
       }},
      {"synth.noise_level", [&](const std::string& k, const std::string& v) {
         cfg.synth.noise_level = ToDouble(k, v);
       }},
      {"synth.length_diverse", [&](const std::string& k, const std::string& v) {
         cfg.synth.length_diverse = ToBool(k, v);
       }},
      {"synth.feature_dim", [&](const std::string& k, const std::string& v) {
         cfg.synth.feature_dim = ToInt(k, v);
       }},
      {"synth.frame_shift_ms", [&](const std::string& k, const std::string& v) {
         cfg.synth.frame_shift_ms = ToDouble(k, v);
       }},
      {"synth.seed", [&](const std::string& k, const std::string& v) {
         cfg.synth.seed = ToU64(k, v);
       }},
      {"train.steps", [&](const std::string& k, const std::string& v) {
         cfg.train.steps = ToInt(k, v);
       }},
      {"train.step_size", [&](const std::string& k, const std::string& v) {
         cfg.train.step_size = ToDouble(k, v);
       }},
      {"train.batch_size", [&](const std::string& k, const std::string& v) {
         cfg.train.batch_size = ToInt(k, v);
       }},
      {"train.holdout_fraction",
       [&](const std::string& k, const std::string& v) {
         cfg.train.holdout_fraction = ToDouble(k, v);
       }},
      {"train.pred_dim", [&](const std::string& k, const std::string& v) {
         cfg.train.pred_dim = ToInt(k, v);
       }},
      {"train.joint_hidden", [&](const std::string& k, const std::string& v) {
         cfg.train.joint_hidden = ToInt(k, v);
       }},
      {"lm.order", [&](const std::string& k, const std::string& v) {
         cfg.lm.order = ToInt(k, v);
       }},
      {"lm.lambda", [&](const std::string& k, const std::string& v) {
         cfg.lm.lambda = ToDouble(k, v);
       }},
      {"paths.vocab", [&](const std::string&, const std::string& v) {
         cfg.paths.vocab = v;
       }},
      {"paths.dataset", [&](const std::string&, const std::string& v) {
         cfg.paths.dataset = v;
       }},
      {"paths.model", [&](const std::string&, const std::string& v) {
         cfg.paths.model = v;
       }},
      {"paths.lm", [&](const std::string&, const std::string& v) {
         cfg.paths.lm = v;
       }},
      {"paths.out_dir", [&](const std::string&, const std::string& v) {
         cfg.paths.out_dir = v;
       }},
  };

  if (entries.find("seed") == entries.end()) {
    throw ConfigError("config: seed is mandatory");
  }
  for (const auto& [key, setter] : setters) {
    auto it = entries.find(key);
    if (it == entries.end()) continue;
    setter(key, it->second);
    entries.erase(it);
  }
  if (!entries.empty()) {
    throw ConfigError("config: unknown key " + entries.begin()->first);
  }
  return cfg;
}

std::string SerializeRunConfig(const RunConfig& cfg) {
  std::ostringstream out;
  out << "model_kind = " << cfg.model_kind << "\n";
  out << "vocab_size = " << cfg.vocab_size << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "encoder.input_dim = " << cfg.encoder.input_dim << "\n";
  out << "encoder.num_layers = " << cfg.encoder.num_layers << "\n";
  out << "encoder.model_dim = " << cfg.encoder.model_dim << "\n";
  out << "encoder.num_heads = " << cfg.encoder.num_heads << "\n";
  out << "encoder.ffn_multiplier = " << cfg.encoder.ffn_multiplier << "\n";
  out << "encoder.conv_kernel_size = " << cfg.encoder.conv_kernel_size << "\n";
  out << "encoder.attention_window = " << cfg.encoder.attention_window << "\n";
  out << "encoder.pooling_schedule = "
      << PoolingString(cfg.encoder.pooling_schedule) << "\n";
  out << "encoder.frontend_strides = "
      << StridesString(cfg.encoder.frontend_strides) << "\n";
  out << "encoder.seed = " << cfg.encoder.seed << "\n";
  out << "decoder.kind = " << cfg.decoder.kind << "\n";
  out << "decoder.beam = " << cfg.decoder.beam << "\n";
  out << "decoder.max_symbols_per_frame = "
      << cfg.decoder.max_symbols_per_frame << "\n";
  out << "decoder.expand_topk = " << cfg.decoder.expand_topk << "\n";
  out << "fusion.alpha = " << FormatDouble(cfg.fusion.alpha) << "\n";
  out << "fusion.beta = " << FormatDouble(cfg.fusion.beta) << "\n";
  out << "fusion.prior = " << cfg.fusion.prior << "\n";
  out << "fusion.blank_penalty = " << FormatDouble(cfg.fusion.blank_penalty)
      << "\n";
  out << "fusion.lm_path = " << cfg.fusion.lm_path << "\n";
  out << "synth.alphabet_size = " << cfg.synth.alphabet_size << "\n";
  out << "synth.min_tokens = " << cfg.synth.min_tokens << "\n";
  out << "synth.max_tokens = " << cfg.synth.max_tokens << "\n";
  out << "synth.min_frames_per_token = " << cfg.synth.min_frames_per_token
      << "\n";
  out << "synth.max_frames_per_token = " << cfg.synth.max_frames_per_token
      << "\n";
  out << "synth.noise_level = " << FormatDouble(cfg.synth.noise_level) << "\n";
  out << "synth.length_diverse = "
      << (cfg.synth.length_diverse ? "true" : "false") << "\n";
  out << "synth.feature_dim = " << cfg.synth.feature_dim << "\n";
  out << "synth.frame_shift_ms = " << FormatDouble(cfg.synth.frame_shift_ms)
      << "\n";
  out << "synth.seed = " << cfg.synth.seed << "\n";
  out << "train.steps = " << cfg.train.steps << "\n";
  out << "train.step_size = " << FormatDouble(cfg.train.step_size) << "\n";
  out << "train.batch_size = " << cfg.train.batch_size << "\n";
  out << "train.holdout_fraction = "
      << FormatDouble(cfg.train.holdout_fraction) << "\n";
  out << "train.pred_dim = " << cfg.train.pred_dim << "\n";
  out << "train.joint_hidden = " << cfg.train.joint_hidden << "\n";
  out << "lm.order = " << cfg.lm.order << "\n";
  out << "lm.lambda = " << FormatDouble(cfg.lm.lambda) << "\n";
  out << "paths.vocab = " << cfg.paths.vocab << "\n";
  out << "paths.dataset = " << cfg.paths.dataset << "\n";
  out << "paths.model = " << cfg.paths.model << "\n";
  out << "paths.lm = " << cfg.paths.lm << "\n";
  out << "paths.out_dir = " << cfg.paths.out_dir << "\n";
  return out.str();
}

RunConfig LoadRunConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseRunConfig(buf.str());
}

void SaveRunConfig(const std::string& path, const RunConfig& config) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("config: cannot write " + path);
  out << SerializeRunConfig(config);
}

}  // namespace latkit
