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

#include "latkit/encoder.h"

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "latkit/error.h"
#include "latkit/tensor_io.h"

namespace latkit {
namespace {

constexpr int kFrontendChannels = 4;
constexpr int kFrontendKernel = 3;
constexpr double kLayerNormEps = 1e-12;

void CheckFinite(const Matrix& m, const char* where) {
  if (!m.allFinite()) {
    throw NumericalError(std::string("non-finite values in ") + where);
  }
}

Matrix UniformMatrix(Eigen::Index rows, Eigen::Index cols, double fan_in,
                     std::mt19937_64& rng) {
  const double s = 1.0 / std::sqrt(fan_in);
  std::uniform_real_distribution<double> dist(-s, s);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = dist(rng);
  }
  return m;
}

// y = x W^T + b, rows are time steps.
Matrix Affine(const Matrix& x, const Matrix& w, const Vector& b) {
  Matrix y = x * w.transpose();
  y.rowwise() += b.transpose();
  return y;
}

Matrix Ffn(const Matrix& x, const Matrix& w1, const Vector& b1,
           const Matrix& w2, const Vector& b2) {
  Matrix h = Affine(x, w1, b1).cwiseMax(0.0);
  return Affine(h, w2, b2);
}

Matrix LayerNormRows(const Matrix& x, const Vector& gamma,
                     const Vector& beta) {
  Matrix out(x.rows(), x.cols());
  const double d = static_cast<double>(x.cols());
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    const double mean = x.row(t).mean();
    const double var = (x.row(t).array() - mean).square().sum() / d;
    out.row(t) = (((x.row(t).array() - mean) / std::sqrt(var + kLayerNormEps))
                      .transpose() *
                  gamma.array())
                     .transpose() +
                 beta.transpose().array();
  }
  return out;
}

// Depthwise 1D convolution over time, zero "same" padding, per-channel
// kernels in the rows of dw.
Matrix DepthwiseConv(const Matrix& x, const Matrix& dw, const Vector& bias) {
  const Eigen::Index t_len = x.rows();
  const Eigen::Index d = x.cols();
  const int k = static_cast<int>(dw.cols());
  const int pad = (k - 1) / 2;
  Matrix out = Matrix::Zero(t_len, d);
  for (Eigen::Index t = 0; t < t_len; ++t) {
    for (int j = 0; j < k; ++j) {
      const Eigen::Index src = t + j - pad;
      if (src < 0 || src >= t_len) continue;
      out.row(t).array() += x.row(src).array() * dw.col(j).transpose().array();
    }
    out.row(t) += bias.transpose();
  }
  return out;
}

Matrix ConvModule(const Matrix& x, const LayerParams& p) {
  Matrix h = Affine(x, p.conv_pw1, p.conv_pw1_b).cwiseMax(0.0);
  h = DepthwiseConv(h, p.conv_dw, p.conv_dw_b).cwiseMax(0.0);
  return Affine(h, p.conv_pw2, p.conv_pw2_b);
}

// Scaled dot-product attention with pooled queries. Window masking compares
// query centers against key positions in post-frontend frame units; when a
// window leaves a query row empty, the nearest key stays unmasked.
Matrix Mhsa(const Matrix& q_in, const Matrix& kv_in,
            const std::vector<double>& q_pos, const std::vector<double>& k_pos,
            const LayerParams& p, const EncoderConfig& cfg) {
  const Eigen::Index tq = q_in.rows();
  const Eigen::Index tk = kv_in.rows();
  const int heads = cfg.num_heads;
  const Eigen::Index dh = cfg.model_dim / heads;

  const Matrix q = Affine(q_in, p.wq, p.bq);
  const Matrix k = Affine(kv_in, p.wk, p.bk);
  const Matrix v = Affine(kv_in, p.wv, p.bv);

  std::vector<bool> masked;
  const bool windowed = cfg.attention_window >= 0;
  Matrix concat(tq, cfg.model_dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  for (int h = 0; h < heads; ++h) {
    const auto qh = q.middleCols(h * dh, dh);
    const auto kh = k.middleCols(h * dh, dh);
    const auto vh = v.middleCols(h * dh, dh);
    Matrix scores = qh * kh.transpose() * scale;
    for (Eigen::Index i = 0; i < tq; ++i) {
      if (windowed) {
        masked.assign(tk, false);
        double best = std::numeric_limits<double>::infinity();
        Eigen::Index best_j = 0;
        for (Eigen::Index j = 0; j < tk; ++j) {
          const double dist = std::abs(q_pos[i] - k_pos[j]);
          masked[j] = dist > cfg.attention_window;
          if (dist < best) {
            best = dist;
            best_j = j;
          }
        }
        masked[best_j] = false;
        for (Eigen::Index j = 0; j < tk; ++j) {
          if (masked[j]) scores(i, j) = kLogZero;
        }
      }
      // Row softmax with max shift.
      const double m = scores.row(i).maxCoeff();
      Eigen::ArrayXd e = (scores.row(i).array() - m).exp();
      scores.row(i) = (e / e.sum()).matrix();
    }
    concat.middleCols(h * dh, dh) = scores * vh;
  }
  return Affine(concat, p.wo, p.bo);
}

nlohmann::json ConfigToJson(const EncoderConfig& cfg) {
  nlohmann::json j;
  j["input_dim"] = cfg.input_dim;
  j["num_layers"] = cfg.num_layers;
  j["model_dim"] = cfg.model_dim;
  j["num_heads"] = cfg.num_heads;
  j["ffn_multiplier"] = cfg.ffn_multiplier;
  j["conv_kernel_size"] = cfg.conv_kernel_size;
  j["attention_window"] = cfg.attention_window;
  j["seed"] = cfg.seed;
  j["pooling"] = nlohmann::json::array();
  for (const auto& p : cfg.pooling_schedule) {
    j["pooling"].push_back({p.layer, p.stride});
  }
  j["frontend"] = nlohmann::json::array();
  for (const auto& s : cfg.frontend_strides) {
    j["frontend"].push_back({s.time, s.freq});
  }
  return j;
}

EncoderConfig ConfigFromJson(const nlohmann::json& j) {
  EncoderConfig cfg;
  cfg.input_dim = j.at("input_dim").get<int>();
  cfg.num_layers = j.at("num_layers").get<int>();
  cfg.model_dim = j.at("model_dim").get<int>();
  cfg.num_heads = j.at("num_heads").get<int>();
  cfg.ffn_multiplier = j.at("ffn_multiplier").get<int>();
  cfg.conv_kernel_size = j.at("conv_kernel_size").get<int>();
  cfg.attention_window = j.at("attention_window").get<int>();
  cfg.seed = j.at("seed").get<uint64_t>();
  cfg.pooling_schedule.clear();
  for (const auto& p : j.at("pooling")) {
    cfg.pooling_schedule.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
  }
  cfg.frontend_strides.clear();
  for (const auto& s : j.at("frontend")) {
    cfg.frontend_strides.push_back({s.at(0).get<int>(), s.at(1).get<int>()});
  }
  return cfg;
}

}  // namespace

void EncoderConfig::Validate() const {
  if (input_dim < 1 || num_layers < 1 || model_dim < 1 || num_heads < 1 ||
      ffn_multiplier < 1) {
    throw ConfigError("encoder: dimensions and layer counts must be >= 1");
  }
  if (model_dim % num_heads != 0) {
    throw ConfigError("encoder: model_dim must be divisible by num_heads");
  }
  if (conv_kernel_size < 1 || conv_kernel_size % 2 == 0) {
    throw ConfigError("encoder: conv_kernel_size must be odd and >= 1");
  }
  if (attention_window < -1) {
    throw ConfigError("encoder: attention_window must be -1 or >= 0");
  }
  int prev_layer = -1;
  for (const auto& p : pooling_schedule) {
    if (p.layer <= prev_layer || p.layer >= num_layers) {
      throw ConfigError("encoder: pooling layer indices must be strictly "
                        "increasing and < num_layers");
    }
    if (p.stride < 2) throw ConfigError("encoder: pooling stride must be >= 2");
    prev_layer = p.layer;
  }
  for (const auto& s : frontend_strides) {
    if (s.time < 1 || s.freq < 1) {
      throw ConfigError("encoder: frontend strides must be >= 1");
    }
  }
}

int EncoderConfig::FrontendFactor() const {
  int f = 1;
  for (const auto& s : frontend_strides) f *= s.time;
  return f;
}

int EncoderConfig::ReductionFactor() const {
  int f = FrontendFactor();
  for (const auto& p : pooling_schedule) f *= p.stride;
  return f;
}

int FoldStride(int length, int stride) {
  return (length + stride - 1) / stride;
}

int ExpectedOutputLength(int input_frames, const EncoderConfig& cfg) {
  int len = input_frames;
  for (const auto& s : cfg.frontend_strides) len = FoldStride(len, s.time);
  for (const auto& p : cfg.pooling_schedule) len = FoldStride(len, p.stride);
  return len;
}

EncoderParams InitEncoderParams(const EncoderConfig& cfg) {
  cfg.Validate();
  std::mt19937_64 rng(cfg.seed);
  EncoderParams params;

  int freq = cfg.input_dim;
  int in_ch = 1;
  for (const auto& s : cfg.frontend_strides) {
    FrontendConvLayer layer;
    layer.in_channels = in_ch;
    layer.out_channels = kFrontendChannels;
    const double fan_in =
        static_cast<double>(in_ch) * kFrontendKernel * kFrontendKernel;
    for (int o = 0; o < layer.out_channels; ++o) {
      for (int i = 0; i < in_ch; ++i) {
        layer.kernels.push_back(
            UniformMatrix(kFrontendKernel, kFrontendKernel, fan_in, rng));
      }
    }
    layer.bias = Vector::Zero(layer.out_channels);
    params.frontend.convs.push_back(std::move(layer));
    freq = FoldStride(freq, s.freq);
    in_ch = kFrontendChannels;
  }
  const int flat = (cfg.frontend_strides.empty() ? 1 : kFrontendChannels) *
                   freq;
  params.frontend.proj = UniformMatrix(cfg.model_dim, flat, flat, rng);
  params.frontend.proj_bias = Vector::Zero(cfg.model_dim);

  const int d = cfg.model_dim;
  const int ff = cfg.ffn_multiplier * d;
  for (int l = 0; l < cfg.num_layers; ++l) {
    LayerParams p;
    p.ffn1_w1 = UniformMatrix(ff, d, d, rng);
    p.ffn1_b1 = Vector::Zero(ff);
    p.ffn1_w2 = UniformMatrix(d, ff, ff, rng);
    p.ffn1_b2 = Vector::Zero(d);
    p.wq = UniformMatrix(d, d, d, rng);
    p.bq = Vector::Zero(d);
    p.wk = UniformMatrix(d, d, d, rng);
    p.bk = Vector::Zero(d);
    p.wv = UniformMatrix(d, d, d, rng);
    p.bv = Vector::Zero(d);
    p.wo = UniformMatrix(d, d, d, rng);
    p.bo = Vector::Zero(d);
    p.conv_pw1 = UniformMatrix(d, d, d, rng);
    p.conv_pw1_b = Vector::Zero(d);
    p.conv_dw = UniformMatrix(d, cfg.conv_kernel_size, cfg.conv_kernel_size,
                              rng);
    p.conv_dw_b = Vector::Zero(d);
    p.conv_pw2 = UniformMatrix(d, d, d, rng);
    p.conv_pw2_b = Vector::Zero(d);
    p.ffn2_w1 = UniformMatrix(ff, d, d, rng);
    p.ffn2_b1 = Vector::Zero(ff);
    p.ffn2_w2 = UniformMatrix(d, ff, ff, rng);
    p.ffn2_b2 = Vector::Zero(d);
    p.ln_gamma = Vector::Ones(d);
    p.ln_beta = Vector::Zero(d);
    params.layers.push_back(std::move(p));
  }
  return params;
}

Matrix ConvSubsample(const FeatureSequence& feat, const EncoderConfig& cfg,
                     const FrontendParams& params) {
  if (feat.frames.cols() != cfg.input_dim) {
    throw DataError("frontend: feature dim " +
                    std::to_string(feat.frames.cols()) + " != input_dim " +
                    std::to_string(cfg.input_dim));
  }
  if (feat.frames.rows() < cfg.FrontendFactor()) {
    throw DataError("frontend: input length " +
                    std::to_string(feat.frames.rows()) +
                    " shorter than total stride " +
                    std::to_string(cfg.FrontendFactor()));
  }
  CheckFinite(feat.frames, "input features");

  // Channel-major representation; each channel is a (time x freq) plane.
  std::vector<Matrix> planes = {feat.frames};
  for (size_t l = 0; l < cfg.frontend_strides.size(); ++l) {
    const ConvStride& stride = cfg.frontend_strides[l];
    const FrontendConvLayer& layer = params.convs[l];
    const Eigen::Index t_in = planes[0].rows();
    const Eigen::Index f_in = planes[0].cols();
    const Eigen::Index t_out = FoldStride(static_cast<int>(t_in), stride.time);
    const Eigen::Index f_out = FoldStride(static_cast<int>(f_in), stride.freq);
    // "Same" padding: pad so that output o covers input starting at
    // o*stride - pad_begin.
    const auto pad_begin = [](Eigen::Index out, int stride, Eigen::Index in) {
      const Eigen::Index total =
          std::max<Eigen::Index>((out - 1) * stride + kFrontendKernel - in, 0);
      return total / 2;
    };
    const Eigen::Index pad_t = pad_begin(t_out, stride.time, t_in);
    const Eigen::Index pad_f = pad_begin(f_out, stride.freq, f_in);

    std::vector<Matrix> next(layer.out_channels,
                             Matrix::Zero(t_out, f_out));
    for (int o = 0; o < layer.out_channels; ++o) {
      for (int i = 0; i < layer.in_channels; ++i) {
        const Matrix& kernel = layer.kernels[o * layer.in_channels + i];
        const Matrix& src = planes[i];
        for (Eigen::Index ot = 0; ot < t_out; ++ot) {
          for (Eigen::Index of = 0; of < f_out; ++of) {
            double acc = 0.0;
            for (int kt = 0; kt < kFrontendKernel; ++kt) {
              const Eigen::Index st = ot * stride.time - pad_t + kt;
              if (st < 0 || st >= t_in) continue;
              for (int kf = 0; kf < kFrontendKernel; ++kf) {
                const Eigen::Index sf = of * stride.freq - pad_f + kf;
                if (sf < 0 || sf >= f_in) continue;
                acc += kernel(kt, kf) * src(st, sf);
              }
            }
            next[o](ot, of) += acc;
          }
        }
      }
      next[o].array() += layer.bias(o);
      next[o] = next[o].cwiseMax(0.0);  // ReLU
    }
    planes = std::move(next);
  }

  const Eigen::Index t_out = planes[0].rows();
  const Eigen::Index f_out = planes[0].cols();
  Matrix flat(t_out, static_cast<Eigen::Index>(planes.size()) * f_out);
  for (size_t c = 0; c < planes.size(); ++c) {
    flat.middleCols(static_cast<Eigen::Index>(c) * f_out, f_out) = planes[c];
  }
  return Affine(flat, params.proj, params.proj_bias);
}

Matrix StridedPool(const Matrix& x, int stride) {
  if (stride < 1) throw ConfigError("strided pool: stride must be >= 1");
  const Eigen::Index out_len = FoldStride(static_cast<int>(x.rows()), stride);
  Matrix out(out_len, x.cols());
  for (Eigen::Index o = 0; o < out_len; ++o) {
    const Eigen::Index begin = o * stride;
    const Eigen::Index count = std::min<Eigen::Index>(stride, x.rows() - begin);
    out.row(o) = x.middleRows(begin, count).colwise().mean();
  }
  return out;
}

Matrix BlockForward(const Matrix& x, int stride, const LayerParams& params,
                    const EncoderConfig& cfg, std::vector<double>* positions) {
  if (x.cols() != cfg.model_dim) {
    throw DataError("conformer block: input dim mismatch");
  }
  if (stride < 1) throw ConfigError("conformer block: stride must be >= 1");

  const Matrix x_tilde =
      x + 0.5 * Ffn(x, params.ffn1_w1, params.ffn1_b1, params.ffn1_w2,
                    params.ffn1_b2);

  std::vector<double> k_pos;
  if (positions != nullptr) {
    k_pos = *positions;
  } else {
    k_pos.resize(x.rows());
    for (Eigen::Index t = 0; t < x.rows(); ++t) k_pos[t] = double(t);
  }

  Matrix pooled;
  std::vector<double> q_pos;
  if (stride == 1) {
    pooled = x_tilde;
    q_pos = k_pos;
  } else {
    pooled = StridedPool(x_tilde, stride);
    q_pos.resize(pooled.rows());
    for (Eigen::Index o = 0; o < pooled.rows(); ++o) {
      const size_t begin = static_cast<size_t>(o) * stride;
      const size_t end = std::min(begin + stride, k_pos.size());
      double acc = 0.0;
      for (size_t i = begin; i < end; ++i) acc += k_pos[i];
      q_pos[o] = acc / static_cast<double>(end - begin);
    }
  }

  const Matrix attn = Mhsa(pooled, x_tilde, q_pos, k_pos, params, cfg);
  const Matrix x_prime = pooled + attn;  // residual over the pooled sequence
  const Matrix x_second = x_prime + ConvModule(x_prime, params);
  const Matrix out = LayerNormRows(
      x_second + 0.5 * Ffn(x_second, params.ffn2_w1, params.ffn2_b1,
                           params.ffn2_w2, params.ffn2_b2),
      params.ln_gamma, params.ln_beta);
  if (positions != nullptr) *positions = std::move(q_pos);
  CheckFinite(out, "conformer block output");
  return out;
}

EncoderOutput Encode(const FeatureSequence& feat, const EncoderConfig& cfg,
                     const EncoderParams& params) {
  cfg.Validate();
  Matrix x = ConvSubsample(feat, cfg, params.frontend);

  // Absolute sinusoidal positions, added once after the frontend. Blocks
  // stay position-free; pooled query centers only drive window masking.
  // The frontend output is scaled by sqrt(model_dim) first so the content
  // signal is not swamped by the unit-amplitude position signal.
  const Eigen::Index d = cfg.model_dim;
  x *= std::sqrt(static_cast<double>(d));
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    for (Eigen::Index i = 0; i < d; i += 2) {
      const double rate =
          std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(d));
      x(t, i) += std::sin(t * rate);
      if (i + 1 < d) x(t, i + 1) += std::cos(t * rate);
    }
  }

  std::vector<double> positions(x.rows());
  for (Eigen::Index t = 0; t < x.rows(); ++t) positions[t] = double(t);

  size_t next_pool = 0;
  for (int l = 0; l < cfg.num_layers; ++l) {
    int stride = 1;
    if (next_pool < cfg.pooling_schedule.size() &&
        cfg.pooling_schedule[next_pool].layer == l) {
      stride = cfg.pooling_schedule[next_pool].stride;
      ++next_pool;
    }
    x = BlockForward(x, stride, params.layers[l], cfg, &positions);
  }

  const int expect = ExpectedOutputLength(
      static_cast<int>(feat.frames.rows()), cfg);
  if (x.rows() != expect) {
    throw NumericalError("encode: output length " + std::to_string(x.rows()) +
                         " != expected " + std::to_string(expect));
  }

  EncoderOutput out;
  out.embeddings = std::move(x);
  out.reduction_factor = cfg.ReductionFactor();
  out.output_frame_ms = feat.frame_shift_ms * out.reduction_factor;
  return out;
}

CostBreakdown ModeledCost(const EncoderConfig& cfg, int input_frames) {
  cfg.Validate();
  int len = input_frames;
  for (const auto& s : cfg.frontend_strides) len = FoldStride(len, s.time);

  CostBreakdown breakdown;
  const double d = cfg.model_dim;
  size_t next_pool = 0;
  for (int l = 0; l < cfg.num_layers; ++l) {
    const int t_in = len;
    int t_out = t_in;
    if (next_pool < cfg.pooling_schedule.size() &&
        cfg.pooling_schedule[next_pool].layer == l) {
      t_out = FoldStride(t_in, cfg.pooling_schedule[next_pool].stride);
      ++next_pool;
    }
    LayerCost cost;
    cost.layer = l;
    cost.frames_in = t_in;
    cost.frames_out = t_out;
    cost.attention_flops = 2.0 * t_out * t_in * d;
    cost.ffn_flops = 4.0 * t_in * d * d + 4.0 * t_out * d * d;
    breakdown.attention_total += cost.attention_flops;
    breakdown.ffn_total += cost.ffn_flops;
    breakdown.layers.push_back(cost);
    len = t_out;
  }
  breakdown.total = breakdown.attention_total + breakdown.ffn_total;
  return breakdown;
}

void SaveEncoderParams(const std::string& path, const EncoderConfig& cfg,
                       const EncoderParams& params) {
  TensorFile f;
  f.SetMeta("kind", "encoder");
  f.SetMeta("config", ConfigToJson(cfg).dump());
  for (size_t l = 0; l < params.frontend.convs.size(); ++l) {
    const auto& layer = params.frontend.convs[l];
    const std::string prefix = "frontend." + std::to_string(l) + ".";
    for (size_t k = 0; k < layer.kernels.size(); ++k) {
      f.Add(prefix + "kernel." + std::to_string(k), layer.kernels[k]);
    }
    f.Add(prefix + "bias", layer.bias);
  }
  f.Add("frontend.proj", params.frontend.proj);
  f.Add("frontend.proj_bias", params.frontend.proj_bias);
  for (size_t l = 0; l < params.layers.size(); ++l) {
    const auto& p = params.layers[l];
    const std::string prefix = "layer." + std::to_string(l) + ".";
    f.Add(prefix + "ffn1_w1", p.ffn1_w1);
    f.Add(prefix + "ffn1_b1", p.ffn1_b1);
    f.Add(prefix + "ffn1_w2", p.ffn1_w2);
    f.Add(prefix + "ffn1_b2", p.ffn1_b2);
    f.Add(prefix + "wq", p.wq);
    f.Add(prefix + "bq", p.bq);
    f.Add(prefix + "wk", p.wk);
    f.Add(prefix + "bk", p.bk);
    f.Add(prefix + "wv", p.wv);
    f.Add(prefix + "bv", p.bv);
    f.Add(prefix + "wo", p.wo);
    f.Add(prefix + "bo", p.bo);
    f.Add(prefix + "conv_pw1", p.conv_pw1);
    f.Add(prefix + "conv_pw1_b", p.conv_pw1_b);
    f.Add(prefix + "conv_dw", p.conv_dw);
    f.Add(prefix + "conv_dw_b", p.conv_dw_b);
    f.Add(prefix + "conv_pw2", p.conv_pw2);
    f.Add(prefix + "conv_pw2_b", p.conv_pw2_b);
    f.Add(prefix + "ffn2_w1", p.ffn2_w1);
    f.Add(prefix + "ffn2_b1", p.ffn2_b1);
    f.Add(prefix + "ffn2_w2", p.ffn2_w2);
    f.Add(prefix + "ffn2_b2", p.ffn2_b2);
    f.Add(prefix + "ln_gamma", p.ln_gamma);
    f.Add(prefix + "ln_beta", p.ln_beta);
  }
  f.Save(path);
}

EncoderParams LoadEncoderParams(const std::string& path, EncoderConfig* cfg) {
  const TensorFile f = TensorFile::Load(path);
  if (f.GetMeta("kind") != "encoder") {
    throw DataError("parameter file " + path + " is not an encoder");
  }
  EncoderConfig parsed;
  try {
    parsed = ConfigFromJson(nlohmann::json::parse(f.GetMeta("config")));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad encoder config in " + path + ": " + e.what());
  }
  parsed.Validate();

  EncoderParams params;
  int in_ch = 1;
  for (size_t l = 0; l < parsed.frontend_strides.size(); ++l) {
    FrontendConvLayer layer;
    layer.in_channels = in_ch;
    layer.out_channels = kFrontendChannels;
    const std::string prefix = "frontend." + std::to_string(l) + ".";
    for (int k = 0; k < layer.out_channels * layer.in_channels; ++k) {
      layer.kernels.push_back(f.Get(prefix + "kernel." + std::to_string(k)));
    }
    layer.bias = f.GetVector(prefix + "bias");
    params.frontend.convs.push_back(std::move(layer));
    in_ch = kFrontendChannels;
  }
  params.frontend.proj = f.Get("frontend.proj");
  params.frontend.proj_bias = f.GetVector("frontend.proj_bias");
  for (int l = 0; l < parsed.num_layers; ++l) {
    const std::string prefix = "layer." + std::to_string(l) + ".";
    LayerParams p;
    p.ffn1_w1 = f.Get(prefix + "ffn1_w1");
    p.ffn1_b1 = f.GetVector(prefix + "ffn1_b1");
    p.ffn1_w2 = f.Get(prefix + "ffn1_w2");
    p.ffn1_b2 = f.GetVector(prefix + "ffn1_b2");
    p.wq = f.Get(prefix + "wq");
    p.bq = f.GetVector(prefix + "bq");
    p.wk = f.Get(prefix + "wk");
    p.bk = f.GetVector(prefix + "bk");
    p.wv = f.Get(prefix + "wv");
    p.bv = f.GetVector(prefix + "bv");
    p.wo = f.Get(prefix + "wo");
    p.bo = f.GetVector(prefix + "bo");
    p.conv_pw1 = f.Get(prefix + "conv_pw1");
    p.conv_pw1_b = f.GetVector(prefix + "conv_pw1_b");
    p.conv_dw = f.Get(prefix + "conv_dw");
    p.conv_dw_b = f.GetVector(prefix + "conv_dw_b");
    p.conv_pw2 = f.Get(prefix + "conv_pw2");
    p.conv_pw2_b = f.GetVector(prefix + "conv_pw2_b");
    p.ffn2_w1 = f.Get(prefix + "ffn2_w1");
    p.ffn2_b1 = f.GetVector(prefix + "ffn2_b1");
    p.ffn2_w2 = f.Get(prefix + "ffn2_w2");
    p.ffn2_b2 = f.GetVector(prefix + "ffn2_b2");
    p.ln_gamma = f.GetVector(prefix + "ln_gamma");
    p.ln_beta = f.GetVector(prefix + "ln_beta");
    params.layers.push_back(std::move(p));
  }
  if (cfg != nullptr) *cfg = parsed;
  return params;
}

}  // namespace latkit
