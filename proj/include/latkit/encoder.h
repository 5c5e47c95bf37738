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

#ifndef LATKIT_ENCODER_H_
#define LATKIT_ENCODER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "latkit/numerics.h"

namespace latkit {

// Acoustic input: frames are rows (T' x d). Feature extraction is out of
// scope; frames arrive precomputed or synthesized.
struct FeatureSequence {
  Matrix frames;
  double frame_shift_ms = 10.0;
};

struct PoolingStep {
  int layer = 0;  // block index the funnel pooling is applied at
  int stride = 2;
  bool operator==(const PoolingStep&) const = default;
};

struct ConvStride {
  int time = 2;
  int freq = 2;
  bool operator==(const ConvStride&) const = default;
};

struct EncoderConfig {
  int input_dim = 64;
  int num_layers = 4;
  int model_dim = 64;
  int num_heads = 8;
  int ffn_multiplier = 4;
  int conv_kernel_size = 5;
  // Attention window in post-frontend frame units, each side; -1 unlimited.
  int attention_window = -1;
  // Funnel pooling steps; layer indices strictly increasing, strides >= 2.
  std::vector<PoolingStep> pooling_schedule;
  // Frontend 2D convolution strides, one entry per conv layer.
  std::vector<ConvStride> frontend_strides = {{2, 2}, {2, 2}};
  uint64_t seed = 0;

  void Validate() const;  // throws ConfigError
  int FrontendFactor() const;   // product of frontend time strides
  int ReductionFactor() const;  // frontend factor x pooling strides
  bool operator==(const EncoderConfig&) const = default;
};

struct EncoderOutput {
  Matrix embeddings;  // T x model_dim
  double output_frame_ms = 0.0;
  int reduction_factor = 1;
};

// One Conformer block. The convolution module is a documented
// pointwise-ReLU-depthwise-ReLU-pointwise stack; LayerNorm carries affine
// parameters initialized to identity.
struct LayerParams {
  Matrix ffn1_w1, ffn1_w2;
  Vector ffn1_b1, ffn1_b2;
  Matrix wq, wk, wv, wo;
  Vector bq, bk, bv, bo;
  Matrix conv_pw1, conv_pw2;
  Matrix conv_dw;  // model_dim x kernel_size, one row per channel
  Vector conv_pw1_b, conv_pw2_b, conv_dw_b;
  Matrix ffn2_w1, ffn2_w2;
  Vector ffn2_b1, ffn2_b2;
  Vector ln_gamma, ln_beta;
};

struct FrontendConvLayer {
  // kernels[out_ch * in_channels + in_ch] is a (kernel_t x kernel_f) matrix.
  std::vector<Matrix> kernels;
  Vector bias;  // per out channel
  int in_channels = 1;
  int out_channels = 1;
};

struct FrontendParams {
  std::vector<FrontendConvLayer> convs;
  Matrix proj;  // model_dim x (channels * reduced freq dim)
  Vector proj_bias;
};

struct EncoderParams {
  FrontendParams frontend;
  std::vector<LayerParams> layers;
};

// Uniform init scaled by 1 / sqrt(fan_in); a single seeded stream with fixed
// draw order makes parameters reproducible.
EncoderParams InitEncoderParams(const EncoderConfig& cfg);

void SaveEncoderParams(const std::string& path, const EncoderConfig& cfg,
                       const EncoderParams& params);
EncoderParams LoadEncoderParams(const std::string& path, EncoderConfig* cfg);

// Ceil-division length bookkeeping. ExpectedOutputLength folds the frontend
// time strides, then each pooling stride in schedule order.
int FoldStride(int length, int stride);
int ExpectedOutputLength(int input_frames, const EncoderConfig& cfg);

// Convolutional subsampling frontend: stacked 2D convs with "same" padding
// and the configured strides, channel flatten, linear projection to
// model_dim. Throws DataError when input_frames < FrontendFactor().
Matrix ConvSubsample(const FeatureSequence& feat, const EncoderConfig& cfg,
                     const FrontendParams& params);

// Strided mean pooling over time; tail group averages the <= stride
// remaining rows. Length becomes ceil(rows / stride).
Matrix StridedPool(const Matrix& x, int stride);

// Conformer block at constant length (stride == 1) or with funnel pooling
// (stride >= 2): queries come from StridedPool(x_tilde), keys and values
// from the full-length x_tilde, and the residual uses the pooled sequence.
// positions tracks per-row centers in post-frontend frame units and is
// updated in place when pooling; the attention window mask uses it.
Matrix BlockForward(const Matrix& x, int stride, const LayerParams& params,
                    const EncoderConfig& cfg, std::vector<double>* positions);

// Frontend, sinusoidal positions added once, then the block stack with
// funnel pooling at the scheduled indices.
EncoderOutput Encode(const FeatureSequence& feat, const EncoderConfig& cfg,
                     const EncoderParams& params);

// Modeled cost of the block stack for a given input feature length, counting
// attention as 2 * T_out * T_in * D and the two FFNs as
// 4 * T_in * D^2 + 4 * T_out * D^2 flops per block.
struct LayerCost {
  int layer = 0;
  long long frames_in = 0;
  long long frames_out = 0;
  double attention_flops = 0.0;
  double ffn_flops = 0.0;
};

struct CostBreakdown {
  std::vector<LayerCost> layers;
  double attention_total = 0.0;
  double ffn_total = 0.0;
  double total = 0.0;
};

CostBreakdown ModeledCost(const EncoderConfig& cfg, int input_frames);

}  // namespace latkit

#endif  // LATKIT_ENCODER_H_
