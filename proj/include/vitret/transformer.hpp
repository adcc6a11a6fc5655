#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "vitret/config.hpp"
#include "vitret/data.hpp"
#include "vitret/tensor.hpp"
#include "vitret/training.hpp"

namespace vitret {

inline constexpr double kLayerNormEpsilon = 1e-6;

/// Sinusoidal position table: entry(pos, 2i) = sin(pos / 10000^(2i/d)),
/// entry(pos, 2i+1) = cos(pos / 10000^(2i/d)). All entries lie in [-1, 1] and
/// row 0 alternates 0, 1, 0, 1, ...
struct PositionalEncodingTable {
  Tensor table;  // [max_len, d_model]
  std::size_t max_len() const { return table.dim(0); }
  std::size_t d_model() const { return table.dim(1); }
};

PositionalEncodingTable positional_encoding(std::size_t max_len, std::size_t d_model);

/// Learnable state of one encoder block: per-head q/k/v projections, the
/// output projection, the two-layer feed-forward net, and two layer-norm
/// gain/bias pairs.
struct EncoderParams {
  std::size_t d_model = 0;
  std::size_t num_heads = 0;
  std::size_t d_k = 0;  // d_model / num_heads
  std::size_t dense_dim = 0;
  Activation activation = Activation::Relu;

  std::vector<Tensor> wq, wk, wv;  // per head [d_model, d_k]
  std::vector<Tensor> bq, bk, bv;  // per head [d_k]
  Tensor wo, bo;                   // [num_heads*d_k, d_model], [d_model]
  Tensor w1, b1;                   // [d_model, dense_dim], [dense_dim]
  Tensor w2, b2;                   // [dense_dim, d_model], [d_model]
  Tensor ln1_gain, ln1_bias, ln2_gain, ln2_bias;  // [d_model]
};

EncoderParams make_encoder_params(std::size_t d_model, std::size_t num_heads,
                                  std::size_t dense_dim, Activation activation,
                                  std::mt19937_64& rng);

/// Trainable tensors of one encoder block in declaration order.
std::vector<Tensor*> encoder_param_list(EncoderParams& p);

/// Decoder-free sequence classifier: input projection + positional encoding,
/// a stack of encoder blocks, then a softmax classifier over the row-major
/// flattened encoder output.
struct ReTModel {
  ModelConfig config;
  std::size_t input_dim = 0;
  Tensor w_in, b_in;  // [input_dim, projection_dim], [projection_dim]
  PositionalEncodingTable pe;
  std::vector<EncoderParams> encoders;
  Tensor w_cls, b_cls;  // [sequence_length*projection_dim, num_classes]
};

ReTModel make_ret_model(const ModelConfig& config, std::size_t input_dim,
                        std::uint64_t seed);

std::vector<Tensor*> ret_param_list(ReTModel& m);

/// Linear projection of each sequence element followed by elementwise
/// addition of its positional-encoding row. Returns [seq, projection_dim].
Tensor embed_and_encode(const Tensor& x, const ReTModel& model);

/// Replaces score columns beyond last_visible with a large negative value so
/// their post-softmax weight vanishes. Gradients flow only through visible
/// columns.
Tensor apply_mask(const Tensor& scores, std::size_t last_visible);

struct AttentionResult {
  Tensor output;   // [n, d_v]
  Tensor weights;  // [n, m], row-stochastic
};

/// softmax(q k^T / sqrt(d_k)) v. With a mask index, columns beyond it carry
/// zero weight.
AttentionResult scaled_dot_product_attention(const Tensor& q, const Tensor& k,
                                             const Tensor& v,
                                             std::optional<std::size_t> mask = {});

/// Per-head projection -> attention -> concat -> output projection. Shape
/// preserving on [seq, d_model].
Tensor multi_head_attention(const Tensor& x_q, const Tensor& x_k, const Tensor& x_v,
                            const EncoderParams& params,
                            std::optional<std::size_t> mask = {});

/// y1 = layer_norm(x + self_attention(x)); y = layer_norm(y1 + ffn(y1)).
Tensor encoder_block(const Tensor& x, const EncoderParams& params);

/// Probabilities over classes for one feature sequence [seq, input_dim].
Tensor ret_forward(const Tensor& features, const ReTModel& model);

/// Trains a fresh model on flattened frames. Deterministic given the seed.
std::pair<ReTModel, TrainHistory> ret_train(const DatasetContainer& train,
                                            const DatasetContainer& valid,
                                            const ModelConfig& config,
                                            std::uint64_t seed);

}  // namespace vitret
