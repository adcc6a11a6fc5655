#include "vitret/transformer.hpp"

#include <cmath>

#include "vitret/ops.hpp"

namespace vitret {

PositionalEncodingTable positional_encoding(std::size_t max_len, std::size_t d_model) {
  if (max_len < 1) throw ValueError("positional_encoding: max_len must be >= 1");
  if (d_model < 2 || d_model % 2 != 0) {
    throw ValueError("positional_encoding: d_model must be even and >= 2, got " +
                     std::to_string(d_model));
  }
  Tensor table({max_len, d_model});
  for (std::size_t pos = 0; pos < max_len; ++pos) {
    for (std::size_t i = 0; i < d_model / 2; ++i) {
      const double rate =
          std::pow(10000.0, 2.0 * static_cast<double>(i) / static_cast<double>(d_model));
      const double angle = static_cast<double>(pos) / rate;
      table(pos, 2 * i) = std::sin(angle);
      table(pos, 2 * i + 1) = std::cos(angle);
    }
  }
  return PositionalEncodingTable{std::move(table)};
}

EncoderParams make_encoder_params(std::size_t d_model, std::size_t num_heads,
                                  std::size_t dense_dim, Activation activation,
                                  std::mt19937_64& rng) {
  if (num_heads == 0 || d_model % num_heads != 0) {
    throw ValueError("encoder: num_heads " + std::to_string(num_heads) +
                     " must divide d_model " + std::to_string(d_model));
  }
  EncoderParams p;
  p.d_model = d_model;
  p.num_heads = num_heads;
  p.d_k = d_model / num_heads;
  p.dense_dim = dense_dim;
  p.activation = activation;
  for (std::size_t h = 0; h < num_heads; ++h) {
    p.wq.push_back(glorot_uniform({d_model, p.d_k}, rng));
    p.bq.push_back(Tensor::zeros({p.d_k}));
    p.wk.push_back(glorot_uniform({d_model, p.d_k}, rng));
    p.bk.push_back(Tensor::zeros({p.d_k}));
    p.wv.push_back(glorot_uniform({d_model, p.d_k}, rng));
    p.bv.push_back(Tensor::zeros({p.d_k}));
  }
  p.wo = glorot_uniform({num_heads * p.d_k, d_model}, rng);
  p.bo = Tensor::zeros({d_model});
  p.w1 = glorot_uniform({d_model, dense_dim}, rng);
  p.b1 = Tensor::zeros({dense_dim});
  p.w2 = glorot_uniform({dense_dim, d_model}, rng);
  p.b2 = Tensor::zeros({d_model});
  p.ln1_gain = Tensor::ones({d_model});
  p.ln1_bias = Tensor::zeros({d_model});
  p.ln2_gain = Tensor::ones({d_model});
  p.ln2_bias = Tensor::zeros({d_model});
  for (Tensor* t : encoder_param_list(p)) t->set_requires_grad(true);
  return p;
}

std::vector<Tensor*> encoder_param_list(EncoderParams& p) {
  std::vector<Tensor*> out;
  for (std::size_t h = 0; h < p.num_heads; ++h) {
    out.push_back(&p.wq[h]);
    out.push_back(&p.bq[h]);
    out.push_back(&p.wk[h]);
    out.push_back(&p.bk[h]);
    out.push_back(&p.wv[h]);
    out.push_back(&p.bv[h]);
  }
  out.push_back(&p.wo);
  out.push_back(&p.bo);
  out.push_back(&p.w1);
  out.push_back(&p.b1);
  out.push_back(&p.w2);
  out.push_back(&p.b2);
  out.push_back(&p.ln1_gain);
  out.push_back(&p.ln1_bias);
  out.push_back(&p.ln2_gain);
  out.push_back(&p.ln2_bias);
  return out;
}

ReTModel make_ret_model(const ModelConfig& config, std::size_t input_dim,
                        std::uint64_t seed) {
  config.validate();
  if (input_dim == 0) throw ValueError("ret model needs a positive input size");

  std::mt19937_64 rng(seed);
  ReTModel m;
  m.config = config;
  m.input_dim = input_dim;
  m.w_in = glorot_uniform({input_dim, config.projection_dim}, rng);
  m.b_in = Tensor::zeros({config.projection_dim});
  m.pe = positional_encoding(config.sequence_length, config.projection_dim);
  for (std::size_t i = 0; i < config.transformer_layers; ++i) {
    m.encoders.push_back(make_encoder_params(config.projection_dim, config.num_heads,
                                             config.dense_dim, config.activation, rng));
  }
  m.w_cls = glorot_uniform(
      {config.sequence_length * config.projection_dim, config.num_classes}, rng);
  m.b_cls = Tensor::zeros({config.num_classes});
  m.w_in.set_requires_grad(true);
  m.b_in.set_requires_grad(true);
  m.w_cls.set_requires_grad(true);
  m.b_cls.set_requires_grad(true);
  return m;
}

std::vector<Tensor*> ret_param_list(ReTModel& m) {
  std::vector<Tensor*> out = {&m.w_in, &m.b_in};
  for (EncoderParams& enc : m.encoders) {
    for (Tensor* t : encoder_param_list(enc)) out.push_back(t);
  }
  out.push_back(&m.w_cls);
  out.push_back(&m.b_cls);
  return out;
}

Tensor embed_and_encode(const Tensor& x, const ReTModel& model) {
  if (x.rank() != 2 || x.dim(1) != model.input_dim) {
    throw ShapeError("embed_and_encode: input " + shape_str(x.shape()) +
                     " does not match model input size " +
                     std::to_string(model.input_dim));
  }
  const std::size_t seq = x.dim(0);
  if (seq > model.pe.max_len()) {
    throw ShapeError("sequence of length " + std::to_string(seq) +
                     " exceeds positional table of " +
                     std::to_string(model.pe.max_len()));
  }
  Tensor projected = add_rowvec(matmul(x, model.w_in), model.b_in);

  Tensor pe_slice({seq, model.pe.d_model()});
  std::copy_n(model.pe.table.data().data(), pe_slice.size(), pe_slice.data().data());
  return add(projected, pe_slice);
}

Tensor apply_mask(const Tensor& scores, std::size_t last_visible) {
  if (scores.rank() != 2) {
    throw ShapeError("apply_mask expects a score matrix, got " +
                     shape_str(scores.shape()));
  }
  const std::size_t n = scores.dim(0), m = scores.dim(1);
  if (last_visible >= m) {
    throw ValueError("mask index " + std::to_string(last_visible) +
                     " out of range for " + std::to_string(m) + " columns");
  }
  // out = scores * visible + floor, where masked columns get a -1e9 floor and
  // a zero multiplier (so no gradient leaks through them)
  Tensor visible({n, m});
  Tensor floor({n, m});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const bool vis = j <= last_visible;
      visible(i, j) = vis ? 1.0 : 0.0;
      floor(i, j) = vis ? 0.0 : -1e9;
    }
  }
  return add(mul(scores, visible), floor);
}

AttentionResult scaled_dot_product_attention(const Tensor& q, const Tensor& k,
                                             const Tensor& v,
                                             std::optional<std::size_t> mask) {
  if (q.rank() != 2 || k.rank() != 2 || v.rank() != 2) {
    throw ShapeError("attention expects matrices, got " + shape_str(q.shape()) + ", " +
                     shape_str(k.shape()) + ", " + shape_str(v.shape()));
  }
  if (q.dim(1) != k.dim(1)) {
    throw ShapeError("attention: query " + shape_str(q.shape()) + " and key " +
                     shape_str(k.shape()) + " disagree on depth");
  }
  if (k.dim(0) != v.dim(0)) {
    throw ShapeError("attention: key " + shape_str(k.shape()) + " and value " +
                     shape_str(v.shape()) + " disagree on length");
  }
  const double d_k = static_cast<double>(q.dim(1));
  Tensor scores = scale(matmul(q, transpose(k)), 1.0 / std::sqrt(d_k));
  if (mask) scores = apply_mask(scores, *mask);
  Tensor weights = softmax(scores, 1);
  return {matmul(weights, v), weights};
}

Tensor multi_head_attention(const Tensor& x_q, const Tensor& x_k, const Tensor& x_v,
                            const EncoderParams& params,
                            std::optional<std::size_t> mask) {
  for (const Tensor* x : {&x_q, &x_k, &x_v}) {
    if (x->rank() != 2 || x->dim(1) != params.d_model) {
      throw ShapeError("multi_head_attention: input " + shape_str(x->shape()) +
                       " does not match d_model " + std::to_string(params.d_model));
    }
  }
  std::vector<Tensor> heads;
  heads.reserve(params.num_heads);
  for (std::size_t h = 0; h < params.num_heads; ++h) {
    Tensor q = add_rowvec(matmul(x_q, params.wq[h]), params.bq[h]);
    Tensor k = add_rowvec(matmul(x_k, params.wk[h]), params.bk[h]);
    Tensor v = add_rowvec(matmul(x_v, params.wv[h]), params.bv[h]);
    heads.push_back(scaled_dot_product_attention(q, k, v, mask).output);
  }
  Tensor merged = params.num_heads == 1 ? heads[0] : concat_cols(heads);
  return add_rowvec(matmul(merged, params.wo), params.bo);
}

Tensor encoder_block(const Tensor& x, const EncoderParams& params) {
  Tensor attended = multi_head_attention(x, x, x, params);
  Tensor y1 = layer_norm(add(x, attended), params.ln1_gain, params.ln1_bias,
                         kLayerNormEpsilon);
  Tensor hidden = dense(y1, params.w1, params.b1, params.activation);
  Tensor ff = dense(hidden, params.w2, params.b2, Activation::None);
  return layer_norm(add(y1, ff), params.ln2_gain, params.ln2_bias, kLayerNormEpsilon);
}

Tensor ret_forward(const Tensor& features, const ReTModel& model) {
  if (features.rank() != 2 || features.dim(0) != model.config.sequence_length) {
    throw ShapeError("ret_forward: features " + shape_str(features.shape()) +
                     " do not match sequence length " +
                     std::to_string(model.config.sequence_length));
  }
  Tensor h = embed_and_encode(features, model);
  for (const EncoderParams& enc : model.encoders) h = encoder_block(h, enc);
  Tensor flat = reshape(h, {h.dim(0) * h.dim(1)});
  return dense(flat, model.w_cls, model.b_cls, Activation::Softmax);
}

std::pair<ReTModel, TrainHistory> ret_train(const DatasetContainer& train,
                                            const DatasetContainer& valid,
                                            const ModelConfig& config,
                                            std::uint64_t seed) {
  const std::size_t input_dim = train.height() * train.width() * train.channels();
  ReTModel model = make_ret_model(config, input_dim, seed);

  TrainTask task;
  task.params = ret_param_list(model);
  const std::size_t seq = config.sequence_length;
  task.forward = [&model, seq, input_dim](const Tensor& frames) {
    return ret_forward(reshape(frames, {seq, input_dim}), model);
  };
  TrainHistory history = fit(task, train, valid, config, seed);
  return {std::move(model), std::move(history)};
}

}  // namespace vitret
