#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "vitret/tensor.hpp"

namespace vitret {

enum class Activation { None, Relu, Softmax };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

/// Matrix product. Accepts [m,k]x[k,n], batched [B,m,k]x[B,k,n], and
/// broadcast [B,m,k]x[k,n]. Gradients are registered for both operands.
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor transpose(const Tensor& x);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double s);

/// Adds a length-n vector to every row of x (last dimension n).
Tensor add_rowvec(const Tensor& x, const Tensor& v);

Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor relu(const Tensor& x);

/// Max-subtracted softmax along the given axis; slices sum to 1.
Tensor softmax(const Tensor& x, std::size_t axis);

/// Per-row standardization over the last dimension, then gain/bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double epsilon);

/// x*w + b followed by the activation. x may be a vector or a matrix whose
/// last dimension matches w's first.
Tensor dense(const Tensor& x, const Tensor& weight, const Tensor& bias,
             Activation activation);

/// Mean over the batch of -log(p[true class]), probabilities clamped at
/// 1e-12 before the log. probs is [batch x classes]; rows must sum to 1
/// within 1e-4.
Tensor cross_entropy(const Tensor& probs, const std::vector<int>& labels);

inline constexpr double kCrossEntropyFloor = 1e-12;

/// a.b / (|a||b|) for two equal-length vectors; throws on a zero vector.
double cosine_similarity(const Tensor& a, const Tensor& b);

Tensor sum(const Tensor& x);

/// Column means of an [n x d] matrix: the length-d average row.
Tensor mean_rows(const Tensor& x);

/// Row i of an [n x d] matrix as a length-d vector.
Tensor row(const Tensor& x, std::size_t i);

Tensor reshape(const Tensor& x, Shape shape);

/// Horizontal concatenation of matrices sharing a row count.
Tensor concat_cols(const std::vector<Tensor>& xs);

/// Stacks k equal-length vectors into a [k x d] matrix.
Tensor stack_rows(const std::vector<Tensor>& xs);

std::size_t argmax(const Tensor& v);

/// Uniform Glorot initialization for a [fan_in x fan_out] weight.
Tensor glorot_uniform(Shape shape, std::mt19937_64& rng);

}  // namespace vitret
