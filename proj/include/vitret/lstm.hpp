#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "vitret/config.hpp"
#include "vitret/tensor.hpp"
#include "vitret/training.hpp"

namespace vitret {

// One recurrent layer: input/forget/candidate/output gates, each with an
// input projection, a recurrent projection, and a bias.
struct LstmParams {
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;
  Tensor wx_i, wh_i, b_i;
  Tensor wx_f, wh_f, b_f;
  Tensor wx_g, wh_g, b_g;
  Tensor wx_o, wh_o, b_o;
};

// Glorot weights, zero biases except the forget gate which starts at 1
// so early training does not flush the cell state.
LstmParams make_lstm_params(std::size_t input_size, std::size_t hidden_size,
                            std::mt19937_64& rng);

// Parameters in declaration order (gate blocks, then the caller appends any
// classifier on top).
std::vector<Tensor*> lstm_param_list(LstmParams& params);

struct LstmModel {
  ModelConfig config;
  std::size_t input_dim = 0;
  std::vector<LstmParams> layers;
  Tensor w_cls;  // [hidden_size x num_classes]
  Tensor b_cls;  // [num_classes]
};

LstmModel make_lstm_model(const ModelConfig& config, std::size_t input_dim,
                          std::uint64_t seed);

std::vector<Tensor*> lstm_param_list(LstmModel& model);

std::size_t lstm_value_count(const LstmModel& model);

// x [input_size], h and c [hidden_size] -> (h', c'), both [hidden_size].
std::pair<Tensor, Tensor> lstm_cell(const Tensor& x, const Tensor& h,
                                    const Tensor& c, const LstmParams& params);

// features [seq x input_dim] -> class probabilities [num_classes].
// Each layer unrolls left to right from a zero state; the final hidden state
// of the top layer feeds a dense softmax classifier.
Tensor lstm_forward(const Tensor& features, const LstmModel& model);

std::pair<LstmModel, TrainHistory> lstm_train(const DatasetContainer& train,
                                              const DatasetContainer& valid,
                                              const ModelConfig& config,
                                              std::uint64_t seed);

}  // namespace vitret
