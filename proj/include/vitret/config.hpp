#pragma once

#include <cstddef>
#include <string>

#include "vitret/ops.hpp"

namespace vitret {

/// Hyperparameter record shared by every model family. Defaults are sized for
/// desk-scale runs (32x32 frames); raise image_height/width for full-scale
/// inputs.
struct ModelConfig {
  std::size_t sequence_length = 20;  // frames kept per video
  std::size_t image_height = 32;
  std::size_t image_width = 32;
  std::size_t channels = 1;
  std::size_t projection_dim = 128;  // embedding size after input projection
  std::size_t dense_dim = 256;       // feed-forward hidden width (2x projection)
  Activation activation = Activation::Relu;
  std::size_t num_heads = 4;  // must divide projection_dim
  std::size_t patch_size = 8;
  std::size_t lstm_layers = 2;
  std::size_t lstm_units = 64;
  std::size_t transformer_layers = 1;
  std::size_t num_classes = 4;
  std::size_t batch_size = 4;
  std::size_t epochs = 50;
  double learning_rate = 1e-3;

  std::size_t frame_values() const { return image_height * image_width * channels; }

  /// Throws ValueError naming the offending field.
  void validate() const;
};

}  // namespace vitret
