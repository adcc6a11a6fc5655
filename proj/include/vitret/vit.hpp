#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "vitret/config.hpp"
#include "vitret/data.hpp"
#include "vitret/tensor.hpp"
#include "vitret/training.hpp"
#include "vitret/transformer.hpp"

namespace vitret {

/// An image cut into non-overlapping square patches, one flattened patch per
/// row in raster-scan order (left to right, top to bottom).
struct PatchSequence {
  Tensor patches;  // [num_patches x (p*p*C)]
  std::size_t patch_size = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::size_t num_patches() const { return patches.dim(0); }
};

/// Cuts an [H, W, C] image into p x p blocks. H and W must be divisible by
/// p; each patch row is the row-major flattening of its block, so the cut is
/// lossless.
PatchSequence extract_patches(const Tensor& image, std::size_t p);

/// Exact pixel-for-pixel inverse of extract_patches.
Tensor reassemble(const PatchSequence& seq);

/// Patch-sequence image classifier: patch projection + positional encoding
/// over patch positions, an encoder stack, then a softmax head over the
/// flattened encoder output. Mean-pooled encoder rows double as a fixed-size
/// per-frame feature vector for the two-stage pipeline.
struct ViTModel {
  ModelConfig config;
  std::size_t num_patches = 0;
  Tensor w_patch, b_patch;  // [p*p*C, projection_dim], [projection_dim]
  PositionalEncodingTable pe;
  std::vector<EncoderParams> encoders;
  Tensor w_cls, b_cls;  // [num_patches*projection_dim, num_classes]
  std::size_t feature_dim() const { return config.projection_dim; }
};

ViTModel make_vit_model(const ModelConfig& config, std::uint64_t seed);

std::vector<Tensor*> vit_param_list(ViTModel& model);

/// Encoder output for one image: [num_patches, projection_dim].
Tensor vit_encode(const Tensor& image, const ViTModel& model);

/// Class probabilities for one [H, W, C] image.
Tensor vit_forward(const Tensor& image, const ViTModel& model);

/// Mean of the encoder output rows: a length-projection_dim feature vector.
/// The classifier head is not applied.
Tensor vit_features(const Tensor& image, const ViTModel& model);

/// Two-stage pipeline: per-frame features in temporal order, then the
/// sequence classifier. frames is [T, H, W, C].
Tensor vit_ret_forward(const Tensor& frames, const ViTModel& vit,
                       const ReTModel& ret);

inline Tensor vit_ret_forward(const FrameSequence& seq, const ViTModel& vit,
                              const ReTModel& ret) {
  return vit_ret_forward(seq.frames, vit, ret);
}

/// Trains the image model on whole sequences by averaging the per-frame
/// class probabilities; the sequence label supervises the average.
std::pair<ViTModel, TrainHistory> vit_train(const DatasetContainer& train,
                                            const DatasetContainer& valid,
                                            const ModelConfig& config,
                                            std::uint64_t seed);

struct ViTReTModel {
  ViTModel vit;
  ReTModel ret;
};

std::vector<Tensor*> vit_ret_param_list(ViTReTModel& model);

ViTReTModel make_vit_ret_model(const ModelConfig& config, std::uint64_t seed);

/// End-to-end training of the two-stage pipeline: gradients flow through the
/// sequence classifier into the per-frame feature extractor.
std::pair<ViTReTModel, TrainHistory> vit_ret_train(const DatasetContainer& train,
                                                   const DatasetContainer& valid,
                                                   const ModelConfig& config,
                                                   std::uint64_t seed);

}  // namespace vitret
