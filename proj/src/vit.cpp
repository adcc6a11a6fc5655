#include "vitret/vit.hpp"

#include <sstream>

#include "vitret/ops.hpp"

namespace vitret {

PatchSequence extract_patches(const Tensor& image, std::size_t p) {
  if (image.rank() != 3) {
    throw ShapeError("extract_patches: expected an [H x W x C] image, got " +
                     shape_str(image.shape()));
  }
  if (p == 0) throw ValueError("extract_patches: patch size must be positive");
  const std::size_t h = image.dim(0), w = image.dim(1), c = image.dim(2);
  if (h % p != 0 || w % p != 0) {
    std::ostringstream msg;
    msg << "extract_patches: image " << h << "x" << w
        << " is not divisible by patch size " << p;
    throw ValueError(msg.str());
  }
  const std::size_t rows = h / p, cols = w / p;
  PatchSequence seq;
  seq.patch_size = p;
  seq.height = h;
  seq.width = w;
  seq.channels = c;
  seq.patches = Tensor({rows * cols, p * p * c});
  const double* src = image.data().data();
  double* dst = seq.patches.data().data();
  for (std::size_t pr = 0; pr < rows; ++pr) {
    for (std::size_t pc = 0; pc < cols; ++pc) {
      double* patch = dst + (pr * cols + pc) * p * p * c;
      for (std::size_t dy = 0; dy < p; ++dy) {
        const double* line = src + ((pr * p + dy) * w + pc * p) * c;
        for (std::size_t i = 0; i < p * c; ++i) patch[dy * p * c + i] = line[i];
      }
    }
  }
  return seq;
}

Tensor reassemble(const PatchSequence& seq) {
  const std::size_t p = seq.patch_size;
  const std::size_t h = seq.height, w = seq.width, c = seq.channels;
  if (p == 0 || h == 0 || w == 0 || c == 0 || h % p != 0 || w % p != 0) {
    throw ValueError("reassemble: inconsistent patch metadata");
  }
  const std::size_t rows = h / p, cols = w / p;
  if (seq.patches.rank() != 2 || seq.patches.dim(0) != rows * cols ||
      seq.patches.dim(1) != p * p * c) {
    std::ostringstream msg;
    msg << "reassemble: patches " << shape_str(seq.patches.shape())
        << " do not match a " << h << "x" << w << "x" << c << " image with patch size "
        << p;
    throw ValueError(msg.str());
  }
  Tensor image({h, w, c});
  const double* src = seq.patches.data().data();
  double* dst = image.data().data();
  for (std::size_t pr = 0; pr < rows; ++pr) {
    for (std::size_t pc = 0; pc < cols; ++pc) {
      const double* patch = src + (pr * cols + pc) * p * p * c;
      for (std::size_t dy = 0; dy < p; ++dy) {
        double* line = dst + ((pr * p + dy) * w + pc * p) * c;
        for (std::size_t i = 0; i < p * c; ++i) line[i] = patch[dy * p * c + i];
      }
    }
  }
  return image;
}

ViTModel make_vit_model(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  const std::size_t p = config.patch_size;
  if (config.image_height % p != 0 || config.image_width % p != 0) {
    std::ostringstream msg;
    msg << "make_vit_model: image " << config.image_height << "x" << config.image_width
        << " is not divisible by patch size " << p;
    throw ValueError(msg.str());
  }
  std::mt19937_64 rng(seed);
  ViTModel model;
  model.config = config;
  model.num_patches =
      (config.image_height / p) * (config.image_width / p);
  const std::size_t patch_values = p * p * config.channels;
  model.w_patch = glorot_uniform({patch_values, config.projection_dim}, rng);
  model.b_patch = Tensor::zeros({config.projection_dim});
  model.pe = positional_encoding(model.num_patches, config.projection_dim);
  for (std::size_t l = 0; l < config.transformer_layers; ++l) {
    model.encoders.push_back(make_encoder_params(
        config.projection_dim, config.num_heads, config.dense_dim, config.activation,
        rng));
  }
  model.w_cls = glorot_uniform(
      {model.num_patches * config.projection_dim, config.num_classes}, rng);
  model.b_cls = Tensor::zeros({config.num_classes});
  for (Tensor* t : vit_param_list(model)) t->set_requires_grad(true);
  return model;
}

std::vector<Tensor*> vit_param_list(ViTModel& model) {
  std::vector<Tensor*> out{&model.w_patch, &model.b_patch};
  for (EncoderParams& enc : model.encoders) {
    for (Tensor* t : encoder_param_list(enc)) out.push_back(t);
  }
  out.push_back(&model.w_cls);
  out.push_back(&model.b_cls);
  return out;
}

Tensor vit_encode(const Tensor& image, const ViTModel& model) {
  if (image.rank() != 3 || image.dim(0) != model.config.image_height ||
      image.dim(1) != model.config.image_width ||
      image.dim(2) != model.config.channels) {
    std::ostringstream msg;
    msg << "vit_encode: image " << shape_str(image.shape()) << " does not match "
        << model.config.image_height << "x" << model.config.image_width << "x"
        << model.config.channels;
    throw ShapeError(msg.str());
  }
  PatchSequence seq = extract_patches(image, model.config.patch_size);
  Tensor x = add_rowvec(matmul(seq.patches, model.w_patch), model.b_patch);
  x = add(x, model.pe.table);
  for (const EncoderParams& enc : model.encoders) x = encoder_block(x, enc);
  return x;
}

Tensor vit_forward(const Tensor& image, const ViTModel& model) {
  Tensor encoded = vit_encode(image, model);
  Tensor flat = reshape(encoded, {model.num_patches * model.config.projection_dim});
  return dense(flat, model.w_cls, model.b_cls, Activation::Softmax);
}

Tensor vit_features(const Tensor& image, const ViTModel& model) {
  return mean_rows(vit_encode(image, model));
}

namespace {

void check_image_dims(const DatasetContainer& ds, const ModelConfig& config,
                      const char* which) {
  if (ds.height() != config.image_height || ds.width() != config.image_width ||
      ds.channels() != config.channels) {
    std::ostringstream msg;
    msg << which << " dataset frames are " << ds.height() << "x" << ds.width() << "x"
        << ds.channels() << " but the config expects " << config.image_height << "x"
        << config.image_width << "x" << config.channels;
    throw ValueError(msg.str());
  }
}

// constant [H, W, C] view of frame t; frames hold raw data, not tape nodes
Tensor frame_at(const Tensor& frames, std::size_t t) {
  const std::size_t h = frames.dim(1), w = frames.dim(2), c = frames.dim(3);
  Tensor frame({h, w, c});
  const double* src = frames.data().data() + t * h * w * c;
  std::copy(src, src + h * w * c, frame.data().data());
  return frame;
}

}  // namespace

Tensor vit_ret_forward(const Tensor& frames, const ViTModel& vit,
                       const ReTModel& ret) {
  if (frames.rank() != 4) {
    throw ShapeError("vit_ret_forward: expected [T x H x W x C] frames, got " +
                     shape_str(frames.shape()));
  }
  if (frames.dim(0) != ret.config.sequence_length) {
    std::ostringstream msg;
    msg << "vit_ret_forward: " << frames.dim(0) << " frames but the sequence model expects "
        << ret.config.sequence_length;
    throw ShapeError(msg.str());
  }
  if (ret.input_dim != vit.feature_dim()) {
    std::ostringstream msg;
    msg << "vit_ret_forward: feature size " << vit.feature_dim()
        << " does not match sequence-model input size " << ret.input_dim;
    throw ShapeError(msg.str());
  }
  std::vector<Tensor> features;
  features.reserve(frames.dim(0));
  for (std::size_t t = 0; t < frames.dim(0); ++t) {
    features.push_back(vit_features(frame_at(frames, t), vit));
  }
  return ret_forward(stack_rows(features), ret);
}

std::pair<ViTModel, TrainHistory> vit_train(const DatasetContainer& train,
                                            const DatasetContainer& valid,
                                            const ModelConfig& config,
                                            std::uint64_t seed) {
  check_image_dims(train, config, "train");
  check_image_dims(valid, config, "valid");
  ViTModel model = make_vit_model(config, seed);
  TrainTask task;
  task.params = vit_param_list(model);
  task.forward = [&model](const Tensor& frames) {
    std::vector<Tensor> frame_probs;
    frame_probs.reserve(frames.dim(0));
    for (std::size_t t = 0; t < frames.dim(0); ++t) {
      frame_probs.push_back(vit_forward(frame_at(frames, t), model));
    }
    return mean_rows(stack_rows(frame_probs));
  };
  TrainHistory history = fit(task, train, valid, config, seed);
  return {std::move(model), std::move(history)};
}

ViTReTModel make_vit_ret_model(const ModelConfig& config, std::uint64_t seed) {
  ViTReTModel model;
  model.vit = make_vit_model(config, seed);
  model.ret = make_ret_model(config, config.projection_dim, seed + 1);
  return model;
}

std::vector<Tensor*> vit_ret_param_list(ViTReTModel& model) {
  std::vector<Tensor*> out = vit_param_list(model.vit);
  for (Tensor* t : ret_param_list(model.ret)) out.push_back(t);
  return out;
}

std::pair<ViTReTModel, TrainHistory> vit_ret_train(const DatasetContainer& train,
                                                   const DatasetContainer& valid,
                                                   const ModelConfig& config,
                                                   std::uint64_t seed) {
  check_image_dims(train, config, "train");
  check_image_dims(valid, config, "valid");
  ViTReTModel model = make_vit_ret_model(config, seed);
  TrainTask task;
  task.params = vit_ret_param_list(model);
  task.forward = [&model](const Tensor& frames) {
    return vit_ret_forward(frames, model.vit, model.ret);
  };
  TrainHistory history = fit(task, train, valid, config, seed);
  return {std::move(model), std::move(history)};
}

}  // namespace vitret
