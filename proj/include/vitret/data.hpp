#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "vitret/config.hpp"
#include "vitret/tensor.hpp"

namespace vitret {

/// File-format and I/O failures (bad magic, truncation, unreadable paths).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One sample: T frames of H x W x C pixels in [0,1] plus its class label.
/// source_id is provenance metadata only (a path or generator tag); it never
/// participates in training.
struct FrameSequence {
  Tensor frames;  // [T, H, W, C]
  int label = 0;
  std::string source_id;
};

/// Immutable, homogeneous collection of frame sequences. Construction
/// validates shapes and labels and snaps pixel values to the f32 grid so that
/// container round-trips through disk are byte-lossless.
class DatasetContainer {
 public:
  DatasetContainer(std::vector<FrameSequence> samples,
                   std::vector<std::string> class_names);

  const std::vector<FrameSequence>& samples() const { return samples_; }
  const FrameSequence& sample(std::size_t i) const { return samples_.at(i); }
  const std::vector<std::string>& class_names() const { return class_names_; }

  std::size_t size() const { return samples_.size(); }
  std::size_t num_classes() const { return class_names_.size(); }
  std::size_t sequence_length() const { return t_; }
  std::size_t height() const { return h_; }
  std::size_t width() const { return w_; }
  std::size_t channels() const { return c_; }

 private:
  std::vector<FrameSequence> samples_;
  std::vector<std::string> class_names_;
  std::size_t t_ = 0, h_ = 0, w_ = 0, c_ = 0;
};

/// Evenly spaced temporal subsampling: index_i = floor(i * N / target_len).
/// Shorter inputs are padded by repeating the final frame.
Tensor subsample_frames(const Tensor& raw, std::size_t target_len);

/// The frame indices subsample_frames selects for an N-frame input.
std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t target_len);

/// Bilinear resize of one H x W x C frame (corner-aligned sampling grid).
Tensor resize_frame(const Tensor& frame, std::size_t out_h, std::size_t out_w);

void save_dataset(const DatasetContainer& ds, const std::string& path);
DatasetContainer load_dataset(const std::string& path);

/// One materialized batch of decoded samples.
struct Batch {
  std::vector<Tensor> sequences;  // each [T, H, W, C]
  std::vector<int> labels;
  std::size_t size() const { return sequences.size(); }
};

/// Yields ceil(n / batch_size) batches per epoch; the final batch may be
/// short. With shuffle on, the permutation is seed-deterministic and redrawn
/// by each reset(). Only the current batch's tensors are materialized.
class BatchGenerator {
 public:
  BatchGenerator(const DatasetContainer& ds, std::size_t batch_size,
                 std::uint64_t seed, bool shuffle);

  /// Fills out with the next batch; false once the epoch is exhausted.
  bool next(Batch& out);

  /// Starts the next epoch (redraws the shuffle order).
  void reset();

  std::size_t batches_per_epoch() const;

 private:
  const DatasetContainer* ds_;
  std::size_t batch_size_;
  bool shuffle_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

/// Desk-scale stand-in for a video activity dataset: a bright square moving
/// over a noisy background, where the class is the motion pattern (right,
/// left, up, down, two diagonals, a circular orbit, stationary blinking).
/// Frame 0 is identical across classes for a given sample index, so single
/// frames are deliberately ambiguous and classification requires temporal
/// information. Frames are H x W single-channel.
DatasetContainer synthetic_dataset(std::size_t num_classes,
                                   std::size_t samples_per_class, std::size_t t,
                                   std::size_t h, std::size_t w, std::uint64_t seed);

/// Reads root/<class_name>/<sample_id>/<frame files> (binary PGM P5 or PPM
/// P6, lexicographic frame order), subsamples to config.sequence_length and
/// resizes to config.image_height x image_width. Class labels follow sorted
/// class-directory order.
DatasetContainer ingest_image_directory(const std::string& root,
                                        const ModelConfig& config);

/// Seeded shuffle split; first fraction of the permuted samples becomes the
/// training container.
std::pair<DatasetContainer, DatasetContainer> split_dataset(
    const DatasetContainer& ds, double train_fraction, std::uint64_t seed);

/// Grayscale or RGB image in [0,1], shape [H, W, C].
Tensor load_image(const std::string& path);
void save_pgm(const Tensor& frame, const std::string& path);
void save_ppm(const Tensor& frame, const std::string& path);

}  // namespace vitret
