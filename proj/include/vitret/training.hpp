#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "vitret/config.hpp"
#include "vitret/data.hpp"
#include "vitret/optim.hpp"

namespace vitret {

struct EpochStats {
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double valid_loss = 0.0;
  double valid_accuracy = 0.0;
};
using TrainHistory = std::vector<EpochStats>;

/// Model adapter for the shared training loop. forward maps one sample's
/// frames [T,H,W,C] to class probabilities [num_classes]; params lists every
/// trainable tensor (declaration order).
struct TrainTask {
  std::function<Tensor(const Tensor& frames)> forward;
  std::vector<Tensor*> params;
};

/// Epochs x (shuffle, batch, forward, cross-entropy, backward, Adam step),
/// recording train and held-out loss/accuracy per epoch. Deterministic given
/// the seed. Throws on labels outside config.num_classes or a sequence-length
/// mismatch with the config.
TrainHistory fit(const TrainTask& task, const DatasetContainer& train,
                 const DatasetContainer& valid, const ModelConfig& config,
                 std::uint64_t seed);

/// Tape-free mean loss and accuracy of a per-sample forward over a dataset.
std::pair<double, double> evaluate(const std::function<Tensor(const Tensor&)>& forward,
                                   const DatasetContainer& ds,
                                   std::size_t num_classes);

}  // namespace vitret
