#include "vitret/training.hpp"

#include "vitret/ops.hpp"

namespace vitret {

namespace {

void check_labels(const DatasetContainer& ds, std::size_t num_classes,
                  const char* which) {
  for (const FrameSequence& s : ds.samples()) {
    if (s.label < 0 || static_cast<std::size_t>(s.label) >= num_classes) {
      throw ValueError(std::string(which) + " sample '" + s.source_id + "' has label " +
                       std::to_string(s.label) + " but the model has " +
                       std::to_string(num_classes) + " classes");
    }
  }
}

}  // namespace

std::pair<double, double> evaluate(const std::function<Tensor(const Tensor&)>& forward,
                                   const DatasetContainer& ds,
                                   std::size_t num_classes) {
  check_labels(ds, num_classes, "evaluation");
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (const FrameSequence& s : ds.samples()) {
    Tensor probs = forward(s.frames);
    if (probs.rank() != 1 || probs.dim(0) != num_classes) {
      throw ShapeError("forward produced " + shape_str(probs.shape()) + ", expected [" +
                       std::to_string(num_classes) + "]");
    }
    Tensor as_row = reshape(probs, {1, num_classes});
    loss_sum += cross_entropy(as_row, {s.label}).item();
    if (argmax(probs) == static_cast<std::size_t>(s.label)) ++correct;
  }
  const double n = static_cast<double>(ds.size());
  return {loss_sum / n, static_cast<double>(correct) / n};
}

TrainHistory fit(const TrainTask& task, const DatasetContainer& train,
                 const DatasetContainer& valid, const ModelConfig& config,
                 std::uint64_t seed) {
  config.validate();
  check_labels(train, config.num_classes, "training");
  check_labels(valid, config.num_classes, "validation");
  if (train.sequence_length() != config.sequence_length) {
    throw ValueError("dataset sequence length " +
                     std::to_string(train.sequence_length()) +
                     " does not match config " +
                     std::to_string(config.sequence_length));
  }

  Adam optimizer(config.learning_rate);
  BatchGenerator batches(train, config.batch_size, seed, true);
  TrainHistory history;
  history.reserve(config.epochs);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t correct = 0;
    Batch batch;
    while (batches.next(batch)) {
      GradTape tape;
      TapeScope scope(tape);
      for (Tensor* p : task.params) tape.leaf(*p);

      std::vector<Tensor> prob_rows;
      prob_rows.reserve(batch.size());
      for (const Tensor& frames : batch.sequences) {
        prob_rows.push_back(task.forward(frames));
      }
      Tensor probs = stack_rows(prob_rows);
      Tensor loss = cross_entropy(probs, batch.labels);

      loss_sum += loss.item() * static_cast<double>(batch.size());
      const std::size_t classes = probs.dim(1);
      for (std::size_t i = 0; i < batch.size(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < classes; ++j) {
          if (probs(i, j) > probs(i, best)) best = j;
        }
        if (best == static_cast<std::size_t>(batch.labels[i])) ++correct;
      }

      GradMap grads = tape.backward(loss);
      optimizer.step(task.params, grads);
    }
    batches.reset();

    EpochStats stats;
    stats.train_loss = loss_sum / static_cast<double>(train.size());
    stats.train_accuracy =
        static_cast<double>(correct) / static_cast<double>(train.size());
    auto [vl, va] = evaluate(task.forward, valid, config.num_classes);
    stats.valid_loss = vl;
    stats.valid_accuracy = va;
    history.push_back(stats);
  }
  return history;
}

}  // namespace vitret
