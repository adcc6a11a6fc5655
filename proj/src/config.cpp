#include "vitret/config.hpp"

namespace vitret {

namespace {
void require(bool ok, const char* what) {
  if (!ok) throw ValueError(std::string("config: ") + what);
}
}  // namespace

void ModelConfig::validate() const {
  require(sequence_length >= 1, "sequence_length must be >= 1");
  require(image_height >= 1 && image_width >= 1, "image dimensions must be >= 1");
  require(channels == 1 || channels == 3, "channels must be 1 or 3");
  require(projection_dim >= 2, "projection_dim must be >= 2");
  require(projection_dim % 2 == 0, "projection_dim must be even");
  require(dense_dim >= 1, "dense_dim must be >= 1");
  require(num_heads >= 1, "num_heads must be >= 1");
  require(projection_dim % num_heads == 0, "num_heads must divide projection_dim");
  require(patch_size >= 1, "patch_size must be >= 1");
  require(lstm_layers >= 1, "lstm_layers must be >= 1");
  require(lstm_units >= 1, "lstm_units must be >= 1");
  require(transformer_layers >= 1, "transformer_layers must be >= 1");
  require(num_classes >= 2, "num_classes must be >= 2");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(epochs >= 1, "epochs must be >= 1");
  require(learning_rate >= 0.0, "learning_rate must be nonnegative");
}

}  // namespace vitret
