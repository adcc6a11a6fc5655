#pragma once

#include <string>

#include "vitret/lstm.hpp"
#include "vitret/transformer.hpp"
#include "vitret/vit.hpp"

namespace vitret {

// Checkpoint files: magic "VRTM", a format version, a family tag, the full
// hyperparameter block, then every parameter tensor in declaration order as
// little-endian f64 with a shape header. Round-trips are bit-exact.

void save_checkpoint(const std::string& path, const ReTModel& model);
void save_checkpoint(const std::string& path, const LstmModel& model);
void save_checkpoint(const std::string& path, const ViTModel& model);
void save_checkpoint(const std::string& path, const ViTReTModel& model);

/// Family tag of a checkpoint ("ret", "lstm", "vit", "vit_ret") without
/// loading the tensors.
std::string checkpoint_family(const std::string& path);

ReTModel load_ret_checkpoint(const std::string& path);
LstmModel load_lstm_checkpoint(const std::string& path);
ViTModel load_vit_checkpoint(const std::string& path);
ViTReTModel load_vit_ret_checkpoint(const std::string& path);

}  // namespace vitret
