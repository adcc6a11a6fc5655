#include "vitret/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace vitret {

namespace {

constexpr char kMagic[4] = {'V', 'R', 'T', 'M'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(bytes, 4);
}

void write_f64(std::ostream& os, double v) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  os.write(bytes, 8);
}

void write_string(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t read_u32(std::istream& is) {
  unsigned char bytes[4];
  if (!is.read(reinterpret_cast<char*>(bytes), 4)) {
    throw DataError("checkpoint: unexpected end of file");
  }
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return v;
}

double read_f64(std::istream& is) {
  unsigned char bytes[8];
  if (!is.read(reinterpret_cast<char*>(bytes), 8)) {
    throw DataError("checkpoint: unexpected end of file");
  }
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

std::string read_string(std::istream& is) {
  const std::uint32_t len = read_u32(is);
  if (len > (1u << 20)) throw DataError("checkpoint: unreasonable string length");
  std::string s(len, '\0');
  if (len > 0 && !is.read(s.data(), len)) {
    throw DataError("checkpoint: unexpected end of file");
  }
  return s;
}

void write_config(std::ostream& os, const ModelConfig& c) {
  for (std::size_t field :
       {c.sequence_length, c.image_height, c.image_width, c.channels, c.projection_dim,
        c.dense_dim, c.num_heads, c.patch_size, c.lstm_layers, c.lstm_units,
        c.transformer_layers, c.num_classes, c.batch_size, c.epochs}) {
    write_u32(os, static_cast<std::uint32_t>(field));
  }
  write_f64(os, c.learning_rate);
  write_string(os, activation_name(c.activation));
}

ModelConfig read_config(std::istream& is) {
  ModelConfig c;
  for (std::size_t* field :
       {&c.sequence_length, &c.image_height, &c.image_width, &c.channels,
        &c.projection_dim, &c.dense_dim, &c.num_heads, &c.patch_size, &c.lstm_layers,
        &c.lstm_units, &c.transformer_layers, &c.num_classes, &c.batch_size,
        &c.epochs}) {
    *field = read_u32(is);
  }
  c.learning_rate = read_f64(is);
  c.activation = activation_from_name(read_string(is));
  return c;
}

void write_tensors(std::ostream& os, const std::vector<Tensor*>& params) {
  write_u32(os, static_cast<std::uint32_t>(params.size()));
  for (const Tensor* t : params) {
    write_u32(os, static_cast<std::uint32_t>(t->rank()));
    for (std::size_t d = 0; d < t->rank(); ++d) {
      write_u32(os, static_cast<std::uint32_t>(t->dim(d)));
    }
    for (std::size_t i = 0; i < t->size(); ++i) write_f64(os, (*t)[i]);
  }
}

void read_tensors(std::istream& is, const std::vector<Tensor*>& params) {
  const std::uint32_t count = read_u32(is);
  if (count != params.size()) {
    std::ostringstream msg;
    msg << "checkpoint: " << count << " tensors in file but the model has "
        << params.size();
    throw DataError(msg.str());
  }
  for (Tensor* t : params) {
    const std::uint32_t rank = read_u32(is);
    Shape shape(rank);
    for (std::uint32_t d = 0; d < rank; ++d) shape[d] = read_u32(is);
    if (shape != t->shape()) {
      std::ostringstream msg;
      msg << "checkpoint: tensor " << shape_str(shape) << " in file but the model "
          << "expects " << shape_str(t->shape());
      throw DataError(msg.str());
    }
    for (std::size_t i = 0; i < t->size(); ++i) (*t)[i] = read_f64(is);
  }
}

std::ofstream open_output(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("checkpoint: cannot open " + path + " for writing");
  os.write(kMagic, 4);
  write_u32(os, kVersion);
  return os;
}

std::ifstream open_input(const std::string& path, std::string* family) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("checkpoint: cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != std::string(kMagic, 4)) {
    throw DataError("checkpoint: " + path + " is not a model checkpoint");
  }
  const std::uint32_t version = read_u32(is);
  if (version != kVersion) {
    std::ostringstream msg;
    msg << "checkpoint: unsupported format version " << version;
    throw DataError(msg.str());
  }
  *family = read_string(is);
  return is;
}

void require_family(const std::string& got, const std::string& want) {
  if (got != want) {
    throw DataError("checkpoint: file holds a \"" + got + "\" model, expected \"" +
                    want + "\"");
  }
}

void finish(std::ostream& os, const std::string& path) {
  if (!os) throw DataError("checkpoint: failed writing " + path);
}

}  // namespace

void save_checkpoint(const std::string& path, const ReTModel& model) {
  std::ofstream os = open_output(path);
  write_string(os, "ret");
  write_config(os, model.config);
  write_u32(os, static_cast<std::uint32_t>(model.input_dim));
  write_tensors(os, ret_param_list(const_cast<ReTModel&>(model)));
  finish(os, path);
}

void save_checkpoint(const std::string& path, const LstmModel& model) {
  std::ofstream os = open_output(path);
  write_string(os, "lstm");
  write_config(os, model.config);
  write_u32(os, static_cast<std::uint32_t>(model.input_dim));
  write_tensors(os, lstm_param_list(const_cast<LstmModel&>(model)));
  finish(os, path);
}

void save_checkpoint(const std::string& path, const ViTModel& model) {
  std::ofstream os = open_output(path);
  write_string(os, "vit");
  write_config(os, model.config);
  write_u32(os, 0);  // input size is implied by the patch geometry
  write_tensors(os, vit_param_list(const_cast<ViTModel&>(model)));
  finish(os, path);
}

void save_checkpoint(const std::string& path, const ViTReTModel& model) {
  std::ofstream os = open_output(path);
  write_string(os, "vit_ret");
  write_config(os, model.vit.config);
  write_u32(os, static_cast<std::uint32_t>(model.ret.input_dim));
  write_tensors(os, vit_ret_param_list(const_cast<ViTReTModel&>(model)));
  finish(os, path);
}

std::string checkpoint_family(const std::string& path) {
  std::string family;
  open_input(path, &family);
  return family;
}

ReTModel load_ret_checkpoint(const std::string& path) {
  std::string family;
  std::ifstream is = open_input(path, &family);
  require_family(family, "ret");
  ModelConfig config = read_config(is);
  const std::size_t input_dim = read_u32(is);
  ReTModel model = make_ret_model(config, input_dim, 0);
  read_tensors(is, ret_param_list(model));
  return model;
}

LstmModel load_lstm_checkpoint(const std::string& path) {
  std::string family;
  std::ifstream is = open_input(path, &family);
  require_family(family, "lstm");
  ModelConfig config = read_config(is);
  const std::size_t input_dim = read_u32(is);
  LstmModel model = make_lstm_model(config, input_dim, 0);
  read_tensors(is, lstm_param_list(model));
  return model;
}

ViTModel load_vit_checkpoint(const std::string& path) {
  std::string family;
  std::ifstream is = open_input(path, &family);
  require_family(family, "vit");
  ModelConfig config = read_config(is);
  read_u32(is);  // reserved input-size slot
  ViTModel model = make_vit_model(config, 0);
  read_tensors(is, vit_param_list(model));
  return model;
}

ViTReTModel load_vit_ret_checkpoint(const std::string& path) {
  std::string family;
  std::ifstream is = open_input(path, &family);
  require_family(family, "vit_ret");
  ModelConfig config = read_config(is);
  read_u32(is);  // the sequence model's input is the feature size
  ViTReTModel model = make_vit_ret_model(config, 0);
  read_tensors(is, vit_ret_param_list(model));
  return model;
}

}  // namespace vitret
