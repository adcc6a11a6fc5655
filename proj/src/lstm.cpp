#include "vitret/lstm.hpp"

#include <sstream>

#include "vitret/ops.hpp"

namespace vitret {

LstmParams make_lstm_params(std::size_t input_size, std::size_t hidden_size,
                            std::mt19937_64& rng) {
  if (input_size == 0 || hidden_size == 0) {
    throw ValueError("make_lstm_params: sizes must be positive");
  }
  LstmParams p;
  p.input_size = input_size;
  p.hidden_size = hidden_size;
  for (Tensor* wx : {&p.wx_i, &p.wx_f, &p.wx_g, &p.wx_o}) {
    *wx = glorot_uniform({input_size, hidden_size}, rng);
  }
  for (Tensor* wh : {&p.wh_i, &p.wh_f, &p.wh_g, &p.wh_o}) {
    *wh = glorot_uniform({hidden_size, hidden_size}, rng);
  }
  p.b_i = Tensor::zeros({hidden_size});
  p.b_f = Tensor::full({hidden_size}, 1.0);
  p.b_g = Tensor::zeros({hidden_size});
  p.b_o = Tensor::zeros({hidden_size});
  return p;
}

std::vector<Tensor*> lstm_param_list(LstmParams& p) {
  return {&p.wx_i, &p.wh_i, &p.b_i, &p.wx_f, &p.wh_f, &p.b_f,
          &p.wx_g, &p.wh_g, &p.b_g, &p.wx_o, &p.wh_o, &p.b_o};
}

LstmModel make_lstm_model(const ModelConfig& config, std::size_t input_dim,
                          std::uint64_t seed) {
  config.validate();
  if (input_dim == 0) throw ValueError("make_lstm_model: input_dim must be positive");
  std::mt19937_64 rng(seed);
  LstmModel model;
  model.config = config;
  model.input_dim = input_dim;
  std::size_t in = input_dim;
  for (std::size_t l = 0; l < config.lstm_layers; ++l) {
    model.layers.push_back(make_lstm_params(in, config.lstm_units, rng));
    in = config.lstm_units;
  }
  model.w_cls = glorot_uniform({config.lstm_units, config.num_classes}, rng);
  model.b_cls = Tensor::zeros({config.num_classes});
  for (Tensor* t : lstm_param_list(model)) t->set_requires_grad(true);
  return model;
}

std::vector<Tensor*> lstm_param_list(LstmModel& model) {
  std::vector<Tensor*> out;
  for (LstmParams& layer : model.layers) {
    for (Tensor* t : lstm_param_list(layer)) out.push_back(t);
  }
  out.push_back(&model.w_cls);
  out.push_back(&model.b_cls);
  return out;
}

std::size_t lstm_value_count(const LstmModel& model) {
  std::size_t n = 0;
  for (const LstmParams& p : model.layers) {
    n += (p.wx_i.size() + p.wh_i.size() + p.b_i.size()) * 4;
  }
  return n + model.w_cls.size() + model.b_cls.size();
}

namespace {

// sigma_or_tanh(x wx + h wh + b) for one gate, all in [1 x hidden] space
Tensor gate(const Tensor& x2, const Tensor& h2, const Tensor& wx,
            const Tensor& wh, const Tensor& b, bool squash_tanh) {
  Tensor pre = add_rowvec(add(matmul(x2, wx), matmul(h2, wh)), b);
  return squash_tanh ? tanh(pre) : sigmoid(pre);
}

}  // namespace

std::pair<Tensor, Tensor> lstm_cell(const Tensor& x, const Tensor& h,
                                    const Tensor& c, const LstmParams& p) {
  if (x.rank() != 1 || x.dim(0) != p.input_size) {
    std::ostringstream msg;
    msg << "lstm_cell: input " << shape_str(x.shape()) << " does not match input size "
        << p.input_size;
    throw ShapeError(msg.str());
  }
  if (h.rank() != 1 || h.dim(0) != p.hidden_size || c.rank() != 1 ||
      c.dim(0) != p.hidden_size) {
    std::ostringstream msg;
    msg << "lstm_cell: state " << shape_str(h.shape()) << "/" << shape_str(c.shape())
        << " does not match hidden size " << p.hidden_size;
    throw ShapeError(msg.str());
  }
  Tensor x2 = reshape(x, {1, p.input_size});
  Tensor h2 = reshape(h, {1, p.hidden_size});
  Tensor c2 = reshape(c, {1, p.hidden_size});

  Tensor i = gate(x2, h2, p.wx_i, p.wh_i, p.b_i, false);
  Tensor f = gate(x2, h2, p.wx_f, p.wh_f, p.b_f, false);
  Tensor g = gate(x2, h2, p.wx_g, p.wh_g, p.b_g, true);
  Tensor o = gate(x2, h2, p.wx_o, p.wh_o, p.b_o, false);

  Tensor c_next = add(mul(f, c2), mul(i, g));
  Tensor h_next = mul(o, tanh(c_next));
  return {reshape(h_next, {p.hidden_size}), reshape(c_next, {p.hidden_size})};
}

Tensor lstm_forward(const Tensor& features, const LstmModel& model) {
  if (features.rank() != 2 || features.dim(1) != model.input_dim) {
    std::ostringstream msg;
    msg << "lstm_forward: features " << shape_str(features.shape())
        << " do not match input size " << model.input_dim;
    throw ShapeError(msg.str());
  }
  if (features.dim(0) == 0) throw ValueError("lstm_forward: empty sequence");

  const std::size_t seq = features.dim(0);
  Tensor inputs = features;
  Tensor last_hidden;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const LstmParams& layer = model.layers[l];
    const bool feeds_next = l + 1 < model.layers.size();
    Tensor h = Tensor::zeros({layer.hidden_size});
    Tensor c = Tensor::zeros({layer.hidden_size});
    std::vector<Tensor> outputs;
    if (feeds_next) outputs.reserve(seq);
    for (std::size_t t = 0; t < seq; ++t) {
      auto [h_next, c_next] = lstm_cell(row(inputs, t), h, c, layer);
      h = h_next;
      c = c_next;
      if (feeds_next) outputs.push_back(h);
    }
    last_hidden = h;
    if (feeds_next) inputs = stack_rows(outputs);
  }
  return dense(last_hidden, model.w_cls, model.b_cls, Activation::Softmax);
}

std::pair<LstmModel, TrainHistory> lstm_train(const DatasetContainer& train,
                                              const DatasetContainer& valid,
                                              const ModelConfig& config,
                                              std::uint64_t seed) {
  const std::size_t input_dim = train.height() * train.width() * train.channels();
  LstmModel model = make_lstm_model(config, input_dim, seed);
  TrainTask task;
  task.params = lstm_param_list(model);
  task.forward = [&model, input_dim](const Tensor& frames) {
    Tensor features = reshape(frames, {frames.dim(0), input_dim});
    return lstm_forward(features, model);
  };
  TrainHistory history = fit(task, train, valid, config, seed);
  return {std::move(model), std::move(history)};
}

}  // namespace vitret
