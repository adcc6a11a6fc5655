#include "vitret/tensor.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

namespace vitret {

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << 'x';
    os << s[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_size(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t d : s) n *= d;
  return n;
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(shape_size(shape_), 0.0) {
  for (std::size_t d : shape_) {
    if (d == 0) throw ShapeError("zero-sized dimension in shape " + shape_str(shape_));
  }
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_size(shape_) != data_.size()) {
    throw ShapeError("shape " + shape_str(shape_) + " expects " +
                     std::to_string(shape_size(shape_)) + " values, got " +
                     std::to_string(data_.size()));
  }
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::ones(Shape shape) { return full(std::move(shape), 1.0); }

Tensor Tensor::full(Shape shape, double v) {
  Tensor t(std::move(shape));
  for (double& x : t.data_) x = v;
  return t;
}

Tensor Tensor::vec(std::vector<double> values) {
  Shape s{values.size()};
  return Tensor(std::move(s), std::move(values));
}

double& Tensor::operator()(std::size_t i, std::size_t j) {
  return data_[i * shape_[1] + j];
}
double Tensor::operator()(std::size_t i, std::size_t j) const {
  return data_[i * shape_[1] + j];
}
double& Tensor::operator()(std::size_t i, std::size_t j, std::size_t k) {
  return data_[(i * shape_[1] + j) * shape_[2] + k];
}
double Tensor::operator()(std::size_t i, std::size_t j, std::size_t k) const {
  return data_[(i * shape_[1] + j) * shape_[2] + k];
}
double& Tensor::operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
  return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
}
double Tensor::operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
  return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
}

double Tensor::item() const {
  if (size() != 1) {
    throw ShapeError("item() on tensor of shape " + shape_str(shape_));
  }
  return data_[0];
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

namespace {
std::atomic<std::uint64_t> g_tape_counter{1};
thread_local GradTape* g_active_tape = nullptr;
}  // namespace

GradTape::GradTape() : id_(g_tape_counter.fetch_add(1)) {}

int GradTape::leaf(const Tensor& t) {
  if (t.tape_id_ == id_ && t.node_ >= 0) return t.node_;
  Node n;
  n.shape = t.shape();
  n.is_leaf = true;
  nodes_.push_back(std::move(n));
  t.node_ = static_cast<int>(nodes_.size() - 1);
  t.tape_id_ = id_;
  return t.node_;
}

int GradTape::node_of(const Tensor& t) {
  if (t.tape_id_ == id_ && t.node_ >= 0) return t.node_;
  if (t.requires_grad()) return leaf(t);
  return -1;
}

int GradTape::record(std::vector<int> parents, Shape out_shape, BackFn back) {
  Node n;
  n.parents = std::move(parents);
  n.shape = std::move(out_shape);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size() - 1);
}

void GradTape::bind(const Tensor& out, int node) const {
  out.node_ = node;
  out.tape_id_ = id_;
}

GradMap GradTape::backward(const Tensor& loss) {
  if (consumed_) throw TapeError("backward called twice on the same tape");
  if (loss.size() != 1) {
    throw ShapeError("backward requires a scalar loss, got shape " + shape_str(loss.shape()));
  }
  if (loss.tape_id_ != id_ || loss.node_ < 0) {
    throw TapeError("loss was not recorded on this tape");
  }
  consumed_ = true;

  std::vector<std::vector<double>> grads(nodes_.size());
  grads[loss.node_] = {1.0};

  for (int i = loss.node_; i >= 0; --i) {
    Node& node = nodes_[i];
    if (grads[i].empty() || !node.back) continue;
    std::vector<std::vector<double>> parent_grads = node.back(grads[i]);
    for (std::size_t p = 0; p < node.parents.size(); ++p) {
      int parent = node.parents[p];
      std::vector<double>& acc = grads[parent];
      std::vector<double>& g = parent_grads[p];
      if (acc.empty()) {
        acc = std::move(g);
      } else {
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += g[j];
      }
    }
    grads[i].clear();  // no longer needed
  }

  GradMap out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].is_leaf) continue;
    if (grads[i].empty()) {
      out.emplace(static_cast<int>(i), Tensor(nodes_[i].shape));
    } else {
      out.emplace(static_cast<int>(i), Tensor(nodes_[i].shape, std::move(grads[i])));
    }
  }
  return out;
}

TapeScope::TapeScope(GradTape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }
TapeScope::~TapeScope() { g_active_tape = previous_; }

GradTape* active_tape() { return g_active_tape; }

Tensor grad_for(const GradMap& grads, const Tensor& t) {
  if (t.node() >= 0) {
    auto it = grads.find(t.node());
    if (it != grads.end()) return it->second;
  }
  return Tensor(t.shape());
}

}  // namespace vitret
