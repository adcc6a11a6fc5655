#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vitret {

class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValueError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& s);
std::size_t shape_size(const Shape& s);

class GradTape;

/// Dense n-dimensional array of f64 values in row-major order. Copies are
/// deep; a copy of a tensor recorded on a tape refers to the same tape node.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double v);
  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor ones(Shape shape);
  static Tensor full(Shape shape, double v);
  static Tensor vec(std::vector<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  const std::vector<double>& vec_data() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator()(std::size_t i, std::size_t j);
  double operator()(std::size_t i, std::size_t j) const;
  double& operator()(std::size_t i, std::size_t j, std::size_t k);
  double operator()(std::size_t i, std::size_t j, std::size_t k) const;
  double& operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l);
  double operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const;

  /// Value of a single-element tensor.
  double item() const;

  bool requires_grad() const { return requires_grad_; }
  Tensor& set_requires_grad(bool v) {
    requires_grad_ = v;
    return *this;
  }

  /// Handle into the tape this tensor was recorded on, -1 if none.
  int node() const { return node_; }
  std::uint64_t tape_id() const { return tape_id_; }

  bool all_finite() const;

 private:
  Shape shape_;
  std::vector<double> data_;
  bool requires_grad_ = false;
  // Cached tape handle. Ops fill this in when a tape is active; a handle is
  // only meaningful while its tape is alive and matches tape_id_.
  mutable int node_ = -1;
  mutable std::uint64_t tape_id_ = 0;

  friend class GradTape;
};

/// node handle -> gradient, one entry per requires_grad leaf
using GradMap = std::map<int, Tensor>;

/// Records primitive operations in execution order so parents always precede
/// their consumers. backward() walks the list once in reverse and may run at
/// most once per tape.
class GradTape {
 public:
  // Receives the upstream gradient, returns one gradient buffer per parent
  // (in the order the parents were registered).
  using BackFn =
      std::function<std::vector<std::vector<double>>(const std::vector<double>&)>;

  GradTape();
  GradTape(const GradTape&) = delete;
  GradTape& operator=(const GradTape&) = delete;

  /// Registers t as a leaf on this tape (idempotent) and returns its handle.
  int leaf(const Tensor& t);

  /// Handle of t on this tape; auto-registers requires_grad tensors as
  /// leaves. Returns -1 for plain data tensors.
  int node_of(const Tensor& t);

  int record(std::vector<int> parents, Shape out_shape, BackFn back);
  void bind(const Tensor& out, int node) const;

  /// Reverse accumulation from a scalar loss recorded on this tape. Consumes
  /// the tape; calling twice throws. Every leaf gets an entry (zeros when the
  /// loss does not depend on it).
  GradMap backward(const Tensor& loss);

  std::size_t node_count() const { return nodes_.size(); }
  std::uint64_t id() const { return id_; }
  bool consumed() const { return consumed_; }

 private:
  struct Node {
    std::vector<int> parents;
    Shape shape;
    BackFn back;  // null for leaves
    bool is_leaf = false;
  };
  std::vector<Node> nodes_;
  std::uint64_t id_;
  bool consumed_ = false;
};

/// Makes a tape the recording target for ops on this thread. Scopes nest;
/// the innermost wins.
class TapeScope {
 public:
  explicit TapeScope(GradTape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  GradTape* previous_;
};

/// The tape ops currently record onto, or nullptr (tape-free evaluation).
GradTape* active_tape();

/// Gradient for t from a backward() result; zeros(t.shape) when t never
/// participated.
Tensor grad_for(const GradMap& grads, const Tensor& t);

}  // namespace vitret
