#include "vitret/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "vitret/kernels.hpp"

namespace vitret {

namespace {

using Buf = std::vector<double>;

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shapes " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()) + " differ");
  }
}

// Shared recording pattern: parents are the participating inputs only and the
// closure returns gradients in the same order.
struct Rec {
  GradTape* tape = nullptr;
  int na = -1, nb = -1;
  bool wa = false, wb = false;
  explicit operator bool() const { return tape && (wa || wb); }
};

Rec probe(const Tensor& a) {
  Rec r;
  r.tape = active_tape();
  if (r.tape) {
    r.na = r.tape->node_of(a);
    r.wa = r.na >= 0;
  }
  return r;
}

Rec probe(const Tensor& a, const Tensor& b) {
  Rec r = probe(a);
  if (r.tape) {
    r.nb = r.tape->node_of(b);
    r.wb = r.nb >= 0;
  }
  return r;
}

std::vector<int> rec_parents(const Rec& r) {
  std::vector<int> p;
  if (r.wa) p.push_back(r.na);
  if (r.wb) p.push_back(r.nb);
  return p;
}

}  // namespace

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::None: return "none";
    case Activation::Relu: return "relu";
    case Activation::Softmax: return "softmax";
  }
  return "none";
}

Activation activation_from_name(const std::string& name) {
  if (name == "none") return Activation::None;
  if (name == "relu") return Activation::Relu;
  if (name == "softmax") return Activation::Softmax;
  throw ValueError("unknown activation '" + name + "' (expected none|relu|softmax)");
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  std::size_t batch = 1, m = 0, k = 0, n = 0, a_stride = 0, b_stride = 0;
  Shape out_shape;
  if (a.rank() == 2 && b.rank() == 2) {
    m = a.dim(0), k = a.dim(1), n = b.dim(1);
    if (b.dim(0) != k) {
      throw ShapeError("matmul: inner dimensions of " + shape_str(a.shape()) + " and " +
                       shape_str(b.shape()) + " do not agree");
    }
    out_shape = {m, n};
  } else if (a.rank() == 3 && (b.rank() == 3 || b.rank() == 2)) {
    batch = a.dim(0), m = a.dim(1), k = a.dim(2);
    if (b.rank() == 3) {
      if (b.dim(0) != batch || b.dim(1) != k) {
        throw ShapeError("matmul: batched shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()) + " do not agree");
      }
      n = b.dim(2);
      b_stride = k * n;
    } else {
      if (b.dim(0) != k) {
        throw ShapeError("matmul: inner dimensions of " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()) + " do not agree");
      }
      n = b.dim(1);
    }
    a_stride = m * k;
    out_shape = {batch, m, n};
  } else {
    throw ShapeError("matmul: unsupported ranks for shapes " + shape_str(a.shape()) +
                     " and " + shape_str(b.shape()));
  }

  Tensor out(out_shape);
  kernels::matmul(a.data().data(), b.data().data(), out.data().data(), batch, m, k, n,
                  a_stride, b_stride);

  Rec r = probe(a, b);
  if (r) {
    Buf ad, bd;
    if (r.wb) ad = a.vec_data();
    if (r.wa) bd = b.vec_data();
    const bool b_broadcast = b_stride == 0 && batch > 1;
    auto back = [=](const Buf& up) {
      std::vector<Buf> out_grads;
      if (r.wa) {
        // dA[b] = G[b] * B[b]^T
        Buf bt(k * n);
        Buf ga(batch * m * k);
        for (std::size_t bi = 0; bi < batch; ++bi) {
          kernels::transpose2d(bd.data() + bi * b_stride, bt.data(), k, n);
          kernels::matmul(up.data() + bi * m * n, bt.data(), ga.data() + bi * m * k, 1, m,
                          n, k, 0, 0);
        }
        out_grads.push_back(std::move(ga));
      }
      if (r.wb) {
        // dB[b] = A[b]^T * G[b], summed over the batch when B is broadcast
        Buf at(m * k);
        Buf gb(b_broadcast ? k * n : batch * k * n, 0.0);
        Buf tmp(k * n);
        for (std::size_t bi = 0; bi < batch; ++bi) {
          kernels::transpose2d(ad.data() + bi * a_stride, at.data(), m, k);
          double* dst = b_broadcast ? tmp.data() : gb.data() + bi * k * n;
          kernels::matmul(at.data(), up.data() + bi * m * n, dst, 1, k, m, n, 0, 0);
          if (b_broadcast) {
            for (std::size_t j = 0; j < k * n; ++j) gb[j] += tmp[j];
          }
        }
        out_grads.push_back(std::move(gb));
      }
      return out_grads;
    };
    r.tape->bind(out, r.tape->record(rec_parents(r), out.shape(), back));
  }
  return out;
}

Tensor transpose(const Tensor& x) {
  if (x.rank() != 2) {
    throw ShapeError("transpose expects a matrix, got " + shape_str(x.shape()));
  }
  const std::size_t m = x.dim(0), n = x.dim(1);
  Tensor out({n, m});
  kernels::transpose2d(x.data().data(), out.data().data(), m, n);

  Rec r = probe(x);
  if (r) {
    auto back = [m, n](const Buf& up) {
      Buf g(m * n);
      kernels::transpose2d(up.data(), g.data(), n, m);
      return std::vector<Buf>{std::move(g)};
    };
    r.tape->bind(out, r.tape->record({r.na}, out.shape(), back));
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];

  Rec r = probe(a, b);
  if (r) {
    auto back = [wa = r.wa, wb = r.wb](const Buf& up) {
      std::vector<Buf> g;
      if (wa) g.push_back(up);
      if (wb) g.push_back(up);
      return g;
    };
    r.tape->bind(out, r.tape->record(rec_parents(r), out.shape(), back));
  }
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) { return add(a, scale(b, -1.0)); }

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];

  Rec r = probe(a, b);
  if (r) {
    Buf ad, bd;
    if (r.wb) ad = a.vec_data();
    if (r.wa) bd = b.vec_data();
    auto back = [wa = r.wa, wb = r.wb, ad, bd](const Buf& up) {
      std::vector<Buf> g;
      if (wa) {
        Buf ga(up.size());
        for (std::size_t i = 0; i < up.size(); ++i) ga[i] = up[i] * bd[i];
        g.push_back(std::move(ga));
      }
      if (wb) {
        Buf gb(up.size());
        for (std::size_t i = 0; i < up.size(); ++i) gb[i] = up[i] * ad[i];
        g.push_back(std::move(gb));
      }
      return g;
    };
    r.tape->bind(out, r.tape->record(rec_parents(r), out.shape(), back));
  }
  return out;
}

Tensor scale(const Tensor& x, double s) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * s;
  Rec r = probe(x);
  if (r) {
    auto back = [s](const Buf& up) {
      Buf g(up.size());
      for (std::size_t i = 0; i < up.size(); ++i) g[i] = up[i] * s;
      return std::vector<Buf>{std::move(g)};
    };
    r.tape->bind(out, r.tape->record({r.na}, out.shape(), back));
  }
  return out;
}

Tensor add_rowvec(const Tensor& x, const Tensor& v) {
  const std::size_t n = x.shape().empty() ? 0 : x.shape().back();
  if (v.rank() != 1 || v.dim(0) != n) {
    throw ShapeError("add_rowvec: vector " + shape_str(v.shape()) +
                     " does not match last dimension of " + shape_str(x.shape()));
  }
  Tensor out(x.shape());
  const std::size_t rows = x.size() / n;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = x[i * n + j] + v[j];
  }
  Rec r = probe(x, v);
  if (r) {
    auto back = [wa = r.wa, wb = r.wb, rows, n](const Buf& up) {
      std::vector<Buf> g;
      if (wa) g.push_back(up);
      if (wb) {
        Buf gv(n, 0.0);
        for (std::size_t i = 0; i < rows; ++i) {
          for (std::size_t j = 0; j < n; ++j) gv[j] += up[i * n + j];
        }
        g.push_back(std::move(gv));
      }
      return g;
    };
    r.tape->bind(out, r.tape->record(rec_parents(r), out.shape(), back));
  }
  return out;
}

namespace {

template <class Fwd, class Dfn>
Tensor unary_elementwise(const Tensor& x, Fwd fwd, Dfn dfn) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = fwd(x[i]);
  Rec r = probe(x);
  if (r) {
    // dfn maps (input, output) -> local derivative
    Buf xd = x.vec_data();
    Buf od = out.vec_data();
    auto back = [xd, od, dfn](const Buf& up) {
      Buf g(up.size());
      for (std::size_t i = 0; i < up.size(); ++i) g[i] = up[i] * dfn(xd[i], od[i]);
      return std::vector<Buf>{std::move(g)};
    };
    r.tape->bind(out, r.tape->record({r.na}, out.shape(), back));
  }
  return out;
}

}  // namespace

Tensor sigmoid(const Tensor& x) {
  return unary_elementwise(
      x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
      [](double, double s) { return s * (1.0 - s); });
}

Tensor tanh(const Tensor& x) {
  return unary_elementwise(
      x, [](double v) { return std::tanh(v); },
      [](double, double t) { return 1.0 - t * t; });
}

Tensor relu(const Tensor& x) {
  return unary_elementwise(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor softmax(const Tensor& x, std::size_t axis) {
  if (axis >= x.rank()) {
    throw ShapeError("softmax: axis " + std::to_string(axis) + " invalid for shape " +
                     shape_str(x.shape()));
  }
  const std::size_t len = x.dim(axis);
  std::size_t inner = 1, outer = 1;
  for (std::size_t i = axis + 1; i < x.rank(); ++i) inner *= x.dim(i);
  for (std::size_t i = 0; i < axis; ++i) outer *= x.dim(i);

  Tensor out(x.shape());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * len * inner + in;
      double mx = x[base];
      for (std::size_t l = 1; l < len; ++l) mx = std::max(mx, x[base + l * inner]);
      double denom = 0.0;
      for (std::size_t l = 0; l < len; ++l) {
        const double e = std::exp(x[base + l * inner] - mx);
        out[base + l * inner] = e;
        denom += e;
      }
      for (std::size_t l = 0; l < len; ++l) out[base + l * inner] /= denom;
    }
  }

  Rec r = probe(x);
  if (r) {
    Buf od = out.vec_data();
    auto back = [od, len, inner, outer](const Buf& up) {
      Buf g(up.size());
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
          const std::size_t base = o * len * inner + in;
          double dot = 0.0;
          for (std::size_t l = 0; l < len; ++l) {
            dot += up[base + l * inner] * od[base + l * inner];
          }
          for (std::size_t l = 0; l < len; ++l) {
            const std::size_t idx = base + l * inner;
            g[idx] = od[idx] * (up[idx] - dot);
          }
        }
      }
      return std::vector<Buf>{std::move(g)};
    };
    r.tape->bind(out, r.tape->record({r.na}, out.shape(), back));
  }
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double epsilon) {
  if (x.rank() == 0 || x.size() == 0) throw ShapeError("layer_norm on empty tensor");
  const std::size_t n = x.shape().back();
  if (gain.rank() != 1 || gain.dim(0) != n || bias.rank() != 1 || bias.dim(0) != n) {
    throw ShapeError("layer_norm: gain " + shape_str(gain.shape()) + " / bias " +
                     shape_str(bias.shape()) + " do not match last dimension of " +
                     shape_str(x.shape()));
  }
  if (epsilon <= 0.0) throw ValueError("layer_norm: epsilon must be positive");

  const std::size_t rows = x.size() / n;
  Tensor out(x.shape());
  Buf xhat(x.size());
  Buf inv_sigma(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const double* xr = x.data().data() + i * n;
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) mean += xr[j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = xr[j] - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    const double is = 1.0 / std::sqrt(var + epsilon);
    inv_sigma[i] = is;
    for (std::size_t j = 0; j < n; ++j) {
      const double h = (xr[j] - mean) * is;
      xhat[i * n + j] = h;
      out[i * n + j] = gain[j] * h + bias[j];
    }
  }

  GradTape* tape = active_tape();
  if (tape) {
    const int nx = tape->node_of(x);
    const int ng = tape->node_of(gain);
    const int nb = tape->node_of(bias);
    if (nx >= 0 || ng >= 0 || nb >= 0) {
      std::vector<int> parents;
      if (nx >= 0) parents.push_back(nx);
      if (ng >= 0) parents.push_back(ng);
      if (nb >= 0) parents.push_back(nb);
      Buf gd = gain.vec_data();
      auto back = [=, xh = std::move(xhat), is = std::move(inv_sigma)](const Buf& up) {
        std::vector<Buf> out_g;
        if (nx >= 0) {
          Buf gx(rows * n);
          for (std::size_t i = 0; i < rows; ++i) {
            double mean_dh = 0.0, mean_dh_h = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
              const double dh = up[i * n + j] * gd[j];
              mean_dh += dh;
              mean_dh_h += dh * xh[i * n + j];
            }
            mean_dh /= static_cast<double>(n);
            mean_dh_h /= static_cast<double>(n);
            for (std::size_t j = 0; j < n; ++j) {
              const double dh = up[i * n + j] * gd[j];
              gx[i * n + j] = is[i] * (dh - mean_dh - xh[i * n + j] * mean_dh_h);
            }
          }
          out_g.push_back(std::move(gx));
        }
        if (ng >= 0) {
          Buf gg(n, 0.0);
          for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < n; ++j) gg[j] += up[i * n + j] * xh[i * n + j];
          }
          out_g.push_back(std::move(gg));
        }
        if (nb >= 0) {
          Buf gb(n, 0.0);
          for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < n; ++j) gb[j] += up[i * n + j];
          }
          out_g.push_back(std::move(gb));
        }
        return out_g;
      };
      tape->bind(out, tape->record(std::move(parents), out.shape(), back));
    }
  }
  return out;
}

Tensor dense(const Tensor& x, const Tensor& weight, const Tensor& bias,
             Activation activation) {
  if (weight.rank() != 2) {
    throw ShapeError("dense: weight must be a matrix, got " + shape_str(weight.shape()));
  }
  if (x.rank() == 1) {
    Tensor y = dense(reshape(x, {1, x.dim(0)}), weight, bias, activation);
    return reshape(y, {y.dim(1)});
  }
  if (x.rank() != 2 || x.dim(1) != weight.dim(0)) {
    throw ShapeError("dense: input " + shape_str(x.shape()) + " does not match weight " +
                     shape_str(weight.shape()));
  }
  Tensor y = add_rowvec(matmul(x, weight), bias);
  switch (activation) {
    case Activation::None: break;
    case Activation::Relu: y = relu(y); break;
    case Activation::Softmax: y = softmax(y, 1); break;
  }
  return y;
}

Tensor cross_entropy(const Tensor& probs, const std::vector<int>& labels) {
  if (probs.rank() != 2) {
    throw ShapeError("cross_entropy expects [batch x classes], got " +
                     shape_str(probs.shape()));
  }
  const std::size_t batch = probs.dim(0), classes = probs.dim(1);
  if (labels.size() != batch) {
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(batch) + " rows");
  }
  for (std::size_t i = 0; i < batch; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes) {
      throw ValueError("cross_entropy: label " + std::to_string(labels[i]) +
                       " out of range for " + std::to_string(classes) + " classes");
    }
    double s = 0.0;
    for (std::size_t j = 0; j < classes; ++j) s += probs(i, j);
    if (std::abs(s - 1.0) > 1e-4) {
      throw ValueError("cross_entropy: row " + std::to_string(i) + " sums to " +
                       std::to_string(s) + ", expected 1");
    }
  }

  double loss = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    loss -= std::log(std::max(probs(i, labels[i]), kCrossEntropyFloor));
  }
  loss /= static_cast<double>(batch);
  Tensor out = Tensor::scalar(loss);

  Rec r = probe(probs);
  if (r) {
    Buf pd = probs.vec_data();
    auto back = [pd, labels, batch, classes](const Buf& up) {
      Buf g(batch * classes, 0.0);
      const double u = up[0] / static_cast<double>(batch);
      for (std::size_t i = 0; i < batch; ++i) {
        const double p = pd[i * classes + labels[i]];
        if (p > kCrossEntropyFloor) g[i * classes + labels[i]] = -u / p;
      }
      return std::vector<Buf>{std::move(g)};
    };
    r.tape->bind(out, r.tape->record({r.na}, out.shape(), back));
  }
  return out;
}

double cosine_similarity(const Tensor& a, const Tensor& b) {
  if (a.rank() != 1 || b.rank() != 1 || a.size() != b.size()) {
    throw ShapeError("cosine_similarity expects equal-length vectors, got " +
                     shape_str(a.shape()) + " and " + shape_str(b.shape()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw ValueError("cosine_similarity of a zero vector is undefined");
  }
  const double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i];
  Tensor out = Tensor::scalar(s);
  Rec r = probe(x);
  if (r) {
    const std::size_t n = x.size();
    auto back = [n](const Buf& up) {
      return std::vector<Buf>{Buf(n, up[0])};
    };
    r.tape->bind(out, r.tape->record({r.na}, out.shape(), back));
  }
  return out;
}

Tensor mean_rows(const Tensor& x) {
  if (x.rank() != 2) {
    throw ShapeError("mean_rows expects a matrix, got " + shape_str(x.shape()));
  }
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  Tensor out({cols});
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) out[j] += x(i, j);
  }
  for (std::size_t j = 0; j < cols; ++j) out[j] /= static_cast<double>(rows);

  Rec r = probe(x);
  if (r) {
    auto back = [rows, cols](const Buf& up) {
      Buf g(rows * cols);
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) g[i * cols + j] = up[j] / rows;
      }
      return std::vector<Buf>{std::move(g)};
    };
    r.tape->bind(out, r.tape->record({r.na}, out.shape(), back));
  }
  return out;
}

Tensor row(const Tensor& x, std::size_t i) {
  if (x.rank() != 2) {
    throw ShapeError("row expects a matrix, got " + shape_str(x.shape()));
  }
  if (i >= x.dim(0)) {
    throw ShapeError("row " + std::to_string(i) + " out of range for " +
                     shape_str(x.shape()));
  }
  const std::size_t cols = x.dim(1);
  Tensor out({cols});
  std::copy_n(x.data().data() + i * cols, cols, out.data().data());

  Rec r = probe(x);
  if (r) {
    const std::size_t rows = x.dim(0);
    auto back = [rows, cols, i](const Buf& up) {
      Buf g(rows * cols, 0.0);
      std::copy_n(up.data(), cols, g.data() + i * cols);
      return std::vector<Buf>{std::move(g)};
    };
    r.tape->bind(out, r.tape->record({r.na}, out.shape(), back));
  }
  return out;
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_size(shape) != x.size()) {
    throw ShapeError("reshape: cannot view " + shape_str(x.shape()) + " as " +
                     shape_str(shape));
  }
  Tensor out(std::move(shape), x.vec_data());
  Rec r = probe(x);
  if (r) {
    auto back = [](const Buf& up) { return std::vector<Buf>{up}; };
    r.tape->bind(out, r.tape->record({r.na}, out.shape(), back));
  }
  return out;
}

Tensor concat_cols(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw ShapeError("concat_cols of no tensors");
  const std::size_t rows = xs[0].dim(0);
  std::size_t total = 0;
  for (const Tensor& t : xs) {
    if (t.rank() != 2 || t.dim(0) != rows) {
      throw ShapeError("concat_cols: shape " + shape_str(t.shape()) +
                       " does not share rows with " + shape_str(xs[0].shape()));
    }
    total += t.dim(1);
  }
  Tensor out({rows, total});
  std::size_t off = 0;
  for (const Tensor& t : xs) {
    const std::size_t c = t.dim(1);
    for (std::size_t i = 0; i < rows; ++i) {
      std::copy_n(t.data().data() + i * c, c, out.data().data() + i * total + off);
    }
    off += c;
  }

  GradTape* tape = active_tape();
  if (tape) {
    std::vector<int> parents;
    std::vector<std::size_t> widths, offsets;
    std::size_t o = 0;
    for (const Tensor& t : xs) {
      const int n = tape->node_of(t);
      if (n >= 0) {
        parents.push_back(n);
        widths.push_back(t.dim(1));
        offsets.push_back(o);
      }
      o += t.dim(1);
    }
    if (!parents.empty()) {
      auto back = [rows, total, widths, offsets](const Buf& up) {
        std::vector<Buf> g;
        for (std::size_t p = 0; p < widths.size(); ++p) {
          Buf gp(rows * widths[p]);
          for (std::size_t i = 0; i < rows; ++i) {
            std::copy_n(up.data() + i * total + offsets[p], widths[p],
                        gp.data() + i * widths[p]);
          }
          g.push_back(std::move(gp));
        }
        return g;
      };
      tape->bind(out, tape->record(std::move(parents), out.shape(), back));
    }
  }
  return out;
}

Tensor stack_rows(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw ShapeError("stack_rows of no tensors");
  const std::size_t d = xs[0].size();
  for (const Tensor& t : xs) {
    if (t.rank() != 1 || t.size() != d) {
      throw ShapeError("stack_rows: shape " + shape_str(t.shape()) +
                       " does not match " + shape_str(xs[0].shape()));
    }
  }
  Tensor out({xs.size(), d});
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::copy_n(xs[i].data().data(), d, out.data().data() + i * d);
  }

  GradTape* tape = active_tape();
  if (tape) {
    std::vector<int> parents;
    std::vector<std::size_t> which;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const int n = tape->node_of(xs[i]);
      if (n >= 0) {
        parents.push_back(n);
        which.push_back(i);
      }
    }
    if (!parents.empty()) {
      auto back = [d, which](const Buf& up) {
        std::vector<Buf> g;
        for (std::size_t r : which) {
          g.emplace_back(up.begin() + r * d, up.begin() + (r + 1) * d);
        }
        return g;
      };
      tape->bind(out, tape->record(std::move(parents), out.shape(), back));
    }
  }
  return out;
}

std::size_t argmax(const Tensor& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

Tensor glorot_uniform(Shape shape, std::mt19937_64& rng) {
  std::size_t fan_in = shape.empty() ? 1 : shape[0];
  std::size_t fan_out = shape.size() > 1 ? shape[1] : shape[0];
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
  return t;
}

}  // namespace vitret
