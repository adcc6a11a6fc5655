#include "doctest.h"

#include <cmath>
#include <random>

#include "vitret/grad_check.hpp"
#include "vitret/ops.hpp"
#include "vitret/transformer.hpp"

using namespace vitret;

namespace {

Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0,
                     double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
  return t;
}

// Scalar-loop attention oracle, fully independent of the tensor ops.
std::vector<std::vector<double>> attention_oracle(
    const std::vector<std::vector<double>>& q, const std::vector<std::vector<double>>& k,
    const std::vector<std::vector<double>>& v) {
  const std::size_t n = q.size(), m = k.size(), dk = q[0].size(), dv = v[0].size();
  std::vector<std::vector<double>> out(n, std::vector<double>(dv, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> scores(m);
    double mx = -1e300;
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t d = 0; d < dk; ++d) s += q[i][d] * k[j][d];
      scores[j] = s / std::sqrt(static_cast<double>(dk));
      mx = std::max(mx, scores[j]);
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < m; ++j) denom += std::exp(scores[j] - mx);
    for (std::size_t j = 0; j < m; ++j) {
      const double w = std::exp(scores[j] - mx) / denom;
      for (std::size_t d = 0; d < dv; ++d) out[i][d] += w * v[j][d];
    }
  }
  return out;
}

std::vector<std::vector<double>> to_rows(const Tensor& t) {
  std::vector<std::vector<double>> rows(t.dim(0), std::vector<double>(t.dim(1)));
  for (std::size_t i = 0; i < t.dim(0); ++i) {
    for (std::size_t j = 0; j < t.dim(1); ++j) rows[i][j] = t(i, j);
  }
  return rows;
}

// x [seq x d] -> x w + b  [seq x out], plain loops
std::vector<std::vector<double>> project_oracle(const std::vector<std::vector<double>>& x,
                                                const Tensor& w, const Tensor& b) {
  std::vector<std::vector<double>> out(x.size(), std::vector<double>(w.dim(1)));
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < w.dim(1); ++j) {
      double acc = b[j];
      for (std::size_t d = 0; d < w.dim(0); ++d) acc += x[i][d] * w(d, j);
      out[i][j] = acc;
    }
  }
  return out;
}

DatasetContainer tiny_dataset(std::size_t copies, int label, std::size_t classes,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  Tensor frames({4, 8, 8, 1});
  for (std::size_t i = 0; i < frames.size(); ++i) frames[i] = d(rng);
  std::vector<FrameSequence> samples;
  for (std::size_t i = 0; i < copies; ++i) {
    samples.push_back({frames, label, "toy/" + std::to_string(i)});
  }
  std::vector<std::string> names;
  for (std::size_t i = 0; i < classes; ++i) names.push_back("c" + std::to_string(i));
  return DatasetContainer(std::move(samples), std::move(names));
}

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.sequence_length = 4;
  cfg.image_height = 8;
  cfg.image_width = 8;
  cfg.channels = 1;
  cfg.projection_dim = 8;
  cfg.dense_dim = 16;
  cfg.num_heads = 2;
  cfg.transformer_layers = 1;
  cfg.num_classes = 2;
  cfg.batch_size = 4;
  cfg.epochs = 50;
  return cfg;
}

}  // namespace

TEST_CASE("positional encoding row 0 alternates 0 and 1") {
  PositionalEncodingTable pe = positional_encoding(10, 8);
  for (std::size_t j = 0; j < 8; ++j) {
    CHECK(pe.table(0, j) == (j % 2 == 0 ? 0.0 : 1.0));
  }
}

TEST_CASE("positional encoding spot values match the formula") {
  PositionalEncodingTable pe = positional_encoding(16, 8);
  CHECK(pe.table(1, 0) == doctest::Approx(std::sin(1.0)).epsilon(1e-12));
  CHECK(pe.table(1, 0) == doctest::Approx(0.84147).epsilon(1e-5));
  CHECK(pe.table(1, 1) == doctest::Approx(std::cos(1.0)).epsilon(1e-12));
  // pos=3, i=2, d=8: angle = 3 / 10000^(4/8) = 0.03
  CHECK(pe.table(3, 4) == doctest::Approx(std::sin(0.03)).epsilon(1e-12));
  CHECK(pe.table(3, 5) == doctest::Approx(std::cos(0.03)).epsilon(1e-12));
}

TEST_CASE("positional encoding entries bounded for a large table") {
  PositionalEncodingTable pe = positional_encoding(1000, 128);
  for (std::size_t i = 0; i < pe.table.size(); ++i) {
    CHECK(std::abs(pe.table[i]) <= 1.0);
  }
}

TEST_CASE("positional encoding rejects odd or tiny widths") {
  CHECK_THROWS_AS(positional_encoding(4, 7), ValueError);
  CHECK_THROWS_AS(positional_encoding(4, 0), ValueError);
  CHECK_THROWS_AS(positional_encoding(0, 8), ValueError);
}

TEST_CASE("embed_and_encode matches projection plus positional rows") {
  ModelConfig cfg = tiny_config();
  ReTModel model = make_ret_model(cfg, 6, 5);

  // zero input, zero projection bias -> exactly the positional rows
  Tensor zeros({4, 6});
  Tensor enc = embed_and_encode(zeros, model);
  REQUIRE(enc.shape() == Shape{4, 8});
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 8; ++j) {
      CHECK(enc(i, j) == model.pe.table(i, j));
    }
  }

  // identity projection when d_in == projection_dim -> x + PE
  ReTModel ident = make_ret_model(cfg, 8, 5);
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = 0; j < 8; ++j) ident.w_in(i, j) = (i == j) ? 1.0 : 0.0;
  }
  std::mt19937_64 rng(17);
  Tensor x = random_tensor({4, 8}, rng);
  Tensor out = embed_and_encode(x, ident);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 8; ++j) {
      CHECK(out(i, j) == doctest::Approx(x(i, j) + ident.pe.table(i, j)).epsilon(1e-12));
    }
  }

  // random projection: output - PE equals the projection, recomputed apart
  Tensor x6 = random_tensor({4, 6}, rng);
  Tensor got = embed_and_encode(x6, model);
  auto proj = project_oracle(to_rows(x6), model.w_in, model.b_in);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 8; ++j) {
      CHECK(got(i, j) - model.pe.table(i, j) == doctest::Approx(proj[i][j]).epsilon(1e-12));
    }
  }

  // longer sequence than the table is an error
  CHECK_THROWS_AS(embed_and_encode(Tensor({5, 6}), model), ShapeError);
  CHECK_THROWS_AS(embed_and_encode(Tensor({4, 7}), model), ShapeError);
}

TEST_CASE("attention on identity matrices gives the hand-computed weights") {
  Tensor eye({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  AttentionResult r = scaled_dot_product_attention(eye, eye, eye);
  const double hot = std::exp(1.0 / std::sqrt(3.0));
  const double diag = hot / (hot + 2.0);
  const double off = 1.0 / (hot + 2.0);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(r.weights(i, j) == doctest::Approx(i == j ? diag : off).epsilon(1e-12));
      // with v = I, output == weights
      CHECK(r.output(i, j) == doctest::Approx(r.weights(i, j)).epsilon(1e-12));
    }
  }
}

TEST_CASE("attention on a single element is the identity") {
  Tensor q({1, 4}, {0.3, -0.2, 0.9, 0.1});
  Tensor k({1, 4}, {2.0, 1.0, -1.0, 0.5});
  Tensor v({1, 2}, {42.0, -7.0});
  AttentionResult r = scaled_dot_product_attention(q, k, v);
  CHECK(r.weights(0, 0) == 1.0);
  CHECK(r.output(0, 0) == 42.0);
  CHECK(r.output(0, 1) == -7.0);
}

TEST_CASE("uniform queries with orthogonal keys attend uniformly") {
  Tensor q = Tensor::full({2, 4}, 0.7);
  Tensor k({4, 4});
  for (std::size_t i = 0; i < 4; ++i) k(i, i) = 1.0;
  std::mt19937_64 rng(3);
  Tensor v = random_tensor({4, 3}, rng);
  AttentionResult r = scaled_dot_product_attention(q, k, v);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(r.weights(i, j) == doctest::Approx(0.25).epsilon(1e-12));
    }
  }
}

TEST_CASE("attention matches the scalar-loop oracle and stays row-stochastic") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 25; ++trial) {
    std::uniform_int_distribution<std::size_t> dim(1, 8);
    const std::size_t n = dim(rng), m = dim(rng), dk = dim(rng), dv = dim(rng);
    Tensor q = random_tensor({n, dk}, rng, -2.0, 2.0);
    Tensor k = random_tensor({m, dk}, rng, -2.0, 2.0);
    Tensor v = random_tensor({m, dv}, rng, -2.0, 2.0);
    AttentionResult r = scaled_dot_product_attention(q, k, v);

    auto want = attention_oracle(to_rows(q), to_rows(k), to_rows(v));
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        CHECK(r.weights(i, j) >= 0.0);
        sum += r.weights(i, j);
      }
      CHECK(std::abs(sum - 1.0) < 1e-6);
      for (std::size_t d = 0; d < dv; ++d) {
        CHECK(r.output(i, d) == doctest::Approx(want[i][d]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("attention rejects mismatched operands") {
  CHECK_THROWS_AS(scaled_dot_product_attention(Tensor({2, 3}), Tensor({4, 2}),
                                               Tensor({4, 5})),
                  ShapeError);
  CHECK_THROWS_AS(scaled_dot_product_attention(Tensor({2, 3}), Tensor({4, 3}),
                                               Tensor({5, 5})),
                  ShapeError);
}

TEST_CASE("masking renormalizes over visible columns") {
  Tensor scores = Tensor::full({3, 5}, 0.8);
  AttentionResult r =
      scaled_dot_product_attention(Tensor::zeros({3, 2}), Tensor::zeros({5, 2}),
                                   Tensor::ones({5, 1}), 3);
  // uniform scores (all-zero q) with mask after element 3 of 5
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(r.weights(i, j) == doctest::Approx(0.25).epsilon(1e-12));
    }
    CHECK(r.weights(i, 4) <= 1e-12);
  }

  Tensor masked = apply_mask(scores, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) CHECK(masked(i, j) == 0.8);
    CHECK(masked(i, 4) <= -1e8);
  }

  CHECK_THROWS_AS(apply_mask(scores, 5), ValueError);
}

TEST_CASE("mask at the last column equals unmasked attention") {
  std::mt19937_64 rng(23);
  Tensor q = random_tensor({4, 3}, rng);
  Tensor k = random_tensor({5, 3}, rng);
  Tensor v = random_tensor({5, 2}, rng);
  AttentionResult plain = scaled_dot_product_attention(q, k, v);
  AttentionResult capped = scaled_dot_product_attention(q, k, v, 4);
  for (std::size_t i = 0; i < plain.output.size(); ++i) {
    CHECK(plain.output[i] == capped.output[i]);
  }
}

TEST_CASE("mask at column zero routes all weight to the first value row") {
  std::mt19937_64 rng(29);
  Tensor q = random_tensor({3, 4}, rng, -3.0, 3.0);
  Tensor k = random_tensor({6, 4}, rng, -3.0, 3.0);
  Tensor v = random_tensor({6, 2}, rng);
  AttentionResult r = scaled_dot_product_attention(q, k, v, 0);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r.weights(i, 0) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t j = 1; j < 6; ++j) CHECK(r.weights(i, j) <= 1e-12);
    CHECK(r.output(i, 0) == doctest::Approx(v(0, 0)).epsilon(1e-12));
    CHECK(r.output(i, 1) == doctest::Approx(v(0, 1)).epsilon(1e-12));
  }
}

TEST_CASE("masked columns carry no weight even for extreme scores") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor q = random_tensor({3, 2}, rng, -50.0, 50.0);
    Tensor k = random_tensor({7, 2}, rng, -50.0, 50.0);
    Tensor v = random_tensor({7, 2}, rng);
    const std::size_t last = static_cast<std::size_t>(trial % 6);
    AttentionResult r = scaled_dot_product_attention(q, k, v, last);
    for (std::size_t i = 0; i < 3; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < 7; ++j) {
        if (j > last) CHECK(r.weights(i, j) <= 1e-12);
        sum += r.weights(i, j);
      }
      CHECK(std::abs(sum - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("self-attention without positions is permutation-equivariant") {
  std::mt19937_64 rng(37);
  Tensor x = random_tensor({5, 8}, rng);
  AttentionResult base = scaled_dot_product_attention(x, x, x);

  const std::size_t perm[5] = {3, 0, 4, 1, 2};
  Tensor shuffled({5, 8});
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 8; ++j) shuffled(i, j) = x(perm[i], j);
  }
  AttentionResult moved = scaled_dot_product_attention(shuffled, shuffled, shuffled);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 8; ++j) {
      CHECK(moved.output(i, j) == doctest::Approx(base.output(perm[i], j)).epsilon(1e-12));
    }
  }
}

TEST_CASE("one identity head reduces multi-head attention to raw attention") {
  std::mt19937_64 rng(41);
  EncoderParams p = make_encoder_params(4, 1, 8, Activation::Relu, rng);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      p.wq[0](i, j) = p.wk[0](i, j) = p.wv[0](i, j) = (i == j) ? 1.0 : 0.0;
      p.wo(i, j) = (i == j) ? 1.0 : 0.0;
    }
  }
  Tensor x = random_tensor({5, 4}, rng);
  Tensor via_heads = multi_head_attention(x, x, x, p);
  AttentionResult raw = scaled_dot_product_attention(x, x, x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(via_heads[i] == doctest::Approx(raw.output[i]).epsilon(1e-12));
  }
}

TEST_CASE("two heads match the slice-project-attend-concat oracle") {
  std::mt19937_64 rng(43);
  EncoderParams p = make_encoder_params(6, 2, 8, Activation::Relu, rng);
  // give the biases some signal too
  for (std::size_t h = 0; h < 2; ++h) {
    for (std::size_t j = 0; j < 3; ++j) {
      p.bq[h][j] = 0.1 * double(j + h);
      p.bk[h][j] = -0.05 * double(j);
      p.bv[h][j] = 0.02 * double(h + 1);
    }
  }
  Tensor x = random_tensor({4, 6}, rng);
  Tensor got = multi_head_attention(x, x, x, p);

  auto xr = to_rows(x);
  std::vector<std::vector<double>> concat(4, std::vector<double>(6));
  for (std::size_t h = 0; h < 2; ++h) {
    auto q = project_oracle(xr, p.wq[h], p.bq[h]);
    auto k = project_oracle(xr, p.wk[h], p.bk[h]);
    auto v = project_oracle(xr, p.wv[h], p.bv[h]);
    auto head = attention_oracle(q, k, v);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 3; ++j) concat[i][h * 3 + j] = head[i][j];
    }
  }
  auto want = project_oracle(concat, p.wo, p.bo);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      CHECK(got(i, j) == doctest::Approx(want[i][j]).epsilon(1e-10));
    }
  }
}

TEST_CASE("swapping heads with matching output rows leaves MHA unchanged") {
  std::mt19937_64 rng(47);
  EncoderParams p = make_encoder_params(4, 2, 8, Activation::Relu, rng);
  Tensor x = random_tensor({3, 4}, rng);
  Tensor base = multi_head_attention(x, x, x, p);

  EncoderParams swapped = p;
  std::swap(swapped.wq[0], swapped.wq[1]);
  std::swap(swapped.bq[0], swapped.bq[1]);
  std::swap(swapped.wk[0], swapped.wk[1]);
  std::swap(swapped.bk[0], swapped.bk[1]);
  std::swap(swapped.wv[0], swapped.wv[1]);
  std::swap(swapped.bv[0], swapped.bv[1]);
  // rows 0..1 of wo belong to head 0's slice, rows 2..3 to head 1's
  for (std::size_t j = 0; j < 4; ++j) {
    std::swap(swapped.wo(0, j), swapped.wo(2, j));
    std::swap(swapped.wo(1, j), swapped.wo(3, j));
  }
  Tensor moved = multi_head_attention(x, x, x, swapped);
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(moved[i] == doctest::Approx(base[i]).epsilon(1e-12));
  }
}

TEST_CASE("multi_head_attention rejects wrong widths") {
  std::mt19937_64 rng(53);
  EncoderParams p = make_encoder_params(4, 2, 8, Activation::Relu, rng);
  CHECK_THROWS_AS(multi_head_attention(Tensor({3, 5}), Tensor({3, 5}), Tensor({3, 5}), p),
                  ShapeError);
  CHECK_THROWS_AS(make_encoder_params(4, 3, 8, Activation::Relu, rng), ValueError);
}

TEST_CASE("encoder block preserves shape across configurations") {
  std::mt19937_64 rng(59);
  for (std::size_t d_model : {8u, 16u, 32u}) {
    for (std::size_t heads : {1u, 2u, 4u}) {
      for (std::size_t seq : {1u, 4u, 20u}) {
        EncoderParams p =
            make_encoder_params(d_model, heads, 2 * d_model, Activation::Relu, rng);
        Tensor x = random_tensor({seq, d_model}, rng);
        Tensor y = encoder_block(x, p);
        CHECK(y.shape() == x.shape());
        CHECK(y.all_finite());
      }
    }
  }
}

TEST_CASE("zeroed attention and feed-forward reduce the block to double norm") {
  std::mt19937_64 rng(61);
  EncoderParams p = make_encoder_params(6, 2, 12, Activation::Relu, rng);
  for (Tensor* t : {&p.wo, &p.bo, &p.w1, &p.b1, &p.w2, &p.b2}) {
    for (std::size_t i = 0; i < t->size(); ++i) (*t)[i] = 0.0;
  }
  Tensor x = random_tensor({3, 6}, rng);
  Tensor got = encoder_block(x, p);
  Tensor ones = Tensor::ones({6});
  Tensor zeros = Tensor::zeros({6});
  Tensor want = layer_norm(layer_norm(x, ones, zeros, kLayerNormEpsilon), ones, zeros,
                           kLayerNormEpsilon);
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
}

TEST_CASE("gradients flow correctly through a full encoder block") {
  std::mt19937_64 rng(67);
  EncoderParams p = make_encoder_params(8, 2, 16, Activation::Relu, rng);
  Tensor x = random_tensor({4, 8}, rng);
  const double err = grad_check(
      [&p](const Tensor& t) { return sum(mul(encoder_block(t, p), t)); }, x);
  CHECK(err < 1e-4);
}

TEST_CASE("ret_forward returns a probability vector") {
  ModelConfig cfg = tiny_config();
  ReTModel model = make_ret_model(cfg, 64, 7);
  std::mt19937_64 rng(71);
  Tensor features = random_tensor({4, 64}, rng, 0.0, 1.0);
  Tensor probs = ret_forward(features, model);
  REQUIRE(probs.shape() == Shape{2});
  double sum = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(probs[i] >= 0.0);
    sum += probs[i];
  }
  CHECK(std::abs(sum - 1.0) < 1e-6);
  // untrained model stays near-uniform at init scale
  CHECK(probs[0] > 0.02);
  CHECK(probs[0] < 0.98);

  CHECK_THROWS_AS(ret_forward(Tensor({5, 64}), model), ShapeError);
}

TEST_CASE("positional encoding makes ret_forward order-sensitive") {
  ModelConfig cfg = tiny_config();
  ReTModel model = make_ret_model(cfg, 16, 11);
  std::mt19937_64 rng(73);
  Tensor features = random_tensor({4, 16}, rng, 0.0, 1.0);
  Tensor reversed({4, 16});
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 16; ++j) reversed(i, j) = features(3 - i, j);
  }
  Tensor a = ret_forward(features, model);
  Tensor b = ret_forward(reversed, model);
  double max_diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    max_diff = std::max(max_diff, std::abs(a[i] - b[i]));
  }
  CHECK(max_diff > 1e-6);
}

TEST_CASE("end-to-end gradient check through the ReT classifier") {
  ModelConfig cfg = tiny_config();
  cfg.projection_dim = 8;
  cfg.num_heads = 2;
  ReTModel model = make_ret_model(cfg, 5, 13);
  std::mt19937_64 rng(79);
  Tensor features = random_tensor({4, 5}, rng, 0.0, 1.0);
  const double err = grad_check(
      [&model](const Tensor& t) {
        Tensor probs = ret_forward(t, model);
        return cross_entropy(reshape(probs, {1, 2}), {1});
      },
      features);
  CHECK(err < 1e-4);
}

TEST_CASE("ret_train memorizes a repeated sample") {
  DatasetContainer ds = tiny_dataset(4, 0, 2, 99);
  ModelConfig cfg = tiny_config();
  auto [model, history] = ret_train(ds, ds, cfg, 1);
  REQUIRE(history.size() == 50);
  CHECK(history.back().train_loss < 1e-2);
  CHECK(history.back().train_accuracy == 1.0);

  // the trained model classifies its training point
  Tensor features = reshape(ds.sample(0).frames, {4, 64});
  Tensor probs = ret_forward(features, model);
  CHECK(argmax(probs) == 0);
  CHECK(probs[0] > 0.9);
}

TEST_CASE("ret_train overfits one sample per class to tiny loss") {
  std::mt19937_64 rng(83);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  std::vector<FrameSequence> samples;
  for (int label = 0; label < 2; ++label) {
    Tensor frames({4, 8, 8, 1});
    for (std::size_t i = 0; i < frames.size(); ++i) frames[i] = d(rng);
    samples.push_back({frames, label, "pt/" + std::to_string(label)});
  }
  DatasetContainer ds(std::move(samples), {"a", "b"});
  ModelConfig cfg = tiny_config();
  cfg.epochs = 250;
  auto [model, history] = ret_train(ds, ds, cfg, 3);
  CHECK(history.back().train_loss < 1e-3);
  for (const auto& s : ds.samples()) {
    Tensor probs = ret_forward(reshape(s.frames, {4, 64}), model);
    CHECK(argmax(probs) == static_cast<std::size_t>(s.label));
  }
}

TEST_CASE("zero learning rate leaves parameters bit-identical") {
  DatasetContainer ds = tiny_dataset(3, 0, 2, 4);
  ModelConfig cfg = tiny_config();
  cfg.epochs = 3;
  cfg.learning_rate = 0.0;
  auto [model, history] = ret_train(ds, ds, cfg, 21);

  ReTModel fresh = make_ret_model(cfg, 64, 21);
  std::vector<Tensor*> got = ret_param_list(model);
  std::vector<Tensor*> want = ret_param_list(fresh);
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    REQUIRE(got[i]->size() == want[i]->size());
    for (std::size_t j = 0; j < got[i]->size(); ++j) {
      CHECK((*got[i])[j] == (*want[i])[j]);
    }
  }
}

TEST_CASE("ret_train is deterministic for a fixed seed") {
  DatasetContainer ds = synthetic_dataset(2, 4, 4, 8, 8, 15);
  ModelConfig cfg = tiny_config();
  cfg.epochs = 4;
  auto [m1, h1] = ret_train(ds, ds, cfg, 77);
  auto [m2, h2] = ret_train(ds, ds, cfg, 77);
  REQUIRE(h1.size() == h2.size());
  for (std::size_t i = 0; i < h1.size(); ++i) {
    CHECK(h1[i].train_loss == h2[i].train_loss);
    CHECK(h1[i].valid_loss == h2[i].valid_loss);
    CHECK(h1[i].train_accuracy == h2[i].train_accuracy);
  }
}

TEST_CASE("ret_train validates labels and shapes") {
  DatasetContainer ds = tiny_dataset(2, 1, 2, 5);
  ModelConfig cfg = tiny_config();
  cfg.num_classes = 2;

  ModelConfig wrong_seq = cfg;
  wrong_seq.sequence_length = 8;
  CHECK_THROWS_AS(ret_train(ds, ds, wrong_seq, 1), ValueError);

  ModelConfig too_few = cfg;
  too_few.num_classes = 2;
  DatasetContainer high_label = tiny_dataset(2, 2, 3, 5);
  CHECK_THROWS_AS(ret_train(high_label, high_label, too_few, 1), ValueError);
}
