/*
 * Copyright 2026 The aec-toolkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <functional>
#include <vector>

#include "aec/nn.hpp"
#include "doctest.h"

using namespace aec;
using nn::BoundParams;
using nn::ParamMap;
using nn::Tape;
using nn::Tensor;

namespace {

Tensor<double> filled(std::vector<int> shape, std::uint64_t seed,
                      double lo = -1.0, double hi = 1.0) {
  Tensor<double> t = Tensor<double>::zeros(std::move(shape));
  Rng rng(seed);
  for (double& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

// Builder maps (tape, bound params) to a scalar loss id.
using Builder = std::function<int(Tape<double>&, const BoundParams<double>&)>;

double eval_loss(const ParamMap<double>& params, const Builder& build) {
  Tape<double> tape;
  BoundParams<double> bound(tape, params);
  return tape.val(build(tape, bound))[0];
}

// Max relative error between reverse-mode and central finite differences
// over every coordinate of every parameter.
double gradcheck(const ParamMap<double>& params, const Builder& build,
                 double h = 1e-5) {
  Tape<double> tape;
  BoundParams<double> bound(tape, params);
  tape.backward(build(tape, bound));
  ParamMap<double> grads;
  bound.accumulate_grads(grads);

  double worst = 0.0;
  for (const auto& [name, p] : params) {
    for (std::size_t i = 0; i < p.data.size(); ++i) {
      ParamMap<double> up = params, dn = params;
      up.at(name).data[i] += h;
      dn.at(name).data[i] -= h;
      const double fd = (eval_loss(up, build) - eval_loss(dn, build)) / (2 * h);
      const double an = grads.at(name).data[i];
      const double rel = std::fabs(fd - an) /
                         std::max({std::fabs(fd), std::fabs(an), 1e-8});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("elementwise arithmetic values and gradients") {
  ParamMap<double> p;
  p["a"] = filled({6}, 1);
  p["b"] = filled({6}, 2);
  Builder build = [](Tape<double>& t, const BoundParams<double>& bp) {
    int s = t.add(bp.id("a"), bp.id("b"));
    int d = t.sub(s, t.mul(bp.id("a"), bp.id("b")));
    return t.mean_sq(t.scale(d, 1.7));
  };
  CHECK(gradcheck(p, build) <= 1e-6);

  Tape<double> t;
  int a = t.leaf({2}, {1.0, 2.0});
  int b = t.leaf({2}, {3.0, -4.0});
  CHECK(t.val(t.add(a, b)) == std::vector<double>{4.0, -2.0});
  CHECK(t.val(t.mul(a, b)) == std::vector<double>{3.0, -8.0});
  CHECK(t.val(t.sub(a, b)) == std::vector<double>{-2.0, 6.0});
  CHECK(t.val(t.scale(a, 2.0)) == std::vector<double>{2.0, 4.0});
}

TEST_CASE("activations differentiate correctly away from kinks") {
  ParamMap<double> p;
  p["x"] = filled({10}, 3, 0.2, 1.5);  // positive: relu and |.| are smooth here
  Builder build = [](Tape<double>& t, const BoundParams<double>& bp) {
    int x = bp.id("x");
    int y = t.add(t.tanh_op(x), t.sigmoid_op(x));
    int z = t.add(y, t.relu_op(t.scale(x, 0.5)));
    return t.add(t.mean_sq(z), t.mean_abs(z));
  };
  CHECK(gradcheck(p, build) <= 1e-6);

  Tape<double> t;
  int x = t.leaf({3}, {-2.0, 0.0, 2.0});
  CHECK(t.val(t.relu_op(x)) == std::vector<double>{0.0, 0.0, 2.0});
  CHECK(t.val(t.sigmoid_op(x))[1] == doctest::Approx(0.5));
}

TEST_CASE("linear layer matches shapes and gradients") {
  ParamMap<double> p;
  p["x"] = filled({4, 3}, 4);
  p["w"] = filled({5, 3}, 5);
  p["b"] = filled({5}, 6);
  Builder build = [](Tape<double>& t, const BoundParams<double>& bp) {
    return t.mean_sq(t.linear(bp.id("x"), bp.id("w"), bp.id("b")));
  };
  CHECK(gradcheck(p, build) <= 1e-6);

  Tape<double> t;
  int x = t.leaf({2}, {1.0, 1.0});
  int w = t.leaf({2, 2}, {1.0, 2.0, 3.0, 4.0});
  int y = t.linear(x, w, -1);
  CHECK(t.val(y) == std::vector<double>{3.0, 7.0});
  CHECK_THROWS_AS(t.linear(x, t.leaf({3, 3}, std::vector<double>(9, 0.0)), -1),
                  ShapeMismatch);
}

TEST_CASE("row, concat and stack_rows route gradients exactly") {
  ParamMap<double> p;
  p["m"] = filled({3, 4}, 7);
  p["v"] = filled({2}, 8);
  Builder build = [](Tape<double>& t, const BoundParams<double>& bp) {
    int r0 = t.row(bp.id("m"), 0);
    int r2 = t.row(bp.id("m"), 2);
    int cat = t.concat(r0, bp.id("v"));
    int stacked = t.stack_rows({r0, r2, r0}, 4);
    return t.add(t.mean_sq(cat), t.mean_abs(stacked));
  };
  CHECK(gradcheck(p, build) <= 1e-6);

  Tape<double> t;
  int m = t.leaf({2, 2}, {1.0, 2.0, 3.0, 4.0});
  CHECK(t.val(t.row(m, 1)) == std::vector<double>{3.0, 4.0});
  CHECK_THROWS_AS(t.row(m, 2), ShapeMismatch);
}

TEST_CASE("lstm cell reproduces the frozen reference values") {
  Tape<double> t;
  int x = t.leaf({2}, {0.5, -1.0});
  int h0 = t.leaf({2}, {0.1, -0.2});
  int c0 = t.leaf({2}, {0.3, 0.2});
  int w_ih = t.leaf({8, 2}, {0.1, 0.2, -0.3, 0.4, 0.5, -0.6, 0.7, 0.8,
                             -0.1, 0.3, 0.2, -0.2, 0.4, 0.1, -0.5, 0.6});
  int w_hh = t.leaf({8, 2}, {0.2, -0.1, 0.3, 0.2, -0.4, 0.5, 0.1, -0.3,
                             0.6, 0.2, -0.2, 0.4, 0.3, 0.3, 0.1, -0.1});
  int b = t.leaf({8}, {0.01, -0.02, 0.03, 0.04, -0.05, 0.06, 0.07, -0.08});
  nn::LstmOut out = t.lstm_cell(x, h0, c0, w_ih, w_hh, b);
  CHECK(t.val(out.c)[0] == doctest::Approx(0.030805160915).epsilon(1e-9));
  CHECK(t.val(out.c)[1] == doctest::Approx(0.174436850496).epsilon(1e-9));
  CHECK(t.val(out.h)[0] == doctest::Approx(0.016473792857).epsilon(1e-9));
  CHECK(t.val(out.h)[1] == doctest::Approx(0.049915799558).epsilon(1e-9));
}

TEST_CASE("lstm chain gradients match finite differences") {
  ParamMap<double> p;
  p["x0"] = filled({3}, 11, -0.5, 0.5);
  p["x1"] = filled({3}, 12, -0.5, 0.5);
  p["x2"] = filled({3}, 13, -0.5, 0.5);
  p["w_ih"] = filled({16, 3}, 14, -0.4, 0.4);
  p["w_hh"] = filled({16, 4}, 15, -0.4, 0.4);
  p["b"] = filled({16}, 16, -0.1, 0.1);
  Builder build = [](Tape<double>& t, const BoundParams<double>& bp) {
    int h = t.zeros({4});
    int c = t.zeros({4});
    std::vector<int> hs;
    for (const char* name : {"x0", "x1", "x2"}) {
      nn::LstmOut s =
          t.lstm_cell(bp.id(name), h, c, bp.id("w_ih"), bp.id("w_hh"),
                      bp.id("b"));
      h = s.h;
      c = s.c;
      hs.push_back(h);
    }
    return t.mean_sq(t.stack_rows(hs, 4));
  };
  CHECK(gradcheck(p, build) <= 1e-6);
}

TEST_CASE("temporal convolution: same padding, delta kernel, gradients") {
  // Delta kernel at the center tap copies the input channel.
  Tape<double> t;
  int x = t.leaf({4, 2}, {1, 2, 3, 4, 5, 6, 7, 8});
  Tensor<double> w = Tensor<double>::zeros({2, 5, 2});
  // w[o][k][c]: center tap k=2, identity channel map.
  w.data[(0 * 5 + 2) * 2 + 0] = 1.0;
  w.data[(1 * 5 + 2) * 2 + 1] = 1.0;
  int y = t.conv1d_same(x, t.leaf(w), -1);
  CHECK(t.val(y) == t.val(x));

  ParamMap<double> p;
  p["x"] = filled({7, 3}, 21);
  p["w"] = filled({4, 5, 3}, 22, -0.3, 0.3);
  p["b"] = filled({4}, 23, -0.1, 0.1);
  Builder build = [](Tape<double>& tp, const BoundParams<double>& bp) {
    return tp.mean_sq(tp.conv1d_same(bp.id("x"), bp.id("w"), bp.id("b")));
  };
  CHECK(gradcheck(p, build) <= 1e-6);
}

TEST_CASE("conv output frame depends only on a bounded window") {
  ParamMap<double> p;
  p["w"] = filled({2, 5, 2}, 31, -0.5, 0.5);
  Tensor<double> base = filled({20, 2}, 32);
  Tensor<double> poked = base;
  poked.data[10 * 2] += 1.0;  // frame 10, channel 0

  auto run = [&](const Tensor<double>& x) {
    Tape<double> t;
    int y = t.conv1d_same(t.leaf(x), t.leaf(p["w"]), -1);
    return t.val(y);
  };
  const std::vector<double> ya = run(base);
  const std::vector<double> yb = run(poked);
  for (int t_i = 0; t_i < 20; ++t_i) {
    bool differs = false;
    for (int c = 0; c < 2; ++c) {
      if (ya[static_cast<std::size_t>(t_i) * 2 + c] !=
          yb[static_cast<std::size_t>(t_i) * 2 + c]) {
        differs = true;
      }
    }
    if (t_i < 8 || t_i > 12) CHECK_FALSE(differs);
  }
}

TEST_CASE("batch normalization standardizes and differentiates") {
  Tape<double> t;
  Tensor<double> x = filled({8, 3}, 41, -2.0, 5.0);
  int gamma = t.leaf({3}, {1.0, 1.0, 1.0});
  int beta = t.leaf({3}, {0.0, 0.0, 0.0});
  std::vector<double> bm, bv;
  int y = t.batchnorm_train(t.leaf(x), gamma, beta, 1e-5, &bm, &bv);
  for (int c = 0; c < 3; ++c) {
    double mean = 0.0, var = 0.0;
    for (int r = 0; r < 8; ++r) mean += t.val(y)[static_cast<std::size_t>(r) * 3 + c];
    mean /= 8.0;
    for (int r = 0; r < 8; ++r) {
      const double d = t.val(y)[static_cast<std::size_t>(r) * 3 + c] - mean;
      var += d * d;
    }
    var /= 8.0;
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
  }

  ParamMap<double> p;
  p["x"] = filled({6, 3}, 42, -1.0, 3.0);
  p["gamma"] = filled({3}, 43, 0.5, 1.5);
  p["beta"] = filled({3}, 44, -0.5, 0.5);
  // Weight the output cells so the loss is not (nearly) invariant to x;
  // plain mean_sq of a standardized tensor has an O(eps) gradient in x,
  // which a relative finite-difference comparison cannot resolve.
  Builder train_build = [](Tape<double>& tp, const BoundParams<double>& bp) {
    int y = tp.batchnorm_train(bp.id("x"), bp.id("gamma"), bp.id("beta"),
                               1e-5, nullptr, nullptr);
    int w = tp.leaf(filled({6, 3}, 99));
    return tp.mean_sq(tp.mul(y, w));
  };
  CHECK(gradcheck(p, train_build) <= 1e-6);

  Builder infer_build = [](Tape<double>& tp, const BoundParams<double>& bp) {
    std::vector<double> rm{0.1, -0.2, 0.3}, rv{1.2, 0.8, 2.0};
    int y = tp.batchnorm_infer(bp.id("x"), bp.id("gamma"), bp.id("beta"), rm,
                               rv, 1e-5);
    return tp.mean_sq(y);
  };
  CHECK(gradcheck(p, infer_build) <= 1e-6);
}

TEST_CASE("reductions and cross-entropy check out") {
  Tape<double> t;
  int x = t.leaf({2, 2}, {1.0, -3.0, 5.0, 7.0});
  CHECK(t.val(t.mean_abs(x))[0] == doctest::Approx(4.0));
  CHECK(t.val(t.mean_sq(x))[0] == doctest::Approx((1 + 9 + 25 + 49) / 4.0));
  CHECK(t.val(t.mean_rows(x)) == std::vector<double>{3.0, 2.0});

  int logits = t.leaf({2}, {0.0, 0.0});
  CHECK(t.val(t.softmax_ce(logits, 0))[0] == doctest::Approx(std::log(2.0)));

  ParamMap<double> p;
  p["l"] = filled({5}, 51);
  Builder build = [](Tape<double>& tp, const BoundParams<double>& bp) {
    return tp.softmax_ce(bp.id("l"), 3);
  };
  CHECK(gradcheck(p, build) <= 1e-6);
}

TEST_CASE("dropout masks deterministically and differentiates") {
  ParamMap<double> p;
  p["x"] = filled({40}, 61, 0.5, 1.5);
  Builder build = [](Tape<double>& tp, const BoundParams<double>& bp) {
    Rng rng(7);
    return tp.mean_sq(tp.dropout(bp.id("x"), 0.5, rng));
  };
  CHECK(gradcheck(p, build) <= 1e-6);

  Tape<double> t;
  Rng r1(9), r2(9);
  int x = t.leaf(p.at("x"));
  int a = t.dropout(x, 0.5, r1);
  int b = t.dropout(x, 0.5, r2);
  CHECK(t.val(a) == t.val(b));
  int kept = 0;
  for (std::size_t i = 0; i < t.val(a).size(); ++i) {
    if (t.val(a)[i] != 0.0) {
      ++kept;
      CHECK(t.val(a)[i] == doctest::Approx(2.0 * t.val(x)[i]));
    }
  }
  CHECK(kept > 5);
  CHECK(kept < 35);
}

TEST_CASE("composite model passes the gradient check end to end") {
  // linear -> 2-step lstm -> mean pool -> linear -> cross-entropy: the same
  // op chain the recognizers and canceller are made of.
  ParamMap<double> p;
  p["in"] = filled({2, 3}, 71, -0.8, 0.8);
  p["w0"] = filled({4, 3}, 72, -0.5, 0.5);
  p["b0"] = filled({4}, 73, -0.1, 0.1);
  p["w_ih"] = filled({12, 4}, 74, -0.4, 0.4);
  p["w_hh"] = filled({12, 3}, 75, -0.4, 0.4);
  p["lb"] = filled({12}, 76, -0.1, 0.1);
  p["w1"] = filled({4, 3}, 77, -0.5, 0.5);
  p["b1"] = filled({4}, 78, -0.1, 0.1);
  Builder build = [](Tape<double>& t, const BoundParams<double>& bp) {
    int proj = t.tanh_op(t.linear(bp.id("in"), bp.id("w0"), bp.id("b0")));
    int h = t.zeros({3});
    int c = t.zeros({3});
    std::vector<int> hs;
    for (int step = 0; step < 2; ++step) {
      nn::LstmOut s = t.lstm_cell(t.row(proj, step), h, c, bp.id("w_ih"),
                                  bp.id("w_hh"), bp.id("lb"));
      h = s.h;
      c = s.c;
      hs.push_back(h);
    }
    int pooled = t.mean_rows(t.stack_rows(hs, 3));
    int logits = t.linear(pooled, bp.id("w1"), bp.id("b1"));
    return t.softmax_ce(logits, 2);
  };
  CHECK(gradcheck(p, build) <= 1e-4);
}

TEST_CASE("adam matches the frozen reference trajectory") {
  ParamMap<float> params;
  params["p"] = Tensor<float>{{2}, {1.0f, -2.0f}};
  ParamMap<float> grads;
  grads["p"] = Tensor<float>{{2}, {0.5f, -1.5f}};
  nn::AdamState<float> state;
  nn::AdamConfig cfg;
  cfg.lr = 0.1;
  for (int i = 0; i < 3; ++i) adam_step(params, grads, state, cfg);
  CHECK(params.at("p").data[0] == doctest::Approx(0.700000006f).epsilon(1e-6));
  CHECK(params.at("p").data[1] == doctest::Approx(-1.700000002f).epsilon(1e-6));
  CHECK(state.t == 3);
}

TEST_CASE("adam skips running statistics") {
  ParamMap<float> params;
  params["bn.running_mean"] = Tensor<float>{{2}, {1.0f, 2.0f}};
  params["w"] = Tensor<float>{{2}, {1.0f, 2.0f}};
  ParamMap<float> grads;
  grads["bn.running_mean"] = Tensor<float>{{2}, {5.0f, 5.0f}};
  grads["w"] = Tensor<float>{{2}, {5.0f, 5.0f}};
  nn::AdamState<float> state;
  adam_step(params, grads, state, nn::AdamConfig{});
  CHECK(params.at("bn.running_mean").data == std::vector<float>{1.0f, 2.0f});
  CHECK(params.at("w").data != std::vector<float>{1.0f, 2.0f});
}

TEST_CASE("initialization is keyed by name and seed") {
  auto a = nn::uniform_init<float>({4, 4}, 0.1, 1, "enc.w");
  auto b = nn::uniform_init<float>({4, 4}, 0.1, 1, "enc.w");
  auto c = nn::uniform_init<float>({4, 4}, 0.1, 1, "dec.w");
  auto d = nn::uniform_init<float>({4, 4}, 0.1, 2, "enc.w");
  CHECK(a.data == b.data);
  CHECK(a.data != c.data);
  CHECK(a.data != d.data);
  for (float v : a.data) {
    CHECK(v >= -0.1f);
    CHECK(v <= 0.1f);
  }
}

TEST_CASE("float and double tapes agree on a small forward pass") {
  Tensor<double> xd = filled({3, 3}, 81);
  Tensor<double> wd = filled({2, 3}, 82);
  Tensor<float> xf, wf;
  xf.shape = xd.shape;
  wf.shape = wd.shape;
  for (double v : xd.data) xf.data.push_back(static_cast<float>(v));
  for (double v : wd.data) wf.data.push_back(static_cast<float>(v));

  Tape<double> td;
  double yd = td.val(td.mean_sq(td.tanh_op(td.linear(td.leaf(xd), td.leaf(wd), -1))))[0];
  Tape<float> tf;
  float yf = tf.val(tf.mean_sq(tf.tanh_op(tf.linear(tf.leaf(xf), tf.leaf(wf), -1))))[0];
  CHECK(static_cast<double>(yf) == doctest::Approx(yd).epsilon(1e-5));
}
