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

// Reverse-mode automatic differentiation on a dynamically built tape.
// Training runs in 32-bit; the gradient-check tests instantiate the same
// templates in 64-bit so finite-difference comparisons are meaningful.
//
// The tape owns every node's value and gradient.  Ops append exactly one
// backward closure each; closures run in reverse creation order, so an op
// may produce several output nodes (the LSTM cell emits h and c) and still
// see fully accumulated output gradients when its closure fires.

#ifndef AEC_NN_HPP_
#define AEC_NN_HPP_

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "aec/errors.hpp"
#include "aec/hash.hpp"
#include "aec/kernels.hpp"
#include "aec/rng.hpp"

namespace aec {
namespace nn {

template <typename Real>
struct Tensor {
  std::vector<int> shape;
  std::vector<Real> data;

  static Tensor zeros(std::vector<int> s) {
    Tensor t;
    std::size_t n = 1;
    for (int d : s) n *= static_cast<std::size_t>(d);
    t.shape = std::move(s);
    t.data.assign(n, Real(0));
    return t;
  }
  std::size_t numel() const { return data.size(); }
};

// Ordered by name so iteration (checkpointing, optimizer sweeps, gradient
// reduction) is deterministic.
template <typename Real>
using ParamMap = std::map<std::string, Tensor<Real>>;

// Uniform(-scale, scale) fill; the stream is derived from (seed, name) so
// adding or reordering parameters elsewhere never shifts another tensor's
// initialization.
template <typename Real>
Tensor<Real> uniform_init(std::vector<int> shape, double scale,
                          std::uint64_t seed, const std::string& name) {
  Tensor<Real> t = Tensor<Real>::zeros(std::move(shape));
  Rng rng(hash_combine(seed, fnv1a64(name)));
  for (Real& v : t.data) {
    v = static_cast<Real>(rng.uniform(-scale, scale));
  }
  return t;
}

struct LstmOut {
  int h = -1;
  int c = -1;
};

template <typename Real>
class Tape {
 public:
  int leaf(const Tensor<Real>& t) { return push(t.shape, t.data); }
  int leaf(std::vector<int> shape, std::vector<Real> data) {
    return push(std::move(shape), std::move(data));
  }
  int zeros(std::vector<int> shape) {
    std::size_t n = count(shape);
    return push(std::move(shape), std::vector<Real>(n, Real(0)));
  }

  const std::vector<int>& shape(int id) const { return nodes_[idx(id)].shape; }
  const std::vector<Real>& val(int id) const { return nodes_[idx(id)].val; }
  const std::vector<Real>& grad(int id) const { return nodes_[idx(id)].grad; }
  std::size_t size() const { return nodes_.size(); }

  int add(int a, int b) {
    require_same_shape(a, b);
    const std::size_t n = nodes_[idx(a)].val.size();
    int out = push(nodes_[idx(a)].shape, std::vector<Real>(n));
    kernels::add(nodes_[idx(a)].val.data(), nodes_[idx(b)].val.data(),
                 nodes_[idx(out)].val.data(), n);
    back_.push_back([this, a, b, out, n] {
      kernels::axpy(Real(1), nodes_[idx(out)].grad.data(),
                    nodes_[idx(a)].grad.data(), n);
      kernels::axpy(Real(1), nodes_[idx(out)].grad.data(),
                    nodes_[idx(b)].grad.data(), n);
    });
    return out;
  }

  int sub(int a, int b) {
    require_same_shape(a, b);
    const std::size_t n = nodes_[idx(a)].val.size();
    int out = push(nodes_[idx(a)].shape, std::vector<Real>(n));
    kernels::sub(nodes_[idx(a)].val.data(), nodes_[idx(b)].val.data(),
                 nodes_[idx(out)].val.data(), n);
    back_.push_back([this, a, b, out, n] {
      kernels::axpy(Real(1), nodes_[idx(out)].grad.data(),
                    nodes_[idx(a)].grad.data(), n);
      kernels::axpy(Real(-1), nodes_[idx(out)].grad.data(),
                    nodes_[idx(b)].grad.data(), n);
    });
    return out;
  }

  int mul(int a, int b) {
    require_same_shape(a, b);
    const std::size_t n = nodes_[idx(a)].val.size();
    int out = push(nodes_[idx(a)].shape, std::vector<Real>(n));
    kernels::mul(nodes_[idx(a)].val.data(), nodes_[idx(b)].val.data(),
                 nodes_[idx(out)].val.data(), n);
    back_.push_back([this, a, b, out, n] {
      const Real* g = nodes_[idx(out)].grad.data();
      const Real* av = nodes_[idx(a)].val.data();
      const Real* bv = nodes_[idx(b)].val.data();
      Real* ga = nodes_[idx(a)].grad.data();
      Real* gb = nodes_[idx(b)].grad.data();
      for (std::size_t i = 0; i < n; ++i) {
        ga[i] += g[i] * bv[i];
        gb[i] += g[i] * av[i];
      }
    });
    return out;
  }

  int scale(int a, Real s) {
    const std::size_t n = nodes_[idx(a)].val.size();
    int out = push(nodes_[idx(a)].shape, nodes_[idx(a)].val);
    kernels::scale(s, nodes_[idx(out)].val.data(), n);
    back_.push_back([this, a, out, s, n] {
      kernels::axpy(s, nodes_[idx(out)].grad.data(),
                    nodes_[idx(a)].grad.data(), n);
    });
    return out;
  }

  int tanh_op(int a) {
    const std::size_t n = nodes_[idx(a)].val.size();
    int out = push(nodes_[idx(a)].shape, std::vector<Real>(n));
    for (std::size_t i = 0; i < n; ++i) {
      nodes_[idx(out)].val[i] = std::tanh(nodes_[idx(a)].val[i]);
    }
    back_.push_back([this, a, out, n] {
      const Real* y = nodes_[idx(out)].val.data();
      const Real* g = nodes_[idx(out)].grad.data();
      Real* ga = nodes_[idx(a)].grad.data();
      for (std::size_t i = 0; i < n; ++i) {
        ga[i] += g[i] * (Real(1) - y[i] * y[i]);
      }
    });
    return out;
  }

  int sigmoid_op(int a) {
    const std::size_t n = nodes_[idx(a)].val.size();
    int out = push(nodes_[idx(a)].shape, std::vector<Real>(n));
    for (std::size_t i = 0; i < n; ++i) {
      nodes_[idx(out)].val[i] =
          Real(1) / (Real(1) + std::exp(-nodes_[idx(a)].val[i]));
    }
    back_.push_back([this, a, out, n] {
      const Real* y = nodes_[idx(out)].val.data();
      const Real* g = nodes_[idx(out)].grad.data();
      Real* ga = nodes_[idx(a)].grad.data();
      for (std::size_t i = 0; i < n; ++i) {
        ga[i] += g[i] * y[i] * (Real(1) - y[i]);
      }
    });
    return out;
  }

  int relu_op(int a) {
    const std::size_t n = nodes_[idx(a)].val.size();
    int out = push(nodes_[idx(a)].shape, std::vector<Real>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const Real v = nodes_[idx(a)].val[i];
      nodes_[idx(out)].val[i] = v > Real(0) ? v : Real(0);
    }
    back_.push_back([this, a, out, n] {
      const Real* x = nodes_[idx(a)].val.data();
      const Real* g = nodes_[idx(out)].grad.data();
      Real* ga = nodes_[idx(a)].grad.data();
      for (std::size_t i = 0; i < n; ++i) {
        if (x[i] > Real(0)) ga[i] += g[i];
      }
    });
    return out;
  }

  // Inverted dropout: kept values are scaled by 1/keep_prob.  Callers skip
  // this op entirely at inference rather than passing a disabled flag, so
  // the rng stream is only consumed when masks are actually drawn.
  int dropout(int a, Real keep_prob, Rng& rng) {
    const std::size_t n = nodes_[idx(a)].val.size();
    std::vector<Real> mask(n);
    const Real inv = Real(1) / keep_prob;
    for (std::size_t i = 0; i < n; ++i) {
      mask[i] = rng.uniform() < static_cast<double>(keep_prob) ? inv : Real(0);
    }
    int out = push(nodes_[idx(a)].shape, std::vector<Real>(n));
    for (std::size_t i = 0; i < n; ++i) {
      nodes_[idx(out)].val[i] = nodes_[idx(a)].val[i] * mask[i];
    }
    back_.push_back([this, a, out, mask = std::move(mask), n] {
      const Real* g = nodes_[idx(out)].grad.data();
      Real* ga = nodes_[idx(a)].grad.data();
      for (std::size_t i = 0; i < n; ++i) ga[i] += g[i] * mask[i];
    });
    return out;
  }

  // x [N,I] (or [I]), w [O,I], b [O] (pass -1 to omit) -> [N,O] (or [O]).
  int linear(int x, int w, int b) {
    const auto& xs = nodes_[idx(x)].shape;
    const auto& ws = nodes_[idx(w)].shape;
    if (ws.size() != 2) throw ShapeMismatch("linear: weight must be rank 2");
    const int rows = xs.size() == 2 ? xs[0] : 1;
    const int in = xs.size() == 2 ? xs[1] : xs[0];
    const int out_dim = ws[0];
    if (ws[1] != in) throw ShapeMismatch("linear: input width mismatch");
    if (b >= 0 && nodes_[idx(b)].val.size() != static_cast<std::size_t>(out_dim)) {
      throw ShapeMismatch("linear: bias width mismatch");
    }
    std::vector<int> out_shape =
        xs.size() == 2 ? std::vector<int>{rows, out_dim}
                       : std::vector<int>{out_dim};
    int out = push(std::move(out_shape),
                   std::vector<Real>(static_cast<std::size_t>(rows) * out_dim));
    const Real* wv = nodes_[idx(w)].val.data();
    for (int r = 0; r < rows; ++r) {
      const Real* xr = nodes_[idx(x)].val.data() +
                       static_cast<std::size_t>(r) * in;
      Real* yr = nodes_[idx(out)].val.data() +
                 static_cast<std::size_t>(r) * out_dim;
      kernels::matvec(wv, xr, yr, static_cast<std::size_t>(out_dim),
                      static_cast<std::size_t>(in));
      if (b >= 0) {
        kernels::axpy(Real(1), nodes_[idx(b)].val.data(), yr,
                      static_cast<std::size_t>(out_dim));
      }
    }
    back_.push_back([this, x, w, b, out, rows, in, out_dim] {
      const Real* wv = nodes_[idx(w)].val.data();
      Real* gw = nodes_[idx(w)].grad.data();
      for (int r = 0; r < rows; ++r) {
        const Real* gy = nodes_[idx(out)].grad.data() +
                         static_cast<std::size_t>(r) * out_dim;
        const Real* xr = nodes_[idx(x)].val.data() +
                         static_cast<std::size_t>(r) * in;
        Real* gx = nodes_[idx(x)].grad.data() +
                   static_cast<std::size_t>(r) * in;
        kernels::outer_accum(gy, xr, gw, static_cast<std::size_t>(out_dim),
                             static_cast<std::size_t>(in));
        kernels::matvec_t_accum(wv, gy, gx, static_cast<std::size_t>(out_dim),
                                static_cast<std::size_t>(in));
        if (b >= 0) {
          kernels::axpy(Real(1), gy, nodes_[idx(b)].grad.data(),
                        static_cast<std::size_t>(out_dim));
        }
      }
    });
    return out;
  }

  // [N,M] -> [M] copy of row r.
  int row(int x, int r) {
    const auto& xs = nodes_[idx(x)].shape;
    if (xs.size() != 2 || r < 0 || r >= xs[0]) {
      throw ShapeMismatch("row: index out of range");
    }
    const int m = xs[1];
    const Real* src = nodes_[idx(x)].val.data() +
                      static_cast<std::size_t>(r) * m;
    int out = push({m}, std::vector<Real>(src, src + m));
    back_.push_back([this, x, r, out, m] {
      Real* gx = nodes_[idx(x)].grad.data() + static_cast<std::size_t>(r) * m;
      kernels::axpy(Real(1), nodes_[idx(out)].grad.data(), gx,
                    static_cast<std::size_t>(m));
    });
    return out;
  }

  // Two vectors [A], [B] -> [A+B].
  int concat(int a, int b) {
    const std::size_t na = nodes_[idx(a)].val.size();
    const std::size_t nb = nodes_[idx(b)].val.size();
    std::vector<Real> v(na + nb);
    std::copy(nodes_[idx(a)].val.begin(), nodes_[idx(a)].val.end(), v.begin());
    std::copy(nodes_[idx(b)].val.begin(), nodes_[idx(b)].val.end(),
              v.begin() + static_cast<long>(na));
    int out = push({static_cast<int>(na + nb)}, std::move(v));
    back_.push_back([this, a, b, out, na, nb] {
      const Real* g = nodes_[idx(out)].grad.data();
      kernels::axpy(Real(1), g, nodes_[idx(a)].grad.data(), na);
      kernels::axpy(Real(1), g + na, nodes_[idx(b)].grad.data(), nb);
    });
    return out;
  }

  // T vectors of width m -> [T,m].
  int stack_rows(const std::vector<int>& rows, int m) {
    const int t_len = static_cast<int>(rows.size());
    std::vector<Real> v(static_cast<std::size_t>(t_len) * m);
    for (int t = 0; t < t_len; ++t) {
      const auto& rv = nodes_[idx(rows[static_cast<std::size_t>(t)])].val;
      if (rv.size() != static_cast<std::size_t>(m)) {
        throw ShapeMismatch("stack_rows: width mismatch");
      }
      std::copy(rv.begin(), rv.end(),
                v.begin() + static_cast<std::size_t>(t) * m);
    }
    int out = push({t_len, m}, std::move(v));
    back_.push_back([this, rows, out, t_len, m] {
      const Real* g = nodes_[idx(out)].grad.data();
      for (int t = 0; t < t_len; ++t) {
        kernels::axpy(Real(1), g + static_cast<std::size_t>(t) * m,
                      nodes_[idx(rows[static_cast<std::size_t>(t)])].grad.data(),
                      static_cast<std::size_t>(m));
      }
    });
    return out;
  }

  // Fused cell, gate order [i, f, g, o]:
  //   z = w_ih x + w_hh h_prev + b
  //   c = sigmoid(z_f) * c_prev + sigmoid(z_i) * tanh(z_g)
  //   h = sigmoid(z_o) * tanh(c)
  // x [I], h_prev/c_prev [H], w_ih [4H,I], w_hh [4H,H], b [4H].
  LstmOut lstm_cell(int x, int h_prev, int c_prev, int w_ih, int w_hh, int b) {
    const int in = static_cast<int>(nodes_[idx(x)].val.size());
    const int h4 = nodes_[idx(w_ih)].shape[0];
    const int hidden = h4 / 4;
    if (nodes_[idx(w_ih)].shape[1] != in ||
        nodes_[idx(w_hh)].shape[0] != h4 ||
        nodes_[idx(w_hh)].shape[1] != hidden ||
        nodes_[idx(h_prev)].val.size() != static_cast<std::size_t>(hidden) ||
        nodes_[idx(c_prev)].val.size() != static_cast<std::size_t>(hidden) ||
        nodes_[idx(b)].val.size() != static_cast<std::size_t>(h4)) {
      throw ShapeMismatch("lstm_cell: inconsistent shapes");
    }
    std::vector<Real> z(static_cast<std::size_t>(h4));
    kernels::matvec(nodes_[idx(w_ih)].val.data(), nodes_[idx(x)].val.data(),
                    z.data(), static_cast<std::size_t>(h4),
                    static_cast<std::size_t>(in));
    std::vector<Real> zh(static_cast<std::size_t>(h4));
    kernels::matvec(nodes_[idx(w_hh)].val.data(),
                    nodes_[idx(h_prev)].val.data(), zh.data(),
                    static_cast<std::size_t>(h4),
                    static_cast<std::size_t>(hidden));
    for (int i = 0; i < h4; ++i) {
      z[static_cast<std::size_t>(i)] +=
          zh[static_cast<std::size_t>(i)] + nodes_[idx(b)].val[static_cast<std::size_t>(i)];
    }
    std::vector<Real> gi(static_cast<std::size_t>(hidden)),
        gf(static_cast<std::size_t>(hidden)), gg(static_cast<std::size_t>(hidden)),
        go(static_cast<std::size_t>(hidden)), tc(static_cast<std::size_t>(hidden));
    std::vector<Real> cv(static_cast<std::size_t>(hidden)),
        hv(static_cast<std::size_t>(hidden));
    const Real* cp = nodes_[idx(c_prev)].val.data();
    for (int i = 0; i < hidden; ++i) {
      const std::size_t u = static_cast<std::size_t>(i);
      gi[u] = Real(1) / (Real(1) + std::exp(-z[u]));
      gf[u] = Real(1) / (Real(1) + std::exp(-z[u + static_cast<std::size_t>(hidden)]));
      gg[u] = std::tanh(z[u + 2 * static_cast<std::size_t>(hidden)]);
      go[u] = Real(1) / (Real(1) + std::exp(-z[u + 3 * static_cast<std::size_t>(hidden)]));
      cv[u] = gf[u] * cp[u] + gi[u] * gg[u];
      tc[u] = std::tanh(cv[u]);
      hv[u] = go[u] * tc[u];
    }
    LstmOut out;
    out.c = push({hidden}, std::move(cv));
    out.h = push({hidden}, std::move(hv));
    back_.push_back([this, x, h_prev, c_prev, w_ih, w_hh, b, out, in, hidden,
                     gi = std::move(gi), gf = std::move(gf), gg = std::move(gg),
                     go = std::move(go), tc = std::move(tc)] {
      const int h4 = 4 * hidden;
      std::vector<Real> dz(static_cast<std::size_t>(h4));
      const Real* dh = nodes_[idx(out.h)].grad.data();
      const Real* dc_out = nodes_[idx(out.c)].grad.data();
      const Real* cp = nodes_[idx(c_prev)].val.data();
      Real* dcp = nodes_[idx(c_prev)].grad.data();
      for (int i = 0; i < hidden; ++i) {
        const std::size_t u = static_cast<std::size_t>(i);
        const Real dc = dc_out[u] + dh[u] * go[u] * (Real(1) - tc[u] * tc[u]);
        const Real d_o = dh[u] * tc[u];
        const Real d_i = dc * gg[u];
        const Real d_g = dc * gi[u];
        const Real d_f = dc * cp[u];
        dcp[u] += dc * gf[u];
        dz[u] = d_i * gi[u] * (Real(1) - gi[u]);
        dz[u + static_cast<std::size_t>(hidden)] = d_f * gf[u] * (Real(1) - gf[u]);
        dz[u + 2 * static_cast<std::size_t>(hidden)] = d_g * (Real(1) - gg[u] * gg[u]);
        dz[u + 3 * static_cast<std::size_t>(hidden)] = d_o * go[u] * (Real(1) - go[u]);
      }
      kernels::outer_accum(dz.data(), nodes_[idx(x)].val.data(),
                           nodes_[idx(w_ih)].grad.data(),
                           static_cast<std::size_t>(h4),
                           static_cast<std::size_t>(in));
      kernels::outer_accum(dz.data(), nodes_[idx(h_prev)].val.data(),
                           nodes_[idx(w_hh)].grad.data(),
                           static_cast<std::size_t>(h4),
                           static_cast<std::size_t>(hidden));
      kernels::matvec_t_accum(nodes_[idx(w_ih)].val.data(), dz.data(),
                              nodes_[idx(x)].grad.data(),
                              static_cast<std::size_t>(h4),
                              static_cast<std::size_t>(in));
      kernels::matvec_t_accum(nodes_[idx(w_hh)].val.data(), dz.data(),
                              nodes_[idx(h_prev)].grad.data(),
                              static_cast<std::size_t>(h4),
                              static_cast<std::size_t>(hidden));
      kernels::axpy(Real(1), dz.data(), nodes_[idx(b)].grad.data(),
                    static_cast<std::size_t>(h4));
    });
    return out;
  }

  // Temporal convolution with same-padding.  x [T,Ci], w [Co,K,Ci]
  // (kernel-major inner layout keeps the dot contiguous), b [Co] -> [T,Co].
  int conv1d_same(int x, int w, int b) {
    const auto& xs = nodes_[idx(x)].shape;
    const auto& ws = nodes_[idx(w)].shape;
    if (xs.size() != 2 || ws.size() != 3 || ws[2] != xs[1]) {
      throw ShapeMismatch("conv1d_same: inconsistent shapes");
    }
    const int t_len = xs[0], cin = xs[1], cout = ws[0], k = ws[1];
    const int off = k / 2;
    if (b >= 0 && nodes_[idx(b)].val.size() != static_cast<std::size_t>(cout)) {
      throw ShapeMismatch("conv1d_same: bias width mismatch");
    }
    int out = push({t_len, cout},
                   std::vector<Real>(static_cast<std::size_t>(t_len) * cout));
    const Real* xv = nodes_[idx(x)].val.data();
    const Real* wv = nodes_[idx(w)].val.data();
    Real* yv = nodes_[idx(out)].val.data();
    for (int t = 0; t < t_len; ++t) {
      for (int o = 0; o < cout; ++o) {
        Real acc = b >= 0 ? nodes_[idx(b)].val[static_cast<std::size_t>(o)]
                          : Real(0);
        for (int kk = 0; kk < k; ++kk) {
          const int s = t + kk - off;
          if (s < 0 || s >= t_len) continue;
          acc += kernels::dot(
              wv + (static_cast<std::size_t>(o) * k + kk) * cin,
              xv + static_cast<std::size_t>(s) * cin,
              static_cast<std::size_t>(cin));
        }
        yv[static_cast<std::size_t>(t) * cout + o] = acc;
      }
    }
    back_.push_back([this, x, w, b, out, t_len, cin, cout, k, off] {
      const Real* g = nodes_[idx(out)].grad.data();
      const Real* xv = nodes_[idx(x)].val.data();
      const Real* wv = nodes_[idx(w)].val.data();
      Real* gx = nodes_[idx(x)].grad.data();
      Real* gw = nodes_[idx(w)].grad.data();
      for (int t = 0; t < t_len; ++t) {
        for (int o = 0; o < cout; ++o) {
          const Real go = g[static_cast<std::size_t>(t) * cout + o];
          if (b >= 0) nodes_[idx(b)].grad[static_cast<std::size_t>(o)] += go;
          for (int kk = 0; kk < k; ++kk) {
            const int s = t + kk - off;
            if (s < 0 || s >= t_len) continue;
            kernels::axpy(go, xv + static_cast<std::size_t>(s) * cin,
                          gw + (static_cast<std::size_t>(o) * k + kk) * cin,
                          static_cast<std::size_t>(cin));
            kernels::axpy(go,
                          wv + (static_cast<std::size_t>(o) * k + kk) * cin,
                          gx + static_cast<std::size_t>(s) * cin,
                          static_cast<std::size_t>(cin));
          }
        }
      }
    });
    return out;
  }

  // Normalizes each feature channel over the time axis with this
  // utterance's own statistics (training mode).  Harvested batch stats go
  // to the caller, which owns the running-stat update, so batch-parallel
  // training stays deterministic.
  int batchnorm_train(int x, int gamma, int beta, Real eps,
                      std::vector<Real>* batch_mean,
                      std::vector<Real>* batch_var) {
    const auto& xs = nodes_[idx(x)].shape;
    if (xs.size() != 2) throw ShapeMismatch("batchnorm: rank-2 input only");
    const int t_len = xs[0], m = xs[1];
    if (nodes_[idx(gamma)].val.size() != static_cast<std::size_t>(m) ||
        nodes_[idx(beta)].val.size() != static_cast<std::size_t>(m)) {
      throw ShapeMismatch("batchnorm: parameter width mismatch");
    }
    std::vector<Real> mean(static_cast<std::size_t>(m), Real(0));
    std::vector<Real> var(static_cast<std::size_t>(m), Real(0));
    const Real* xv = nodes_[idx(x)].val.data();
    for (int t = 0; t < t_len; ++t) {
      for (int c = 0; c < m; ++c) {
        mean[static_cast<std::size_t>(c)] +=
            xv[static_cast<std::size_t>(t) * m + c];
      }
    }
    for (int c = 0; c < m; ++c) mean[static_cast<std::size_t>(c)] /= Real(t_len);
    for (int t = 0; t < t_len; ++t) {
      for (int c = 0; c < m; ++c) {
        const Real d = xv[static_cast<std::size_t>(t) * m + c] -
                       mean[static_cast<std::size_t>(c)];
        var[static_cast<std::size_t>(c)] += d * d;
      }
    }
    for (int c = 0; c < m; ++c) var[static_cast<std::size_t>(c)] /= Real(t_len);
    if (batch_mean) *batch_mean = mean;
    if (batch_var) *batch_var = var;

    std::vector<Real> inv_std(static_cast<std::size_t>(m));
    for (int c = 0; c < m; ++c) {
      inv_std[static_cast<std::size_t>(c)] =
          Real(1) / std::sqrt(var[static_cast<std::size_t>(c)] + eps);
    }
    int out = push({t_len, m},
                   std::vector<Real>(static_cast<std::size_t>(t_len) * m));
    std::vector<Real> xhat(static_cast<std::size_t>(t_len) * m);
    const Real* gv = nodes_[idx(gamma)].val.data();
    const Real* bv = nodes_[idx(beta)].val.data();
    for (int t = 0; t < t_len; ++t) {
      for (int c = 0; c < m; ++c) {
        const std::size_t u = static_cast<std::size_t>(t) * m + c;
        xhat[u] = (xv[u] - mean[static_cast<std::size_t>(c)]) *
                  inv_std[static_cast<std::size_t>(c)];
        nodes_[idx(out)].val[u] =
            gv[static_cast<std::size_t>(c)] * xhat[u] +
            bv[static_cast<std::size_t>(c)];
      }
    }
    back_.push_back([this, x, gamma, beta, out, t_len, m,
                     inv_std = std::move(inv_std), xhat = std::move(xhat)] {
      const Real* g = nodes_[idx(out)].grad.data();
      const Real* gv = nodes_[idx(gamma)].val.data();
      Real* ggamma = nodes_[idx(gamma)].grad.data();
      Real* gbeta = nodes_[idx(beta)].grad.data();
      Real* gx = nodes_[idx(x)].grad.data();
      for (int c = 0; c < m; ++c) {
        const std::size_t uc = static_cast<std::size_t>(c);
        Real sum_g = Real(0), sum_gx = Real(0);
        for (int t = 0; t < t_len; ++t) {
          const std::size_t u = static_cast<std::size_t>(t) * m + c;
          sum_g += g[u];
          sum_gx += g[u] * xhat[u];
        }
        ggamma[uc] += sum_gx;
        gbeta[uc] += sum_g;
        const Real k1 = gv[uc] * inv_std[uc];
        for (int t = 0; t < t_len; ++t) {
          const std::size_t u = static_cast<std::size_t>(t) * m + c;
          gx[u] += k1 * (g[u] - sum_g / Real(t_len) -
                         xhat[u] * sum_gx / Real(t_len));
        }
      }
    });
    return out;
  }

  // Inference-mode normalization with stored running statistics.
  int batchnorm_infer(int x, int gamma, int beta,
                      const std::vector<Real>& run_mean,
                      const std::vector<Real>& run_var, Real eps) {
    const auto& xs = nodes_[idx(x)].shape;
    if (xs.size() != 2) throw ShapeMismatch("batchnorm: rank-2 input only");
    const int t_len = xs[0], m = xs[1];
    if (run_mean.size() != static_cast<std::size_t>(m) ||
        run_var.size() != static_cast<std::size_t>(m)) {
      throw ShapeMismatch("batchnorm: running statistic width mismatch");
    }
    std::vector<Real> inv_std(static_cast<std::size_t>(m));
    for (int c = 0; c < m; ++c) {
      inv_std[static_cast<std::size_t>(c)] =
          Real(1) / std::sqrt(run_var[static_cast<std::size_t>(c)] + eps);
    }
    int out = push({t_len, m},
                   std::vector<Real>(static_cast<std::size_t>(t_len) * m));
    const Real* xv = nodes_[idx(x)].val.data();
    const Real* gv = nodes_[idx(gamma)].val.data();
    const Real* bv = nodes_[idx(beta)].val.data();
    for (int t = 0; t < t_len; ++t) {
      for (int c = 0; c < m; ++c) {
        const std::size_t u = static_cast<std::size_t>(t) * m + c;
        const std::size_t uc = static_cast<std::size_t>(c);
        nodes_[idx(out)].val[u] =
            gv[uc] * (xv[u] - run_mean[uc]) * inv_std[uc] + bv[uc];
      }
    }
    back_.push_back([this, x, gamma, beta, out, t_len, m,
                     inv_std, run_mean] {
      const Real* g = nodes_[idx(out)].grad.data();
      const Real* xv = nodes_[idx(x)].val.data();
      const Real* gv = nodes_[idx(gamma)].val.data();
      Real* ggamma = nodes_[idx(gamma)].grad.data();
      Real* gbeta = nodes_[idx(beta)].grad.data();
      Real* gx = nodes_[idx(x)].grad.data();
      for (int t = 0; t < t_len; ++t) {
        for (int c = 0; c < m; ++c) {
          const std::size_t u = static_cast<std::size_t>(t) * m + c;
          const std::size_t uc = static_cast<std::size_t>(c);
          gx[u] += g[u] * gv[uc] * inv_std[uc];
          ggamma[uc] += g[u] * (xv[u] - run_mean[uc]) * inv_std[uc];
          gbeta[uc] += g[u];
        }
      }
    });
    return out;
  }

  // Mean over the time axis: [T,M] -> [M].
  int mean_rows(int x) {
    const auto& xs = nodes_[idx(x)].shape;
    if (xs.size() != 2) throw ShapeMismatch("mean_rows: rank-2 input only");
    const int t_len = xs[0], m = xs[1];
    int out = push({m}, std::vector<Real>(static_cast<std::size_t>(m), Real(0)));
    const Real* xv = nodes_[idx(x)].val.data();
    for (int t = 0; t < t_len; ++t) {
      kernels::axpy(Real(1) / Real(t_len),
                    xv + static_cast<std::size_t>(t) * m,
                    nodes_[idx(out)].val.data(), static_cast<std::size_t>(m));
    }
    back_.push_back([this, x, out, t_len, m] {
      Real* gx = nodes_[idx(x)].grad.data();
      for (int t = 0; t < t_len; ++t) {
        kernels::axpy(Real(1) / Real(t_len), nodes_[idx(out)].grad.data(),
                      gx + static_cast<std::size_t>(t) * m,
                      static_cast<std::size_t>(m));
      }
    });
    return out;
  }

  // Scalar [1]: mean of |x|.
  int mean_abs(int a) {
    const std::size_t n = nodes_[idx(a)].val.size();
    Real acc = Real(0);
    for (Real v : nodes_[idx(a)].val) acc += std::fabs(v);
    int out = push({1}, {acc / Real(n)});
    back_.push_back([this, a, out, n] {
      const Real g = nodes_[idx(out)].grad[0] / Real(n);
      const Real* x = nodes_[idx(a)].val.data();
      Real* ga = nodes_[idx(a)].grad.data();
      for (std::size_t i = 0; i < n; ++i) {
        if (x[i] > Real(0)) {
          ga[i] += g;
        } else if (x[i] < Real(0)) {
          ga[i] -= g;
        }
      }
    });
    return out;
  }

  // Scalar [1]: mean of x^2.
  int mean_sq(int a) {
    const std::size_t n = nodes_[idx(a)].val.size();
    int out = push({1}, {kernels::sum_sq(nodes_[idx(a)].val.data(), n) / Real(n)});
    back_.push_back([this, a, out, n] {
      const Real g = Real(2) * nodes_[idx(out)].grad[0] / Real(n);
      kernels::axpy(g, nodes_[idx(a)].val.data(), nodes_[idx(a)].grad.data(),
                    n);
    });
    return out;
  }

  // Scalar [1]: cross-entropy of logits [K] against an integer label,
  // computed with the usual max-shift for stability.
  int softmax_ce(int logits, int label) {
    const std::size_t k = nodes_[idx(logits)].val.size();
    if (label < 0 || static_cast<std::size_t>(label) >= k) {
      throw ShapeMismatch("softmax_ce: label out of range");
    }
    const Real* lv = nodes_[idx(logits)].val.data();
    Real mx = lv[0];
    for (std::size_t i = 1; i < k; ++i) mx = std::max(mx, lv[i]);
    Real z = Real(0);
    for (std::size_t i = 0; i < k; ++i) z += std::exp(lv[i] - mx);
    std::vector<Real> softmax(k);
    for (std::size_t i = 0; i < k; ++i) softmax[i] = std::exp(lv[i] - mx) / z;
    int out = push({1}, {std::log(z) + mx - lv[static_cast<std::size_t>(label)]});
    back_.push_back([this, logits, label, out, k, softmax = std::move(softmax)] {
      const Real g = nodes_[idx(out)].grad[0];
      Real* gl = nodes_[idx(logits)].grad.data();
      for (std::size_t i = 0; i < k; ++i) gl[i] += g * softmax[i];
      gl[static_cast<std::size_t>(label)] -= g;
    });
    return out;
  }

  void backward(int loss) {
    if (nodes_[idx(loss)].val.size() != 1) {
      throw ShapeMismatch("backward: loss must be scalar");
    }
    nodes_[idx(loss)].grad[0] = Real(1);
    for (auto it = back_.rbegin(); it != back_.rend(); ++it) (*it)();
  }

 private:
  struct Node {
    std::vector<int> shape;
    std::vector<Real> val, grad;
  };

  static std::size_t count(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
  }

  std::size_t idx(int id) const { return static_cast<std::size_t>(id); }

  int push(std::vector<int> shape, std::vector<Real> val) {
    if (count(shape) != val.size()) {
      throw ShapeMismatch("tape: shape does not match value count");
    }
    Node n;
    n.shape = std::move(shape);
    n.grad.assign(val.size(), Real(0));
    n.val = std::move(val);
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  void require_same_shape(int a, int b) const {
    if (nodes_[idx(a)].shape != nodes_[idx(b)].shape) {
      throw ShapeMismatch("tape: operand shapes differ");
    }
  }

  std::vector<Node> nodes_;
  std::vector<std::function<void()>> back_;
};

// Binds a parameter map into a tape as leaves; grads harvested by name.
template <typename Real>
class BoundParams {
 public:
  BoundParams(Tape<Real>& tape, const ParamMap<Real>& params) : tape_(&tape) {
    for (const auto& [name, tensor] : params) {
      ids_[name] = tape.leaf(tensor);
    }
  }
  int id(const std::string& name) const {
    auto it = ids_.find(name);
    if (it == ids_.end()) {
      throw MissingArtifact("no parameter named " + name);
    }
    return it->second;
  }
  // grads_out[name] += tape gradient of the leaf (allocating zeros first if
  // absent), iterated in name order.
  void accumulate_grads(ParamMap<Real>& grads_out) const {
    for (const auto& [name, id] : ids_) {
      const auto& g = tape_->grad(id);
      auto it = grads_out.find(name);
      if (it == grads_out.end()) {
        Tensor<Real> t;
        t.shape = tape_->shape(id);
        t.data.assign(g.begin(), g.end());
        grads_out.emplace(name, std::move(t));
      } else {
        kernels::axpy(Real(1), g.data(), it->second.data.data(), g.size());
      }
    }
  }

 private:
  Tape<Real>* tape_;
  std::map<std::string, int> ids_;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment buffers keyed like the parameter map.
template <typename Real>
struct AdamState {
  ParamMap<Real> m, v;
  long t = 0;
};

// One update over every (name, grad) pair present in `grads`.  Names
// containing ".running_" are statistics, not optimized parameters, and are
// skipped.
template <typename Real>
void adam_step(ParamMap<Real>& params, const ParamMap<Real>& grads,
               AdamState<Real>& state, const AdamConfig& cfg) {
  state.t += 1;
  const Real b1 = static_cast<Real>(cfg.beta1);
  const Real b2 = static_cast<Real>(cfg.beta2);
  const Real corr1 =
      Real(1) - static_cast<Real>(std::pow(cfg.beta1, static_cast<double>(state.t)));
  const Real corr2 =
      Real(1) - static_cast<Real>(std::pow(cfg.beta2, static_cast<double>(state.t)));
  for (auto& [name, p] : params) {
    if (name.find(".running_") != std::string::npos) continue;
    auto git = grads.find(name);
    if (git == grads.end()) continue;
    const std::vector<Real>& g = git->second.data;
    Tensor<Real>& m = state.m.try_emplace(name, Tensor<Real>::zeros(p.shape))
                          .first->second;
    Tensor<Real>& v = state.v.try_emplace(name, Tensor<Real>::zeros(p.shape))
                          .first->second;
    for (std::size_t i = 0; i < p.data.size(); ++i) {
      m.data[i] = b1 * m.data[i] + (Real(1) - b1) * g[i];
      v.data[i] = b2 * v.data[i] + (Real(1) - b2) * g[i] * g[i];
      const Real mhat = m.data[i] / corr1;
      const Real vhat = v.data[i] / corr2;
      p.data[i] -= static_cast<Real>(cfg.lr) * mhat /
                   (std::sqrt(vhat) + static_cast<Real>(cfg.eps));
    }
  }
}

}  // namespace nn
}  // namespace aec

#endif  // AEC_NN_HPP_
