// Copyright (c) 2026 the faultvit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "faultvit/errors.hpp"
#include "faultvit/tensor.hpp"

namespace faultvit {

class Tape;

// Handle to a value recorded on a tape.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Tensor& value() const;
  const std::vector<std::size_t>& shape() const;
};

// Reverse-mode differentiation record. Ops append nodes in evaluation order,
// so parents always precede children and one reverse sweep visits each node
// exactly once. Gradients accumulate in tape order; with one thread the
// whole replay is bitwise deterministic.
class Tape {
 public:
  // backward(tape, self_id, grad_of_self, grads): scatter into parent slots.
  using BackwardFn =
      std::function<void(Tape&, int, const Tensor&, std::vector<Tensor>&)>;

  struct Node {
    Tensor value;
    bool requires_grad = false;
    const char* op = "leaf";
    BackwardFn backward;
  };

  Var leaf(Tensor value, bool requires_grad) {
    if (requires_grad && !value.all_finite())
      throw NumericError("non-finite value in leaf tensor");
    nodes_.push_back(Node{std::move(value), requires_grad, "leaf", nullptr});
    return Var{this, static_cast<int>(nodes_.size()) - 1};
  }

  Var record(const char* op, Tensor value, bool requires_grad, BackwardFn fn) {
    if (!value.all_finite())
      throw NumericError(std::string("op '") + op +
                         "' produced a non-finite value");
    nodes_.push_back(Node{std::move(value), requires_grad, op,
                          requires_grad ? std::move(fn) : nullptr});
    return Var{this, static_cast<int>(nodes_.size()) - 1};
  }

  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  const Tensor& value(int id) const { return node(id).value; }
  std::size_t size() const { return nodes_.size(); }

  // Lazily allocated gradient slot; an empty tensor stands for zero.
  static Tensor& slot(std::vector<Tensor>& grads, int id,
                      const std::vector<std::size_t>& shape) {
    auto& g = grads[static_cast<std::size_t>(id)];
    if (g.empty()) g = Tensor::zeros(shape);
    return g;
  }

  // Reverse accumulation from a scalar loss. Returns one gradient slot per
  // node; unreached slots stay empty (gradient zero).
  std::vector<Tensor> backward(const Var& loss) {
    if (loss.tape != this) throw Error("loss recorded on a different tape");
    if (value(loss.id).size() != 1)
      throw NonScalarLoss("backward needs a scalar loss, got shape " +
                          Tensor::shape_str(value(loss.id).shape()));
    std::vector<Tensor> grads(nodes_.size());
    grads[static_cast<std::size_t>(loss.id)] =
        Tensor(value(loss.id).shape(), {1.0});
    for (int id = loss.id; id >= 0; --id) {
      auto& n = nodes_[static_cast<std::size_t>(id)];
      const Tensor& g = grads[static_cast<std::size_t>(id)];
      if (g.empty() || !n.requires_grad || !n.backward) continue;
      n.backward(*this, id, g, grads);
    }
    return grads;
  }

  // Gradient of a leaf after backward(); zeros if the loss never reached it.
  Tensor grad_of(const std::vector<Tensor>& grads, const Var& v) const {
    const Tensor& g = grads[static_cast<std::size_t>(v.id)];
    return g.empty() ? Tensor::zeros(value(v.id).shape()) : g;
  }

 private:
  std::vector<Node> nodes_;
};

inline const Tensor& Var::value() const { return tape->value(id); }
inline const std::vector<std::size_t>& Var::shape() const {
  return value().shape();
}

namespace ad_impl {

inline void check_same_tape(const Var& a, const Var& b) {
  if (a.tape != b.tape || a.tape == nullptr)
    throw Error("operands recorded on different tapes");
}

// C += A(m x k) * B(k x n), ikj order
inline void mm_nn(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    const double* ai = a + i * k;
    for (std::size_t l = 0; l < k; ++l) {
      const double av = ai[l];
      if (av == 0.0) continue;
      const double* bl = b + l * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bl[j];
    }
  }
}

// C += A(m x k) * B^T, where B is (n x k): row-dot-row
inline void mm_nt(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b + j * k;
      double s = 0.0;
      for (std::size_t l = 0; l < k; ++l) s += ai[l] * bj[l];
      ci[j] += s;
    }
  }
}

// C += A^T * B, where A is (k x m), B is (k x n)
inline void mm_tn(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t k, std::size_t n) {
  for (std::size_t l = 0; l < k; ++l) {
    const double* al = a + l * m;
    const double* bl = b + l * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = al[i];
      if (av == 0.0) continue;
      double* ci = c + i * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bl[j];
    }
  }
}

inline void require_rank2(const Var& v, const char* op) {
  if (v.value().rank() != 2)
    throw ShapeMismatch(std::string(op) + " needs a rank-2 tensor, got " +
                        Tensor::shape_str(v.shape()));
}

}  // namespace ad_impl

// ---- primitive ops ----

inline Var matmul(const Var& a, const Var& b) {
  ad_impl::check_same_tape(a, b);
  ad_impl::require_rank2(a, "matmul");
  ad_impl::require_rank2(b, "matmul");
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.cols() != B.rows())
    throw ShapeMismatch("matmul inner dims disagree: " +
                        Tensor::shape_str(A.shape()) + " vs " +
                        Tensor::shape_str(B.shape()));
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  Tensor C({m, n});
  ad_impl::mm_nn(A.data().data(), B.data().data(), C.data().data(), m, k, n);
  const bool rg = a.tape->node(a.id).requires_grad || b.tape->node(b.id).requires_grad;
  const int pa = a.id, pb = b.id;
  return a.tape->record(
      "matmul", std::move(C), rg,
      [pa, pb, m, k, n](Tape& t, int, const Tensor& g, std::vector<Tensor>& grads) {
        const Tensor& A = t.value(pa);
        const Tensor& B = t.value(pb);
        if (t.node(pa).requires_grad) {
          Tensor& da = Tape::slot(grads, pa, A.shape());
          ad_impl::mm_nt(g.data().data(), B.data().data(), da.data().data(), m, n, k);
        }
        if (t.node(pb).requires_grad) {
          Tensor& db = Tape::slot(grads, pb, B.shape());
          ad_impl::mm_tn(A.data().data(), g.data().data(), db.data().data(), k, m, n);
        }
      });
}

inline Var transpose(const Var& a) {
  ad_impl::require_rank2(a, "transpose");
  const Tensor& A = a.value();
  const std::size_t m = A.rows(), n = A.cols();
  Tensor T({n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) T(j, i) = A(i, j);
  const int pa = a.id;
  return a.tape->record(
      "transpose", std::move(T), a.tape->node(a.id).requires_grad,
      [pa, m, n](Tape& t, int, const Tensor& g, std::vector<Tensor>& grads) {
        Tensor& da = Tape::slot(grads, pa, t.value(pa).shape());
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j) da(i, j) += g(j, i);
      });
}

// add with same shapes, or row-broadcast of b ([n] or [1 x n]) over a [m x n]
inline Var add(const Var& a, const Var& b) {
  ad_impl::check_same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  const bool same = A.same_shape(B);
  const bool bcast = !same && A.rank() == 2 && B.size() == A.cols() &&
                     (B.rank() == 1 || B.rows() == 1);
  if (!same && !bcast)
    throw ShapeMismatch("add shapes " + Tensor::shape_str(A.shape()) + " vs " +
                        Tensor::shape_str(B.shape()));
  Tensor C(A.shape());
  if (same) {
    for (std::size_t i = 0; i < A.size(); ++i) C[i] = A[i] + B[i];
  } else {
    const std::size_t n = A.cols();
    for (std::size_t i = 0; i < A.rows(); ++i)
      for (std::size_t j = 0; j < n; ++j) C(i, j) = A(i, j) + B[j];
  }
  const bool rg = a.tape->node(a.id).requires_grad || b.tape->node(b.id).requires_grad;
  const int pa = a.id, pb = b.id;
  return a.tape->record(
      "add", std::move(C), rg,
      [pa, pb, same](Tape& t, int, const Tensor& g, std::vector<Tensor>& grads) {
        if (t.node(pa).requires_grad) {
          Tensor& da = Tape::slot(grads, pa, t.value(pa).shape());
          for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i];
        }
        if (t.node(pb).requires_grad) {
          const Tensor& B = t.value(pb);
          Tensor& db = Tape::slot(grads, pb, B.shape());
          if (same) {
            for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i];
          } else {
            const std::size_t n = B.size();
            for (std::size_t i = 0; i < g.rows(); ++i)
              for (std::size_t j = 0; j < n; ++j) db[j] += g(i, j);
          }
        }
      });
}

inline Var sub(const Var& a, const Var& b) {
  ad_impl::check_same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (!A.same_shape(B))
    throw ShapeMismatch("sub shapes " + Tensor::shape_str(A.shape()) + " vs " +
                        Tensor::shape_str(B.shape()));
  Tensor C(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) C[i] = A[i] - B[i];
  const bool rg = a.tape->node(a.id).requires_grad || b.tape->node(b.id).requires_grad;
  const int pa = a.id, pb = b.id;
  return a.tape->record(
      "sub", std::move(C), rg,
      [pa, pb](Tape& t, int, const Tensor& g, std::vector<Tensor>& grads) {
        if (t.node(pa).requires_grad) {
          Tensor& da = Tape::slot(grads, pa, t.value(pa).shape());
          for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i];
        }
        if (t.node(pb).requires_grad) {
          Tensor& db = Tape::slot(grads, pb, t.value(pb).shape());
          for (std::size_t i = 0; i < g.size(); ++i) db[i] -= g[i];
        }
      });
}

inline Var mul(const Var& a, const Var& b) {
  ad_impl::check_same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (!A.same_shape(B))
    throw ShapeMismatch("mul shapes " + Tensor::shape_str(A.shape()) + " vs " +
                        Tensor::shape_str(B.shape()));
  Tensor C(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) C[i] = A[i] * B[i];
  const bool rg = a.tape->node(a.id).requires_grad || b.tape->node(b.id).requires_grad;
  const int pa = a.id, pb = b.id;
  return a.tape->record(
      "mul", std::move(C), rg,
      [pa, pb](Tape& t, int, const Tensor& g, std::vector<Tensor>& grads) {
        const Tensor& A = t.value(pa);
        const Tensor& B = t.value(pb);
        if (t.node(pa).requires_grad) {
          Tensor& da = Tape::slot(grads, pa, A.shape());
          for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * B[i];
        }
        if (t.node(pb).requires_grad) {
          Tensor& db = Tape::slot(grads, pb, B.shape());
          for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i] * A[i];
        }
      });
}

inline Var scale(const Var& a, double c) {
  const Tensor& A = a.value();
  Tensor C(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) C[i] = A[i] * c;
  const int pa = a.id;
  return a.tape->record(
      "scale", std::move(C), a.tape->node(a.id).requires_grad,
      [pa, c](Tape& t, int, const Tensor& g, std::vector<Tensor>& grads) {
        Tensor& da = Tape::slot(grads, pa, t.value(pa).shape());
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * c;
      });
}

// softmax along one axis of an arbitrary-rank tensor, max-shifted
inline Var softmax(const Var& a, std::size_t axis) {
  const Tensor& A = a.value();
  if (axis >= A.rank())
    throw ShapeMismatch("softmax axis " + std::to_string(axis) +
                        " out of range for " + Tensor::shape_str(A.shape()));
  const auto& shape = A.shape();
  const std::size_t len = shape[axis];
  std::size_t inner = 1, outer = 1;
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];

  Tensor S(A.shape());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * len * inner + in;
      double mx = A[base];
      for (std::size_t k = 1; k < len; ++k)
        mx = std::max(mx, A[base + k * inner]);
      double sum = 0.0;
      for (std::size_t k = 0; k < len; ++k) {
        const double e = std::exp(A[base + k * inner] - mx);
        S[base + k * inner] = e;
        sum += e;
      }
      const double inv = 1.0 / sum;
      for (std::size_t k = 0; k < len; ++k) S[base + k * inner] *= inv;
    }
  }
  const int pa = a.id;
  return a.tape->record(
      "softmax", std::move(S), a.tape->node(a.id).requires_grad,
      [pa, len, inner, outer](Tape& t, int self, const Tensor& g,
                              std::vector<Tensor>& grads) {
        const Tensor& S = t.value(self);
        Tensor& da = Tape::slot(grads, pa, t.value(pa).shape());
        for (std::size_t o = 0; o < outer; ++o) {
          for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = o * len * inner + in;
            double dot = 0.0;
            for (std::size_t k = 0; k < len; ++k)
              dot += g[base + k * inner] * S[base + k * inner];
            for (std::size_t k = 0; k < len; ++k) {
              const std::size_t idx = base + k * inner;
              da[idx] += S[idx] * (g[idx] - dot);
            }
          }
        }
      });
}

// Per-row standardization over the last axis of x [rows x D], then affine
// gamma/beta [D]. Population variance; eps keeps the constant row finite.
inline Var layer_norm(const Var& x, const Var& gamma, const Var& beta,
                      double eps) {
  ad_impl::check_same_tape(x, gamma);
  ad_impl::check_same_tape(x, beta);
  if (!(eps > 0)) throw InvalidParams("layer_norm eps must be > 0");
  const Tensor& X = x.value();
  const std::size_t d = X.cols();
  const std::size_t rows = X.size() / d;
  if (gamma.value().size() != d || beta.value().size() != d)
    throw ShapeMismatch("layer_norm gamma/beta must have length " +
                        std::to_string(d));

  Tensor Y(X.shape());
  const Tensor& G = gamma.value();
  const Tensor& Bt = beta.value();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = X.data().data() + r * d;
    double* yr = Y.data().data() + r * d;
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += xr[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<double>(d);
    const double istd = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j)
      yr[j] = G[j] * (xr[j] - mu) * istd + Bt[j];
  }
  const bool rg = x.tape->node(x.id).requires_grad ||
                  x.tape->node(gamma.id).requires_grad ||
                  x.tape->node(beta.id).requires_grad;
  const int px = x.id, pg = gamma.id, pb = beta.id;
  return x.tape->record(
      "layer_norm", std::move(Y), rg,
      [px, pg, pb, d, rows, eps](Tape& t, int, const Tensor& g,
                                 std::vector<Tensor>& grads) {
        const Tensor& X = t.value(px);
        const Tensor& G = t.value(pg);
        const bool need_x = t.node(px).requires_grad;
        const bool need_g = t.node(pg).requires_grad;
        const bool need_b = t.node(pb).requires_grad;
        Tensor* dx = need_x ? &Tape::slot(grads, px, X.shape()) : nullptr;
        Tensor* dg = need_g ? &Tape::slot(grads, pg, G.shape()) : nullptr;
        Tensor* db = need_b ? &Tape::slot(grads, pb, t.value(pb).shape()) : nullptr;
        const double dn = static_cast<double>(d);
        for (std::size_t r = 0; r < rows; ++r) {
          const double* xr = X.data().data() + r * d;
          const double* gr = g.data().data() + r * d;
          double mu = 0.0;
          for (std::size_t j = 0; j < d; ++j) mu += xr[j];
          mu /= dn;
          double var = 0.0;
          for (std::size_t j = 0; j < d; ++j) var += (xr[j] - mu) * (xr[j] - mu);
          var /= dn;
          const double istd = 1.0 / std::sqrt(var + eps);
          if (need_g || need_b) {
            for (std::size_t j = 0; j < d; ++j) {
              if (need_g) (*dg)[j] += gr[j] * (xr[j] - mu) * istd;
              if (need_b) (*db)[j] += gr[j];
            }
          }
          if (need_x) {
            // dxhat_j = g_j * gamma_j; dx = (dxhat - mean(dxhat)
            //           - xhat * mean(dxhat * xhat)) * istd
            double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
              const double xhat = (xr[j] - mu) * istd;
              const double dxhat = gr[j] * G[j];
              mean_dxhat += dxhat;
              mean_dxhat_xhat += dxhat * xhat;
            }
            mean_dxhat /= dn;
            mean_dxhat_xhat /= dn;
            double* dxr = dx->data().data() + r * d;
            for (std::size_t j = 0; j < d; ++j) {
              const double xhat = (xr[j] - mu) * istd;
              const double dxhat = gr[j] * G[j];
              dxr[j] += (dxhat - mean_dxhat - xhat * mean_dxhat_xhat) * istd;
            }
          }
        }
      });
}

namespace ad_impl {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;
}  // namespace ad_impl

// tanh-form GELU: 0.5*x*(1 + tanh(sqrt(2/pi)*(x + 0.044715*x^3)))
inline Var gelu(const Var& x) {
  const Tensor& X = x.value();
  Tensor Y(X.shape());
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double v = X[i];
    const double u = ad_impl::kGeluC * (v + ad_impl::kGeluA * v * v * v);
    Y[i] = 0.5 * v * (1.0 + std::tanh(u));
  }
  const int px = x.id;
  return x.tape->record(
      "gelu", std::move(Y), x.tape->node(x.id).requires_grad,
      [px](Tape& t, int, const Tensor& g, std::vector<Tensor>& grads) {
        const Tensor& X = t.value(px);
        Tensor& dx = Tape::slot(grads, px, X.shape());
        for (std::size_t i = 0; i < X.size(); ++i) {
          const double v = X[i];
          const double u = ad_impl::kGeluC * (v + ad_impl::kGeluA * v * v * v);
          const double th = std::tanh(u);
          const double du = ad_impl::kGeluC * (1.0 + 3.0 * ad_impl::kGeluA * v * v);
          dx[i] += g[i] * (0.5 * (1.0 + th) + 0.5 * v * (1.0 - th * th) * du);
        }
      });
}

inline Var reshape(const Var& x, std::vector<std::size_t> shape) {
  const Tensor& X = x.value();
  if (Tensor::count(shape) != X.size())
    throw ShapeMismatch("reshape to " + Tensor::shape_str(shape) +
                        " changes element count of " +
                        Tensor::shape_str(X.shape()));
  Tensor Y(shape, X.data());
  const int px = x.id;
  return x.tape->record(
      "reshape", std::move(Y), x.tape->node(x.id).requires_grad,
      [px](Tape& t, int, const Tensor& g, std::vector<Tensor>& grads) {
        Tensor& dx = Tape::slot(grads, px, t.value(px).shape());
        for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i];
      });
}

inline Var slice_rows(const Var& x, std::size_t r0, std::size_t r1) {
  ad_impl::require_rank2(x, "slice_rows");
  const Tensor& X = x.value();
  if (r0 >= r1 || r1 > X.rows())
    throw ShapeMismatch("slice_rows [" + std::to_string(r0) + ", " +
                        std::to_string(r1) + ") out of range");
  const std::size_t n = X.cols();
  Tensor Y({r1 - r0, n});
  for (std::size_t i = r0; i < r1; ++i)
    for (std::size_t j = 0; j < n; ++j) Y(i - r0, j) = X(i, j);
  const int px = x.id;
  return x.tape->record(
      "slice_rows", std::move(Y), x.tape->node(x.id).requires_grad,
      [px, r0, n](Tape& t, int, const Tensor& g, std::vector<Tensor>& grads) {
        Tensor& dx = Tape::slot(grads, px, t.value(px).shape());
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < n; ++j) dx(r0 + i, j) += g(i, j);
      });
}

inline Var slice_cols(const Var& x, std::size_t c0, std::size_t c1) {
  ad_impl::require_rank2(x, "slice_cols");
  const Tensor& X = x.value();
  if (c0 >= c1 || c1 > X.cols())
    throw ShapeMismatch("slice_cols [" + std::to_string(c0) + ", " +
                        std::to_string(c1) + ") out of range");
  const std::size_t m = X.rows();
  Tensor Y({m, c1 - c0});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = c0; j < c1; ++j) Y(i, j - c0) = X(i, j);
  const int px = x.id;
  return x.tape->record(
      "slice_cols", std::move(Y), x.tape->node(x.id).requires_grad,
      [px, c0](Tape& t, int, const Tensor& g, std::vector<Tensor>& grads) {
        Tensor& dx = Tape::slot(grads, px, t.value(px).shape());
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < g.cols(); ++j) dx(i, c0 + j) += g(i, j);
      });
}

inline Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeMismatch("concat_rows of nothing");
  const std::size_t n = parts[0].value().cols();
  std::size_t rows = 0;
  bool rg = false;
  for (const Var& p : parts) {
    ad_impl::check_same_tape(parts[0], p);
    ad_impl::require_rank2(p, "concat_rows");
    if (p.value().cols() != n)
      throw ShapeMismatch("concat_rows column counts disagree");
    rows += p.value().rows();
    rg = rg || p.tape->node(p.id).requires_grad;
  }
  Tensor Y({rows, n});
  std::size_t r = 0;
  std::vector<int> ids;
  for (const Var& p : parts) {
    const Tensor& P = p.value();
    for (std::size_t i = 0; i < P.rows(); ++i)
      for (std::size_t j = 0; j < n; ++j) Y(r + i, j) = P(i, j);
    r += P.rows();
    ids.push_back(p.id);
  }
  Tape* tape = parts[0].tape;
  return tape->record(
      "concat_rows", std::move(Y), rg,
      [ids, n](Tape& t, int, const Tensor& g, std::vector<Tensor>& grads) {
        std::size_t r = 0;
        for (int pid : ids) {
          const Tensor& P = t.value(pid);
          if (t.node(pid).requires_grad) {
            Tensor& dp = Tape::slot(grads, pid, P.shape());
            for (std::size_t i = 0; i < P.rows(); ++i)
              for (std::size_t j = 0; j < n; ++j) dp(i, j) += g(r + i, j);
          }
          r += P.rows();
        }
      });
}

inline Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeMismatch("concat_cols of nothing");
  const std::size_t m = parts[0].value().rows();
  std::size_t cols = 0;
  bool rg = false;
  for (const Var& p : parts) {
    ad_impl::check_same_tape(parts[0], p);
    ad_impl::require_rank2(p, "concat_cols");
    if (p.value().rows() != m)
      throw ShapeMismatch("concat_cols row counts disagree");
    cols += p.value().cols();
    rg = rg || p.tape->node(p.id).requires_grad;
  }
  Tensor Y({m, cols});
  std::size_t c = 0;
  std::vector<int> ids;
  for (const Var& p : parts) {
    const Tensor& P = p.value();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < P.cols(); ++j) Y(i, c + j) = P(i, j);
    c += P.cols();
    ids.push_back(p.id);
  }
  Tape* tape = parts[0].tape;
  return tape->record(
      "concat_cols", std::move(Y), rg,
      [ids, m](Tape& t, int, const Tensor& g, std::vector<Tensor>& grads) {
        std::size_t c = 0;
        for (int pid : ids) {
          const Tensor& P = t.value(pid);
          if (t.node(pid).requires_grad) {
            Tensor& dp = Tape::slot(grads, pid, P.shape());
            for (std::size_t i = 0; i < m; ++i)
              for (std::size_t j = 0; j < P.cols(); ++j) dp(i, j) += g(i, c + j);
          }
          c += P.cols();
        }
      });
}

inline Var sum_all(const Var& x) {
  const Tensor& X = x.value();
  double s = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) s += X[i];
  const int px = x.id;
  return x.tape->record(
      "sum", Tensor::scalar(s), x.tape->node(x.id).requires_grad,
      [px](Tape& t, int, const Tensor& g, std::vector<Tensor>& grads) {
        Tensor& dx = Tape::slot(grads, px, t.value(px).shape());
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g[0];
      });
}

inline Var mean_all(const Var& x) {
  const Tensor& X = x.value();
  double s = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) s += X[i];
  const double inv = 1.0 / static_cast<double>(X.size());
  const int px = x.id;
  return x.tape->record(
      "mean", Tensor::scalar(s * inv), x.tape->node(x.id).requires_grad,
      [px, inv](Tape& t, int, const Tensor& g, std::vector<Tensor>& grads) {
        Tensor& dx = Tape::slot(grads, px, t.value(px).shape());
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g[0] * inv;
      });
}

// Mean softmax cross-entropy over the batch, log-sum-exp stabilized.
inline Var cross_entropy(const Var& logits, const std::vector<int>& labels) {
  ad_impl::require_rank2(logits, "cross_entropy");
  const Tensor& L = logits.value();
  const std::size_t b = L.rows(), k = L.cols();
  if (labels.size() != b)
    throw ShapeMismatch("cross_entropy got " + std::to_string(labels.size()) +
                        " labels for a batch of " + std::to_string(b));
  for (int lab : labels)
    if (lab < 0 || static_cast<std::size_t>(lab) >= k)
      throw LabelOutOfRange("label " + std::to_string(lab) +
                            " outside 0.." + std::to_string(k - 1));
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    const double* row = L.data().data() + i * k;
    double mx = row[0];
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += std::exp(row[j] - mx);
    total += mx + std::log(sum) - row[static_cast<std::size_t>(labels[i])];
  }
  const double loss = total / static_cast<double>(b);
  const int pl = logits.id;
  return logits.tape->record(
      "cross_entropy", Tensor::scalar(loss),
      logits.tape->node(logits.id).requires_grad,
      [pl, labels, b, k](Tape& t, int, const Tensor& g,
                         std::vector<Tensor>& grads) {
        const Tensor& L = t.value(pl);
        Tensor& dl = Tape::slot(grads, pl, L.shape());
        const double gb = g[0] / static_cast<double>(b);
        for (std::size_t i = 0; i < b; ++i) {
          const double* row = L.data().data() + i * k;
          double mx = row[0];
          for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, row[j]);
          double sum = 0.0;
          for (std::size_t j = 0; j < k; ++j) sum += std::exp(row[j] - mx);
          const double inv = 1.0 / sum;
          for (std::size_t j = 0; j < k; ++j)
            dl(i, j) += gb * (std::exp(row[j] - mx) * inv -
                              (static_cast<std::size_t>(labels[i]) == j ? 1.0 : 0.0));
        }
      });
}

}  // namespace faultvit
