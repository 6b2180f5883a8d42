#pragma once
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "autocf/errors.hpp"
#include "autocf/tensor.hpp"

namespace autocf {

using IndexVec = std::shared_ptr<const std::vector<std::int64_t>>;

inline IndexVec make_index(std::vector<std::int64_t> v) {
  return std::make_shared<const std::vector<std::int64_t>>(std::move(v));
}

// Reverse-mode autodiff over a recorded tape. Operations execute eagerly in
// registration order; backward() replays them in reverse, accumulating
// cotangents. A tape and its tensors belong to a single thread.
template <class Real>
class TapeT {
 public:
  using Id = std::int32_t;

  explicit TapeT(bool debug_checks =
#ifndef NDEBUG
                     true
#else
                     false
#endif
                 )
      : debug_(debug_checks) {
  }

  // ---- inputs -------------------------------------------------------------

  Id leaf(ParameterT<Real>& p) {
    Node n;
    n.op = Op::Leaf;
    n.val = p.value;
    n.param = &p;
    return push(std::move(n));
  }

  Id constant(TensorT<Real> t) {
    Node n;
    n.op = Op::Const;
    n.val = std::move(t);
    return push(std::move(n));
  }

  Id constant_scalar(Real c) { return constant(TensorT<Real>::from(1, 1, {c})); }

  // ---- primitives ----------------------------------------------------------

  Id matmul(Id a, Id b) {
    const auto& A = val(a);
    const auto& B = val(b);
    if (A.ncols != B.nrows) throw DimensionError("matmul: inner dimensions disagree");
    Node n = binary(Op::Matmul, a, b, A.nrows, B.ncols);
    map(n.val).noalias() = cmap(A) * cmap(B);
    return push(std::move(n));
  }

  Id transpose(Id a) {
    const auto& A = val(a);
    Node n = unary(Op::Transpose, a, A.ncols, A.nrows);
    map(n.val).noalias() = cmap(A).transpose();
    return push(std::move(n));
  }

  // out[r, :] = a[idx[r], :]
  Id gather_rows(Id a, IndexVec idx) {
    const auto& A = val(a);
    for (auto r : *idx)
      if (r < 0 || static_cast<std::size_t>(r) >= A.nrows)
        throw IndexError("gather_rows: row index out of range");
    Node n = unary(Op::Gather, a, idx->size(), A.ncols);
    n.idx = std::move(idx);
    const std::size_t c = A.ncols;
    for (std::size_t r = 0; r < n.idx->size(); ++r) {
      const Real* srcp = A.row(static_cast<std::size_t>((*n.idx)[r]));
      std::copy(srcp, srcp + c, n.val.row(r));
    }
    return push(std::move(n));
  }

  // out[ids[r], :] += a[r, :]; rows without contributions stay zero.
  Id segment_sum(Id a, IndexVec ids, std::size_t num_segments) {
    const auto& A = val(a);
    if (ids->size() != A.nrows) throw DimensionError("segment_sum: one segment id per row required");
    for (auto s : *ids)
      if (s < 0 || static_cast<std::size_t>(s) >= num_segments)
        throw IndexError("segment_sum: segment id out of range");
    Node n = unary(Op::SegmentSum, a, num_segments, A.ncols);
    n.idx = std::move(ids);
    const std::size_t c = A.ncols;
    for (std::size_t r = 0; r < A.nrows; ++r) {
      Real* dst = n.val.row(static_cast<std::size_t>((*n.idx)[r]));
      const Real* srcp = A.row(r);
      for (std::size_t j = 0; j < c; ++j) dst[j] += srcp[j];
    }
    return push(std::move(n));
  }

  Id add(Id a, Id b) { return ew(Op::Add, a, b); }
  Id sub(Id a, Id b) { return ew(Op::Sub, a, b); }
  Id mul(Id a, Id b) { return ew(Op::Mul, a, b); }

  Id scale(Id a, double c) {
    const auto& A = val(a);
    Node n = unary(Op::Scale, a, A.nrows, A.ncols);
    n.c = c;
    for (std::size_t i = 0; i < A.size(); ++i) n.val.v[i] = A.v[i] * static_cast<Real>(c);
    return push(std::move(n));
  }

  Id add_scalar(Id a, double c) {
    const auto& A = val(a);
    Node n = unary(Op::AddScalar, a, A.nrows, A.ncols);
    n.c = c;
    for (std::size_t i = 0; i < A.size(); ++i) n.val.v[i] = A.v[i] + static_cast<Real>(c);
    return push(std::move(n));
  }

  Id neg(Id a) { return scale(a, -1.0); }

  // out[r, :] = a[r, :] * s[r]; s has shape (rows, 1).
  Id row_scale(Id a, Id s) {
    const auto& A = val(a);
    const auto& S = val(s);
    if (S.nrows != A.nrows || S.ncols != 1)
      throw DimensionError("row_scale: scale vector must be (rows, 1)");
    Node n = binary(Op::RowScale, a, s, A.nrows, A.ncols);
    for (std::size_t r = 0; r < A.nrows; ++r) {
      const Real f = S.v[r];
      const Real* srcp = A.row(r);
      Real* dst = n.val.row(r);
      for (std::size_t j = 0; j < A.ncols; ++j) dst[j] = srcp[j] * f;
    }
    return push(std::move(n));
  }

  Id sigmoid(Id a) {
    const auto& A = val(a);
    Node n = unary(Op::Sigmoid, a, A.nrows, A.ncols);
    for (std::size_t i = 0; i < A.size(); ++i) {
      const double x = static_cast<double>(A.v[i]);
      n.val.v[i] = static_cast<Real>(x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                                            : std::exp(x) / (1.0 + std::exp(x)));
    }
    return push(std::move(n));
  }

  Id exp(Id a) {
    const auto& A = val(a);
    Node n = unary(Op::Exp, a, A.nrows, A.ncols);
    for (std::size_t i = 0; i < A.size(); ++i) n.val.v[i] = std::exp(A.v[i]);
    return push(std::move(n));
  }

  Id log(Id a) {
    const auto& A = val(a);
    for (Real x : A.v)
      if (!(x > Real(0))) throw DomainError("log: input must be strictly positive");
    Node n = unary(Op::Log, a, A.nrows, A.ncols);
    for (std::size_t i = 0; i < A.size(); ++i) n.val.v[i] = std::log(A.v[i]);
    return push(std::move(n));
  }

  // sqrt(x + shift); shift > 0 doubles as a norm floor.
  Id sqrt_shift(Id a, double shift) {
    const auto& A = val(a);
    Node n = unary(Op::SqrtShift, a, A.nrows, A.ncols);
    n.c = shift;
    for (std::size_t i = 0; i < A.size(); ++i) {
      const double x = static_cast<double>(A.v[i]) + shift;
      if (!(x > 0)) throw DomainError("sqrt_shift: shifted input must be positive");
      n.val.v[i] = static_cast<Real>(std::sqrt(x));
    }
    return push(std::move(n));
  }

  Id recip(Id a) {
    const auto& A = val(a);
    for (Real x : A.v)
      if (x == Real(0)) throw DomainError("recip: division by zero");
    Node n = unary(Op::Recip, a, A.nrows, A.ncols);
    for (std::size_t i = 0; i < A.size(); ++i) n.val.v[i] = Real(1) / A.v[i];
    return push(std::move(n));
  }

  Id softmax_rows(Id a) {
    const auto& A = val(a);
    if (A.ncols == 0) throw DimensionError("softmax_rows: empty rows");
    Node n = unary(Op::SoftmaxRows, a, A.nrows, A.ncols);
    for (std::size_t r = 0; r < A.nrows; ++r) softmax_span(A.row(r), n.val.row(r), A.ncols);
    return push(std::move(n));
  }

  // (n, m) -> (n, 1), max-shifted for stability.
  Id logsumexp_rows(Id a) {
    const auto& A = val(a);
    if (A.ncols == 0) throw DimensionError("logsumexp_rows: empty rows");
    Node n = unary(Op::LogSumExpRows, a, A.nrows, 1);
    for (std::size_t r = 0; r < A.nrows; ++r) {
      const Real* x = A.row(r);
      Real mx = x[0];
      for (std::size_t j = 1; j < A.ncols; ++j) mx = std::max(mx, x[j]);
      double s = 0;
      for (std::size_t j = 0; j < A.ncols; ++j) s += std::exp(static_cast<double>(x[j] - mx));
      n.val.v[r] = mx + static_cast<Real>(std::log(s));
    }
    return push(std::move(n));
  }

  // (n, d) x (n, d) -> (n, 1)
  Id dot_rows(Id a, Id b) {
    const auto& A = val(a);
    const auto& B = val(b);
    if (!A.same_shape(B)) throw DimensionError("dot_rows: shapes disagree");
    Node n = binary(Op::DotRows, a, b, A.nrows, 1);
    for (std::size_t r = 0; r < A.nrows; ++r) {
      const Real* x = A.row(r);
      const Real* y = B.row(r);
      double s = 0;
      for (std::size_t j = 0; j < A.ncols; ++j) s += static_cast<double>(x[j]) * y[j];
      n.val.v[r] = static_cast<Real>(s);
    }
    return push(std::move(n));
  }

  // Softmax over contiguous segments of a (m, 1) column; offsets has
  // num_segments+1 entries. Empty segments are allowed and contribute nothing.
  Id segment_softmax(Id a, IndexVec offsets) {
    const auto& A = val(a);
    if (A.ncols != 1) throw DimensionError("segment_softmax: expected a column vector");
    if (offsets->empty() || static_cast<std::size_t>(offsets->back()) != A.nrows)
      throw DimensionError("segment_softmax: offsets do not cover the input");
    Node n = unary(Op::SegmentSoftmax, a, A.nrows, 1);
    n.idx = std::move(offsets);
    for (std::size_t s = 0; s + 1 < n.idx->size(); ++s) {
      const std::size_t lo = static_cast<std::size_t>((*n.idx)[s]);
      const std::size_t hi = static_cast<std::size_t>((*n.idx)[s + 1]);
      if (hi > lo) softmax_span(A.v.data() + lo, n.val.v.data() + lo, hi - lo);
    }
    return push(std::move(n));
  }

  Id concat_cols(const std::vector<Id>& parts) {
    if (parts.empty()) throw DimensionError("concat_cols: no inputs");
    const std::size_t rows = val(parts[0]).nrows;
    std::size_t cols = 0;
    for (Id p : parts) {
      if (val(p).nrows != rows) throw DimensionError("concat_cols: row counts disagree");
      cols += val(p).ncols;
    }
    Node n;
    n.op = Op::ConcatCols;
    n.ins = parts;
    n.val = TensorT<Real>(rows, cols);
    std::size_t off = 0;
    for (Id p : parts) {
      const auto& P = val(p);
      for (std::size_t r = 0; r < rows; ++r)
        std::copy(P.row(r), P.row(r) + P.ncols, n.val.row(r) + off);
      off += P.ncols;
    }
    return push(std::move(n));
  }

  Id sum(Id a) {
    const auto& A = val(a);
    Node n = unary(Op::Sum, a, 1, 1);
    double s = 0;
    for (Real x : A.v) s += static_cast<double>(x);
    n.val.v[0] = static_cast<Real>(s);
    return push(std::move(n));
  }

  Id mean(Id a) {
    const auto& A = val(a);
    if (A.size() == 0) throw DimensionError("mean: empty tensor");
    Node n = unary(Op::Mean, a, 1, 1);
    double s = 0;
    for (Real x : A.v) s += static_cast<double>(x);
    n.val.v[0] = static_cast<Real>(s / static_cast<double>(A.size()));
    return push(std::move(n));
  }

  // ---- access ---------------------------------------------------------------

  const TensorT<Real>& value(Id i) const { return nodes_[i].val; }
  double scalar(Id i) const {
    const auto& t = nodes_[i].val;
    if (t.size() != 1) throw DimensionError("scalar: node is not 1x1");
    return static_cast<double>(t.v[0]);
  }
  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  // Gradient of grads_ w.r.t. input a after backward(); test hook.
  const TensorT<Real>& grad_of(Id i) const { return grads_[i]; }

  // ---- reverse pass ----------------------------------------------------------

  void backward(Id root) {
    if (nodes_[root].val.size() != 1) throw DimensionError("backward: root must be scalar");
    grads_.assign(nodes_.size(), TensorT<Real>());
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      grads_[i] = TensorT<Real>(nodes_[i].val.nrows, nodes_[i].val.ncols);
    for (auto& n : nodes_)
      if (n.op == Op::Leaf) n.param->zero_grad();
    grads_[root].v[0] = Real(1);

    for (Id i = static_cast<Id>(nodes_.size()) - 1; i >= 0; --i) {
      const Node& n = nodes_[i];
      const TensorT<Real>& g = grads_[i];
      switch (n.op) {
        case Op::Leaf: {
          auto& pg = n.param->grad;
          for (std::size_t j = 0; j < g.size(); ++j) pg.v[j] += g.v[j];
          break;
        }
        case Op::Const:
          break;
        case Op::Matmul: {
          const auto& A = val(n.a);
          const auto& B = val(n.b);
          map(grads_[n.a]).noalias() += cmap(g) * cmap(B).transpose();
          map(grads_[n.b]).noalias() += cmap(A).transpose() * cmap(g);
          break;
        }
        case Op::Transpose:
          map(grads_[n.a]).noalias() += cmap(g).transpose();
          break;
        case Op::Gather: {
          auto& ga = grads_[n.a];
          const std::size_t c = g.ncols;
          for (std::size_t r = 0; r < n.idx->size(); ++r) {
            Real* dst = ga.row(static_cast<std::size_t>((*n.idx)[r]));
            const Real* srcp = g.row(r);
            for (std::size_t j = 0; j < c; ++j) dst[j] += srcp[j];
          }
          break;
        }
        case Op::SegmentSum: {
          auto& ga = grads_[n.a];
          const std::size_t c = g.ncols;
          for (std::size_t r = 0; r < ga.nrows; ++r) {
            const Real* srcp = g.row(static_cast<std::size_t>((*n.idx)[r]));
            Real* dst = ga.row(r);
            for (std::size_t j = 0; j < c; ++j) dst[j] += srcp[j];
          }
          break;
        }
        case Op::Add:
          axpy(grads_[n.a], g, Real(1));
          axpy(grads_[n.b], g, Real(1));
          break;
        case Op::Sub:
          axpy(grads_[n.a], g, Real(1));
          axpy(grads_[n.b], g, Real(-1));
          break;
        case Op::Mul: {
          const auto& A = val(n.a);
          const auto& B = val(n.b);
          auto& ga = grads_[n.a];
          auto& gb = grads_[n.b];
          for (std::size_t j = 0; j < g.size(); ++j) {
            ga.v[j] += g.v[j] * B.v[j];
            gb.v[j] += g.v[j] * A.v[j];
          }
          break;
        }
        case Op::Scale:
          axpy(grads_[n.a], g, static_cast<Real>(n.c));
          break;
        case Op::AddScalar:
          axpy(grads_[n.a], g, Real(1));
          break;
        case Op::RowScale: {
          const auto& A = val(n.a);
          const auto& S = val(n.b);
          auto& ga = grads_[n.a];
          auto& gs = grads_[n.b];
          for (std::size_t r = 0; r < A.nrows; ++r) {
            const Real f = S.v[r];
            const Real* gr = g.row(r);
            const Real* ar = A.row(r);
            Real* gar = ga.row(r);
            double acc = 0;
            for (std::size_t j = 0; j < A.ncols; ++j) {
              gar[j] += gr[j] * f;
              acc += static_cast<double>(gr[j]) * ar[j];
            }
            gs.v[r] += static_cast<Real>(acc);
          }
          break;
        }
        case Op::Sigmoid: {
          const auto& Y = n.val;
          auto& ga = grads_[n.a];
          for (std::size_t j = 0; j < g.size(); ++j)
            ga.v[j] += g.v[j] * Y.v[j] * (Real(1) - Y.v[j]);
          break;
        }
        case Op::Exp: {
          const auto& Y = n.val;
          auto& ga = grads_[n.a];
          for (std::size_t j = 0; j < g.size(); ++j) ga.v[j] += g.v[j] * Y.v[j];
          break;
        }
        case Op::Log: {
          const auto& A = val(n.a);
          auto& ga = grads_[n.a];
          for (std::size_t j = 0; j < g.size(); ++j) ga.v[j] += g.v[j] / A.v[j];
          break;
        }
        case Op::SqrtShift: {
          const auto& Y = n.val;
          auto& ga = grads_[n.a];
          for (std::size_t j = 0; j < g.size(); ++j)
            ga.v[j] += g.v[j] * Real(0.5) / Y.v[j];
          break;
        }
        case Op::Recip: {
          const auto& Y = n.val;
          auto& ga = grads_[n.a];
          for (std::size_t j = 0; j < g.size(); ++j) ga.v[j] -= g.v[j] * Y.v[j] * Y.v[j];
          break;
        }
        case Op::SoftmaxRows: {
          const auto& P = n.val;
          auto& ga = grads_[n.a];
          for (std::size_t r = 0; r < P.nrows; ++r)
            softmax_backward_span(P.row(r), g.row(r), ga.row(r), P.ncols);
          break;
        }
        case Op::LogSumExpRows: {
          const auto& A = val(n.a);
          auto& ga = grads_[n.a];
          for (std::size_t r = 0; r < A.nrows; ++r) {
            const Real lse = n.val.v[r];
            const Real gr = g.v[r];
            const Real* x = A.row(r);
            Real* dst = ga.row(r);
            for (std::size_t j = 0; j < A.ncols; ++j)
              dst[j] += gr * static_cast<Real>(std::exp(static_cast<double>(x[j] - lse)));
          }
          break;
        }
        case Op::DotRows: {
          const auto& A = val(n.a);
          const auto& B = val(n.b);
          auto& ga = grads_[n.a];
          auto& gb = grads_[n.b];
          for (std::size_t r = 0; r < A.nrows; ++r) {
            const Real gr = g.v[r];
            const Real* ar = A.row(r);
            const Real* br = B.row(r);
            Real* gar = ga.row(r);
            Real* gbr = gb.row(r);
            for (std::size_t j = 0; j < A.ncols; ++j) {
              gar[j] += gr * br[j];
              gbr[j] += gr * ar[j];
            }
          }
          break;
        }
        case Op::SegmentSoftmax: {
          const auto& P = n.val;
          auto& ga = grads_[n.a];
          for (std::size_t s = 0; s + 1 < n.idx->size(); ++s) {
            const std::size_t lo = static_cast<std::size_t>((*n.idx)[s]);
            const std::size_t hi = static_cast<std::size_t>((*n.idx)[s + 1]);
            if (hi > lo)
              softmax_backward_span(P.v.data() + lo, g.v.data() + lo, ga.v.data() + lo, hi - lo);
          }
          break;
        }
        case Op::ConcatCols: {
          std::size_t off = 0;
          for (Id p : n.ins) {
            auto& gp = grads_[p];
            for (std::size_t r = 0; r < gp.nrows; ++r) {
              const Real* srcp = g.row(r) + off;
              Real* dst = gp.row(r);
              for (std::size_t j = 0; j < gp.ncols; ++j) dst[j] += srcp[j];
            }
            off += gp.ncols;
          }
          break;
        }
        case Op::Sum: {
          auto& ga = grads_[n.a];
          const Real gr = g.v[0];
          for (std::size_t j = 0; j < ga.size(); ++j) ga.v[j] += gr;
          break;
        }
        case Op::Mean: {
          auto& ga = grads_[n.a];
          const Real gr = g.v[0] / static_cast<Real>(ga.size());
          for (std::size_t j = 0; j < ga.size(); ++j) ga.v[j] += gr;
          break;
        }
      }
    }
  }

 private:
  enum class Op {
    Leaf,
    Const,
    Matmul,
    Transpose,
    Gather,
    SegmentSum,
    Add,
    Sub,
    Mul,
    Scale,
    AddScalar,
    RowScale,
    Sigmoid,
    Exp,
    Log,
    SqrtShift,
    Recip,
    SoftmaxRows,
    LogSumExpRows,
    DotRows,
    SegmentSoftmax,
    ConcatCols,
    Sum,
    Mean,
  };

  struct Node {
    Op op = Op::Const;
    Id a = -1;
    Id b = -1;
    std::vector<Id> ins;  // ConcatCols only
    TensorT<Real> val;
    double c = 0;
    IndexVec idx;
    ParameterT<Real>* param = nullptr;
  };

  using EMat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  static Eigen::Map<EMat> map(TensorT<Real>& t) {
    return Eigen::Map<EMat>(t.v.data(), t.nrows, t.ncols);
  }
  static Eigen::Map<const EMat> cmap(const TensorT<Real>& t) {
    return Eigen::Map<const EMat>(t.v.data(), t.nrows, t.ncols);
  }

  static void axpy(TensorT<Real>& y, const TensorT<Real>& x, Real a) {
    for (std::size_t j = 0; j < y.size(); ++j) y.v[j] += a * x.v[j];
  }

  static void softmax_span(const Real* x, Real* out, std::size_t n) {
    Real mx = x[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, x[j]);
    double s = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const double e = std::exp(static_cast<double>(x[j] - mx));
      out[j] = static_cast<Real>(e);
      s += e;
    }
    const Real inv = static_cast<Real>(1.0 / s);
    for (std::size_t j = 0; j < n; ++j) out[j] *= inv;
  }

  // dX = P .* (g - <P, g>)
  static void softmax_backward_span(const Real* p, const Real* g, Real* dst, std::size_t n) {
    double dot = 0;
    for (std::size_t j = 0; j < n; ++j) dot += static_cast<double>(p[j]) * g[j];
    for (std::size_t j = 0; j < n; ++j)
      dst[j] += p[j] * (g[j] - static_cast<Real>(dot));
  }

  Node unary(Op op, Id a, std::size_t r, std::size_t c) {
    Node n;
    n.op = op;
    n.a = a;
    n.val = TensorT<Real>(r, c);
    return n;
  }

  Node binary(Op op, Id a, Id b, std::size_t r, std::size_t c) {
    Node n = unary(op, a, r, c);
    n.b = b;
    return n;
  }

  Id ew(Op op, Id a, Id b) {
    const auto& A = val(a);
    const auto& B = val(b);
    if (!A.same_shape(B)) throw DimensionError("elementwise op: shapes disagree");
    Node n = binary(op, a, b, A.nrows, A.ncols);
    switch (op) {
      case Op::Add:
        for (std::size_t i = 0; i < A.size(); ++i) n.val.v[i] = A.v[i] + B.v[i];
        break;
      case Op::Sub:
        for (std::size_t i = 0; i < A.size(); ++i) n.val.v[i] = A.v[i] - B.v[i];
        break;
      case Op::Mul:
        for (std::size_t i = 0; i < A.size(); ++i) n.val.v[i] = A.v[i] * B.v[i];
        break;
      default:
        break;
    }
    return push(std::move(n));
  }

  const TensorT<Real>& val(Id i) const { return nodes_[i].val; }

  Id push(Node n) {
    if (debug_ && !n.val.all_finite()) throw NumericError("primitive produced NaN/Inf");
    nodes_.push_back(std::move(n));
    return static_cast<Id>(nodes_.size() - 1);
  }

  std::vector<Node> nodes_;
  std::vector<TensorT<Real>> grads_;
  bool debug_;
};

using Tape = TapeT<double>;

}  // namespace autocf
