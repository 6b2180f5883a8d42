#pragma once
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "autocf/errors.hpp"

namespace autocf {

// Dense rank-2 tensor. Vectors are stored as (n, 1), scalars as (1, 1).
// Real is double in training/acceptance mode, float in the opt-in f32 mode.
template <class Real>
struct TensorT {
  std::size_t nrows = 0;
  std::size_t ncols = 0;
  std::vector<Real> v;

  TensorT() = default;
  TensorT(std::size_t r, std::size_t c) : nrows(r), ncols(c), v(r * c, Real(0)) {}

  static TensorT zeros(std::size_t r, std::size_t c) { return TensorT(r, c); }

  static TensorT from(std::size_t r, std::size_t c, std::vector<Real> vals) {
    if (vals.size() != r * c) throw DimensionError("tensor literal size does not match shape");
    TensorT t;
    t.nrows = r;
    t.ncols = c;
    t.v = std::move(vals);
    return t;
  }

  std::size_t size() const { return v.size(); }
  Real* row(std::size_t r) { return v.data() + r * ncols; }
  const Real* row(std::size_t r) const { return v.data() + r * ncols; }
  Real& at(std::size_t r, std::size_t c) { return v[r * ncols + c]; }
  Real at(std::size_t r, std::size_t c) const { return v[r * ncols + c]; }

  bool same_shape(const TensorT& o) const { return nrows == o.nrows && ncols == o.ncols; }

  void fill(Real x) { std::fill(v.begin(), v.end(), x); }

  bool all_finite() const {
    for (Real x : v)
      if (!std::isfinite(static_cast<double>(x))) return false;
    return true;
  }
};

using Tensor = TensorT<double>;
using Tensor32 = TensorT<float>;

// A trainable tensor with a persistent gradient buffer of identical shape.
template <class Real>
struct ParameterT {
  std::string name;
  TensorT<Real> value;
  TensorT<Real> grad;

  ParameterT() = default;
  ParameterT(std::string n, TensorT<Real> init)
      : name(std::move(n)), value(std::move(init)), grad(value.nrows, value.ncols) {}

  void zero_grad() { grad.fill(Real(0)); }
};

using Parameter = ParameterT<double>;

template <class Real>
TensorT<Real> tensor_cast_to(const Tensor& src) {
  TensorT<Real> out(src.nrows, src.ncols);
  for (std::size_t i = 0; i < src.v.size(); ++i) out.v[i] = static_cast<Real>(src.v[i]);
  return out;
}

template <class Real>
Tensor tensor_cast_from(const TensorT<Real>& src) {
  Tensor out(src.nrows, src.ncols);
  for (std::size_t i = 0; i < src.v.size(); ++i) out.v[i] = static_cast<double>(src.v[i]);
  return out;
}

}  // namespace autocf
