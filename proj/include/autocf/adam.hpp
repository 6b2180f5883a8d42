#pragma once
#include <cmath>
#include <span>
#include <vector>

#include "autocf/errors.hpp"
#include "autocf/tensor.hpp"

namespace autocf {

// Bias-corrected Adam. Moment buffers mirror parameter shapes and are bound
// to a fixed parameter order at registration.
template <class Real>
struct AdamStateT {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step_count = 0;

  std::vector<TensorT<Real>> m;
  std::vector<TensorT<Real>> v;

  void register_params(std::span<ParameterT<Real>* const> params) {
    m.clear();
    v.clear();
    for (const auto* p : params) {
      m.emplace_back(p->value.nrows, p->value.ncols);
      v.emplace_back(p->value.nrows, p->value.ncols);
    }
    step_count = 0;
  }

  void step(std::span<ParameterT<Real>* const> params) {
    if (params.size() != m.size()) throw DimensionError("adam: parameter set changed since registration");
    ++step_count;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
    for (std::size_t p = 0; p < params.size(); ++p) {
      auto& theta = params[p]->value;
      auto& g = params[p]->grad;
      if (!g.all_finite())
        throw NumericError("adam: NaN/Inf gradient in parameter '" + params[p]->name + "'");
      auto& mp = m[p];
      auto& vp = v[p];
      for (std::size_t j = 0; j < theta.size(); ++j) {
        const double gj = static_cast<double>(g.v[j]);
        const double mj = beta1 * static_cast<double>(mp.v[j]) + (1.0 - beta1) * gj;
        const double vj = beta2 * static_cast<double>(vp.v[j]) + (1.0 - beta2) * gj * gj;
        mp.v[j] = static_cast<Real>(mj);
        vp.v[j] = static_cast<Real>(vj);
        const double mhat = mj / bc1;
        const double vhat = vj / bc2;
        theta.v[j] -= static_cast<Real>(lr * mhat / (std::sqrt(vhat) + eps));
      }
    }
  }
};

using AdamState = AdamStateT<double>;

}  // namespace autocf
