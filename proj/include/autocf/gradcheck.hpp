#pragma once
#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "autocf/errors.hpp"
#include "autocf/rng.hpp"
#include "autocf/tensor.hpp"

namespace autocf {

struct FiniteDiffReport {
  double max_rel_err = 0;
  std::size_t samples = 0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0;
  double worst_numeric = 0;
};

// Central-difference check of analytic gradients. loss_fn(true) must evaluate
// the loss and leave d loss/d param in each parameter's grad buffer;
// loss_fn(false) evaluates the loss only. The numeric side never touches the
// gradient path, so it stays an independent oracle for whatever loss_fn built.
template <class Real>
FiniteDiffReport finite_diff_check(const std::function<double(bool)>& loss_fn,
                                   std::span<ParameterT<Real>* const> params,
                                   double eps, std::size_t samples, RngStream& rng) {
  if (eps < 1e-7 || eps > 1e-3) throw ConfigError("finite_diff_check: eps must lie in [1e-7, 1e-3]");
  const double f0 = loss_fn(true);
  std::vector<TensorT<Real>> analytic;
  analytic.reserve(params.size());
  for (const auto* p : params) analytic.push_back(p->grad);
  const double f0_again = loss_fn(false);
  if (f0 != f0_again)
    throw ReproducibilityError("finite_diff_check: loss closure is not deterministic");

  std::size_t total = 0;
  for (const auto* p : params) total += p->value.size();
  if (total == 0) throw ConfigError("finite_diff_check: no parameter coordinates");

  // Sample coordinates without replacement when the budget covers everything.
  std::vector<std::size_t> coords;
  if (samples >= total) {
    coords.resize(total);
    for (std::size_t i = 0; i < total; ++i) coords[i] = i;
  } else {
    coords.reserve(samples);
    for (std::size_t s = 0; s < samples; ++s)
      coords.push_back(static_cast<std::size_t>(rng.uniform_index(total)));
  }

  FiniteDiffReport rep;
  rep.samples = coords.size();
  for (std::size_t flat : coords) {
    std::size_t pi = 0;
    std::size_t off = flat;
    while (off >= params[pi]->value.size()) {
      off -= params[pi]->value.size();
      ++pi;
    }
    Real& slot = params[pi]->value.v[off];
    const Real saved = slot;
    slot = saved + static_cast<Real>(eps);
    const double fp = loss_fn(false);
    slot = saved - static_cast<Real>(eps);
    const double fm = loss_fn(false);
    slot = saved;
    const double numeric = (fp - fm) / (2.0 * eps);
    const double a = static_cast<double>(analytic[pi].v[off]);
    const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
    if (err > rep.max_rel_err) {
      rep.max_rel_err = err;
      rep.worst_param = params[pi]->name;
      rep.worst_index = off;
      rep.worst_analytic = a;
      rep.worst_numeric = numeric;
    }
  }
  // Restore the recorded gradients so callers can still inspect them.
  for (std::size_t p = 0; p < params.size(); ++p) params[p]->grad = analytic[p];
  return rep;
}

}  // namespace autocf
