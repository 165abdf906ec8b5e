/*
   Copyright 2026 The mst Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

// Central finite-difference gradient checking, test-only.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "mst/random.hpp"
#include "mst/tensor.hpp"

namespace mst::testing {

inline Tensor random_param(Shape shape, Rng& rng, double scale = 1.0) {
  Vector v(shape_size(shape));
  for (Index i = 0; i < v.size(); ++i) v[i] = scale * rng.normal();
  return Tensor::parameter(std::move(shape), std::move(v));
}

// Worst relative error ||analytic - numeric|| / (||analytic|| + ||numeric||)
// over the given inputs, each measured as a whole vector.
inline double gradient_error(const std::function<Tensor()>& loss_fn, std::vector<Tensor> inputs,
                             double h = 1e-5) {
  for (auto& t : inputs) t.clear_grad();
  loss_fn().backward();
  double worst = 0.0;
  for (auto& t : inputs) {
    Vector analytic = t.has_grad() ? t.grad() : Vector::Zero(t.size());
    Vector numeric(t.size());
    for (Index i = 0; i < t.size(); ++i) {
      const double orig = t.mutable_value()[i];
      t.mutable_value()[i] = orig + h;
      const double up = loss_fn().item();
      t.mutable_value()[i] = orig - h;
      const double down = loss_fn().item();
      t.mutable_value()[i] = orig;
      numeric[i] = (up - down) / (2.0 * h);
    }
    const double denom = analytic.norm() + numeric.norm();
    if (denom < 1e-12) continue;
    worst = std::max(worst, (analytic - numeric).norm() / denom);
  }
  return worst;
}

}  // namespace mst::testing
