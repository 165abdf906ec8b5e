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

#include "mst/optim.hpp"

#include <cmath>

#include "mst/error.hpp"

namespace mst {

Tensor& ParameterStore::add(const std::string& name, Tensor param) {
  if (index_.count(name)) throw ConfigError("duplicate parameter name '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.emplace_back(name, std::move(param));
  return entries_.back().second;
}

Tensor& ParameterStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return entries_[it->second].second;
}

const Tensor& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return entries_[it->second].second;
}

Index ParameterStore::count() const {
  Index n = 0;
  for (const auto& [name, t] : entries_) n += t.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& [name, t] : entries_) t.zero_grad();
}

void optimizer_step(NamedParameters& params, OptimizerState& state, double learning_rate) {
  for (const auto& [name, p] : params) {
    if (!p.has_grad()) throw UsageError("optimizer_step: parameter '" + name + "' has no gradient");
  }
  const AdamConfig& c = state.config;
  const double lr = learning_rate > 0.0 ? learning_rate : c.learning_rate;
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (auto& [name, p] : params) {
    auto [it, inserted] = state.moments.try_emplace(name);
    Moments& m = it->second;
    if (inserted) {
      m.first = Vector::Zero(p.size());
      m.second = Vector::Zero(p.size());
    }
    const Vector& g = p.grad();
    m.first = c.beta1 * m.first + (1.0 - c.beta1) * g;
    m.second = c.beta2 * m.second + (1.0 - c.beta2) * g.cwiseAbs2();
    p.mutable_value().array() -=
        lr * (m.first.array() / correction1) /
        ((m.second.array() / correction2).sqrt() + c.epsilon);
  }
}

}  // namespace mst
