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

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mst/tensor.hpp"

namespace mst {

// Insertion-ordered name -> parameter map. Names are unique.
class ParameterStore {
 public:
  Tensor& add(const std::string& name, Tensor param);
  bool contains(const std::string& name) const { return index_.count(name) > 0; }
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;

  std::vector<std::pair<std::string, Tensor>>& entries() { return entries_; }
  const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  Index count() const;

  void zero_grad();

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

using NamedParameters = std::vector<std::pair<std::string, Tensor>>;

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-8;
};

struct Moments {
  Vector first;
  Vector second;
};

struct OptimizerState {
  explicit OptimizerState(AdamConfig cfg = {}) : config(cfg) {}

  AdamConfig config;
  std::int64_t step_count = 0;
  std::unordered_map<std::string, Moments> moments;
};

// One bias-corrected Adam update of every parameter in `params`. Every
// parameter must hold a gradient; the first one that does not is named in the
// UsageError. `learning_rate` overrides the configured rate when positive.
void optimizer_step(NamedParameters& params, OptimizerState& state, double learning_rate = -1.0);

}  // namespace mst
