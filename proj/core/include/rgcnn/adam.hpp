// Copyright 2026 The rgcnn Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RGCNN_ADAM_HPP_
#define RGCNN_ADAM_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "rgcnn/matrix.hpp"

namespace rgcnn {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias-corrected moment estimates.
class Adam {
 public:
  explicit Adam(AdamOptions options) : options_(options) {}

  // Applies one update. `grads` must align with `params` in count and
  // shape; moment buffers are created on the first call.
  void step(std::span<Matrix* const> params, std::span<const Matrix> grads);

  std::size_t steps() const { return step_; }

 private:
  AdamOptions options_;
  std::size_t step_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace rgcnn

#endif  // RGCNN_ADAM_HPP_
