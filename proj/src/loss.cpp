// Copyright 2026 The DPPF Authors
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

#include "dppf/loss.hpp"

namespace dppf {

LossReport make_loss_report(double gamma, double frob_w_sq) {
  LossReport r;
  r.gamma = gamma;
  r.frob_w_sq = frob_w_sq;
  r.loss = gamma * gamma * frob_w_sq;
  r.root_loss = std::sqrt(r.loss);
  return r;
}

}  // namespace dppf
