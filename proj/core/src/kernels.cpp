// Copyright 2026 The ldpgof Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ldpgof/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ldpgof {

SmoothingKernel boxcar() {
  SmoothingKernel kernel;
  kernel.name = "boxcar";
  kernel.sup_norm = 0.5;
  kernel.eval = [](double t) { return (t > -1.0 && t <= 1.0) ? 0.5 : 0.0; };
  kernel.c_beta = [](double beta) { return 1.0 / (beta + 1.0); };
  return kernel;
}

WaveKernel sine_wave() {
  WaveKernel wave;
  wave.name = "sine";
  wave.sup_norm = 1.0;
  wave.c1 = 4.0 / std::numbers::pi;
  wave.eval = [](double t) {
    return (t > -1.0 && t < 1.0) ? std::sin(std::numbers::pi * t) : 0.0;
  };
  wave.antiderivative = [](double t) {
    return -std::cos(std::numbers::pi * t) / std::numbers::pi;
  };
  // |sin(pi t) - sin(pi s)| <= min(pi |t-s|, 2) <= pi 2^(1-beta) |t-s|^beta
  // for t, s in [-1,1].
  wave.holder_constant = [](double beta) {
    return std::numbers::pi * std::pow(2.0, 1.0 - beta);
  };
  return wave;
}

double scaled_eval(const SmoothingKernel& kernel, double h, double u) {
  if (!(h > 0.0)) {
    throw std::invalid_argument("scaled_eval: bandwidth h must be positive");
  }
  return kernel.eval(u / h) / h;
}

}  // namespace ldpgof
