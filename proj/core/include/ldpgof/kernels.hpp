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

#ifndef LDPGOF_CORE_KERNELS_HPP_
#define LDPGOF_CORE_KERNELS_HPP_

#include <functional>
#include <string>

namespace ldpgof {

// Smoothing kernel for the score mechanism: bounded, supported in [-1,1],
// integrating to one. The default instance is the boxcar; other admissible
// kernels can be plugged in through the same struct.
struct SmoothingKernel {
  std::string name;
  double sup_norm = 0.0;
  // Pointwise evaluation; must vanish identically outside [-1,1].
  std::function<double(double)> eval;
  // c_beta(beta) = integral of |t|^beta * |psi(t)| over [-1,1].
  std::function<double(double)> c_beta;
};

// Zero-mean, unit-energy wave used to build perturbed alternatives. Vanishes
// at the endpoints of [-1,1] so the zero extension stays continuous.
struct WaveKernel {
  std::string name;
  double sup_norm = 0.0;
  // c1 = integral of |psi| over [-1,1].
  double c1 = 0.0;
  std::function<double(double)> eval;
  // Antiderivative of eval on [-1,1] (any constant of integration); used for
  // exact segment masses of rescaled waves.
  std::function<double(double)> antiderivative;
  // A valid Holder constant of the wave for exponent beta in (0,1].
  std::function<double(double)> holder_constant;
};

// Boxcar kernel psi = 1/2 on (-1,1]. The half-open support makes the
// rescaled windows [x_j-h, x_j+h) tile the bulk set exactly, so every point
// activates at most one bin.
SmoothingKernel boxcar();

// Wave psi(t) = sin(pi t) on (-1,1): zero mean, unit energy, c1 = 4/pi,
// Holder constant pi * 2^(1-beta).
WaveKernel sine_wave();

// Rescaled evaluation (1/h) * psi(u/h). Requires h > 0.
double scaled_eval(const SmoothingKernel& kernel, double h, double u);

}  // namespace ldpgof

#endif  // LDPGOF_CORE_KERNELS_HPP_
