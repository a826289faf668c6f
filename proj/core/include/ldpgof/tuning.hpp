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

#ifndef LDPGOF_CORE_TUNING_HPP_
#define LDPGOF_CORE_TUNING_HPP_

#include "ldpgof/densities.hpp"
#include "ldpgof/interval.hpp"
#include "ldpgof/partition.hpp"

namespace ldpgof {

enum class Mechanism { kNonInteractive, kInteractive };

// Per-experiment test parameters. n is the per-phase sample size: the
// non-interactive pipeline consumes 2n raw observations, the interactive one
// 3n.
struct TestConfig {
  int n = 0;
  double alpha = 0.0;   // privacy level, in (0,1]
  double beta = 1.0;    // smoothness exponent, in (0,1]
  double l = 1.0;       // Holder bound of the alternative class, l > L0
  double gamma = 0.2;   // target total error level, in (0,1)
  Mechanism mechanism = Mechanism::kNonInteractive;

  double n_alpha2() const { return static_cast<double>(n) * alpha * alpha; }
  void validate() const;
};

// Rate-optimal bandwidth order for the chosen mechanism, scaled by c_h:
// non-interactive  c_h |B|^(-1/(4b+3)) (n a^2)^(-2/(4b+3)),
// interactive      c_h (|B| n a^2)^(-1/(2b+1)).
// A result >= |B|/2 means n a^2 is too small for even one bin; callers may
// clamp through make_partition, which never returns fewer than one bin.
double bandwidth(const TestConfig& config, Interval b, double c_h = 1.0);

// Upper-bound mode keeps the full support for compactly supported families;
// lower-bound mode applies the shrunk sets used when emulating the
// lower-bound geometry for spiky and beta nulls.
enum class BulkMode { kTesting, kLowerBound };

// Closed-form bulk set for each catalog family at the given (n, alpha, beta,
// mechanism); the slow-varying family is solved by bisection of its defining
// level-set inequality to relative tolerance 1e-6.
Interval bulk_set(const NullDensity& d, const TestConfig& config,
                  BulkMode mode = BulkMode::kTesting);

// Three-term separation rate at (B, h): bias + main-statistic noise + tail
// noise. Used by tuning diagnostics and tests, not by the decision rule.
double psi_rate(Interval b, double h, const TestConfig& config);

}  // namespace ldpgof

#endif  // LDPGOF_CORE_TUNING_HPP_
