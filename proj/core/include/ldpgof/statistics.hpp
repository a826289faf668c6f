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

#ifndef LDPGOF_CORE_STATISTICS_HPP_
#define LDPGOF_CORE_STATISTICS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ldpgof/densities.hpp"
#include "ldpgof/mechanisms.hpp"
#include "ldpgof/tuning.hpp"

namespace ldpgof {

struct Thresholds {
  double t1 = 0.0;
  double t2 = 0.0;
};

struct TestOutcome {
  Mechanism mechanism = Mechanism::kNonInteractive;
  double stat_main = 0.0;  // S_B or D_B
  double stat_tail = 0.0;  // T_B
  double t1 = 0.0;
  double t2 = 0.0;
  bool reject = false;
};

// Order-two U-statistic of the kernel-score matrix around the null values at
// the bin centers, computed in O(nN) through
// sum_{i != k} a_i a_k = (sum_i a_i)^2 - sum_i a_i^2. Requires n >= 2.
double stat_s(const PrivatizedBatch& batch,
              std::span<const double> f0_at_centers);

// Debiased tail estimate: mean of the +/- c_alpha bits minus the null tail
// mass.
double stat_t(const PrivatizedBatch& batch, double tail0);

// Interactive correlation statistic: mean of the second-round bits minus
// sum_j p0(j) clip(phat_j - p0(j), tau).
double stat_d(const PrivatizedBatch& batch, std::span<const double> phat,
              std::span<const double> p0, double tau);

// Closed-form thresholds. The non-interactive t1 needs the null's Holder
// constant and the kernel's c_beta; t2 is shared by both mechanisms.
Thresholds thresholds_ni(const TestConfig& config, const BulkPartition& part,
                         const SmoothingKernel& kernel, double l0);
Thresholds thresholds_int(const TestConfig& config);

// Reject when stat_main >= t1 or stat_tail >= t2; equality rejects.
TestOutcome decide(Mechanism mechanism, double stat_main, double stat_tail,
                   const Thresholds& thresholds);

// One verdict of a moment report.
struct MomentCheck {
  std::string name;
  double value = 0.0;      // empirical quantity being checked
  double reference = 0.0;  // theoretical target or bound
  double margin = 0.0;     // allowed slack at 3 standard errors
  bool two_sided = false;  // |value - reference| <= margin vs value <= ref+margin
  bool pass = false;
};

// Empirical moments of a statistic across replications, the corresponding
// theoretical values, and the per-check verdicts.
struct MomentReport {
  std::string statistic;
  int reps = 0;
  double empirical_mean = 0.0;
  double mean_se = 0.0;
  double empirical_var = 0.0;
  double var_se = 0.0;
  double theoretical_mean = 0.0;
  double theoretical_var = 0.0;
  bool var_is_bound = false;
  std::vector<MomentCheck> checks;
  bool all_pass = false;

  std::string to_json() const;
};

struct MomentOracleOptions {
  int reps = 1000;
  uint64_t master_seed = 1;
  uint64_t stream = streams::kMoments;
  // Independent first-round replays used to estimate E[clip] for the
  // interactive mean identity.
  int clip_replays = 1000;
};

// Replicates S_B under sampling density f and checks the mean identity
// (theoretical mean by quadrature of the smoothed density at the centers)
// and the variance bound.
MomentReport moment_oracle_s(const AnyDensity& f, const NullDensity& f0,
                             const BulkPartition& part,
                             const SmoothingKernel& kernel,
                             const TestConfig& config,
                             const MomentOracleOptions& options);

// Replicates T_B and checks the exact mean and variance formulas two-sided.
MomentReport moment_oracle_t(const AnyDensity& f, const NullDensity& f0,
                             const BulkPartition& part,
                             const TestConfig& config,
                             const MomentOracleOptions& options);

// Replicates the two-round interactive pipeline and checks the exact null
// mean, the clipped-discrepancy lower bound on the mean, the variance bound,
// and the mean identity against an independent first-round replay.
MomentReport moment_oracle_d(const AnyDensity& f, const NullDensity& f0,
                             const BulkPartition& part,
                             const TestConfig& config,
                             const MomentOracleOptions& options);

// Smoothed density at a center: integral of psi_h(x_j - y) f(y) dy over the
// kernel window, split at the perturbation kinks so the quadrature sees only
// smooth pieces.
double smoothed_density_at(const AnyDensity& f, const SmoothingKernel& kernel,
                           const BulkPartition& part, int j);

// Clipped hybrid discrepancy sum_j |p(j)-p0(j)| min(|p(j)-p0(j)|, tau),
// computed from exact bin masses.
double clipped_discrepancy(const AnyDensity& f, const NullDensity& f0,
                           const BulkPartition& part, double tau);

}  // namespace ldpgof

#endif  // LDPGOF_CORE_STATISTICS_HPP_
