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

#ifndef LDPGOF_CORE_HARNESS_HPP_
#define LDPGOF_CORE_HARNESS_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ldpgof/densities.hpp"
#include "ldpgof/statistics.hpp"
#include "ldpgof/tuning.hpp"

namespace ldpgof {

enum class ThresholdMode { kPaperConstants, kCalibrated };
enum class SignPattern { kAlternating, kConstant, kSeeded, kExplicit };
// Edge alignment centers the perturbation waves on the interior bin edges of
// the test partition, so the waves straddle bins and shift bin masses; bin
// alignment reuses the test partition, in which case the perturbation is
// invisible to the binned statistics by construction.
enum class AltAlignment { kEdges, kBins };

struct AltSpec {
  bool is_null = true;
  double delta = 0.0;
  SignPattern pattern = SignPattern::kAlternating;
  uint64_t sign_seed = 0;
  std::vector<int> explicit_signs;
};

struct BulkChoice {
  enum class Mode { kAuto, kFull, kExplicit };
  Mode mode = Mode::kAuto;
  Interval interval;
};

struct ExperimentSpec {
  TestConfig config;
  std::string null_spec = "uniform:0,1";
  AltSpec alt;
  AltAlignment alt_align = AltAlignment::kEdges;
  BulkChoice bulk;
  double c_h = 1.0;
  ThresholdMode threshold_mode = ThresholdMode::kPaperConstants;
  int calibration_reps = 2000;
  int reps = 1000;
  uint64_t master_seed = 1;
};

// Everything that is fixed across the trials of one experiment: density,
// bulk set, partition, privacy constants, null values at the centers and the
// (possibly calibrated) thresholds.
struct Experiment {
  ExperimentSpec spec;
  NullDensity null = NullDensity::uniform(0.0, 1.0);
  SmoothingKernel kernel;
  WaveKernel wave;
  BulkPartition part;
  PrivacyParams params;
  std::vector<double> f0_at_centers;
  std::vector<double> p0;
  double tail0 = 0.0;
  Thresholds thresholds;
  std::optional<AlternativeDensity> alternative;
};

Experiment prepare(const ExperimentSpec& spec);

enum class Arm { kNull, kAlt };

// One end-to-end trial: sample the per-phase subsamples, privatize each
// through its own channel, evaluate the statistics and apply the decision
// rule. Deterministic in (master_seed, arm, trial_index).
TestOutcome run_trial(const Experiment& experiment, Arm arm,
                      uint64_t trial_index);
TestOutcome run_trial(const ExperimentSpec& spec, uint64_t trial_index);

// Same trial, keeping the released transcripts (one batch per channel, in
// release order).
struct TrialTranscript {
  TestOutcome outcome;
  std::vector<PrivatizedBatch> batches;
};
TrialTranscript run_trial_transcript(const Experiment& experiment, Arm arm,
                                     uint64_t trial_index);

struct WilsonInterval {
  double rate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};
// 95% Wilson score interval for a binomial proportion.
WilsonInterval wilson(int successes, int trials);

struct RiskEstimate {
  WilsonInterval type1;
  WilsonInterval type2;
  bool type2_applicable = false;
  double risk = 0.0;  // type1 + type2 point estimates; NaN without alternative
  int reps = 0;
};
RiskEstimate estimate_risk(const ExperimentSpec& spec);
RiskEstimate estimate_risk(const Experiment& experiment);

struct RadiusResult {
  double delta_star = 0.0;
  double rho = 0.0;  // L1 separation c1 * delta * N * sqrt(h), analytic
  bool censored = false;
  bool inconclusive = false;
  double type1 = 0.0;
  int risk_evaluations = 0;
};

// Bisects the perturbation size over [0, delta_max] until the estimated risk
// brackets the target, reusing the same trial seeds at every delta (common
// random numbers). Unreachable targets return the delta_max distance flagged
// censored; significantly non-monotone risk across the bracket is flagged
// inconclusive rather than silently answered.
RadiusResult estimate_radius(const ExperimentSpec& spec_template,
                             double target_gamma);

struct RatePoint {
  int n = 0;
  double alpha = 0.0;
  double n_alpha2 = 0.0;
  double rho_hat = 0.0;
  bool censored = false;
};

struct RateFit {
  std::vector<RatePoint> points;
  double slope = 0.0;
  double slope_se = 0.0;
  double intercept = 0.0;
  double theoretical_exponent = 0.0;
  int used_points = 0;
};

// Ordinary least squares of log(rho_hat) on log(n alpha^2) over the
// uncensored points. Fewer than four uncensored points is an error.
RateFit fit_rate(const std::vector<RatePoint>& points,
                 double theoretical_exponent);

// Runs estimate_radius over an n-grid (alpha fixed by the template config).
std::vector<RatePoint> run_rate_grid(const ExperimentSpec& spec_template,
                                     const std::vector<int>& n_grid,
                                     double target_gamma);

// Worker count: LDPGOF_THREADS when set (at least 1), otherwise the hardware
// default. Results are independent of the worker count.
int worker_count();
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

// Machine-readable writers; doubles are emitted with 17 significant digits
// so payloads are byte-stable and round-trip exactly. No timestamps.
std::string mechanism_name(Mechanism mechanism);
std::string risk_csv(const ExperimentSpec& spec, const Experiment& experiment,
                     const RiskEstimate& estimate);
std::string rates_csv(const std::vector<RatePoint>& points);
std::string rate_fit_json(const RateFit& fit);
std::string format_double(double value);

}  // namespace ldpgof

#endif  // LDPGOF_CORE_HARNESS_HPP_
