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

#include "ldpgof/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <unordered_set>

#include "gtest/gtest.h"

namespace ldpgof {
namespace {

ExperimentSpec uniform_spec(Mechanism mechanism, int n = 2000,
                            uint64_t seed = 7) {
  ExperimentSpec spec;
  spec.config.n = n;
  spec.config.alpha = 0.5;
  spec.config.beta = 1.0;
  spec.config.l = 8.0;
  spec.config.gamma = 0.2;
  spec.config.mechanism = mechanism;
  spec.null_spec = "uniform:0,1";
  spec.master_seed = seed;
  spec.reps = 200;
  return spec;
}

TEST(Wilson, MatchesReferenceTable) {
  const auto a = wilson(5, 100);
  EXPECT_NEAR(a.lo, 0.021543679154367971, 1e-9);
  EXPECT_NEAR(a.hi, 0.11175046923191915, 1e-9);
  const auto b = wilson(50, 100);
  EXPECT_NEAR(b.lo, 0.40383153036599563, 1e-9);
  EXPECT_NEAR(b.hi, 0.59616846963400437, 1e-9);
  const auto c = wilson(0, 100);
  EXPECT_NEAR(c.lo, 0.0, 1e-9);
  EXPECT_NEAR(c.hi, 0.036993498206985685, 1e-9);
  EXPECT_LT(c.hi, 1.0);
  EXPECT_THROW(wilson(5, 0), std::invalid_argument);
  EXPECT_THROW(wilson(5, 4), std::invalid_argument);
}

TEST(RunTrial, DeterministicInSeedAndIndex) {
  const ExperimentSpec spec = uniform_spec(Mechanism::kNonInteractive);
  const TestOutcome a = run_trial(spec, 3);
  const TestOutcome b = run_trial(spec, 3);
  EXPECT_EQ(a.stat_main, b.stat_main);
  EXPECT_EQ(a.stat_tail, b.stat_tail);
  EXPECT_EQ(a.reject, b.reject);
  const TestOutcome c = run_trial(spec, 4);
  EXPECT_NE(a.stat_main, c.stat_main);
}

TEST(RunTrial, CompletesQuickly) {
  const Experiment experiment =
      prepare(uniform_spec(Mechanism::kNonInteractive));
  run_trial(experiment, Arm::kNull, 0);  // warm-up
  const auto start = std::chrono::steady_clock::now();
  run_trial(experiment, Arm::kNull, 1);
  const auto elapsed = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  EXPECT_LT(elapsed, 50.0);
}

TEST(RunTrial, OutcomeConsistentWithThresholds) {
  const Experiment experiment =
      prepare(uniform_spec(Mechanism::kInteractive));
  for (uint64_t r = 0; r < 20; ++r) {
    const TestOutcome outcome = run_trial(experiment, Arm::kNull, r);
    ASSERT_EQ(outcome.reject, outcome.stat_main >= outcome.t1 ||
                                  outcome.stat_tail >= outcome.t2);
  }
}

TEST(SeedDerivation, ArmSubspacesShareNoVariates) {
  // First 1e4 raw draws of a handful of trial streams in each arm must be
  // pairwise disjoint as 64-bit words.
  std::unordered_set<uint64_t> null_arm;
  for (uint64_t trial = 0; trial < 4; ++trial) {
    Rng rng = Rng::derive(7, streams::kNullArm + 2000, trial);
    for (int i = 0; i < 10000; ++i) null_arm.insert(rng.next_u64());
  }
  for (uint64_t trial = 0; trial < 4; ++trial) {
    Rng rng = Rng::derive(7, streams::kAltArm + 2000, trial);
    for (int i = 0; i < 10000; ++i) {
      ASSERT_EQ(null_arm.count(rng.next_u64()), 0u);
    }
  }
}

TEST(EstimateRisk, NullAlternativeReportsTypeOneOnly) {
  ExperimentSpec spec = uniform_spec(Mechanism::kNonInteractive);
  spec.reps = 400;
  const RiskEstimate estimate = estimate_risk(spec);
  EXPECT_FALSE(estimate.type2_applicable);
  EXPECT_TRUE(std::isnan(estimate.risk));
  // Paper-constant thresholds keep the null rejection rate below gamma/2.
  EXPECT_LE(estimate.type1.lo, spec.config.gamma / 2.0);
  EXPECT_LE(estimate.type1.rate,
            spec.config.gamma / 2.0 +
                3.0 * std::sqrt(0.1 * 0.9 / static_cast<double>(spec.reps)));
}

TEST(EstimateRisk, RejectsTooFewReps) {
  ExperimentSpec spec = uniform_spec(Mechanism::kNonInteractive);
  spec.reps = 50;
  EXPECT_THROW(estimate_risk(spec), std::invalid_argument);
}

TEST(EstimateRisk, PowerGrowsWithSampleSize) {
  // At delta_max the type-II error shrinks as n alpha^2 grows (calibrated
  // thresholds so the test is not swamped by conservative constants).
  double previous = 1.0;
  for (int n : {2000, 16000}) {
    ExperimentSpec spec = uniform_spec(Mechanism::kInteractive, n);
    spec.config.l = 64.0;
    spec.threshold_mode = ThresholdMode::kCalibrated;
    spec.calibration_reps = 400;
    spec.reps = 300;
    spec.alt.is_null = false;
    const Experiment probe = prepare(spec);
    const DeltaMax dm =
        delta_max(probe.null, probe.alternative->partition, probe.wave,
                  spec.config.beta, spec.config.l);
    spec.alt.delta = dm.value;
    const RiskEstimate estimate = estimate_risk(spec);
    ASSERT_TRUE(estimate.type2_applicable);
    EXPECT_LE(estimate.type2.rate, previous + 0.05);
    previous = estimate.type2.rate;
  }
  EXPECT_LT(previous, 0.5);
}

TEST(EstimateRadius, InteractiveSmokeRun) {
  ExperimentSpec spec = uniform_spec(Mechanism::kInteractive, 8192, 21);
  spec.threshold_mode = ThresholdMode::kCalibrated;
  spec.calibration_reps = 400;
  spec.reps = 200;
  spec.config.l = 64.0;
  const RadiusResult result = estimate_radius(spec, 0.5);
  EXPECT_FALSE(result.inconclusive);
  EXPECT_FALSE(result.censored);
  EXPECT_GT(result.delta_star, 0.0);
  EXPECT_GT(result.rho, 0.0);
  EXPECT_GE(result.risk_evaluations, 2);
}

TEST(EstimateRadius, CensoredWhenTargetUnreachable) {
  // Tiny sample: even the largest admissible perturbation cannot reach the
  // target risk, so the radius is the delta_max distance flagged censored.
  ExperimentSpec spec = uniform_spec(Mechanism::kNonInteractive, 256, 5);
  spec.threshold_mode = ThresholdMode::kCalibrated;
  spec.calibration_reps = 300;
  spec.reps = 150;
  spec.config.l = 2.0;
  const RadiusResult result = estimate_radius(spec, 0.2);
  EXPECT_TRUE(result.censored);
  EXPECT_GT(result.rho, 0.0);
}

TEST(FitRate, RecoversExactPowerLaw) {
  std::vector<RatePoint> points;
  for (int k = 0; k < 8; ++k) {
    RatePoint p;
    p.n = 1 << (10 + k);
    p.alpha = 0.5;
    p.n_alpha2 = p.n * 0.25;
    p.rho_hat = std::pow(p.n_alpha2, -1.0 / 3.0);
    points.push_back(p);
  }
  const RateFit fit = fit_rate(points, -1.0 / 3.0);
  EXPECT_NEAR(fit.slope, -1.0 / 3.0, 1e-12);
  EXPECT_NEAR(fit.slope_se, 0.0, 1e-12);
  EXPECT_EQ(fit.used_points, 8);
}

TEST(FitRate, HandlesNoiseAndCensoring) {
  Rng rng(33);
  std::vector<RatePoint> points;
  for (int k = 0; k < 8; ++k) {
    RatePoint p;
    p.n = 1 << (10 + k);
    p.alpha = 0.5;
    p.n_alpha2 = p.n * 0.25;
    const double noise = 1.0 + 0.05 * (2.0 * rng.next_double() - 1.0);
    p.rho_hat = std::pow(p.n_alpha2, -1.0 / 3.0) * noise;
    p.censored = k == 0;  // censored points are excluded from the fit
    points.push_back(p);
  }
  const RateFit fit = fit_rate(points, -1.0 / 3.0);
  EXPECT_EQ(fit.used_points, 7);
  EXPECT_NEAR(fit.slope, -1.0 / 3.0, 0.05);

  std::vector<RatePoint> too_few(points.begin(), points.begin() + 5);
  for (auto& p : too_few) p.censored = true;
  too_few[0].censored = false;
  too_few[1].censored = false;
  too_few[2].censored = false;
  EXPECT_THROW(fit_rate(too_few, -1.0 / 3.0), std::runtime_error);
}

TEST(Csv, HeadersAndShapeArePinned) {
  ExperimentSpec spec = uniform_spec(Mechanism::kNonInteractive);
  spec.reps = 150;
  const Experiment experiment = prepare(spec);
  const RiskEstimate estimate = estimate_risk(experiment);
  const std::string csv = risk_csv(spec, experiment, estimate);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "mechanism,null,n,alpha,gamma,delta,l1_distance,type1,type1_lo,"
            "type1_hi,type2,type2_lo,type2_hi,reps,seed");
  EXPECT_NE(csv.find("ni,uniform:0,1,2000,"), std::string::npos);

  std::vector<RatePoint> points(1);
  points[0] = {1024, 0.5, 256.0, 0.25, false};
  const std::string rates = rates_csv(points);
  EXPECT_EQ(rates, "n,alpha,n_alpha2,rho_hat,censored\n1024,0.5,256,0.25,0\n");
}

TEST(Parallelism, WorkerCountDoesNotChangeResults) {
  ExperimentSpec spec = uniform_spec(Mechanism::kInteractive, 1000, 3);
  spec.reps = 200;
  setenv("LDPGOF_THREADS", "1", 1);
  const RiskEstimate serial = estimate_risk(spec);
  setenv("LDPGOF_THREADS", "4", 1);
  const RiskEstimate threaded = estimate_risk(spec);
  unsetenv("LDPGOF_THREADS");
  EXPECT_EQ(serial.type1.rate, threaded.type1.rate);
  EXPECT_EQ(serial.type1.lo, threaded.type1.lo);
}

TEST(Parallelism, ParallelForCoversAllIndices) {
  setenv("LDPGOF_THREADS", "3", 1);
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  unsetenv("LDPGOF_THREADS");
  for (int h : hits) ASSERT_EQ(h, 1);
}

TEST(Prepare, ValidatesBulkChoices) {
  ExperimentSpec spec = uniform_spec(Mechanism::kNonInteractive);
  spec.bulk.mode = BulkChoice::Mode::kFull;
  EXPECT_NO_THROW(prepare(spec));
  spec.null_spec = "normal";
  EXPECT_THROW(prepare(spec), std::invalid_argument);
  spec.bulk.mode = BulkChoice::Mode::kExplicit;
  spec.bulk.interval = {-2.0, 2.0};
  EXPECT_NO_THROW(prepare(spec));
  spec.bulk.interval = {2.0, 2.0};
  EXPECT_THROW(prepare(spec), std::invalid_argument);
}

TEST(Prepare, AlternativeAlignmentModes) {
  ExperimentSpec spec = uniform_spec(Mechanism::kNonInteractive, 4000);
  spec.alt.is_null = false;
  spec.alt.delta = 0.001;
  spec.alt_align = AltAlignment::kEdges;
  const Experiment edges = prepare(spec);
  ASSERT_TRUE(edges.alternative.has_value());
  EXPECT_EQ(edges.alternative->partition.n_bins, edges.part.n_bins - 1);
  // Edge-aligned waves shift the test-partition bin masses...
  double shift = 0.0;
  for (int j = 0; j < edges.part.n_bins; ++j) {
    const Interval bin = edges.part.bin(j);
    shift += std::abs(edges.alternative->perturbation_mass(bin.lo, bin.hi));
  }
  EXPECT_GT(shift, 0.0);
  // ...while bin-aligned waves are invisible to the bin masses.
  spec.alt_align = AltAlignment::kBins;
  const Experiment bins = prepare(spec);
  EXPECT_EQ(bins.alternative->partition.n_bins, bins.part.n_bins);
  for (int j = 0; j < bins.part.n_bins; ++j) {
    const Interval bin = bins.part.bin(j);
    ASSERT_NEAR(bins.alternative->perturbation_mass(bin.lo, bin.hi), 0.0,
                1e-15);
  }
}

}  // namespace
}  // namespace ldpgof
