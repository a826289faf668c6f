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

#include "ldpgof/mechanisms.hpp"

#include <cmath>
#include <sstream>

#include "gtest/gtest.h"
#include "ldpgof/densities.hpp"
#include "ldpgof/tuning.hpp"

namespace ldpgof {
namespace {

TEST(PrivacyParams, DerivedConstants) {
  for (double alpha : {0.01, 0.1, 0.5, 1.0, std::log(3.0)}) {
    const auto p = PrivacyParams::non_interactive(alpha);
    EXPECT_GT(p.c_alpha, 1.0);
    EXPECT_NEAR(p.c_alpha * (std::exp(alpha) - 1.0), std::exp(alpha) + 1.0,
                1e-12);
    EXPECT_GT(p.z_alpha, 0.0);
    EXPECT_NEAR(p.z_alpha, std::exp(2 * alpha) - std::exp(-2 * alpha), 1e-12);
  }
  const auto p = PrivacyParams::interactive(0.5, 2000);
  EXPECT_NEAR(p.tau, 1.0 / std::sqrt(2000 * 0.25), 1e-15);
  EXPECT_THROW(PrivacyParams::non_interactive(0.0), std::invalid_argument);
}

TEST(Clip, PointValuesAndLipschitz) {
  EXPECT_DOUBLE_EQ(clip(0.5, 0.2), 0.2);
  EXPECT_DOUBLE_EQ(clip(-0.5, 0.2), -0.2);
  EXPECT_DOUBLE_EQ(clip(0.1, 0.2), 0.1);
  EXPECT_THROW(clip(0.1, 0.0), std::invalid_argument);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double a = 4.0 * rng.next_double() - 2.0;
    const double b = 4.0 * rng.next_double() - 2.0;
    ASSERT_LE(std::abs(clip(a, 0.3) - clip(b, 0.3)),
              std::abs(a - b) + 1e-15);
    ASSERT_LE(std::abs(clip(a, 0.3)), 0.3);
  }
}

class KernelChannelTest : public ::testing::Test {
 protected:
  BulkPartition part_ = make_partition({0.0, 1.0}, 0.05);
  SmoothingKernel kernel_ = boxcar();
  PrivacyParams params_ = PrivacyParams::non_interactive(0.5);
};

// With identical seeds, a sample at a bin center and a sample far outside B
// receive identical noise, so the difference isolates the kernel term.
TEST_F(KernelChannelTest, KernelTermHitsExactlyOneColumn) {
  const double x3 = part_.centers[2];
  Rng rng_a(99);
  Rng rng_b(99);
  const auto with_kernel =
      ni_kernel_privatize({x3}, part_, kernel_, params_, rng_a);
  const auto noise_only =
      ni_kernel_privatize({5.0}, part_, kernel_, params_, rng_b);
  for (std::size_t j = 0; j < with_kernel.cols; ++j) {
    const double term = with_kernel.at(0, j) - noise_only.at(0, j);
    if (j == 2) {
      ASSERT_DOUBLE_EQ(term, 10.0);  // (1/h) psi(0) = (1/0.05) * 0.5
    } else {
      ASSERT_DOUBLE_EQ(term, 0.0);
    }
  }
}

TEST_F(KernelChannelTest, EveryPointActivatesAtMostOneColumn) {
  Rng grid_rng(4);
  for (int rep = 0; rep < 500; ++rep) {
    const double x = -0.2 + 1.4 * grid_rng.next_double();
    Rng rng_a(rep);
    Rng rng_b(rep);
    const auto with_kernel =
        ni_kernel_privatize({x}, part_, kernel_, params_, rng_a);
    const auto noise_only =
        ni_kernel_privatize({77.0}, part_, kernel_, params_, rng_b);
    int active = 0;
    for (std::size_t j = 0; j < with_kernel.cols; ++j) {
      active += with_kernel.at(0, j) != noise_only.at(0, j);
    }
    ASSERT_LE(active, 1) << "x=" << x;
  }
}

TEST_F(KernelChannelTest, NoiseScaleAndVariance) {
  // alpha=0.5, h=0.1: per-entry scale 2*0.5/(0.5*0.1) = 20, variance 2*20^2.
  const BulkPartition part = make_partition({0.0, 1.0}, 0.1);
  const double scale = 2.0 * kernel_.sup_norm / (params_.alpha * part.h);
  EXPECT_DOUBLE_EQ(scale, 20.0);
  Rng rng(123);
  const std::size_t n = 20000;
  std::vector<double> xs(n, 50.0);  // outside B: rows are pure noise
  const auto batch = ni_kernel_privatize(std::move(xs), part, kernel_,
                                         params_, rng);
  double sum_sq = 0.0;
  for (double v : batch.values) sum_sq += v * v;
  const double empirical = sum_sq / static_cast<double>(batch.values.size());
  EXPECT_NEAR(empirical, 2.0 * scale * scale, 0.05 * 2.0 * scale * scale);
}

TEST_F(KernelChannelTest, ColumnMeanEstimatesDensityAtCenter) {
  const auto null = NullDensity::uniform(0.0, 1.0);
  const BulkPartition part = make_partition({0.0, 1.0}, 0.1);
  Rng rng(2025);
  const std::size_t n = 100000;
  auto xs = null.sample(n, rng);
  const auto batch =
      ni_kernel_privatize(std::move(xs), part, kernel_, params_, rng);
  const double scale = 2.0 * kernel_.sup_norm / (params_.alpha * part.h);
  // Per-entry sd: Laplace noise (2 scale^2) plus kernel-term variance.
  const double kern_var = 0.25 / (part.h * part.h) * (2.0 * part.h);
  const double sd = std::sqrt(2.0 * scale * scale + kern_var);
  for (std::size_t j = 0; j < batch.cols; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < batch.rows; ++i) mean += batch.at(i, j);
    mean /= static_cast<double>(batch.rows);
    ASSERT_NEAR(mean, 1.0, 3.0 * sd / std::sqrt(static_cast<double>(n)));
  }
}

TEST_F(KernelChannelTest, RejectsAlphaAboveOne) {
  const auto params = PrivacyParams::non_interactive(1.2);
  Rng rng(1);
  EXPECT_THROW(ni_kernel_privatize({0.5}, part_, kernel_, params, rng),
               std::invalid_argument);
  EXPECT_THROW(int_bin_privatize({0.5}, part_, params, rng),
               std::invalid_argument);
}

TEST(TailChannel, BitLawAndMean) {
  const auto params = PrivacyParams::non_interactive(std::log(3.0));
  EXPECT_NEAR(params.c_alpha, 2.0, 1e-14);
  const BulkPartition part = make_partition({0.0, 1.0}, 0.25);
  Rng rng(8);
  const std::size_t n = 100000;
  std::vector<double> outside(n, 2.0);
  const auto batch = rr_tail_privatize(std::move(outside), part, params, rng);
  int plus = 0;
  for (double v : batch.values) {
    ASSERT_TRUE(v == params.c_alpha || v == -params.c_alpha);
    plus += v > 0;
  }
  const double p_plus = static_cast<double>(plus) / n;
  EXPECT_NEAR(p_plus, 0.75, 3.0 * std::sqrt(0.75 * 0.25 / n));

  // Inside B the bit is a fair coin regardless of the bin.
  Rng rng2(9);
  std::vector<double> inside(n);
  for (std::size_t i = 0; i < n; ++i) inside[i] = (i % 97) / 97.0;
  const auto batch2 = rr_tail_privatize(std::move(inside), part, params, rng2);
  double mean = 0.0;
  for (double v : batch2.values) mean += v;
  mean /= static_cast<double>(n);
  EXPECT_NEAR(mean, 0.0, 3.0 * params.c_alpha / std::sqrt(1e5));
}

TEST(TailChannel, MeanEstimatesTailProbability) {
  const auto null = NullDensity::exponential(1.0);
  const auto params = PrivacyParams::non_interactive(0.5);
  const BulkPartition part = make_partition({0.0, std::log(4.0)}, 0.2);
  Rng rng(31);
  const std::size_t n = 100000;
  auto xs = null.sample(n, rng);
  const auto batch = rr_tail_privatize(std::move(xs), part, params, rng);
  double mean = 0.0;
  for (double v : batch.values) mean += v;
  mean /= static_cast<double>(n);
  EXPECT_NEAR(mean, 0.25, 3.0 * params.c_alpha / std::sqrt(1e5));
}

TEST(BinChannel, IndicatorRow) {
  const BulkPartition part = make_partition({0.0, 1.0}, 1.0 / 6.0);
  ASSERT_EQ(part.n_bins, 3);
  const auto params = PrivacyParams::interactive(0.5, 100);
  const double x_in_second = 0.5;
  Rng rng_a(5);
  Rng rng_b(5);
  const auto with_indicator =
      int_bin_privatize({x_in_second}, part, params, rng_a);
  const auto noise_only = int_bin_privatize({9.0}, part, params, rng_b);
  EXPECT_DOUBLE_EQ(with_indicator.at(0, 0) - noise_only.at(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(with_indicator.at(0, 1) - noise_only.at(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(with_indicator.at(0, 2) - noise_only.at(0, 2), 0.0);
}

TEST(BinChannel, PhatIsUnbiased) {
  const auto null = NullDensity::uniform(0.0, 1.0);
  const BulkPartition part = make_partition({0.0, 1.0}, 0.1);
  const auto params = PrivacyParams::interactive(0.5, 200000);
  Rng rng(77);
  auto xs = null.sample(200000, rng);
  const auto batch = int_bin_privatize(std::move(xs), part, params, rng);
  const auto phat = estimate_phat(batch);
  const double sd = std::sqrt((0.2 * 0.8 + 2.0 * 16.0) / 200000.0);
  for (double p : phat) ASSERT_NEAR(p, 0.2, 3.0 * sd);
}

TEST(BinChannel, EstimatePhatPointValues) {
  PrivatizedBatch batch;
  batch.kind = BatchKind::kBinMatrix;
  batch.rows = 2;
  batch.cols = 1;
  batch.values = {0.4, 0.6};
  EXPECT_DOUBLE_EQ(estimate_phat(batch)[0], 0.5);
  batch.values = {0.0, 0.0};
  EXPECT_DOUBLE_EQ(estimate_phat(batch)[0], 0.0);
  batch.kind = BatchKind::kTailBits;
  EXPECT_THROW(estimate_phat(batch), std::invalid_argument);
}

class SecondRoundTest : public ::testing::Test {
 protected:
  // Two bins over [0,1); p0 is an arbitrary reference vector.
  BulkPartition part_ = make_partition({0.0, 1.0}, 0.25);
  PrivacyParams params_ = PrivacyParams::interactive(std::log(3.0), 400);
  std::vector<double> p0_ = {0.25, 0.25};
};

TEST_F(SecondRoundTest, SaturatedClipLaw) {
  // clip = tau and c_alpha = 2 give P(+) = 1/2 (1 + tau/(2 tau)) = 0.75.
  const double tau = params_.tau;
  std::vector<double> phat = {p0_[0] + 10.0 * tau, p0_[1]};
  Rng rng(17);
  const std::size_t n = 100000;
  std::vector<double> xs(n, 0.25);  // all in the first bin
  const auto batch =
      int_second_round(std::move(xs), part_, phat, p0_, params_, rng);
  int plus = 0;
  for (double v : batch.values) {
    ASSERT_TRUE(v == params_.c_alpha * tau || v == -params_.c_alpha * tau);
    plus += v > 0;
  }
  EXPECT_NEAR(static_cast<double>(plus) / n, 0.75,
              3.0 * std::sqrt(0.75 * 0.25 / n));
}

TEST_F(SecondRoundTest, OutsideBulkIsFairCoin) {
  std::vector<double> phat = {p0_[0] + params_.tau, p0_[1] - params_.tau};
  Rng rng(18);
  const std::size_t n = 100000;
  std::vector<double> xs(n, 3.0);
  const auto batch =
      int_second_round(std::move(xs), part_, phat, p0_, params_, rng);
  double mean = 0.0;
  for (double v : batch.values) mean += v;
  mean /= static_cast<double>(n);
  EXPECT_NEAR(mean, 0.0,
              3.0 * params_.c_alpha * params_.tau / std::sqrt(1e5));
}

TEST_F(SecondRoundTest, LawDependsOnFirstRoundOnlyThroughPhat) {
  std::vector<double> xs;
  Rng xrng(4);
  for (int i = 0; i < 200; ++i) xs.push_back(xrng.next_double());
  std::vector<double> phat = {p0_[0] + 0.7 * params_.tau, p0_[1] - 0.2};
  Rng rng_a(21);
  Rng rng_b(21);
  auto batch_a = int_second_round(xs, part_, phat, p0_, params_, rng_a);
  auto batch_b = int_second_round(xs, part_, phat, p0_, params_, rng_b);
  EXPECT_EQ(batch_a.values, batch_b.values);

  // Equal clipped values give an identical law even when the raw phat
  // differ beyond the clip width.
  std::vector<double> phat_clipped_same = {p0_[0] + 0.7 * params_.tau,
                                           p0_[1] - 5.0};
  Rng rng_c(21);
  auto batch_c =
      int_second_round(xs, part_, phat_clipped_same, p0_, params_, rng_c);
  EXPECT_EQ(batch_a.values, batch_c.values);
}

TEST(AuditRr, TailBitsRatios) {
  const auto params = PrivacyParams::non_interactive(std::log(3.0));
  const auto audit = audit_rr(BatchKind::kTailBits, params);
  EXPECT_NEAR(audit.tail_over_bulk, 1.5, 1e-12);  // 2 e^a / (e^a + 1) = 6/4
  EXPECT_NEAR(audit.max_ratio, 2.0, 1e-12);       // (e^a + 1) / 2
  EXPECT_NEAR(audit.bound, 3.0, 1e-12);
  EXPECT_LE(audit.max_ratio, audit.bound + 1e-12);
}

TEST(AuditRr, ClippedBitsWorstCaseIsExactlyTheBudget) {
  for (double alpha : {0.01, 0.1, 0.5, 1.0}) {
    const auto params = PrivacyParams::interactive(alpha, 1000);
    const auto audit = audit_rr(BatchKind::kClippedBits, params);
    EXPECT_NEAR(audit.max_ratio, std::exp(alpha), 1e-12);
    EXPECT_LE(audit.max_ratio, audit.bound + 1e-12);
  }
}

TEST(AuditRr, BoundHoldsOnLogGrid) {
  for (double alpha = 1e-3; alpha <= 1.0; alpha *= 1.6) {
    const auto ni = PrivacyParams::non_interactive(alpha);
    EXPECT_LE(audit_rr(BatchKind::kTailBits, ni).max_ratio,
              std::exp(alpha) + 1e-12);
    const auto it = PrivacyParams::interactive(alpha, 100);
    EXPECT_LE(audit_rr(BatchKind::kClippedBits, it).max_ratio,
              std::exp(alpha) + 1e-12);
  }
  EXPECT_THROW(
      audit_rr(BatchKind::kKernelMatrix, PrivacyParams::non_interactive(0.5)),
      std::invalid_argument);
}

TEST(AuditLaplace, PointValuesAndGridSup) {
  const auto params = PrivacyParams::non_interactive(0.5);
  const auto kernel = boxcar();
  const auto part = make_partition({0.0, 1.0}, 0.1);
  EXPECT_DOUBLE_EQ(audit_laplace(0.3, 0.3, part, kernel, params), 1.0);
  // One active column of magnitude sup_norm/h: ratio e^(alpha/2).
  EXPECT_NEAR(audit_laplace(part.centers[1], 7.0, part, kernel, params),
              std::exp(0.25), 1e-12);
  // Two different bins: ratio e^alpha exactly.
  EXPECT_NEAR(audit_laplace(part.centers[1], part.centers[4], part, kernel,
                            params),
              std::exp(0.5), 1e-12);
  const double sup = audit_laplace_grid_sup(part, kernel, params);
  EXPECT_LE(sup, std::exp(0.5) * (1.0 + 1e-12));
  EXPECT_NEAR(sup, std::exp(0.5), 1e-9);
}

TEST(AuditLaplace, BinChannelGridSup) {
  const auto params = PrivacyParams::interactive(0.8, 500);
  const auto part = make_partition({0.0, 1.0}, 0.125);
  const double sup = audit_bin_laplace_grid_sup(part, params);
  EXPECT_NEAR(sup, std::exp(0.8), 1e-12);
  EXPECT_DOUBLE_EQ(audit_bin_laplace(0.3, 0.3, part, params), 1.0);
}

TEST(BatchDeterminism, SameSeedSameTranscript) {
  const auto null = NullDensity::uniform(0.0, 1.0);
  const auto part = make_partition({0.0, 1.0}, 0.1);
  const auto params = PrivacyParams::non_interactive(0.5);
  const auto kernel = boxcar();
  Rng sample_rng(55);
  const auto xs = null.sample(64, sample_rng);
  Rng rng_a(123);
  Rng rng_b(123);
  const auto a = ni_kernel_privatize(xs, part, kernel, params, rng_a);
  const auto b = ni_kernel_privatize(xs, part, kernel, params, rng_b);
  EXPECT_EQ(a.values, b.values);
}

TEST(BatchSerialization, CsvRoundTripIsBitExact) {
  const auto part = make_partition({0.0, 1.0}, 0.25);
  const auto params = PrivacyParams::non_interactive(0.5);
  PrivatizedBatch batch;
  batch.kind = BatchKind::kKernelMatrix;
  batch.rows = 3;
  batch.cols = 2;
  batch.params = params;
  batch.partition = part;
  batch.values = {0.1, -1.0 / 3.0, 5e-324, 1.7976931348623157e308,
                  -0.0, 123456.789012345678};
  std::ostringstream os;
  write_batch_csv(batch, os);
  std::istringstream is(os.str());
  const auto back = read_batch_csv(is, params, part);
  ASSERT_EQ(back.kind, batch.kind);
  ASSERT_EQ(back.rows, batch.rows);
  ASSERT_EQ(back.cols, batch.cols);
  for (std::size_t i = 0; i < batch.values.size(); ++i) {
    ASSERT_EQ(back.values[i], batch.values[i]) << i;
  }
}

TEST(BatchSerialization, BinaryRoundTripIsBitExact) {
  const auto part = make_partition({0.0, 1.0}, 0.5);
  const auto params = PrivacyParams::non_interactive(0.25);
  Rng rng(9);
  PrivatizedBatch batch;
  batch.kind = BatchKind::kTailBits;
  batch.rows = 257;
  batch.cols = 1;
  batch.params = params;
  batch.partition = part;
  for (std::size_t i = 0; i < batch.rows; ++i) {
    batch.values.push_back(rng.next_laplace());
  }
  std::ostringstream os(std::ios::binary);
  write_batch_binary(batch, os);
  std::istringstream is(os.str(), std::ios::binary);
  const auto back = read_batch_binary(is, params, part);
  EXPECT_EQ(back.values, batch.values);
  EXPECT_EQ(back.kind, batch.kind);
}

TEST(BatchSerialization, RejectsCorruptHeaders) {
  const auto part = make_partition({0.0, 1.0}, 0.5);
  const auto params = PrivacyParams::non_interactive(0.25);
  std::istringstream bad_csv("i,j,val\n");
  EXPECT_THROW(read_batch_csv(bad_csv, params, part), std::invalid_argument);
  std::istringstream bad_bin("XXXX");
  EXPECT_THROW(read_batch_binary(bad_bin, params, part),
               std::invalid_argument);
}

}  // namespace
}  // namespace ldpgof
