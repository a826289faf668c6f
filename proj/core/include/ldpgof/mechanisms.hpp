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

#ifndef LDPGOF_CORE_MECHANISMS_HPP_
#define LDPGOF_CORE_MECHANISMS_HPP_

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ldpgof/kernels.hpp"
#include "ldpgof/partition.hpp"
#include "ldpgof/rng.hpp"

namespace ldpgof {

// Privacy level and its derived constants. tau is the clip width of the
// interactive second round and is only set by the interactive factory.
struct PrivacyParams {
  double alpha = 0.0;
  double c_alpha = 0.0;  // (e^a + 1) / (e^a - 1)
  double z_alpha = 0.0;  // e^(2a) - e^(-2a)
  double tau = 0.0;      // (n a^2)^(-1/2), interactive only

  static PrivacyParams non_interactive(double alpha);
  static PrivacyParams interactive(double alpha, int n);
};

enum class BatchKind { kKernelMatrix, kTailBits, kBinMatrix, kClippedBits };

// Released transcript of one privatization run. Row i is individual i; bit
// channels have a single column. Batches are immutable after creation and
// safe to share across threads.
struct PrivatizedBatch {
  BatchKind kind = BatchKind::kTailBits;
  std::size_t rows = 0;
  std::size_t cols = 1;
  std::vector<double> values;  // row-major
  PrivacyParams params;
  BulkPartition partition;

  double at(std::size_t i, std::size_t j) const {
    return values[i * cols + j];
  }
};

// Kernel scores plus Laplace noise at scale 2 sup_norm / (alpha h) per entry.
// The score is evaluated at the assigned bin's column only: the rescaled
// kernel windows coincide with the half-open bins, so this matches the
// pointwise formula while keeping the one-active-column structure exact even
// at rounded bin edges. Consumes the raw sample: each subsample feeds
// exactly one channel.
PrivatizedBatch ni_kernel_privatize(std::vector<double> xs,
                                    const BulkPartition& part,
                                    const SmoothingKernel& kernel,
                                    const PrivacyParams& params, Rng& rng);

// Randomized-response bit for the tail indicator: +/- c_alpha with
// probabilities (1 +/- 1{x outside B} / c_alpha) / 2.
PrivatizedBatch rr_tail_privatize(std::vector<double> xs,
                                  const BulkPartition& part,
                                  const PrivacyParams& params, Rng& rng);

// Interactive first round: bin indicator plus Laplace noise at scale
// 2 / alpha per entry.
PrivatizedBatch int_bin_privatize(std::vector<double> xs,
                                  const BulkPartition& part,
                                  const PrivacyParams& params, Rng& rng);

// Column means of a BIN_MATRIX batch; unclipped, may leave [0,1].
std::vector<double> estimate_phat(const PrivatizedBatch& batch);

// max(-tau, min(x, tau)). Requires tau > 0.
double clip(double x, double tau);

// Interactive second round: +/- c_alpha tau bits whose conditional law
// depends on the first round only through phat. Individuals outside B get a
// fair coin.
PrivatizedBatch int_second_round(std::vector<double> xs,
                                 const BulkPartition& part,
                                 const std::vector<double>& phat,
                                 const std::vector<double>& p0,
                                 const PrivacyParams& params, Rng& rng);

// Exact enumeration audit of a finite-alphabet randomized-response channel.
// max_ratio is the worst conditional-probability ratio over all outputs and
// ordered input-class pairs (for CLIPPED_BITS, also worst-case over clip
// values in [-tau, tau], since the transcript phat is public).
// tail_over_bulk restricts the numerator to the outside-B class and the
// denominator to a bin class, the ratio computed in the privacy analysis:
// it equals 2 e^a / (e^a + 1) for TAIL_BITS. Ratios above e^a are a
// mechanism bug and throw.
struct RrAudit {
  double max_ratio = 0.0;
  double tail_over_bulk = 0.0;
  double bound = 0.0;  // e^alpha
};
RrAudit audit_rr(BatchKind kind, const PrivacyParams& params);

// Analytic worst-case density ratio of the kernel-score channel between true
// values y1 and y2: exp(sum_j |psi_h(x_j - y1) - psi_h(x_j - y2)| / sigma)
// with sigma = 2 sup_norm / (alpha h).
double audit_laplace(double y1, double y2, const BulkPartition& part,
                     const SmoothingKernel& kernel,
                     const PrivacyParams& params);

// Same bound for the interactive first round, where the score is the bin
// indicator and sigma = 2 / alpha.
double audit_bin_laplace(double y1, double y2, const BulkPartition& part,
                         const PrivacyParams& params);

// Supremum of the applicable Laplace-channel ratio over a grid of (y1, y2)
// pairs covering bin interiors, edges, centers and points outside B.
double audit_laplace_grid_sup(const BulkPartition& part,
                              const SmoothingKernel& kernel,
                              const PrivacyParams& params,
                              int grid_points_per_bin = 8);
double audit_bin_laplace_grid_sup(const BulkPartition& part,
                                  const PrivacyParams& params,
                                  int grid_points_per_bin = 8);

// Transcript serialization. CSV carries a `i,j,value,kind` header and
// round-trips doubles bit-exactly (17 significant digits); the binary format
// is little-endian f64.
void write_batch_csv(const PrivatizedBatch& batch, std::ostream& os);
PrivatizedBatch read_batch_csv(std::istream& is, const PrivacyParams& params,
                               const BulkPartition& part);
void write_batch_binary(const PrivatizedBatch& batch, std::ostream& os);
PrivatizedBatch read_batch_binary(std::istream& is,
                                  const PrivacyParams& params,
                                  const BulkPartition& part);

}  // namespace ldpgof

#endif  // LDPGOF_CORE_MECHANISMS_HPP_
