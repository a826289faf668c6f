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

#ifndef LDPGOF_CORE_PARTITION_HPP_
#define LDPGOF_CORE_PARTITION_HPP_

#include <cmath>
#include <vector>

#include "ldpgof/interval.hpp"

namespace ldpgof {

// Exact tiling of a compact bulk set B into N bins of half-width h, with
// centers x_j = lo + (2j-1) h. Membership is half-open ([x_j-h, x_j+h)) so
// that every point of [lo, hi) belongs to exactly one bin; this matches the
// boxcar kernel's half-open support.
struct BulkPartition {
  Interval b;
  double h = 0.0;
  int n_bins = 0;
  std::vector<double> centers;

  Interval bin(int j) const { return {centers[j] - h, centers[j] + h}; }

  // Index of the bin containing x, or -1 when x falls outside [lo, hi).
  int bin_index(double x) const {
    const double t = (x - b.lo) / (2.0 * h);
    if (t < 0.0 || t >= static_cast<double>(n_bins)) return -1;
    int j = static_cast<int>(t);
    if (j >= n_bins) j = n_bins - 1;
    return j;
  }
};

// Builds the partition with N = max(1, round(|B| / (2 h_target))) and h
// recomputed as |B| / (2N) so the bins tile B exactly. A ragged last bin
// would break the one-bin-per-point structure the score mechanism relies on.
BulkPartition make_partition(Interval b, double h_target);

}  // namespace ldpgof

#endif  // LDPGOF_CORE_PARTITION_HPP_
