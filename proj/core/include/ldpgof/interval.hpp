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

#ifndef LDPGOF_CORE_INTERVAL_HPP_
#define LDPGOF_CORE_INTERVAL_HPP_

#include <algorithm>
#include <stdexcept>
#include <string>

namespace ldpgof {

// Closed interval [lo, hi]; endpoints may be infinite for density supports.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
  bool contains(const Interval& other) const {
    return other.lo >= lo && other.hi <= hi;
  }

  Interval intersect(const Interval& other) const {
    return {std::max(lo, other.lo), std::min(hi, other.hi)};
  }

  void require_nonempty(const char* what) const {
    if (!(lo < hi)) {
      throw std::invalid_argument(std::string(what) +
                                  ": interval must have positive length");
    }
  }
};

}  // namespace ldpgof

#endif  // LDPGOF_CORE_INTERVAL_HPP_
