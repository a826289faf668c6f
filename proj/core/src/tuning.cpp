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

#include "ldpgof/tuning.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ldpgof {

namespace {

void require(bool cond, const char* message) {
  if (!cond) throw std::invalid_argument(message);
}

// Solves g(a) = 0 for strictly decreasing g by bisection to relative
// tolerance rel_tol on the argument.
template <typename G>
double bisect_decreasing(const G& g, double lo, double hi, double rel_tol) {
  if (!(g(lo) >= 0.0)) {
    throw std::invalid_argument(
        "bulk_set: n alpha^2 too small for a nonempty slow-varying bulk set");
  }
  if (g(hi) > 0.0) return hi;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if ((hi - lo) <= rel_tol * std::abs(mid)) return mid;
    if (g(mid) >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

void TestConfig::validate() const {
  require(n >= 1, "config: per-phase sample size n must be at least 1");
  require(alpha > 0.0 && alpha <= 1.0,
          "config: privacy level alpha must lie in (0,1]");
  require(beta > 0.0 && beta <= 1.0,
          "config: smoothness beta must lie in (0,1]");
  require(gamma > 0.0 && gamma < 1.0,
          "config: error level gamma must lie in (0,1)");
  require(l > 0.0, "config: Holder bound l must be positive");
}

BulkPartition make_partition(Interval b, double h_target) {
  b.require_nonempty("make_partition");
  require(h_target > 0.0, "make_partition: target bandwidth must be positive");
  const double len = b.length();
  int n_bins = static_cast<int>(std::llround(len / (2.0 * h_target)));
  if (n_bins < 1) n_bins = 1;
  BulkPartition part;
  part.b = b;
  part.n_bins = n_bins;
  part.h = len / (2.0 * n_bins);
  part.centers.resize(static_cast<std::size_t>(n_bins));
  for (int j = 0; j < n_bins; ++j) {
    part.centers[static_cast<std::size_t>(j)] = b.lo + (2.0 * j + 1.0) * part.h;
  }
  return part;
}

double bandwidth(const TestConfig& config, Interval b, double c_h) {
  b.require_nonempty("bandwidth");
  require(c_h > 0.0, "bandwidth: c_h must be positive");
  const double na2 = config.n_alpha2();
  require(na2 > 0.0, "bandwidth: n alpha^2 must be positive");
  const double len = b.length();
  if (config.mechanism == Mechanism::kNonInteractive) {
    const double e = 4.0 * config.beta + 3.0;
    return c_h * std::pow(len, -1.0 / e) * std::pow(na2, -2.0 / e);
  }
  const double e = 2.0 * config.beta + 1.0;
  return c_h * std::pow(len * na2, -1.0 / e);
}

Interval bulk_set(const NullDensity& d, const TestConfig& config,
                  BulkMode mode) {
  const double na2 = config.n_alpha2();
  const double beta = config.beta;
  const bool ni = config.mechanism == Mechanism::kNonInteractive;
  switch (d.family()) {
    case Family::kUniform:
      return d.support();
    case Family::kNormal: {
      const double factor = ni ? 4.0 * beta / (4.0 * beta + 3.0)
                               : 2.0 * beta / (2.0 * beta + 1.0);
      const double arg = factor * std::log(na2);
      require(arg > 0.0, "bulk_set: n alpha^2 too small for a nonempty set");
      const double t = std::sqrt(arg);
      return {-t, t};
    }
    case Family::kExponential: {
      const double factor = ni ? 2.0 * beta / (4.0 * beta + 3.0)
                               : beta / (2.0 * beta + 1.0);
      const double t = factor * std::log(na2) / d.param1();
      require(t > 0.0, "bulk_set: n alpha^2 too small for a nonempty set");
      return {0.0, t};
    }
    case Family::kPareto: {
      const double k = d.param2();
      const double e = ni ? 2.0 * beta / (k * (4.0 * beta + 3.0) + 3.0 * beta + 3.0)
                          : beta / (k * (2.0 * beta + 1.0) + beta + 1.0);
      const double t = std::pow(na2, e);
      require(t > d.param1(),
              "bulk_set: n alpha^2 too small for a nonempty set");
      return {d.param1(), t};
    }
    case Family::kCauchy: {
      const double e = ni ? 2.0 * beta / (7.0 * beta + 6.0)
                          : beta / (3.0 * beta + 2.0);
      const double t = std::pow(na2, e);
      return {-t, t};
    }
    case Family::kSpiky: {
      const Interval s = d.support();
      if (mode == BulkMode::kTesting) return s;
      const double t = ni ? std::pow(na2, -2.0 * beta / (4.0 * beta + 3.0))
                          : std::pow(na2, -beta / (2.0 * beta + 1.0));
      require(2.0 * t < s.hi, "bulk_set: n alpha^2 too small for the shrunken set");
      return {t, s.hi - t};
    }
    case Family::kBeta: {
      if (mode == BulkMode::kTesting) return {0.0, 1.0};
      const double a = d.param1();
      const double b = d.param2();
      double lo = 0.0;
      double hi = 1.0;
      if (a > 1.0) {
        lo = ni ? std::pow(na2, -2.0 * beta / ((a - 1.0) * (4.0 * beta + 3.0)))
                : std::pow(na2, -beta / ((a - 1.0) * (2.0 * beta + 1.0)));
      }
      if (b > 1.0) {
        hi = 1.0 -
             (ni ? std::pow(na2, -2.0 * beta / ((b - 1.0) * (4.0 * beta + 3.0)))
                 : std::pow(na2, -beta / ((b - 1.0) * (2.0 * beta + 1.0))));
      }
      require(lo < hi, "bulk_set: n alpha^2 too small for the shrunken set");
      return {lo, hi};
    }
    case Family::kSlowVary: {
      // Level-set rule: the largest a with tail mass at least the rate term
      // plus 1/sqrt(n alpha^2). Both sides are monotone in a, so the
      // crossing is found by bisection on [1, (n alpha^2)^2].
      const double a_par = d.param1();
      const double e1 = ni ? (3.0 * beta + 3.0) / (4.0 * beta + 3.0)
                           : (beta + 1.0) / (2.0 * beta + 1.0);
      const double e2 = ni ? 2.0 * beta / (4.0 * beta + 3.0)
                           : beta / (2.0 * beta + 1.0);
      const double rate_scale = std::pow(na2, -e2);
      const double root_term = 1.0 / std::sqrt(na2);
      auto g = [&](double a) {
        return std::pow(std::numbers::ln2 / std::log(2.0 + a), a_par) -
               std::pow(a, e1) * rate_scale - root_term;
      };
      const double a_star = bisect_decreasing(g, 1.0, na2 * na2, 1e-6);
      return {0.0, a_star};
    }
  }
  throw std::logic_error("bulk_set: unhandled family");
}

double psi_rate(Interval b, double h, const TestConfig& config) {
  b.require_nonempty("psi_rate");
  require(h > 0.0, "psi_rate: bandwidth must be positive");
  const double na2 = config.n_alpha2();
  const double len = b.length();
  const double bias = len * std::pow(h, config.beta);
  const double root = 1.0 / std::sqrt(na2);
  if (config.mechanism == Mechanism::kNonInteractive) {
    return bias + std::pow(len, 0.75) / (std::pow(h, 0.75) * std::sqrt(na2)) +
           root;
  }
  return bias + std::sqrt(len / (h * na2)) + root;
}

}  // namespace ldpgof
