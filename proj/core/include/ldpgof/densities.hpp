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

#ifndef LDPGOF_CORE_DENSITIES_HPP_
#define LDPGOF_CORE_DENSITIES_HPP_

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ldpgof/interval.hpp"
#include "ldpgof/kernels.hpp"
#include "ldpgof/partition.hpp"
#include "ldpgof/rng.hpp"

namespace ldpgof {

enum class Family {
  kUniform,
  kNormal,
  kBeta,
  kCauchy,
  kPareto,
  kExponential,
  kSpiky,
  kSlowVary,
};

// Null density catalog. Every member carries closed-form pdf/cdf/quantile,
// exact tail masses and interval minima, and its Holder data on the support.
class NullDensity {
 public:
  static NullDensity uniform(double a, double b);
  static NullDensity normal();  // standard normal
  static NullDensity beta(double a, double b);
  static NullDensity cauchy(double scale);
  static NullDensity pareto(double a, double k);
  static NullDensity exponential(double lambda);
  static NullDensity spiky(double l0);
  static NullDensity slow_vary(double a);

  Family family() const { return family_; }
  double param1() const { return p1_; }
  double param2() const { return p2_; }

  double pdf(double x) const;
  double cdf(double x) const;
  double quantile(double u) const;  // u in (0,1)
  double sample(Rng& rng) const { return quantile(rng.next_double()); }
  std::vector<double> sample(std::size_t n, Rng& rng) const;

  Interval support() const;
  // Exact probability outside b (b must lie within the support closure).
  double tail_mass(Interval b) const;
  // Exact minimum of the pdf over a compact b within the support closure.
  // All catalog members are monotone or unimodal, so the minimum sits at an
  // endpoint.
  double c0(Interval b) const;
  // Exact maximum of the pdf over b (mode-aware); used as rejection envelope.
  double max_on(Interval b) const;
  double sup_pdf() const;

  // Largest admissible Holder exponent and a valid Holder constant on the
  // support for exponent beta <= holder_beta_max().
  double holder_beta_max() const;
  double holder_constant(double beta) const;

  std::string to_string() const;

 private:
  NullDensity(Family family, double p1, double p2)
      : family_(family), p1_(p1), p2_(p2) {}

  Family family_;
  double p1_;
  double p2_;
};

// Parses CLI density strings: uniform:a,b  normal  beta:a,b  cauchy:a
// pareto:a,k  exp:lambda  spiky:L0  slowvary:A.
NullDensity parse_density(std::string_view spec);

// Perturbed alternative f = f0 + delta * sum_j nu_j w_j where w_j is the
// wave rescaled onto bin j of `partition`. The perturbation has zero mass in
// every bin, lives entirely inside partition.b, and has L1 distance
// c1 * delta * N * sqrt(h) from the base.
struct AlternativeDensity {
  NullDensity base;
  BulkPartition partition;
  double delta = 0.0;
  std::vector<int> signs;  // entries in {-1,+1}, one per bin
  WaveKernel wave;

  double pdf(double x) const;
  // Exact mass of the perturbation waves on [a, b] (via the wave
  // antiderivative), excluding the base.
  double perturbation_mass(double a, double b) const;
  double mass_on(Interval range) const;
  double l1_distance() const;  // c1 * delta * N * sqrt(h), exact
  std::vector<double> sample(std::size_t n, Rng& rng) const;
};

// Largest delta for which the perturbed alternative is guaranteed to be a
// nonnegative density in H(beta, l). The Holder component is rescaled by
// l / wave.holder_constant(beta) because the wave's own Holder constant
// plays the role the construction assigns to l.
struct DeltaMax {
  double value = 0.0;
  double nonneg_bound = 0.0;
  double holder_bound = 0.0;
};
DeltaMax delta_max(const NullDensity& base, const BulkPartition& partition,
                   const WaveKernel& wave, double beta, double l);

// Validates the construction preconditions (l > L0, sign length, delta within
// delta_max) and returns the alternative. Throws std::invalid_argument naming
// the violated bound (nonnegativity vs Holder).
AlternativeDensity make_alternative(const NullDensity& base,
                                    const BulkPartition& partition,
                                    double delta, std::vector<int> signs,
                                    const WaveKernel& wave, double beta,
                                    double l);

// Either a catalog member or a perturbed alternative; the simulation harness
// treats both uniformly.
using AnyDensity = std::variant<NullDensity, AlternativeDensity>;

double pdf(const AnyDensity& d, double x);
std::vector<double> sample(const AnyDensity& d, std::size_t n, Rng& rng);
double mass_on(const AnyDensity& d, Interval range);
double tail_mass(const AnyDensity& d, Interval b);

}  // namespace ldpgof

#endif  // LDPGOF_CORE_DENSITIES_HPP_
