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

#include "ldpgof/densities.hpp"

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace ldpgof {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLog2 = std::numbers::ln2;

const boost::math::normal_distribution<>& std_normal() {
  static const boost::math::normal_distribution<> dist(0.0, 1.0);
  return dist;
}

boost::math::beta_distribution<> beta_dist(double a, double b) {
  return boost::math::beta_distribution<>(a, b);
}

void require(bool cond, const char* message) {
  if (!cond) throw std::invalid_argument(message);
}

double clamp_unit_open(double u) {
  if (u <= 0.0) return std::numeric_limits<double>::min();
  if (u >= 1.0) return std::nextafter(1.0, 0.0);
  return u;
}

}  // namespace

NullDensity NullDensity::uniform(double a, double b) {
  require(a < b, "uniform: requires a < b");
  return NullDensity(Family::kUniform, a, b);
}

NullDensity NullDensity::normal() {
  return NullDensity(Family::kNormal, 0.0, 1.0);
}

NullDensity NullDensity::beta(double a, double b) {
  require(a >= 1.0 && b >= 1.0,
          "beta: shape parameters must satisfy a >= 1 and b >= 1 (otherwise "
          "the density is Holder for no exponent in (0,1])");
  return NullDensity(Family::kBeta, a, b);
}

NullDensity NullDensity::cauchy(double scale) {
  require(scale > 0.0, "cauchy: scale must be positive");
  return NullDensity(Family::kCauchy, scale, 0.0);
}

NullDensity NullDensity::pareto(double a, double k) {
  require(a > 0.0 && k > 0.0, "pareto: requires a > 0 and k > 0");
  return NullDensity(Family::kPareto, a, k);
}

NullDensity NullDensity::exponential(double lambda) {
  require(lambda > 0.0, "exponential: rate must be positive");
  return NullDensity(Family::kExponential, lambda, 0.0);
}

NullDensity NullDensity::spiky(double l0) {
  require(l0 > 0.0, "spiky: L0 must be positive");
  return NullDensity(Family::kSpiky, l0, 0.0);
}

NullDensity NullDensity::slow_vary(double a) {
  require(a > 0.0, "slowvary: A must be positive");
  return NullDensity(Family::kSlowVary, a, 0.0);
}

double NullDensity::pdf(double x) const {
  switch (family_) {
    case Family::kUniform:
      return (x >= p1_ && x <= p2_) ? 1.0 / (p2_ - p1_) : 0.0;
    case Family::kNormal:
      return boost::math::pdf(std_normal(), x);
    case Family::kBeta:
      if (x < 0.0 || x > 1.0) return 0.0;
      return boost::math::pdf(beta_dist(p1_, p2_), x);
    case Family::kCauchy:
      return p1_ / (std::numbers::pi * (x * x + p1_ * p1_));
    case Family::kPareto:
      return x >= p1_ ? p2_ * std::pow(p1_, p2_) / std::pow(x, p2_ + 1.0)
                      : 0.0;
    case Family::kExponential:
      return x >= 0.0 ? p1_ * std::exp(-p1_ * x) : 0.0;
    case Family::kSpiky: {
      const double root = 1.0 / std::sqrt(p1_);
      if (x < 0.0 || x > 2.0 * root) return 0.0;
      return x <= root ? p1_ * x : 2.0 * std::sqrt(p1_) - p1_ * x;
    }
    case Family::kSlowVary: {
      if (x < 0.0) return 0.0;
      const double lg = std::log(x + 2.0);
      return p1_ * std::pow(kLog2, p1_) / ((x + 2.0) * std::pow(lg, p1_ + 1.0));
    }
  }
  return 0.0;
}

double NullDensity::cdf(double x) const {
  switch (family_) {
    case Family::kUniform:
      if (x <= p1_) return 0.0;
      if (x >= p2_) return 1.0;
      return (x - p1_) / (p2_ - p1_);
    case Family::kNormal:
      return boost::math::cdf(std_normal(), x);
    case Family::kBeta:
      if (x <= 0.0) return 0.0;
      if (x >= 1.0) return 1.0;
      return boost::math::cdf(beta_dist(p1_, p2_), x);
    case Family::kCauchy:
      return 0.5 + std::atan(x / p1_) / std::numbers::pi;
    case Family::kPareto:
      return x <= p1_ ? 0.0 : 1.0 - std::pow(p1_ / x, p2_);
    case Family::kExponential:
      return x <= 0.0 ? 0.0 : -std::expm1(-p1_ * x);
    case Family::kSpiky: {
      const double root = 1.0 / std::sqrt(p1_);
      if (x <= 0.0) return 0.0;
      if (x >= 2.0 * root) return 1.0;
      if (x <= root) return 0.5 * p1_ * x * x;
      const double r = 2.0 * root - x;
      return 1.0 - 0.5 * p1_ * r * r;
    }
    case Family::kSlowVary:
      if (x <= 0.0) return 0.0;
      return 1.0 - std::pow(kLog2 / std::log(x + 2.0), p1_);
  }
  return 0.0;
}

double NullDensity::quantile(double u) const {
  u = clamp_unit_open(u);
  switch (family_) {
    case Family::kUniform:
      return p1_ + u * (p2_ - p1_);
    case Family::kNormal:
      return boost::math::quantile(std_normal(), u);
    case Family::kBeta:
      return boost::math::quantile(beta_dist(p1_, p2_), u);
    case Family::kCauchy:
      return p1_ * std::tan(std::numbers::pi * (u - 0.5));
    case Family::kPareto:
      return p1_ * std::pow(1.0 - u, -1.0 / p2_);
    case Family::kExponential:
      return -std::log1p(-u) / p1_;
    case Family::kSpiky: {
      const double root = 1.0 / std::sqrt(p1_);
      if (u <= 0.5) return std::sqrt(2.0 * u / p1_);
      return 2.0 * root - std::sqrt(2.0 * (1.0 - u) / p1_);
    }
    case Family::kSlowVary:
      return std::exp(kLog2 * std::pow(1.0 - u, -1.0 / p1_)) - 2.0;
  }
  return 0.0;
}

std::vector<double> NullDensity::sample(std::size_t n, Rng& rng) const {
  std::vector<double> out(n);
  for (auto& x : out) x = sample(rng);
  return out;
}

Interval NullDensity::support() const {
  switch (family_) {
    case Family::kUniform:
      return {p1_, p2_};
    case Family::kNormal:
    case Family::kCauchy:
      return {-kInf, kInf};
    case Family::kBeta:
      return {0.0, 1.0};
    case Family::kPareto:
      return {p1_, kInf};
    case Family::kExponential:
    case Family::kSlowVary:
      return {0.0, kInf};
    case Family::kSpiky:
      return {0.0, 2.0 / std::sqrt(p1_)};
  }
  return {0.0, 0.0};
}

double NullDensity::tail_mass(Interval b) const {
  if (!(b.lo <= b.hi)) {
    throw std::invalid_argument("tail_mass: malformed interval (lo > hi)");
  }
  const Interval s = support();
  if (b.lo < s.lo || b.hi > s.hi) {
    throw std::invalid_argument(
        "tail_mass: interval must lie within the support closure");
  }
  return 1.0 - (cdf(b.hi) - cdf(b.lo));
}

double NullDensity::c0(Interval b) const {
  if (!(b.lo <= b.hi) || !std::isfinite(b.lo) || !std::isfinite(b.hi)) {
    throw std::invalid_argument("c0: interval must be compact");
  }
  const Interval s = support();
  if (b.lo < s.lo || b.hi > s.hi) {
    throw std::invalid_argument(
        "c0: interval must lie within the support closure");
  }
  // Monotone or unimodal on the support, so the minimum is at an endpoint.
  return std::min(pdf(b.lo), pdf(b.hi));
}

double NullDensity::max_on(Interval b) const {
  double best = std::max(pdf(b.lo), pdf(b.hi));
  double mode = std::numeric_limits<double>::quiet_NaN();
  switch (family_) {
    case Family::kNormal:
    case Family::kCauchy:
      mode = 0.0;
      break;
    case Family::kSpiky:
      mode = 1.0 / std::sqrt(p1_);
      break;
    case Family::kBeta:
      if (p1_ > 1.0 && p2_ > 1.0) mode = (p1_ - 1.0) / (p1_ + p2_ - 2.0);
      break;
    default:
      break;
  }
  if (std::isfinite(mode) && b.contains(mode)) best = std::max(best, pdf(mode));
  return best;
}

double NullDensity::sup_pdf() const {
  switch (family_) {
    case Family::kUniform:
      return 1.0 / (p2_ - p1_);
    case Family::kNormal:
      return boost::math::pdf(std_normal(), 0.0);
    case Family::kBeta:
      return max_on({0.0, 1.0});
    case Family::kCauchy:
      return 1.0 / (std::numbers::pi * p1_);
    case Family::kPareto:
      return p2_ / p1_;
    case Family::kExponential:
      return p1_;
    case Family::kSpiky:
      return std::sqrt(p1_);
    case Family::kSlowVary:
      return p1_ / (2.0 * kLog2);
  }
  return 0.0;
}

double NullDensity::holder_beta_max() const {
  if (family_ == Family::kBeta) {
    double m = 1.0;
    if (p1_ > 1.0) m = std::min(m, p1_ - 1.0);
    if (p2_ > 1.0) m = std::min(m, p2_ - 1.0);
    return m;
  }
  return 1.0;
}

double NullDensity::holder_constant(double beta) const {
  require(beta > 0.0 && beta <= holder_beta_max(),
          "holder_constant: beta outside the admissible range of this family");
  // For C^1 members: |f(x)-f(y)| <= min(M |x-y|, R) with M the derivative
  // bound and R the oscillation, hence a valid constant is M^beta R^(1-beta).
  double deriv_bound = 0.0;
  double oscillation = 0.0;
  switch (family_) {
    case Family::kUniform:
      return 0.0;  // constant on its support
    case Family::kBeta: {
      // Direct bound from |x^p - y^p| <= max(1,p) |x-y|^min(p,1) on [0,1].
      const double bfun = boost::math::beta(p1_, p2_);
      double num = 0.0;
      if (p1_ > 1.0) num += std::max(1.0, p1_ - 1.0);
      if (p2_ > 1.0) num += std::max(1.0, p2_ - 1.0);
      return num / bfun;
    }
    case Family::kNormal:
      deriv_bound = boost::math::pdf(std_normal(), 1.0);
      oscillation = boost::math::pdf(std_normal(), 0.0);
      break;
    case Family::kCauchy:
      deriv_bound =
          9.0 / (8.0 * std::sqrt(3.0) * std::numbers::pi * p1_ * p1_);
      oscillation = 1.0 / (std::numbers::pi * p1_);
      break;
    case Family::kPareto:
      deriv_bound = p2_ * (p2_ + 1.0) / (p1_ * p1_);
      oscillation = p2_ / p1_;
      break;
    case Family::kExponential:
      deriv_bound = p1_ * p1_;
      oscillation = p1_;
      break;
    case Family::kSpiky:
      deriv_bound = p1_;
      oscillation = std::sqrt(p1_);
      break;
    case Family::kSlowVary:
      deriv_bound = p1_ * (kLog2 + p1_ + 1.0) / (4.0 * kLog2 * kLog2);
      oscillation = p1_ / (2.0 * kLog2);
      break;
    default:
      break;
  }
  return std::pow(deriv_bound, beta) * std::pow(oscillation, 1.0 - beta);
}

std::string NullDensity::to_string() const {
  std::ostringstream os;
  switch (family_) {
    case Family::kUniform:
      os << "uniform:" << p1_ << "," << p2_;
      break;
    case Family::kNormal:
      os << "normal";
      break;
    case Family::kBeta:
      os << "beta:" << p1_ << "," << p2_;
      break;
    case Family::kCauchy:
      os << "cauchy:" << p1_;
      break;
    case Family::kPareto:
      os << "pareto:" << p1_ << "," << p2_;
      break;
    case Family::kExponential:
      os << "exp:" << p1_;
      break;
    case Family::kSpiky:
      os << "spiky:" << p1_;
      break;
    case Family::kSlowVary:
      os << "slowvary:" << p1_;
      break;
  }
  return os.str();
}

NullDensity parse_density(std::string_view spec) {
  const auto colon = spec.find(':');
  const std::string name(spec.substr(0, colon));
  std::vector<double> params;
  if (colon != std::string_view::npos) {
    std::string rest(spec.substr(colon + 1));
    std::istringstream is(rest);
    std::string token;
    while (std::getline(is, token, ',')) {
      std::size_t pos = 0;
      double value = 0.0;
      try {
        value = std::stod(token, &pos);
      } catch (const std::exception&) {
        throw std::invalid_argument("density spec '" + std::string(spec) +
                                    "': parameter '" + token +
                                    "' is not a number");
      }
      if (pos != token.size()) {
        throw std::invalid_argument("density spec '" + std::string(spec) +
                                    "': parameter '" + token +
                                    "' is not a number");
      }
      params.push_back(value);
    }
  }
  auto arity = [&](std::size_t want) {
    if (params.size() != want) {
      throw std::invalid_argument("density spec '" + std::string(spec) +
                                  "': expected " + std::to_string(want) +
                                  " parameter(s)");
    }
  };
  if (name == "uniform") {
    arity(2);
    return NullDensity::uniform(params[0], params[1]);
  }
  if (name == "normal") {
    arity(0);
    return NullDensity::normal();
  }
  if (name == "beta") {
    arity(2);
    return NullDensity::beta(params[0], params[1]);
  }
  if (name == "cauchy") {
    arity(1);
    return NullDensity::cauchy(params[0]);
  }
  if (name == "pareto") {
    arity(2);
    return NullDensity::pareto(params[0], params[1]);
  }
  if (name == "exp") {
    arity(1);
    return NullDensity::exponential(params[0]);
  }
  if (name == "spiky") {
    arity(1);
    return NullDensity::spiky(params[0]);
  }
  if (name == "slowvary") {
    arity(1);
    return NullDensity::slow_vary(params[0]);
  }
  throw std::invalid_argument(
      "unknown density '" + name +
      "'; expected uniform:a,b normal beta:a,b cauchy:a pareto:a,k "
      "exp:lambda spiky:L0 slowvary:A");
}

double AlternativeDensity::pdf(double x) const {
  double value = base.pdf(x);
  const int j = partition.bin_index(x);
  if (j >= 0 && delta != 0.0) {
    const double h = partition.h;
    value += delta * signs[static_cast<std::size_t>(j)] *
             wave.eval((x - partition.centers[static_cast<std::size_t>(j)]) / h) /
             std::sqrt(h);
  }
  return value;
}

double AlternativeDensity::perturbation_mass(double a, double b) const {
  if (delta == 0.0 || b <= a) return 0.0;
  const double h = partition.h;
  const double sqrt_h = std::sqrt(h);
  double total = 0.0;
  for (int j = 0; j < partition.n_bins; ++j) {
    const double c = partition.centers[static_cast<std::size_t>(j)];
    const double lo = std::max(a, c - h);
    const double hi = std::min(b, c + h);
    if (hi <= lo) continue;
    total += delta * signs[static_cast<std::size_t>(j)] * sqrt_h *
             (wave.antiderivative((hi - c) / h) -
              wave.antiderivative((lo - c) / h));
  }
  return total;
}

double AlternativeDensity::mass_on(Interval range) const {
  return base.cdf(range.hi) - base.cdf(range.lo) +
         perturbation_mass(range.lo, range.hi);
}

double AlternativeDensity::l1_distance() const {
  return wave.c1 * delta * partition.n_bins * std::sqrt(partition.h);
}

std::vector<double> AlternativeDensity::sample(std::size_t n, Rng& rng) const {
  const Interval bulk = partition.b;
  // The perturbation has zero mass on every bin, so the bulk mass equals the
  // base bulk mass exactly and the tail law is the base law.
  const double mass_left = base.cdf(bulk.lo);
  const double mass_right = 1.0 - base.cdf(bulk.hi);
  const double bulk_mass = 1.0 - mass_left - mass_right;
  const double envelope =
      base.max_on(bulk) + delta * wave.sup_norm / std::sqrt(partition.h);
  std::vector<double> out(n);
  for (auto& x : out) {
    if (rng.next_double() < bulk_mass) {
      long rejections = 0;
      for (;;) {
        const double y = bulk.lo + rng.next_double() * bulk.length();
        if (rng.next_double() * envelope < pdf(y)) {
          x = y;
          break;
        }
        if (++rejections >= 1000000) {
          throw std::runtime_error(
              "AlternativeDensity::sample: 1e6 consecutive rejections; "
              "the alternative is malformed");
        }
      }
    } else {
      const double w = rng.next_double() * (mass_left + mass_right);
      const double u =
          w < mass_left ? w : base.cdf(bulk.hi) + (w - mass_left);
      x = base.quantile(u);
    }
  }
  return out;
}

DeltaMax delta_max(const NullDensity& base, const BulkPartition& partition,
                   const WaveKernel& wave, double beta, double l) {
  const double l0 = base.holder_constant(beta);
  require(l > l0,
          "delta_max: alternative Holder bound l must exceed the base "
          "constant L0");
  const double h = partition.h;
  const double sqrt_h = std::sqrt(h);
  DeltaMax dm;
  dm.nonneg_bound = sqrt_h * base.c0(partition.b) / wave.sup_norm;
  dm.holder_bound = sqrt_h * 0.5 * (1.0 - l0 / l) * std::pow(h, beta) *
                    (l / wave.holder_constant(beta));
  dm.value = std::min(dm.nonneg_bound, dm.holder_bound);
  return dm;
}

AlternativeDensity make_alternative(const NullDensity& base,
                                    const BulkPartition& partition,
                                    double delta, std::vector<int> signs,
                                    const WaveKernel& wave, double beta,
                                    double l) {
  require(delta >= 0.0, "make_alternative: delta must be nonnegative");
  if (signs.size() != static_cast<std::size_t>(partition.n_bins)) {
    throw std::invalid_argument(
        "make_alternative: signs length must equal the bin count");
  }
  for (int s : signs) {
    if (s != 1 && s != -1) {
      throw std::invalid_argument("make_alternative: signs must be +1 or -1");
    }
  }
  const DeltaMax dm = delta_max(base, partition, wave, beta, l);
  if (delta > dm.value * (1.0 + 1e-12)) {
    const bool nonneg_binds = dm.nonneg_bound <= dm.holder_bound;
    std::ostringstream os;
    os << "make_alternative: delta " << delta << " exceeds the "
       << (nonneg_binds ? "nonnegativity" : "Holder") << " bound "
       << dm.value;
    throw std::invalid_argument(os.str());
  }
  return AlternativeDensity{base, partition, delta, std::move(signs), wave};
}

double pdf(const AnyDensity& d, double x) {
  return std::visit([x](const auto& density) { return density.pdf(x); }, d);
}

std::vector<double> sample(const AnyDensity& d, std::size_t n, Rng& rng) {
  return std::visit(
      [n, &rng](const auto& density) { return density.sample(n, rng); }, d);
}

double mass_on(const AnyDensity& d, Interval range) {
  if (const auto* alt = std::get_if<AlternativeDensity>(&d)) {
    return alt->mass_on(range);
  }
  const auto& null = std::get<NullDensity>(d);
  return null.cdf(range.hi) - null.cdf(range.lo);
}

double tail_mass(const AnyDensity& d, Interval b) {
  if (const auto* alt = std::get_if<AlternativeDensity>(&d)) {
    return 1.0 - alt->mass_on(b);
  }
  return std::get<NullDensity>(d).tail_mass(b);
}

}  // namespace ldpgof
