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

#include <algorithm>
#include <atomic>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace ldpgof {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require(bool cond, const char* message) {
  if (!cond) throw std::invalid_argument(message);
}

std::vector<int> build_signs(const AltSpec& alt, int n_bins,
                             uint64_t master_seed) {
  std::vector<int> signs(static_cast<std::size_t>(n_bins), 1);
  switch (alt.pattern) {
    case SignPattern::kAlternating:
      for (int j = 0; j < n_bins; ++j) {
        signs[static_cast<std::size_t>(j)] = (j % 2 == 0) ? 1 : -1;
      }
      break;
    case SignPattern::kConstant:
      break;
    case SignPattern::kSeeded: {
      Rng rng = Rng::derive(master_seed, streams::kSigns, alt.sign_seed);
      for (auto& s : signs) s = rng.next_bernoulli(0.5) ? 1 : -1;
      break;
    }
    case SignPattern::kExplicit:
      require(alt.explicit_signs.size() == static_cast<std::size_t>(n_bins),
              "alternative: explicit sign pattern length must equal the "
              "wave bin count");
      signs = alt.explicit_signs;
      break;
  }
  return signs;
}

// Stream tags salted by the per-phase sample size so different grid points
// never consume the same raw uniform sequence.
uint64_t null_stream(const TestConfig& config) {
  return streams::kNullArm + static_cast<uint64_t>(config.n);
}
uint64_t alt_stream(const TestConfig& config) {
  return streams::kAltArm + static_cast<uint64_t>(config.n);
}
uint64_t calibration_stream(const TestConfig& config) {
  return streams::kCalibration + static_cast<uint64_t>(config.n);
}

struct TrialStats {
  double main = 0.0;
  double tail = 0.0;
};

TrialStats run_trial_stats(const Experiment& e, const AnyDensity& density,
                           Rng& rng,
                           std::vector<PrivatizedBatch>* transcript = nullptr) {
  const std::size_t n = static_cast<std::size_t>(e.spec.config.n);
  auto keep = [&](PrivatizedBatch&& batch) -> PrivatizedBatch {
    if (transcript == nullptr) return std::move(batch);
    transcript->push_back(std::move(batch));
    return transcript->back();
  };
  TrialStats stats;
  if (e.spec.config.mechanism == Mechanism::kNonInteractive) {
    auto x1 = sample(density, n, rng);
    const auto score_batch = keep(
        ni_kernel_privatize(std::move(x1), e.part, e.kernel, e.params, rng));
    stats.main = stat_s(score_batch, e.f0_at_centers);
    auto x2 = sample(density, n, rng);
    const auto tail_batch =
        keep(rr_tail_privatize(std::move(x2), e.part, e.params, rng));
    stats.tail = stat_t(tail_batch, e.tail0);
  } else {
    auto x1 = sample(density, n, rng);
    const auto round1 =
        keep(int_bin_privatize(std::move(x1), e.part, e.params, rng));
    const auto phat = estimate_phat(round1);
    auto x2 = sample(density, n, rng);
    const auto round2 = keep(
        int_second_round(std::move(x2), e.part, phat, e.p0, e.params, rng));
    stats.main = stat_d(round2, phat, e.p0, e.params.tau);
    auto x3 = sample(density, n, rng);
    const auto tail_batch =
        keep(rr_tail_privatize(std::move(x3), e.part, e.params, rng));
    stats.tail = stat_t(tail_batch, e.tail0);
  }
  return stats;
}

Thresholds calibrate_thresholds(const Experiment& e, int reps) {
  require(reps >= 100, "calibration: needs at least 100 null replications");
  const double level = 1.0 - e.spec.config.gamma / 4.0;
  std::vector<double> mains(static_cast<std::size_t>(reps));
  std::vector<double> tails(static_cast<std::size_t>(reps));
  const AnyDensity density{e.null};
  const uint64_t stream = calibration_stream(e.spec.config);
  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
    Rng rng = Rng::derive(e.spec.master_seed, stream, r);
    const TrialStats stats = run_trial_stats(e, density, rng);
    mains[r] = stats.main;
    tails[r] = stats.tail;
  });
  // Each statistic is calibrated at level gamma/4 so the union keeps the
  // null rejection probability at gamma/2, mirroring the split used by the
  // closed-form thresholds.
  const auto quantile_at = [&](std::vector<double>& xs) {
    const std::size_t rank = static_cast<std::size_t>(std::min<double>(
        static_cast<double>(reps) - 1.0,
        std::ceil(level * static_cast<double>(reps)) - 1.0));
    std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(rank),
                     xs.end());
    return xs[rank];
  };
  Thresholds t;
  t.t1 = quantile_at(mains);
  t.t2 = quantile_at(tails);
  return t;
}

AlternativeDensity build_alternative(const Experiment& e, double delta) {
  BulkPartition alt_part;
  if (e.spec.alt_align == AltAlignment::kBins) {
    alt_part = e.part;
  } else {
    require(e.part.n_bins >= 2,
            "alternative: edge alignment needs at least two test bins");
    const Interval inner{e.part.b.lo + e.part.h, e.part.b.hi - e.part.h};
    alt_part = make_partition(inner, e.part.h);
  }
  const auto signs =
      build_signs(e.spec.alt, alt_part.n_bins, e.spec.master_seed);
  return make_alternative(e.null, alt_part, delta, signs, e.wave,
                          e.spec.config.beta, e.spec.config.l);
}

WilsonInterval count_rejections(const Experiment& e, const AnyDensity& density,
                                uint64_t stream, int reps, bool count_accepts) {
  std::vector<uint8_t> rejected(static_cast<std::size_t>(reps), 0);
  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
    Rng rng = Rng::derive(e.spec.master_seed, stream, r);
    const TrialStats stats = run_trial_stats(e, density, rng);
    const TestOutcome outcome = decide(e.spec.config.mechanism, stats.main,
                                       stats.tail, e.thresholds);
    rejected[r] = outcome.reject ? 1 : 0;
  });
  int count = 0;
  for (uint8_t r : rejected) count += count_accepts ? (r == 0) : (r != 0);
  return wilson(count, reps);
}

}  // namespace

Experiment prepare(const ExperimentSpec& spec) {
  spec.config.validate();
  require(spec.reps >= 1, "experiment: reps must be at least 1");
  Experiment e;
  e.spec = spec;
  e.null = parse_density(spec.null_spec);
  e.kernel = boxcar();
  e.wave = sine_wave();

  Interval bulk;
  switch (spec.bulk.mode) {
    case BulkChoice::Mode::kAuto:
      bulk = bulk_set(e.null, spec.config);
      break;
    case BulkChoice::Mode::kFull: {
      bulk = e.null.support();
      require(std::isfinite(bulk.lo) && std::isfinite(bulk.hi),
              "bulk full: requires a compactly supported null");
      break;
    }
    case BulkChoice::Mode::kExplicit:
      bulk = spec.bulk.interval;
      bulk.require_nonempty("bulk interval");
      break;
  }
  const double h_target = bandwidth(spec.config, bulk, spec.c_h);
  e.part = make_partition(bulk, h_target);
  e.params = spec.config.mechanism == Mechanism::kInteractive
                 ? PrivacyParams::interactive(spec.config.alpha, spec.config.n)
                 : PrivacyParams::non_interactive(spec.config.alpha);
  e.f0_at_centers.resize(e.part.centers.size());
  for (std::size_t j = 0; j < e.part.centers.size(); ++j) {
    e.f0_at_centers[j] = e.null.pdf(e.part.centers[j]);
  }
  e.p0.resize(static_cast<std::size_t>(e.part.n_bins));
  for (int j = 0; j < e.part.n_bins; ++j) {
    const Interval bin = e.part.bin(j);
    e.p0[static_cast<std::size_t>(j)] = e.null.cdf(bin.hi) - e.null.cdf(bin.lo);
  }
  e.tail0 = e.null.tail_mass(e.part.b);

  if (spec.config.mechanism == Mechanism::kNonInteractive) {
    e.thresholds = thresholds_ni(spec.config, e.part, e.kernel,
                                 e.null.holder_constant(spec.config.beta));
  } else {
    e.thresholds = thresholds_int(spec.config);
  }
  if (spec.threshold_mode == ThresholdMode::kCalibrated) {
    e.thresholds = calibrate_thresholds(e, spec.calibration_reps);
  }
  if (!spec.alt.is_null) {
    e.alternative = build_alternative(e, spec.alt.delta);
  }
  return e;
}

TestOutcome run_trial(const Experiment& experiment, Arm arm,
                      uint64_t trial_index) {
  const auto& config = experiment.spec.config;
  AnyDensity density{experiment.null};
  uint64_t stream = null_stream(config);
  if (arm == Arm::kAlt) {
    require(experiment.alternative.has_value(),
            "run_trial: experiment has no alternative arm");
    density = *experiment.alternative;
    stream = alt_stream(config);
  }
  Rng rng = Rng::derive(experiment.spec.master_seed, stream, trial_index);
  const TrialStats stats = run_trial_stats(experiment, density, rng);
  return decide(config.mechanism, stats.main, stats.tail,
                experiment.thresholds);
}

TestOutcome run_trial(const ExperimentSpec& spec, uint64_t trial_index) {
  const Experiment experiment = prepare(spec);
  return run_trial(experiment, spec.alt.is_null ? Arm::kNull : Arm::kAlt,
                   trial_index);
}

TrialTranscript run_trial_transcript(const Experiment& experiment, Arm arm,
                                     uint64_t trial_index) {
  const auto& config = experiment.spec.config;
  AnyDensity density{experiment.null};
  uint64_t stream = null_stream(config);
  if (arm == Arm::kAlt) {
    require(experiment.alternative.has_value(),
            "run_trial_transcript: experiment has no alternative arm");
    density = *experiment.alternative;
    stream = alt_stream(config);
  }
  Rng rng = Rng::derive(experiment.spec.master_seed, stream, trial_index);
  TrialTranscript transcript;
  const TrialStats stats =
      run_trial_stats(experiment, density, rng, &transcript.batches);
  transcript.outcome = decide(config.mechanism, stats.main, stats.tail,
                              experiment.thresholds);
  return transcript;
}

WilsonInterval wilson(int successes, int trials) {
  require(trials >= 1, "wilson: needs at least one trial");
  require(successes >= 0 && successes <= trials,
          "wilson: successes out of range");
  static const double z = boost::math::quantile(
      boost::math::normal_distribution<>(0.0, 1.0), 0.975);
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {p, center - half, center + half};
}

RiskEstimate estimate_risk(const ExperimentSpec& spec) {
  return estimate_risk(prepare(spec));
}

RiskEstimate estimate_risk(const Experiment& experiment) {
  const auto& spec = experiment.spec;
  require(spec.reps >= 100,
          "estimate_risk: needs reps >= 100 for interval validity");
  RiskEstimate estimate;
  estimate.reps = spec.reps;
  estimate.type1 =
      count_rejections(experiment, AnyDensity{experiment.null},
                       null_stream(spec.config), spec.reps, false);
  if (experiment.alternative.has_value()) {
    estimate.type2_applicable = true;
    estimate.type2 =
        count_rejections(experiment, AnyDensity{*experiment.alternative},
                         alt_stream(spec.config), spec.reps, true);
    estimate.risk = estimate.type1.rate + estimate.type2.rate;
  } else {
    estimate.type2 = {kNaN, kNaN, kNaN};
    estimate.risk = kNaN;
  }
  return estimate;
}

RadiusResult estimate_radius(const ExperimentSpec& spec_template,
                             double target_gamma) {
  require(target_gamma > 0.0 && target_gamma < 1.0,
          "estimate_radius: target risk must lie in (0,1)");
  ExperimentSpec spec = spec_template;
  spec.alt.is_null = false;
  spec.alt.delta = 0.0;
  Experiment experiment = prepare(spec);
  const AlternativeDensity& probe = *experiment.alternative;
  const DeltaMax dm =
      delta_max(experiment.null, probe.partition, experiment.wave,
                spec.config.beta, spec.config.l);
  const double rho_scale = experiment.wave.c1 * probe.partition.n_bins *
                           std::sqrt(probe.partition.h);

  RadiusResult result;
  const WilsonInterval type1 =
      count_rejections(experiment, AnyDensity{experiment.null},
                       null_stream(spec.config), spec.reps, false);
  result.type1 = type1.rate;

  struct Eval {
    double delta;
    double risk;
    double lo;
    double hi;
  };
  std::vector<Eval> evals;
  auto risk_at = [&](double delta) {
    const AnyDensity alt{build_alternative(experiment, delta)};
    const WilsonInterval type2 = count_rejections(
        experiment, alt, alt_stream(spec.config), spec.reps, true);
    ++result.risk_evaluations;
    Eval eval{delta, type1.rate + type2.rate, type1.lo + type2.lo,
              type1.hi + type2.hi};
    evals.push_back(eval);
    // Power must not decrease in delta: flag brackets whose risk intervals
    // are inverted with statistical significance.
    std::sort(evals.begin(), evals.end(),
              [](const Eval& a, const Eval& b) { return a.delta < b.delta; });
    for (std::size_t i = 0; i + 1 < evals.size(); ++i) {
      if (evals[i].hi < evals[i + 1].lo) result.inconclusive = true;
    }
    return eval;
  };

  const Eval at_max = risk_at(dm.value);
  if (at_max.risk > target_gamma) {
    result.censored = true;
    result.delta_star = dm.value;
    result.rho = rho_scale * dm.value;
    return result;
  }
  double lo = 0.0;
  double hi = dm.value;
  double star = dm.value;
  for (int iter = 0; iter < 20 && !result.inconclusive; ++iter) {
    if (hi - lo <= 0.05 * hi) {
      star = hi;
      break;
    }
    const double mid = 0.5 * (lo + hi);
    const Eval eval = risk_at(mid);
    if (eval.lo <= target_gamma && target_gamma <= eval.hi) {
      star = mid;
      break;
    }
    if (eval.risk > target_gamma) {
      lo = mid;
      star = hi;
    } else {
      hi = mid;
      star = hi;
    }
  }
  result.delta_star = star;
  result.rho = rho_scale * star;
  return result;
}

RateFit fit_rate(const std::vector<RatePoint>& points,
                 double theoretical_exponent) {
  RateFit fit;
  fit.points = points;
  fit.theoretical_exponent = theoretical_exponent;
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& p : points) {
    if (p.censored) continue;
    xs.push_back(std::log(p.n_alpha2));
    ys.push_back(std::log(p.rho_hat));
  }
  fit.used_points = static_cast<int>(xs.size());
  if (fit.used_points < 4) {
    throw std::runtime_error(
        "fit_rate: fewer than 4 uncensored grid points; cannot fit a slope");
  }
  const double m = static_cast<double>(xs.size());
  double x_bar = 0.0;
  double y_bar = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    x_bar += xs[i];
    y_bar += ys[i];
  }
  x_bar /= m;
  y_bar /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - x_bar) * (xs[i] - x_bar);
    sxy += (xs[i] - x_bar) * (ys[i] - y_bar);
  }
  fit.slope = sxy / sxx;
  fit.intercept = y_bar - fit.slope * x_bar;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double resid = ys[i] - fit.intercept - fit.slope * xs[i];
    rss += resid * resid;
  }
  fit.slope_se = xs.size() > 2
                     ? std::sqrt(rss / ((m - 2.0) * sxx))
                     : 0.0;
  return fit;
}

std::vector<RatePoint> run_rate_grid(const ExperimentSpec& spec_template,
                                     const std::vector<int>& n_grid,
                                     double target_gamma) {
  std::vector<RatePoint> points;
  points.reserve(n_grid.size());
  for (int n : n_grid) {
    ExperimentSpec spec = spec_template;
    spec.config.n = n;
    RatePoint point;
    point.n = n;
    point.alpha = spec.config.alpha;
    point.n_alpha2 = spec.config.n_alpha2();
    try {
      const RadiusResult radius = estimate_radius(spec, target_gamma);
      if (radius.inconclusive) {
        throw std::runtime_error(
            "rate grid: non-monotone risk at n=" + std::to_string(n));
      }
      point.rho_hat = radius.rho;
      point.censored = radius.censored;
    } catch (const std::invalid_argument&) {
      // Alternative not constructible at this resolution (single bin).
      point.rho_hat = kNaN;
      point.censored = true;
    }
    points.push_back(point);
  }
  return points;
}

int worker_count() {
  if (const char* env = std::getenv("LDPGOF_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed >= 1) return parsed;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t count,
                  const std::function<void(std::size_t)>& fn) {
  const int workers = std::min<int>(worker_count(),
                                    static_cast<int>(std::max<std::size_t>(
                                        count, 1)));
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) break;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string mechanism_name(Mechanism mechanism) {
  return mechanism == Mechanism::kNonInteractive ? "ni" : "interactive";
}

std::string risk_csv(const ExperimentSpec& spec, const Experiment& experiment,
                     const RiskEstimate& estimate) {
  std::ostringstream os;
  os << "mechanism,null,n,alpha,gamma,delta,l1_distance,type1,type1_lo,"
        "type1_hi,type2,type2_lo,type2_hi,reps,seed\n";
  const double l1 = experiment.alternative.has_value()
                        ? experiment.alternative->l1_distance()
                        : 0.0;
  os << mechanism_name(spec.config.mechanism) << ',' << spec.null_spec << ','
     << spec.config.n << ',' << format_double(spec.config.alpha) << ','
     << format_double(spec.config.gamma) << ','
     << format_double(spec.alt.is_null ? 0.0 : spec.alt.delta) << ','
     << format_double(l1) << ',' << format_double(estimate.type1.rate) << ','
     << format_double(estimate.type1.lo) << ','
     << format_double(estimate.type1.hi) << ','
     << format_double(estimate.type2.rate) << ','
     << format_double(estimate.type2.lo) << ','
     << format_double(estimate.type2.hi) << ',' << estimate.reps << ','
     << spec.master_seed << '\n';
  return os.str();
}

std::string rates_csv(const std::vector<RatePoint>& points) {
  std::ostringstream os;
  os << "n,alpha,n_alpha2,rho_hat,censored\n";
  for (const auto& p : points) {
    os << p.n << ',' << format_double(p.alpha) << ','
       << format_double(p.n_alpha2) << ',' << format_double(p.rho_hat) << ','
       << (p.censored ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string rate_fit_json(const RateFit& fit) {
  nlohmann::ordered_json j;
  j["slope"] = fit.slope;
  j["slope_se"] = fit.slope_se;
  j["intercept"] = fit.intercept;
  j["theoretical_exponent"] = fit.theoretical_exponent;
  j["abs_deviation"] = std::abs(fit.slope - fit.theoretical_exponent);
  j["used_points"] = fit.used_points;
  j["points"] = nlohmann::ordered_json::array();
  for (const auto& p : fit.points) {
    nlohmann::ordered_json point;
    point["n"] = p.n;
    point["alpha"] = p.alpha;
    point["n_alpha2"] = p.n_alpha2;
    point["rho_hat"] = p.rho_hat;
    point["censored"] = p.censored;
    j["points"].push_back(point);
  }
  return j.dump(2);
}

}  // namespace ldpgof
