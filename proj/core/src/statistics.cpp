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

#include "ldpgof/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "ldpgof/quadrature.hpp"

namespace ldpgof {

namespace {

void require(bool cond, const char* message) {
  if (!cond) throw std::invalid_argument(message);
}

struct SampleMoments {
  double mean = 0.0;
  double mean_se = 0.0;
  double var = 0.0;
  double var_se = 0.0;
};

SampleMoments summarize(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  SampleMoments m;
  if (n < 2) return m;
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(n);
  double m2 = 0.0;
  double m4 = 0.0;
  for (double x : xs) {
    const double d = x - m.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  const double nd = static_cast<double>(n);
  m.var = m2 / (nd - 1.0);
  m4 /= nd;
  m.mean_se = std::sqrt(m.var / nd);
  const double inner = m4 - m.var * m.var * (nd - 3.0) / (nd - 1.0);
  m.var_se = std::sqrt(std::max(0.0, inner) / nd);
  return m;
}

MomentCheck two_sided_check(const std::string& name, double value,
                            double reference, double margin) {
  MomentCheck check{name, value, reference, margin, true, false};
  check.pass = std::abs(value - reference) <= margin;
  return check;
}

MomentCheck one_sided_check(const std::string& name, double value,
                            double reference, double margin) {
  MomentCheck check{name, value, reference, margin, false, false};
  check.pass = value <= reference + margin;
  return check;
}

bool finalize(MomentReport& report) {
  report.all_pass = std::all_of(report.checks.begin(), report.checks.end(),
                                [](const MomentCheck& c) { return c.pass; });
  return report.all_pass;
}

std::vector<double> f0_at_centers(const NullDensity& f0,
                                  const BulkPartition& part) {
  std::vector<double> values(part.centers.size());
  for (std::size_t j = 0; j < values.size(); ++j) {
    values[j] = f0.pdf(part.centers[j]);
  }
  return values;
}

std::vector<double> null_bin_masses(const NullDensity& f0,
                                    const BulkPartition& part) {
  std::vector<double> p0(static_cast<std::size_t>(part.n_bins));
  for (int j = 0; j < part.n_bins; ++j) {
    const Interval bin = part.bin(j);
    p0[static_cast<std::size_t>(j)] = f0.cdf(bin.hi) - f0.cdf(bin.lo);
  }
  return p0;
}

}  // namespace

double stat_s(const PrivatizedBatch& batch,
              std::span<const double> f0_at_centers) {
  require(batch.kind == BatchKind::kKernelMatrix,
          "stat_s: batch kind must be KERNEL_MATRIX");
  require(batch.rows >= 2, "stat_s: needs at least two individuals");
  require(f0_at_centers.size() == batch.cols,
          "stat_s: f0_at_centers must have one entry per bin");
  const std::size_t cols = batch.cols;
  std::vector<double> sum(cols, 0.0);
  std::vector<double> sum_sq(cols, 0.0);
  for (std::size_t i = 0; i < batch.rows; ++i) {
    const double* row = batch.values.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) {
      const double a = row[j] - f0_at_centers[j];
      sum[j] += a;
      sum_sq[j] += a * a;
    }
  }
  double total = 0.0;
  for (std::size_t j = 0; j < cols; ++j) {
    total += sum[j] * sum[j] - sum_sq[j];
  }
  const double n = static_cast<double>(batch.rows);
  return total / (n * (n - 1.0));
}

double stat_t(const PrivatizedBatch& batch, double tail0) {
  require(batch.kind == BatchKind::kTailBits,
          "stat_t: batch kind must be TAIL_BITS");
  require(batch.rows >= 1, "stat_t: empty batch");
  double sum = 0.0;
  for (double v : batch.values) sum += v;
  return sum / static_cast<double>(batch.rows) - tail0;
}

double stat_d(const PrivatizedBatch& batch, std::span<const double> phat,
              std::span<const double> p0, double tau) {
  require(batch.kind == BatchKind::kClippedBits,
          "stat_d: batch kind must be CLIPPED_BITS");
  require(batch.rows >= 1, "stat_d: empty batch");
  require(phat.size() == p0.size(), "stat_d: phat/p0 length mismatch");
  double sum = 0.0;
  for (double v : batch.values) sum += v;
  double correction = 0.0;
  for (std::size_t j = 0; j < phat.size(); ++j) {
    correction += p0[j] * clip(phat[j] - p0[j], tau);
  }
  return sum / static_cast<double>(batch.rows) - correction;
}

Thresholds thresholds_ni(const TestConfig& config, const BulkPartition& part,
                         const SmoothingKernel& kernel, double l0) {
  config.validate();
  const double na2 = config.n_alpha2();
  const double cb = kernel.c_beta(config.beta);
  const double h = part.h;
  const double n_bins = static_cast<double>(part.n_bins);
  Thresholds t;
  t.t1 = 1.5 * l0 * l0 * cb * cb * n_bins * std::pow(h, 2.0 * config.beta) +
         196.0 * kernel.sup_norm * kernel.sup_norm * std::sqrt(n_bins) /
             (config.gamma * na2 * h * h);
  t.t2 = std::sqrt(20.0 / (na2 * config.gamma));
  return t;
}

Thresholds thresholds_int(const TestConfig& config) {
  config.validate();
  const double na2 = config.n_alpha2();
  Thresholds t;
  t.t1 = 2.0 * std::sqrt(5.0) / (na2 * std::sqrt(config.gamma));
  t.t2 = std::sqrt(20.0 / (na2 * config.gamma));
  return t;
}

TestOutcome decide(Mechanism mechanism, double stat_main, double stat_tail,
                   const Thresholds& thresholds) {
  TestOutcome outcome;
  outcome.mechanism = mechanism;
  outcome.stat_main = stat_main;
  outcome.stat_tail = stat_tail;
  outcome.t1 = thresholds.t1;
  outcome.t2 = thresholds.t2;
  outcome.reject = stat_main >= thresholds.t1 || stat_tail >= thresholds.t2;
  return outcome;
}

double smoothed_density_at(const AnyDensity& f, const SmoothingKernel& kernel,
                           const BulkPartition& part, int j) {
  const double c = part.centers[static_cast<std::size_t>(j)];
  const double h = part.h;
  const double lo = c - h;
  const double hi = c + h;
  // Split the window at pdf kinks: perturbation-bin edges and finite support
  // endpoints, so every quadrature piece is smooth.
  std::vector<double> cuts = {lo, hi};
  auto add_cut = [&](double x) {
    if (x > lo && x < hi) cuts.push_back(x);
  };
  if (const auto* alt = std::get_if<AlternativeDensity>(&f)) {
    for (int k = 0; k <= alt->partition.n_bins; ++k) {
      add_cut(alt->partition.b.lo + 2.0 * k * alt->partition.h);
    }
    for (int k = 0; k < alt->partition.n_bins; ++k) {
      add_cut(alt->partition.centers[static_cast<std::size_t>(k)]);
    }
    const Interval s = alt->base.support();
    if (std::isfinite(s.lo)) add_cut(s.lo);
    if (std::isfinite(s.hi)) add_cut(s.hi);
  } else {
    const Interval s = std::get<NullDensity>(f).support();
    if (std::isfinite(s.lo)) add_cut(s.lo);
    if (std::isfinite(s.hi)) add_cut(s.hi);
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    total += integrate(
        [&](double y) { return scaled_eval(kernel, h, c - y) * pdf(f, y); },
        cuts[k], cuts[k + 1], 1e-11);
  }
  return total;
}

double clipped_discrepancy(const AnyDensity& f, const NullDensity& f0,
                           const BulkPartition& part, double tau) {
  require(tau > 0.0, "clipped_discrepancy: tau must be positive");
  double total = 0.0;
  for (int j = 0; j < part.n_bins; ++j) {
    const Interval bin = part.bin(j);
    const double diff =
        std::abs(mass_on(f, bin) - (f0.cdf(bin.hi) - f0.cdf(bin.lo)));
    total += diff * std::min(diff, tau);
  }
  return total;
}

MomentReport moment_oracle_s(const AnyDensity& f, const NullDensity& f0,
                             const BulkPartition& part,
                             const SmoothingKernel& kernel,
                             const TestConfig& config,
                             const MomentOracleOptions& options) {
  config.validate();
  const auto params = PrivacyParams::non_interactive(config.alpha);
  const auto f0c = f0_at_centers(f0, part);
  const std::size_t n = static_cast<std::size_t>(config.n);

  std::vector<double> stats(static_cast<std::size_t>(options.reps));
  for (int r = 0; r < options.reps; ++r) {
    Rng rng = Rng::derive(options.master_seed, options.stream + 1,
                          static_cast<uint64_t>(r));
    auto xs = sample(f, n, rng);
    const auto batch =
        ni_kernel_privatize(std::move(xs), part, kernel, params, rng);
    stats[static_cast<std::size_t>(r)] = stat_s(batch, f0c);
  }
  const SampleMoments m = summarize(stats);

  double mean_sq = 0.0;
  double theo_mean = 0.0;
  for (int j = 0; j < part.n_bins; ++j) {
    const double diff = smoothed_density_at(f, kernel, part, j) -
                        f0c[static_cast<std::size_t>(j)];
    mean_sq += diff * diff;
  }
  theo_mean = mean_sq;
  const double na2 = config.n_alpha2();
  const double h = part.h;
  const double nn = static_cast<double>(config.n);
  const double sup2 = kernel.sup_norm * kernel.sup_norm;
  const double var_bound =
      36.0 * sup2 / (na2 * h * h) * mean_sq +
      164.0 * sup2 * sup2 * part.n_bins /
          (nn * (nn - 1.0) * std::pow(config.alpha, 4.0) * std::pow(h, 4.0));

  MomentReport report;
  report.statistic = "S_B";
  report.reps = options.reps;
  report.empirical_mean = m.mean;
  report.mean_se = m.mean_se;
  report.empirical_var = m.var;
  report.var_se = m.var_se;
  report.theoretical_mean = theo_mean;
  report.theoretical_var = var_bound;
  report.var_is_bound = true;
  report.checks.push_back(
      two_sided_check("mean_identity", m.mean, theo_mean, 3.0 * m.mean_se));
  const double rel_se = m.var > 0.0 ? m.var_se / m.var : 0.0;
  report.checks.push_back(one_sided_check("variance_bound", m.var, var_bound,
                                          var_bound * 3.0 * rel_se));
  finalize(report);
  return report;
}

MomentReport moment_oracle_t(const AnyDensity& f, const NullDensity& f0,
                             const BulkPartition& part,
                             const TestConfig& config,
                             const MomentOracleOptions& options) {
  config.validate();
  const auto params = PrivacyParams::non_interactive(config.alpha);
  const double tail0 = f0.tail_mass(part.b);
  const double tail_f = tail_mass(f, part.b);
  const std::size_t n = static_cast<std::size_t>(config.n);

  std::vector<double> stats(static_cast<std::size_t>(options.reps));
  for (int r = 0; r < options.reps; ++r) {
    Rng rng = Rng::derive(options.master_seed, options.stream + 2,
                          static_cast<uint64_t>(r));
    auto xs = sample(f, n, rng);
    const auto batch = rr_tail_privatize(std::move(xs), part, params, rng);
    stats[static_cast<std::size_t>(r)] = stat_t(batch, tail0);
  }
  const SampleMoments m = summarize(stats);

  const double theo_mean = tail_f - tail0;
  const double theo_var =
      (params.c_alpha * params.c_alpha - tail_f * tail_f) /
      static_cast<double>(config.n);

  MomentReport report;
  report.statistic = "T_B";
  report.reps = options.reps;
  report.empirical_mean = m.mean;
  report.mean_se = m.mean_se;
  report.empirical_var = m.var;
  report.var_se = m.var_se;
  report.theoretical_mean = theo_mean;
  report.theoretical_var = theo_var;
  report.var_is_bound = false;
  report.checks.push_back(
      two_sided_check("mean_identity", m.mean, theo_mean, 3.0 * m.mean_se));
  report.checks.push_back(
      two_sided_check("variance_identity", m.var, theo_var, 3.0 * m.var_se));
  finalize(report);
  return report;
}

MomentReport moment_oracle_d(const AnyDensity& f, const NullDensity& f0,
                             const BulkPartition& part,
                             const TestConfig& config,
                             const MomentOracleOptions& options) {
  config.validate();
  const auto params = PrivacyParams::interactive(config.alpha, config.n);
  const auto p0 = null_bin_masses(f0, part);
  const std::size_t n = static_cast<std::size_t>(config.n);

  std::vector<double> p_f(static_cast<std::size_t>(part.n_bins));
  for (int j = 0; j < part.n_bins; ++j) {
    p_f[static_cast<std::size_t>(j)] = mass_on(f, part.bin(j));
  }

  std::vector<double> stats(static_cast<std::size_t>(options.reps));
  for (int r = 0; r < options.reps; ++r) {
    Rng rng = Rng::derive(options.master_seed, options.stream + 3,
                          static_cast<uint64_t>(r));
    auto x1 = sample(f, n, rng);
    const auto round1 = int_bin_privatize(std::move(x1), part, params, rng);
    const auto phat = estimate_phat(round1);
    auto x2 = sample(f, n, rng);
    const auto round2 =
        int_second_round(std::move(x2), part, phat, p0, params, rng);
    stats[static_cast<std::size_t>(r)] = stat_d(round2, phat, p0, params.tau);
  }
  const SampleMoments m = summarize(stats);

  // Independent first-round replay: estimates E[sum_j (p(j)-p0(j)) clip_j]
  // without reusing any variate from the main replications.
  std::vector<double> replay(static_cast<std::size_t>(options.clip_replays));
  for (int r = 0; r < options.clip_replays; ++r) {
    Rng rng = Rng::derive(options.master_seed, streams::kReplay,
                          static_cast<uint64_t>(r));
    auto x1 = sample(f, n, rng);
    const auto round1 = int_bin_privatize(std::move(x1), part, params, rng);
    const auto phat = estimate_phat(round1);
    double value = 0.0;
    for (std::size_t j = 0; j < p0.size(); ++j) {
      value += (p_f[j] - p0[j]) * clip(phat[j] - p0[j], params.tau);
    }
    replay[static_cast<std::size_t>(r)] = value;
  }
  const SampleMoments replay_m = summarize(replay);

  const double d_tau = clipped_discrepancy(f, f0, part, params.tau);
  const double na2 = config.n_alpha2();
  const double var_bound = 5.0 / (na2 * na2) + 67.0 * d_tau / na2;
  const double mean_lower =
      d_tau / 6.0 - 6.0 * params.tau / std::sqrt(static_cast<double>(config.n));

  double abs_discrepancy = 0.0;
  for (std::size_t j = 0; j < p0.size(); ++j) {
    abs_discrepancy += std::abs(p_f[j] - p0[j]);
  }
  const bool is_null_case = abs_discrepancy == 0.0;

  MomentReport report;
  report.statistic = "D_B";
  report.reps = options.reps;
  report.empirical_mean = m.mean;
  report.mean_se = m.mean_se;
  report.empirical_var = m.var;
  report.var_se = m.var_se;
  report.theoretical_mean = is_null_case ? 0.0 : replay_m.mean;
  report.theoretical_var = var_bound;
  report.var_is_bound = true;
  if (is_null_case) {
    report.checks.push_back(
        two_sided_check("null_mean_zero", m.mean, 0.0, 3.0 * m.mean_se));
  }
  report.checks.push_back(one_sided_check("mean_lower_bound", mean_lower,
                                          m.mean, 3.0 * m.mean_se));
  const double rel_se = m.var > 0.0 ? m.var_se / m.var : 0.0;
  report.checks.push_back(one_sided_check("variance_bound", m.var, var_bound,
                                          var_bound * 3.0 * rel_se));
  report.checks.push_back(two_sided_check(
      "mean_identity_replay", m.mean, replay_m.mean,
      3.0 * std::sqrt(m.mean_se * m.mean_se +
                      replay_m.mean_se * replay_m.mean_se)));
  finalize(report);
  return report;
}

std::string MomentReport::to_json() const {
  nlohmann::ordered_json j;
  j["statistic"] = statistic;
  j["reps"] = reps;
  j["empirical_mean"] = empirical_mean;
  j["empirical_mean_se"] = mean_se;
  j["empirical_var"] = empirical_var;
  j["empirical_var_se"] = var_se;
  j["theoretical_mean"] = theoretical_mean;
  j["theoretical_var"] = theoretical_var;
  j["theoretical_var_is_bound"] = var_is_bound;
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& check : checks) {
    nlohmann::ordered_json c;
    c["name"] = check.name;
    c["value"] = check.value;
    c["reference"] = check.reference;
    c["margin"] = check.margin;
    c["two_sided"] = check.two_sided;
    c["pass"] = check.pass;
    j["checks"].push_back(c);
  }
  j["all_pass"] = all_pass;
  return j.dump(2);
}

}  // namespace ldpgof
