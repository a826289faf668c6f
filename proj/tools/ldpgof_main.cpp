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

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ldpgof/harness.hpp"

namespace {

using ldpgof::AltAlignment;
using ldpgof::Arm;
using ldpgof::BulkChoice;
using ldpgof::Experiment;
using ldpgof::ExperimentSpec;
using ldpgof::Mechanism;
using ldpgof::SignPattern;
using ldpgof::ThresholdMode;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct CommonOptions {
  std::string null_spec = "uniform:0,1";
  std::string mechanism = "ni";
  int n = 2000;
  double alpha = 0.5;
  double beta = 1.0;
  double gamma = 0.2;
  double holder_l = 8.0;
  double c_h = 1.0;
  std::string bulk = "auto";
  std::string thresholds = "paper";
  int calibration_reps = 2000;
  uint64_t seed = 1;
  int reps = 1000;
  double delta = 0.0;
  std::string signs = "alternating";
  std::string alt_align = "edges";
  std::string out;
  std::string config_path;
};

// Flat key=value config support. CLI11's own config machinery wants
// sectioned files for subcommand options, so the flat format is handled
// here: values fill in any flag the user did not pass explicitly.
std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot read config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line is not key=value: " + line);
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::map<std::string, std::string> apply_config(const CLI::App* cmd,
                                                CommonOptions* opts,
                                                bool* has_delta) {
  if (opts->config_path.empty()) return {};
  const auto kv = read_config(opts->config_path);
  const auto to_int = [](const std::string& v) { return std::stoi(v); };
  const auto to_dbl = [](const std::string& v) { return std::stod(v); };
  const std::map<std::string, std::function<void(const std::string&)>>
      setters = {
          {"null", [&](const std::string& v) { opts->null_spec = v; }},
          {"mechanism", [&](const std::string& v) { opts->mechanism = v; }},
          {"n", [&](const std::string& v) { opts->n = to_int(v); }},
          {"alpha", [&](const std::string& v) { opts->alpha = to_dbl(v); }},
          {"beta", [&](const std::string& v) { opts->beta = to_dbl(v); }},
          {"gamma", [&](const std::string& v) { opts->gamma = to_dbl(v); }},
          {"L", [&](const std::string& v) { opts->holder_l = to_dbl(v); }},
          {"ch", [&](const std::string& v) { opts->c_h = to_dbl(v); }},
          {"bulk", [&](const std::string& v) { opts->bulk = v; }},
          {"thresholds",
           [&](const std::string& v) { opts->thresholds = v; }},
          {"calibration-reps",
           [&](const std::string& v) { opts->calibration_reps = to_int(v); }},
          {"seed",
           [&](const std::string& v) { opts->seed = std::stoull(v); }},
          {"reps", [&](const std::string& v) { opts->reps = to_int(v); }},
          {"delta",
           [&](const std::string& v) {
             opts->delta = to_dbl(v);
             *has_delta = true;
           }},
          {"signs", [&](const std::string& v) { opts->signs = v; }},
          {"alt-align",
           [&](const std::string& v) { opts->alt_align = v; }},
          {"out", [&](const std::string& v) { opts->out = v; }},
      };
  for (const auto& [key, value] : kv) {
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
    // Explicit flags win over config values.
    if (key == "delta") {
      if (cmd->count("--delta") > 0) continue;
    } else if (cmd->count("--" + key) > 0) {
      continue;
    }
    try {
      it->second(value);
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("config key '" + key +
                                  "' has a malformed value '" + value + "'");
    }
  }
  return kv;
}

void add_common(CLI::App* cmd, CommonOptions* opts) {
  cmd->add_option("--config", opts->config_path,
                  "Flat key=value config file; explicit flags win");
  cmd->add_option("--null", opts->null_spec,
                  "Null density (uniform:a,b normal beta:a,b cauchy:a "
                  "pareto:a,k exp:lambda spiky:L0 slowvary:A)");
  cmd->add_option("--mechanism", opts->mechanism, "ni or interactive")
      ->check(CLI::IsMember({"ni", "interactive"}));
  cmd->add_option("--n", opts->n, "Per-phase sample size");
  cmd->add_option("--alpha", opts->alpha, "Privacy level in (0,1]");
  cmd->add_option("--beta", opts->beta, "Smoothness exponent in (0,1]");
  cmd->add_option("--gamma", opts->gamma, "Target error level in (0,1)");
  cmd->add_option("--L", opts->holder_l, "Holder bound of the alternatives");
  cmd->add_option("--ch", opts->c_h, "Bandwidth constant c_h");
  cmd->add_option("--bulk", opts->bulk, "auto, full, or interval:a,b");
  cmd->add_option("--thresholds", opts->thresholds, "paper or calibrated")
      ->check(CLI::IsMember({"paper", "calibrated"}));
  cmd->add_option("--calibration-reps", opts->calibration_reps,
                  "Null replications for calibrated thresholds");
  cmd->add_option("--seed", opts->seed, "Master seed");
  cmd->add_option("--reps", opts->reps, "Replications per estimate");
  cmd->add_option("--delta", opts->delta,
                  "Perturbation size of the alternative (omit for the null)");
  cmd->add_option("--signs", opts->signs,
                  "alternating, constant, seed:<k>, or a +- pattern");
  cmd->add_option("--alt-align", opts->alt_align,
                  "Wave placement: edges (straddles test bins) or bins")
      ->check(CLI::IsMember({"edges", "bins"}));
  cmd->add_option("--out", opts->out, "Machine-readable result path");
}

ExperimentSpec to_spec(const CommonOptions& opts, bool has_delta) {
  ExperimentSpec spec;
  spec.config.n = opts.n;
  spec.config.alpha = opts.alpha;
  spec.config.beta = opts.beta;
  spec.config.gamma = opts.gamma;
  spec.config.l = opts.holder_l;
  spec.config.mechanism = opts.mechanism == "interactive"
                              ? Mechanism::kInteractive
                              : Mechanism::kNonInteractive;
  spec.null_spec = opts.null_spec;
  spec.master_seed = opts.seed;
  spec.reps = opts.reps;
  spec.c_h = opts.c_h;
  spec.calibration_reps = opts.calibration_reps;
  spec.threshold_mode = opts.thresholds == "calibrated"
                            ? ThresholdMode::kCalibrated
                            : ThresholdMode::kPaperConstants;
  spec.alt_align = opts.alt_align == "bins" ? AltAlignment::kBins
                                            : AltAlignment::kEdges;

  if (opts.bulk == "auto") {
    spec.bulk.mode = BulkChoice::Mode::kAuto;
  } else if (opts.bulk == "full") {
    spec.bulk.mode = BulkChoice::Mode::kFull;
  } else if (opts.bulk.rfind("interval:", 0) == 0) {
    spec.bulk.mode = BulkChoice::Mode::kExplicit;
    const std::string body = opts.bulk.substr(9);
    const auto comma = body.find(',');
    if (comma == std::string::npos) {
      throw std::invalid_argument("--bulk interval:a,b needs two endpoints");
    }
    spec.bulk.interval = {std::stod(body.substr(0, comma)),
                          std::stod(body.substr(comma + 1))};
  } else {
    throw std::invalid_argument("--bulk must be auto, full or interval:a,b");
  }

  spec.alt.is_null = !has_delta;
  spec.alt.delta = opts.delta;
  if (opts.signs == "alternating") {
    spec.alt.pattern = SignPattern::kAlternating;
  } else if (opts.signs == "constant") {
    spec.alt.pattern = SignPattern::kConstant;
  } else if (opts.signs.rfind("seed:", 0) == 0) {
    spec.alt.pattern = SignPattern::kSeeded;
    spec.alt.sign_seed = std::stoull(opts.signs.substr(5));
  } else {
    spec.alt.pattern = SignPattern::kExplicit;
    spec.alt.explicit_signs.clear();
    for (char c : opts.signs) {
      if (c == '+') {
        spec.alt.explicit_signs.push_back(1);
      } else if (c == '-') {
        spec.alt.explicit_signs.push_back(-1);
      } else {
        throw std::invalid_argument(
            "--signs pattern may contain only '+' and '-'");
      }
    }
  }
  return spec;
}

void write_file(const std::string& path, const std::string& payload) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open output file " + path);
  os << payload;
}

std::string default_out(const CommonOptions& opts, const char* name,
                        const char* ext) {
  return opts.out.empty() ? std::string("ldpgof_") + name + "." + ext
                          : opts.out;
}

nlohmann::ordered_json outcome_json(const ldpgof::TestOutcome& outcome) {
  nlohmann::ordered_json j;
  j["mechanism"] = ldpgof::mechanism_name(outcome.mechanism);
  j["stat_main"] = outcome.stat_main;
  j["stat_tail"] = outcome.stat_tail;
  j["t1"] = outcome.t1;
  j["t2"] = outcome.t2;
  j["reject"] = outcome.reject;
  return j;
}

int cmd_audit(const CommonOptions& opts) {
  const ExperimentSpec spec = to_spec(opts, false);
  const Experiment experiment = prepare(spec);
  const double bound = std::exp(opts.alpha);
  const auto ni_params = ldpgof::PrivacyParams::non_interactive(opts.alpha);
  const auto int_params =
      ldpgof::PrivacyParams::interactive(opts.alpha, opts.n);

  const auto tail = ldpgof::audit_rr(ldpgof::BatchKind::kTailBits, ni_params);
  const auto clipped =
      ldpgof::audit_rr(ldpgof::BatchKind::kClippedBits, int_params);
  const double kernel_sup = ldpgof::audit_laplace_grid_sup(
      experiment.part, experiment.kernel, ni_params);
  const double bin_sup =
      ldpgof::audit_bin_laplace_grid_sup(experiment.part, int_params);

  nlohmann::ordered_json j;
  j["alpha"] = opts.alpha;
  j["bound"] = bound;
  j["kernel_laplace_grid_sup"] = kernel_sup;
  j["bin_laplace_grid_sup"] = bin_sup;
  j["tail_bits_max_ratio"] = tail.max_ratio;
  j["tail_bits_tail_over_bulk"] = tail.tail_over_bulk;
  j["clipped_bits_max_ratio"] = clipped.max_ratio;
  const double slack = 1e-12;
  const bool pass = kernel_sup <= bound * (1.0 + slack) &&
                    bin_sup <= bound * (1.0 + slack) &&
                    tail.max_ratio <= bound + slack &&
                    clipped.max_ratio <= bound + slack;
  j["pass"] = pass;
  write_file(default_out(opts, "audit", "json"), j.dump(2) + "\n");

  std::cout << "privacy audit at alpha=" << opts.alpha << " (budget e^alpha="
            << bound << ")\n"
            << "  kernel+Laplace grid sup   " << kernel_sup << "\n"
            << "  bin+Laplace grid sup      " << bin_sup << "\n"
            << "  tail bits max ratio       " << tail.max_ratio
            << " (tail/bulk " << tail.tail_over_bulk << ")\n"
            << "  clipped bits max ratio    " << clipped.max_ratio << "\n"
            << (pass ? "  all channels within budget\n"
                     : "  BUDGET EXCEEDED\n");
  return pass ? kExitOk : kExitCheckFailed;
}

int cmd_privatize(const CommonOptions& opts, bool has_delta,
                  const std::string& format, uint64_t trial) {
  const ExperimentSpec spec = to_spec(opts, has_delta);
  const Experiment experiment = prepare(spec);
  const auto transcript = run_trial_transcript(
      experiment, spec.alt.is_null ? Arm::kNull : Arm::kAlt, trial);
  const std::string prefix =
      opts.out.empty() ? std::string("ldpgof_batch") : opts.out;
  for (const auto& batch : transcript.batches) {
    const char* channel = "";
    switch (batch.kind) {
      case ldpgof::BatchKind::kKernelMatrix:
        channel = "kernel";
        break;
      case ldpgof::BatchKind::kTailBits:
        channel = "tail";
        break;
      case ldpgof::BatchKind::kBinMatrix:
        channel = "bin";
        break;
      case ldpgof::BatchKind::kClippedBits:
        channel = "clipped";
        break;
    }
    const std::string path =
        prefix + "." + channel + (format == "csv" ? ".csv" : ".bin");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file " + path);
    if (format == "csv") {
      ldpgof::write_batch_csv(batch, os);
    } else {
      ldpgof::write_batch_binary(batch, os);
    }
    std::cout << "  wrote " << path << " (" << batch.rows << "x" << batch.cols
              << ")\n";
  }
  std::cout << "privatized " << transcript.batches.size()
            << " channel(s) under "
            << (spec.alt.is_null ? spec.null_spec
                                 : "the perturbed alternative")
            << ", bins=" << experiment.part.n_bins
            << ", h=" << experiment.part.h << "\n";
  return kExitOk;
}

int cmd_test(const CommonOptions& opts, bool has_delta, uint64_t trial) {
  const ExperimentSpec spec = to_spec(opts, has_delta);
  const Experiment experiment = prepare(spec);
  if (experiment.part.n_bins == 1) {
    std::cout << "note: the tuned bandwidth exceeds |B|/2 (n alpha^2 too "
                 "small); clamped to a single bin\n";
  }
  const auto outcome = run_trial(
      experiment, spec.alt.is_null ? Arm::kNull : Arm::kAlt, trial);
  write_file(default_out(opts, "test", "json"),
             outcome_json(outcome).dump(2) + "\n");
  std::cout << "trial " << trial << " ["
            << ldpgof::mechanism_name(spec.config.mechanism)
            << "] main=" << outcome.stat_main << " (t1=" << outcome.t1
            << ") tail=" << outcome.stat_tail << " (t2=" << outcome.t2
            << ") -> " << (outcome.reject ? "REJECT" : "ACCEPT") << "\n";
  return kExitOk;
}

int cmd_risk(const CommonOptions& opts, bool has_delta) {
  const ExperimentSpec spec = to_spec(opts, has_delta);
  const Experiment experiment = prepare(spec);
  const auto estimate = estimate_risk(experiment);
  write_file(default_out(opts, "risk", "csv"),
             risk_csv(spec, experiment, estimate));
  std::cout << "type I  " << estimate.type1.rate << " [" << estimate.type1.lo
            << ", " << estimate.type1.hi << "]\n";
  if (estimate.type2_applicable) {
    std::cout << "type II " << estimate.type2.rate << " ["
              << estimate.type2.lo << ", " << estimate.type2.hi << "]\n"
              << "risk    " << estimate.risk << " at L1 distance "
              << experiment.alternative->l1_distance() << "\n";
  } else {
    std::cout << "type II n/a (null alternative)\n";
  }
  return kExitOk;
}

int cmd_radius(const CommonOptions& opts, double target_risk) {
  const ExperimentSpec spec = to_spec(opts, true);
  const double target = target_risk > 0.0 ? target_risk : opts.gamma;
  const auto result = estimate_radius(spec, target);
  nlohmann::ordered_json j;
  j["target_risk"] = target;
  j["delta_star"] = result.delta_star;
  j["rho_hat"] = result.rho;
  j["censored"] = result.censored;
  j["inconclusive"] = result.inconclusive;
  j["type1"] = result.type1;
  j["risk_evaluations"] = result.risk_evaluations;
  write_file(default_out(opts, "radius", "json"), j.dump(2) + "\n");
  if (result.inconclusive) {
    std::cout << "radius estimate inconclusive: risk not monotone across the "
                 "bracket\n";
    return kExitCheckFailed;
  }
  std::cout << "mechanism-specific separation estimate: rho=" << result.rho
            << " (delta*=" << result.delta_star << ")"
            << (result.censored ? " [censored at delta_max]" : "") << "\n";
  return kExitOk;
}

int cmd_rates(CommonOptions opts, int grid_points, bool thresholds_set,
              bool gamma_set, bool l_set) {
  // Rate fits default to calibrated thresholds, a moderate target risk and a
  // wide Holder class: the conservative closed-form constants only shift the
  // curves, the exponent is what is being measured.
  if (!thresholds_set) opts.thresholds = "calibrated";
  if (!gamma_set) opts.gamma = 0.5;
  if (!l_set) opts.holder_l = 64.0;
  ExperimentSpec spec = to_spec(opts, true);
  spec.alt.is_null = false;
  std::vector<int> grid;
  for (int k = 0; k < grid_points; ++k) grid.push_back(1 << (10 + k));
  const auto points = run_rate_grid(spec, grid, opts.gamma);
  const bool interactive = spec.config.mechanism == Mechanism::kInteractive;
  const double theo =
      interactive
          ? -spec.config.beta / (2.0 * spec.config.beta + 1.0)
          : -2.0 * spec.config.beta / (4.0 * spec.config.beta + 3.0);
  const std::string csv_path = default_out(opts, "rates", "csv");
  write_file(csv_path, ldpgof::rates_csv(points));
  const auto fit = ldpgof::fit_rate(points, theo);
  write_file(csv_path + ".fit.json", ldpgof::rate_fit_json(fit) + "\n");
  std::cout << "fitted slope " << fit.slope << " +/- " << fit.slope_se
            << " over " << fit.used_points << " uncensored points (theory "
            << theo << ")\n"
            << "wrote " << csv_path << " and " << csv_path << ".fit.json\n";
  return kExitOk;
}

int cmd_moments(const CommonOptions& opts, bool has_delta, int clip_replays) {
  const ExperimentSpec spec = to_spec(opts, has_delta);
  const Experiment experiment = prepare(spec);
  const ldpgof::AnyDensity f =
      spec.alt.is_null ? ldpgof::AnyDensity{experiment.null}
                       : ldpgof::AnyDensity{*experiment.alternative};
  ldpgof::MomentOracleOptions options;
  options.reps = opts.reps;
  options.clip_replays = clip_replays;
  options.master_seed = opts.seed;

  std::vector<ldpgof::MomentReport> reports;
  if (spec.config.mechanism == Mechanism::kNonInteractive) {
    reports.push_back(moment_oracle_s(f, experiment.null, experiment.part,
                                      experiment.kernel, spec.config,
                                      options));
    reports.push_back(moment_oracle_t(f, experiment.null, experiment.part,
                                      spec.config, options));
  } else {
    reports.push_back(moment_oracle_d(f, experiment.null, experiment.part,
                                      spec.config, options));
    reports.push_back(moment_oracle_t(f, experiment.null, experiment.part,
                                      spec.config, options));
  }
  std::string payload = "[\n";
  bool all_pass = true;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    payload += reports[i].to_json();
    if (i + 1 < reports.size()) payload += ",";
    payload += "\n";
    all_pass = all_pass && reports[i].all_pass;
    std::cout << reports[i].statistic << ": "
              << (reports[i].all_pass ? "all verdicts pass"
                                      : "VERDICT FAILED")
              << " (mean " << reports[i].empirical_mean << " vs "
              << reports[i].theoretical_mean << ")\n";
  }
  payload += "]\n";
  write_file(default_out(opts, "moments", "json"), payload);
  return all_pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Locally private goodness-of-fit testing: privatization channels, "
      "test statistics, moment oracles and Monte Carlo rate experiments"};
  app.require_subcommand(1);

  CommonOptions audit_opts, priv_opts, test_opts, risk_opts, radius_opts,
      rates_opts, moments_opts;
  std::string priv_format = "csv";
  uint64_t priv_trial = 0;
  uint64_t test_trial = 0;
  double radius_target = -1.0;
  int rates_grid = 8;
  int moments_clip_replays = 1000;

  auto* audit = app.add_subcommand(
      "audit", "Exact privacy audits of all release channels");
  add_common(audit, &audit_opts);

  auto* priv = app.add_subcommand(
      "privatize", "Run the privacy mechanisms once and dump the transcript");
  add_common(priv, &priv_opts);
  priv->add_option("--format", priv_format, "csv or bin")
      ->check(CLI::IsMember({"csv", "bin"}));
  priv->add_option("--trial", priv_trial, "Trial index for seed derivation");

  auto* test = app.add_subcommand("test", "One end-to-end test decision");
  add_common(test, &test_opts);
  test->add_option("--trial", test_trial, "Trial index for seed derivation");

  auto* risk = app.add_subcommand(
      "risk", "Monte Carlo type I/type II error estimates");
  add_common(risk, &risk_opts);

  auto* radius = app.add_subcommand(
      "radius", "Bisect the smallest detectable L1 separation");
  add_common(radius, &radius_opts);
  radius->add_option("--target-risk", radius_target,
                     "Total risk target (defaults to --gamma)");

  auto* rates = app.add_subcommand(
      "rates", "Separation-rate exponent regression over an n-grid");
  add_common(rates, &rates_opts);
  rates->add_option("--grid", rates_grid,
                    "Number of grid points n = 2^10, 2^11, ...");

  auto* moments = app.add_subcommand(
      "moments", "Moment-oracle verification of the statistic formulas");
  add_common(moments, &moments_opts);
  moments->add_option("--clip-replays", moments_clip_replays,
                      "Independent first-round replays for E[clip]");

  try {
    app.parse(argc, argv);
    auto with_config = [](const CLI::App* cmd, CommonOptions* opts) {
      bool has_delta = cmd->count("--delta") > 0;
      apply_config(cmd, opts, &has_delta);
      return has_delta;
    };

    if (audit->parsed()) {
      with_config(audit, &audit_opts);
      return cmd_audit(audit_opts);
    }
    if (priv->parsed()) {
      const bool has_delta = with_config(priv, &priv_opts);
      return cmd_privatize(priv_opts, has_delta, priv_format, priv_trial);
    }
    if (test->parsed()) {
      const bool has_delta = with_config(test, &test_opts);
      return cmd_test(test_opts, has_delta, test_trial);
    }
    if (risk->parsed()) {
      const bool has_delta = with_config(risk, &risk_opts);
      return cmd_risk(risk_opts, has_delta);
    }
    if (radius->parsed()) {
      with_config(radius, &radius_opts);
      return cmd_radius(radius_opts, radius_target);
    }
    if (rates->parsed()) {
      bool has_delta = rates->count("--delta") > 0;
      const auto keys = apply_config(rates, &rates_opts, &has_delta);
      const auto given = [&](const char* flag, const char* key) {
        return rates->count(flag) > 0 || keys.count(key) > 0;
      };
      return cmd_rates(rates_opts, rates_grid,
                       given("--thresholds", "thresholds"),
                       given("--gamma", "gamma"), given("--L", "L"));
    }
    if (moments->parsed()) {
      const bool has_delta = with_config(moments, &moments_opts);
      return cmd_moments(moments_opts, has_delta, moments_clip_replays);
    }
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
}
