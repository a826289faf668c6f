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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace ldpgof {

namespace {

void require(bool cond, const char* message) {
  if (!cond) throw std::invalid_argument(message);
}

void check_alpha_positive(double alpha) {
  require(alpha > 0.0, "privacy level alpha must be positive");
}

// The Laplace-channel analysis (and the moment formulas built on it) only
// covers alpha in (0,1]; the randomized-response channels are alpha-LDP for
// any positive alpha.
void check_alpha_unit(double alpha) {
  require(alpha > 0.0 && alpha <= 1.0,
          "privacy level alpha must lie in (0,1] for the Laplace channels");
}

const char* kind_name(BatchKind kind) {
  switch (kind) {
    case BatchKind::kKernelMatrix:
      return "KERNEL_MATRIX";
    case BatchKind::kTailBits:
      return "TAIL_BITS";
    case BatchKind::kBinMatrix:
      return "BIN_MATRIX";
    case BatchKind::kClippedBits:
      return "CLIPPED_BITS";
  }
  return "?";
}

BatchKind kind_from_name(const std::string& name) {
  if (name == "KERNEL_MATRIX") return BatchKind::kKernelMatrix;
  if (name == "TAIL_BITS") return BatchKind::kTailBits;
  if (name == "BIN_MATRIX") return BatchKind::kBinMatrix;
  if (name == "CLIPPED_BITS") return BatchKind::kClippedBits;
  throw std::invalid_argument("unknown batch kind '" + name + "'");
}

// Kernel score of one individual: the column of the containing bin and the
// rescaled kernel value there. The score is evaluated only at the assigned
// column: the kernel windows coincide with the bins in real arithmetic, but
// a rounded offset at a shared edge can land strictly inside both
// neighbouring windows, and a doubly active row would break the privacy
// budget (ratio e^(2 alpha) instead of e^alpha).
struct KernelScore {
  int column = -1;
  double value = 0.0;
};

KernelScore kernel_score(const BulkPartition& part,
                         const SmoothingKernel& kernel, double x) {
  const int j = part.bin_index(x);
  if (j < 0) return {};
  return {j, scaled_eval(kernel, part.h,
                         part.centers[static_cast<std::size_t>(j)] - x)};
}

}  // namespace

PrivacyParams PrivacyParams::non_interactive(double alpha) {
  check_alpha_positive(alpha);
  PrivacyParams p;
  p.alpha = alpha;
  const double ea = std::exp(alpha);
  p.c_alpha = (ea + 1.0) / (ea - 1.0);
  p.z_alpha = std::exp(2.0 * alpha) - std::exp(-2.0 * alpha);
  p.tau = 0.0;
  return p;
}

PrivacyParams PrivacyParams::interactive(double alpha, int n) {
  require(n >= 1, "interactive params: n must be at least 1");
  PrivacyParams p = non_interactive(alpha);
  p.tau = 1.0 / std::sqrt(static_cast<double>(n) * alpha * alpha);
  return p;
}

PrivatizedBatch ni_kernel_privatize(std::vector<double> xs,
                                    const BulkPartition& part,
                                    const SmoothingKernel& kernel,
                                    const PrivacyParams& params, Rng& rng) {
  check_alpha_unit(params.alpha);
  const std::size_t n = xs.size();
  const std::size_t cols = static_cast<std::size_t>(part.n_bins);
  const double noise_scale =
      2.0 * kernel.sup_norm / (params.alpha * part.h);
  PrivatizedBatch batch;
  batch.kind = BatchKind::kKernelMatrix;
  batch.rows = n;
  batch.cols = cols;
  batch.params = params;
  batch.partition = part;
  batch.values.resize(n * cols);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = batch.values.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) {
      row[j] = noise_scale * rng.next_laplace();
    }
    const KernelScore score = kernel_score(part, kernel, xs[i]);
    if (score.column >= 0) {
      row[static_cast<std::size_t>(score.column)] += score.value;
    }
  }
  return batch;
}

PrivatizedBatch rr_tail_privatize(std::vector<double> xs,
                                  const BulkPartition& part,
                                  const PrivacyParams& params, Rng& rng) {
  check_alpha_positive(params.alpha);
  PrivatizedBatch batch;
  batch.kind = BatchKind::kTailBits;
  batch.rows = xs.size();
  batch.cols = 1;
  batch.params = params;
  batch.partition = part;
  batch.values.resize(xs.size());
  const double c = params.c_alpha;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const bool outside = part.bin_index(xs[i]) < 0;
    const double p_plus = 0.5 * (1.0 + (outside ? 1.0 / c : 0.0));
    batch.values[i] = rng.next_bernoulli(p_plus) ? c : -c;
  }
  return batch;
}

PrivatizedBatch int_bin_privatize(std::vector<double> xs,
                                  const BulkPartition& part,
                                  const PrivacyParams& params, Rng& rng) {
  check_alpha_unit(params.alpha);
  const std::size_t n = xs.size();
  const std::size_t cols = static_cast<std::size_t>(part.n_bins);
  const double noise_scale = 2.0 / params.alpha;
  PrivatizedBatch batch;
  batch.kind = BatchKind::kBinMatrix;
  batch.rows = n;
  batch.cols = cols;
  batch.params = params;
  batch.partition = part;
  batch.values.resize(n * cols);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = batch.values.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) {
      row[j] = noise_scale * rng.next_laplace();
    }
    const int j = part.bin_index(xs[i]);
    if (j >= 0) row[static_cast<std::size_t>(j)] += 1.0;
  }
  return batch;
}

std::vector<double> estimate_phat(const PrivatizedBatch& batch) {
  require(batch.kind == BatchKind::kBinMatrix,
          "estimate_phat: batch kind must be BIN_MATRIX");
  std::vector<double> phat(batch.cols, 0.0);
  for (std::size_t i = 0; i < batch.rows; ++i) {
    const double* row = batch.values.data() + i * batch.cols;
    for (std::size_t j = 0; j < batch.cols; ++j) phat[j] += row[j];
  }
  const double inv = batch.rows > 0 ? 1.0 / static_cast<double>(batch.rows) : 0.0;
  for (double& v : phat) v *= inv;
  return phat;
}

double clip(double x, double tau) {
  require(tau > 0.0, "clip: tau must be positive");
  return std::max(-tau, std::min(x, tau));
}

PrivatizedBatch int_second_round(std::vector<double> xs,
                                 const BulkPartition& part,
                                 const std::vector<double>& phat,
                                 const std::vector<double>& p0,
                                 const PrivacyParams& params, Rng& rng) {
  check_alpha_positive(params.alpha);
  require(params.tau > 0.0,
          "int_second_round: params must carry the interactive clip width");
  const std::size_t cols = static_cast<std::size_t>(part.n_bins);
  require(phat.size() == cols && p0.size() == cols,
          "int_second_round: phat and p0 must have one entry per bin");
  const double c = params.c_alpha;
  const double tau = params.tau;
  const double magnitude = c * tau;
  // Precompute per-bin acceptance probabilities: the law depends on the
  // first round only through phat.
  std::vector<double> p_plus(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    p_plus[j] = 0.5 * (1.0 + clip(phat[j] - p0[j], tau) / magnitude);
  }
  PrivatizedBatch batch;
  batch.kind = BatchKind::kClippedBits;
  batch.rows = xs.size();
  batch.cols = 1;
  batch.params = params;
  batch.partition = part;
  batch.values.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const int j = part.bin_index(xs[i]);
    const double p = j >= 0 ? p_plus[static_cast<std::size_t>(j)] : 0.5;
    batch.values[i] = rng.next_bernoulli(p) ? magnitude : -magnitude;
  }
  return batch;
}

RrAudit audit_rr(BatchKind kind, const PrivacyParams& params) {
  check_alpha_positive(params.alpha);
  const double bound = std::exp(params.alpha);
  const double c = params.c_alpha;
  // Class probabilities of the + output. For TAIL_BITS the classes are
  // {outside B, any bin}; for CLIPPED_BITS the clip value of a bin class is
  // adversarial in [-tau, tau], and the ratio is monotone in it, so the
  // extremes +tau, 0, -tau enumerate the worst case exactly.
  std::vector<double> plus_probs;
  double tail_plus = 0.0;
  std::size_t n_bulk = 0;
  if (kind == BatchKind::kTailBits) {
    tail_plus = 0.5 * (1.0 + 1.0 / c);
    plus_probs = {0.5};
    n_bulk = 1;
  } else if (kind == BatchKind::kClippedBits) {
    tail_plus = 0.5;
    plus_probs = {0.5 * (1.0 + 1.0 / c), 0.5, 0.5 * (1.0 - 1.0 / c)};
    n_bulk = plus_probs.size();
  } else {
    throw std::invalid_argument(
        "audit_rr: kind must be TAIL_BITS or CLIPPED_BITS");
  }
  plus_probs.push_back(tail_plus);
  RrAudit audit;
  audit.bound = bound;
  for (std::size_t a = 0; a < plus_probs.size(); ++a) {
    for (std::size_t b = 0; b < plus_probs.size(); ++b) {
      if (a == b) continue;
      const double r_plus = plus_probs[a] / plus_probs[b];
      const double r_minus = (1.0 - plus_probs[a]) / (1.0 - plus_probs[b]);
      audit.max_ratio = std::max({audit.max_ratio, r_plus, r_minus});
      if (a == plus_probs.size() - 1 && b < n_bulk) {
        audit.tail_over_bulk =
            std::max({audit.tail_over_bulk, r_plus, r_minus});
      }
    }
  }
  if (audit.max_ratio > bound + 1e-12) {
    throw std::logic_error(
        "audit_rr: ratio exceeds e^alpha; mechanism bug");
  }
  return audit;
}

double audit_laplace(double y1, double y2, const BulkPartition& part,
                     const SmoothingKernel& kernel,
                     const PrivacyParams& params) {
  check_alpha_positive(params.alpha);
  const double sigma = 2.0 * kernel.sup_norm / (params.alpha * part.h);
  const KernelScore s1 = kernel_score(part, kernel, y1);
  const KernelScore s2 = kernel_score(part, kernel, y2);
  const double l1 = s1.column == s2.column
                        ? std::abs(s1.value - s2.value)
                        : std::abs(s1.value) + std::abs(s2.value);
  return std::exp(l1 / sigma);
}

double audit_bin_laplace(double y1, double y2, const BulkPartition& part,
                         const PrivacyParams& params) {
  check_alpha_positive(params.alpha);
  const int j1 = part.bin_index(y1);
  const int j2 = part.bin_index(y2);
  double l1 = 0.0;
  if (j1 != j2) {
    l1 = (j1 >= 0 ? 1.0 : 0.0) + (j2 >= 0 ? 1.0 : 0.0);
  }
  return std::exp(params.alpha / 2.0 * l1);
}

namespace {

std::vector<double> audit_grid(const BulkPartition& part,
                               int grid_points_per_bin) {
  std::vector<double> ys;
  const double h = part.h;
  // Points outside B on both sides.
  ys.push_back(part.b.lo - 0.5 * h);
  ys.push_back(part.b.hi + 0.5 * h);
  for (int j = 0; j < part.n_bins; ++j) {
    const Interval bin = part.bin(j);
    ys.push_back(bin.lo);  // shared edge
    for (int g = 0; g < grid_points_per_bin; ++g) {
      ys.push_back(bin.lo +
                   (g + 0.5) * bin.length() / grid_points_per_bin);
    }
  }
  ys.push_back(part.b.hi);
  return ys;
}

}  // namespace

double audit_laplace_grid_sup(const BulkPartition& part,
                              const SmoothingKernel& kernel,
                              const PrivacyParams& params,
                              int grid_points_per_bin) {
  const auto ys = audit_grid(part, grid_points_per_bin);
  double sup = 0.0;
  for (double y1 : ys) {
    for (double y2 : ys) {
      sup = std::max(sup, audit_laplace(y1, y2, part, kernel, params));
    }
  }
  return sup;
}

double audit_bin_laplace_grid_sup(const BulkPartition& part,
                                  const PrivacyParams& params,
                                  int grid_points_per_bin) {
  const auto ys = audit_grid(part, grid_points_per_bin);
  double sup = 0.0;
  for (double y1 : ys) {
    for (double y2 : ys) {
      sup = std::max(sup, audit_bin_laplace(y1, y2, part, params));
    }
  }
  return sup;
}

void write_batch_csv(const PrivatizedBatch& batch, std::ostream& os) {
  os << "i,j,value,kind\n";
  char buffer[64];
  for (std::size_t i = 0; i < batch.rows; ++i) {
    for (std::size_t j = 0; j < batch.cols; ++j) {
      std::snprintf(buffer, sizeof(buffer), "%.17g", batch.at(i, j));
      os << i << ',' << j << ',' << buffer << ',' << kind_name(batch.kind)
         << '\n';
    }
  }
}

PrivatizedBatch read_batch_csv(std::istream& is, const PrivacyParams& params,
                               const BulkPartition& part) {
  std::string line;
  if (!std::getline(is, line) || line != "i,j,value,kind") {
    throw std::invalid_argument("batch csv: missing 'i,j,value,kind' header");
  }
  PrivatizedBatch batch;
  batch.params = params;
  batch.partition = part;
  std::size_t max_i = 0;
  std::size_t max_j = 0;
  std::vector<double> values;
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  bool kind_set = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::size_t p1 = line.find(',');
    std::size_t p2 = line.find(',', p1 + 1);
    std::size_t p3 = line.find(',', p2 + 1);
    if (p1 == std::string::npos || p2 == std::string::npos ||
        p3 == std::string::npos) {
      throw std::invalid_argument("batch csv: malformed row '" + line + "'");
    }
    const std::size_t i = std::stoull(line.substr(0, p1));
    const std::size_t j = std::stoull(line.substr(p1 + 1, p2 - p1 - 1));
    const double v = std::strtod(line.substr(p2 + 1, p3 - p2 - 1).c_str(),
                                 nullptr);
    const BatchKind kind = kind_from_name(line.substr(p3 + 1));
    if (!kind_set) {
      batch.kind = kind;
      kind_set = true;
    } else if (kind != batch.kind) {
      throw std::invalid_argument("batch csv: mixed kinds in one file");
    }
    coords.emplace_back(i, j);
    values.push_back(v);
    max_i = std::max(max_i, i);
    max_j = std::max(max_j, j);
  }
  batch.rows = values.empty() ? 0 : max_i + 1;
  batch.cols = values.empty() ? 1 : max_j + 1;
  batch.values.assign(batch.rows * batch.cols, 0.0);
  for (std::size_t k = 0; k < values.size(); ++k) {
    batch.values[coords[k].first * batch.cols + coords[k].second] = values[k];
  }
  return batch;
}

void write_batch_binary(const PrivatizedBatch& batch, std::ostream& os) {
  const char magic[4] = {'L', 'D', 'P', 'B'};
  os.write(magic, 4);
  const uint8_t kind = static_cast<uint8_t>(batch.kind);
  os.write(reinterpret_cast<const char*>(&kind), 1);
  const uint64_t rows = batch.rows;
  const uint64_t cols = batch.cols;
  os.write(reinterpret_cast<const char*>(&rows), 8);
  os.write(reinterpret_cast<const char*>(&cols), 8);
  os.write(reinterpret_cast<const char*>(batch.values.data()),
           static_cast<std::streamsize>(batch.values.size() * 8));
}

PrivatizedBatch read_batch_binary(std::istream& is,
                                  const PrivacyParams& params,
                                  const BulkPartition& part) {
  char magic[4] = {};
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "LDPB", 4) != 0) {
    throw std::invalid_argument("batch binary: bad magic");
  }
  uint8_t kind = 0;
  uint64_t rows = 0;
  uint64_t cols = 0;
  is.read(reinterpret_cast<char*>(&kind), 1);
  is.read(reinterpret_cast<char*>(&rows), 8);
  is.read(reinterpret_cast<char*>(&cols), 8);
  PrivatizedBatch batch;
  batch.kind = static_cast<BatchKind>(kind);
  batch.rows = rows;
  batch.cols = cols;
  batch.params = params;
  batch.partition = part;
  batch.values.resize(rows * cols);
  is.read(reinterpret_cast<char*>(batch.values.data()),
          static_cast<std::streamsize>(batch.values.size() * 8));
  if (!is) throw std::invalid_argument("batch binary: truncated payload");
  return batch;
}

}  // namespace ldpgof
