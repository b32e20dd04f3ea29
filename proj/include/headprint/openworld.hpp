// Copyright 2026 The headprint Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Bayesian detection rate for open-world identification.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>

#include <nlohmann/json.hpp>

#include "headprint/error.hpp"

namespace headprint {

struct DetectionStats {
  double tpr = 0.0;
  double fpr = 0.0;
  std::int64_t positives = 0;
  std::int64_t negatives = 1;
};

struct OpenWorldReport {
  double tpr = 0.0;
  double fpr = 0.0;
  double base = 1.0;
  double bdr = 0.0;
  std::int64_t in_lib_count = 0;
  std::int64_t total_count = 0;
};

/// FPR implied by a TPR when every identification attempt meets P positive
/// and N negative matches: (1 - TPR) * P / N.
inline double fpr_from_tpr(double tpr, std::int64_t positives, std::int64_t negatives) {
  if (negatives < 1) fail(ErrorKind::kInvalidArgument, "N must be >= 1");
  if (positives < 0) fail(ErrorKind::kInvalidArgument, "P must be >= 0");
  if (!(tpr >= 0.0 && tpr <= 1.0)) fail(ErrorKind::kInvalidArgument, "TPR must lie in [0, 1]");
  return (1.0 - tpr) * static_cast<double>(positives) / static_cast<double>(negatives);
}

/// Probability that a test video is in the library.
inline double base_rate(std::int64_t in_lib, std::int64_t total) {
  if (in_lib < 1 || in_lib > total) {
    fail(ErrorKind::kInvalidArgument, "base rate needs 1 <= in_lib <= total");
  }
  return static_cast<double>(in_lib) / static_cast<double>(total);
}

inline double bdr(double tpr, double fpr, double base) {
  for (double v : {tpr, fpr, base}) {
    if (!(v >= 0.0 && v <= 1.0)) fail(ErrorKind::kInvalidArgument, "BDR inputs must lie in [0, 1]");
  }
  const double hit = tpr * base;
  const double denom = hit + fpr * (1.0 - base);
  if (!(denom > 0.0)) fail(ErrorKind::kDegenerate, "BDR denominator is zero");
  return hit / denom;
}

/// Nearest double to x printed with `digits` significant digits.
inline double round_significant(double x, int digits = 4) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*e", digits - 1, x);
  return std::stod(buf);
}

inline OpenWorldReport make_report(double tpr, double fpr, double base) {
  return {tpr, fpr, base, bdr(tpr, fpr, base), 0, 0};
}

/// Report values are rounded to 4 significant digits.
inline nlohmann::ordered_json to_json(const OpenWorldReport& r) {
  nlohmann::ordered_json j;
  j["tpr"] = round_significant(r.tpr);
  j["fpr"] = round_significant(r.fpr);
  j["base"] = round_significant(r.base);
  j["bdr"] = round_significant(r.bdr);
  if (r.total_count > 0) {
    j["in_lib_count"] = r.in_lib_count;
    j["total_count"] = r.total_count;
  }
  return j;
}

}  // namespace headprint
