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

#include "headprint/openworld.hpp"

#include <gtest/gtest.h>

#include <random>

namespace headprint {
namespace {

TEST(FprFromTpr, Examples) {
  EXPECT_EQ(fpr_from_tpr(1.0, 1, 634), 0.0);
  EXPECT_NEAR(fpr_from_tpr(0.96, 1, 634), 6.31e-5, 5e-8);
  EXPECT_NEAR(fpr_from_tpr(0.5, 100, 100), 0.5, 1e-15);
  // The other candidate derivation from the training-set counts.
  EXPECT_NEAR(fpr_from_tpr(0.96, 1152, 23392), 0.00197, 5e-6);
  for (std::int64_t p : {0, 1, 7, 1000}) {
    for (std::int64_t n : {1, 2, 634, 100000}) EXPECT_EQ(fpr_from_tpr(1.0, p, n), 0.0);
  }
  try {
    fpr_from_tpr(0.9, 1, 0);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidArgument);
  }
}

TEST(BaseRate, Examples) {
  EXPECT_DOUBLE_EQ(base_rate(635, 635000), 0.001);
  EXPECT_DOUBLE_EQ(base_rate(635, 2540000), 0.00025);
  EXPECT_EQ(base_rate(12, 12), 1.0);
  EXPECT_THROW(base_rate(0, 10), Error);
  EXPECT_THROW(base_rate(11, 10), Error);
}

TEST(Bdr, ReferenceOperatingPoints) {
  EXPECT_NEAR(bdr(0.96, 0.000068, 0.001), 0.93, 0.005);
  EXPECT_NEAR(bdr(0.96, 0.000068, 0.00025), 0.78, 0.005);
  EXPECT_EQ(round_significant(bdr(0.96, 0.000068, 0.001)), 0.9339);
  EXPECT_EQ(round_significant(bdr(0.96, 0.000068, 0.00025)), 0.7793);
}

TEST(Bdr, ClosedWorldAndZeroFpr) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(1e-6, 1.0);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(bdr(u(rng), u(rng), 1.0), 1.0);
    EXPECT_EQ(bdr(u(rng), 0.0, u(rng)), 1.0);
  }
}

TEST(Bdr, DegenerateDenominator) {
  try {
    bdr(0.0, 0.0, 0.5);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerate);
  }
  EXPECT_THROW(bdr(1.2, 0.1, 0.5), Error);
  EXPECT_THROW(bdr(0.5, -0.1, 0.5), Error);
}

TEST(Bdr, Monotone) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int i = 0; i < 1000; ++i) {
    const double t = u(rng);
    const double f = u(rng);
    const double b = u(rng);
    const double d = 0.005;
    const double at = bdr(t, f, b);
    EXPECT_GT(bdr(t, f, b + d), at);
    EXPECT_GT(bdr(t + d, f, b), at);
    EXPECT_LT(bdr(t, f + d, b), at);
  }
}

TEST(RoundSignificant, FourDigits) {
  EXPECT_EQ(round_significant(0.93394), 0.9339);
  EXPECT_EQ(round_significant(6.309148e-5), 6.309e-5);
  EXPECT_EQ(round_significant(123456.0), 123500.0);
  EXPECT_EQ(round_significant(0.0), 0.0);
  EXPECT_EQ(round_significant(1.0), 1.0);
}

TEST(OpenWorldReport, Json) {
  auto r = make_report(0.96, 0.000068, 0.001);
  const auto j = to_json(r);
  EXPECT_EQ(j.dump(), R"({"tpr":0.96,"fpr":6.8e-05,"base":0.001,"bdr":0.9339})");
  r.in_lib_count = 635;
  r.total_count = 635000;
  EXPECT_EQ(to_json(r)["total_count"].get<std::int64_t>(), 635000);
}

}  // namespace
}  // namespace headprint
