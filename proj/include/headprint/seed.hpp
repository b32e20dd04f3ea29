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

#pragma once

#include <cstdint>
#include <initializer_list>

namespace headprint {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Index-addressed seed derivation: the result depends only on the master
/// seed and the coordinates, never on how many other seeds were drawn.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(master);
  for (auto p : path) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

/// Seed namespaces; keep calibration and test victims disjoint.
enum class SeedDomain : std::uint64_t {
  kVideo = 1,
  kTestVictim = 2,
  kCalibrationVictim = 3,
  kTestNoise = 4,
  kCalibrationNoise = 5,
  kCalibrationVideo = 6,
};

constexpr std::uint64_t derive_seed(std::uint64_t master, SeedDomain domain, std::uint64_t a,
                                    std::uint64_t b = 0) {
  return derive_seed(master, {static_cast<std::uint64_t>(domain), a, b});
}

}  // namespace headprint
