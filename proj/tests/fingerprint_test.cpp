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

#include "headprint/fingerprint.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "headprint/fingerprint_io.hpp"
#include "headprint/io_util.hpp"
#include "test_util.hpp"

namespace headprint {
namespace {

namespace fs = std::filesystem;

SaliencyMap filled(int w, int h, double v) {
  return {w, h, 0, std::vector<double>(static_cast<std::size_t>(w) * h, v)};
}

VideoFingerprint constant_fingerprint(std::size_t frames, std::int64_t interval_ms) {
  VideoFingerprint fp{"c", interval_ms, {}};
  for (std::size_t i = 0; i < frames; ++i) {
    auto m = filled(4, 2, 1.0);
    m.t_ms = static_cast<std::int64_t>(i) * interval_ms;
    fp.maps.push_back(m);
  }
  return fp;
}

class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(fs::temp_directory_path() / ("headprint_" + name + "_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

TEST(NormalizeSaliency, UniformMap) {
  const auto n = normalize_saliency(filled(4, 2, 1.0));
  for (double c : n.cells) EXPECT_DOUBLE_EQ(c, 1.0 / 8.0);
}

TEST(NormalizeSaliency, OneHotKeepsFloor) {
  auto m = filled(4, 2, 0.0);
  m.at(1, 1) = 3.0;
  const auto n = normalize_saliency(m);
  const double eps = 3e-6;
  const double total = 3.0 + 8 * eps;
  double sum = 0.0;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 4; ++c) {
      const double expect = (c == 1 && r == 1 ? 3.0 + eps : eps) / total;
      EXPECT_NEAR(n.at(c, r), expect, 1e-15);
      EXPECT_GT(n.at(c, r), 0.0);
      sum += n.at(c, r);
    }
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_GT(n.at(1, 1), 0.99999);
}

TEST(NormalizeSaliency, AllZeroRejected) {
  try {
    normalize_saliency(filled(4, 2, 0.0));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerateSaliency);
  }
}

TEST(NormalizeSaliency, SumsToOneAndIsNearlyIdempotent) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int i = 0; i < 50; ++i) {
    auto m = filled(16, 8, 0.0);
    for (auto& c : m.cells) c = u(rng) * (u(rng) > 5.0);
    m.cells[static_cast<std::size_t>(i)] = 1.0;
    const auto once = normalize_saliency(m);
    double sum = 0.0;
    for (double c : once.cells) sum += c;
    EXPECT_NEAR(sum, 1.0, 1e-9);
    const auto twice = normalize_saliency(once);
    for (std::size_t k = 0; k < once.cells.size(); ++k) EXPECT_NEAR(twice.cells[k], once.cells[k], 1e-9);
  }
}

TEST(SynthFingerprint, Deterministic) {
  SynthSpec spec;
  spec.seed = 77;
  spec.duration_s = 5.0;
  const auto a = synth_fingerprint(spec, "v");
  const auto b = synth_fingerprint(spec, "v");
  ASSERT_EQ(a.maps.size(), b.maps.size());
  for (std::size_t i = 0; i < a.maps.size(); ++i) EXPECT_EQ(a.maps[i].cells, b.maps[i].cells);
}

TEST(SynthFingerprint, FrameGridAndDuration) {
  SynthSpec spec;
  spec.duration_s = 3.0;
  spec.frame_interval_ms = 250;
  const auto fp = synth_fingerprint(spec, "v");
  ASSERT_EQ(fp.maps.size(), 12u);
  EXPECT_EQ(fp.duration_ms(), 3000);
  EXPECT_NO_THROW(validate_fingerprint(fp));
  for (std::size_t i = 0; i < fp.maps.size(); ++i) EXPECT_EQ(fp.maps[i].t_ms, static_cast<std::int64_t>(i) * 250);
}

TEST(SynthFingerprint, StaticSingleBlob) {
  SynthSpec spec;
  spec.blob_count = 1;
  spec.drift_speed_deg_s = 0.0;
  spec.duration_s = 10.0;
  const auto fp = synth_fingerprint(spec, "v");
  for (const auto& m : fp.maps) EXPECT_EQ(m.cells, fp.maps.front().cells);
}

TEST(SynthFingerprint, DriftingBlobMoves) {
  SynthSpec spec;
  spec.blob_count = 1;
  spec.drift_speed_deg_s = 2.0;
  spec.duration_s = 30.0;
  const auto fp = synth_fingerprint(spec, "v");
  EXPECT_NE(fp.maps.front().cells, fp.maps.back().cells);
}

TEST(RenderBlobs, MassConcentratedNearEquatorialCenter) {
  const double sigma = 10.0;
  for (double az : {0.0, 90.0, 181.0, 300.0}) {
    const Vec3 center = from_spherical({az, 0.0});
    const auto m = render_blobs({{center, 1.0}}, sigma, 64, 32);
    double inside = 0.0;
    double total = 0.0;
    for (int r = 0; r < 32; ++r) {
      for (int c = 0; c < 64; ++c) {
        const double d = angle_between_deg(cell_center_direction(c, r, 64, 32), center);
        total += m.at(c, r);
        if (d <= 3 * sigma) inside += m.at(c, r);
      }
    }
    EXPECT_GE(inside / total, 0.95) << az;
  }
}

TEST(RenderBlobs, MatchesDirectGaussianOracle) {
  std::mt19937_64 rng(3);
  const Vec3 c1 = testing::random_unit(rng);
  const Vec3 c2 = testing::random_unit(rng);
  const auto m = render_blobs({{c1, 0.7}, {c2, 0.4}}, 15.0, 24, 12);
  for (int r = 0; r < 12; ++r) {
    for (int c = 0; c < 24; ++c) {
      const Vec3 p = cell_center_direction(c, r, 24, 12);
      double expect = 0.0;
      for (auto [ctr, w] : {std::pair{c1, 0.7}, std::pair{c2, 0.4}}) {
        const double d = angle_between_deg(p, ctr);
        expect += w * std::exp(-d * d / (2 * 15.0 * 15.0));
      }
      EXPECT_NEAR(m.at(c, r), expect, 1e-9);
    }
  }
}

TEST(SynthFingerprint, SeedsRarelyCollide) {
  SynthSpec spec;
  spec.duration_s = 0.5;
  int distinct = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    spec.seed = 1000 + 2 * i;
    const auto a = argmax_cell(synth_fingerprint(spec).maps.front());
    spec.seed = 1001 + 2 * i;
    const auto b = argmax_cell(synth_fingerprint(spec).maps.front());
    distinct += a != b;
  }
  EXPECT_GE(distinct, 99);
}

TEST(FingerprintLibrary, RejectsDuplicateIds) {
  FingerprintLibrary lib;
  lib.add(constant_fingerprint(2, 500));
  EXPECT_THROW(lib.add(constant_fingerprint(2, 500)), Error);
  EXPECT_EQ(lib.size(), 1u);
  EXPECT_NE(lib.find("c"), nullptr);
  EXPECT_EQ(lib.find("d"), nullptr);
}

TEST(AlignPairs, Examples) {
  const auto fp = constant_fingerprint(120, 500);
  std::vector<TraceSample> one{{0, {1, 0, 0}}};
  const auto a = align_pairs(one, fp);
  ASSERT_EQ(a.pairs.size(), 1u);
  EXPECT_EQ(a.pairs[0].map_index, 0u);

  std::vector<TraceSample> grid;
  for (std::int64_t t = 0; t < 60000; t += 500) grid.push_back({t, {1, 0, 0}});
  const auto full = align_pairs(grid, fp);
  EXPECT_EQ(full.pairs.size(), fp.maps.size());
  EXPECT_EQ(full.dropped, 0u);
  for (std::size_t i = 0; i < full.pairs.size(); ++i) EXPECT_EQ(full.pairs[i].map_index, i);
}

TEST(AlignPairs, LongerTraceHalved) {
  const auto fp = constant_fingerprint(60, 500);  // 30 s
  std::vector<TraceSample> samples;
  for (std::int64_t t = 0; t < 60000; t += 800) samples.push_back({t, {1, 0, 0}});
  const auto a = align_pairs(samples, fp);
  // Oracle: a sample survives iff t < 30000.
  std::size_t expect = 0;
  for (const auto& s : samples) expect += s.t_ms < 30000;
  EXPECT_EQ(a.pairs.size(), expect);
  EXPECT_EQ(a.dropped, samples.size() - expect);

  std::vector<TraceSample> grid;
  for (std::int64_t t = 0; t < 60000; t += 500) grid.push_back({t, {1, 0, 0}});
  const auto g = align_pairs(grid, fp);
  EXPECT_EQ(g.pairs.size(), grid.size() / 2);
  EXPECT_EQ(g.dropped, grid.size() / 2);
}

TEST(AlignPairs, NearestWithTiesToEarlier) {
  const auto fp = constant_fingerprint(4, 500);
  std::vector<TraceSample> s{{249, {1, 0, 0}}, {250, {1, 0, 0}}, {251, {1, 0, 0}}, {1999, {1, 0, 0}}};
  const auto a = align_pairs(s, fp);
  ASSERT_EQ(a.pairs.size(), 4u);
  EXPECT_EQ(a.pairs[0].map_index, 0u);
  EXPECT_EQ(a.pairs[1].map_index, 0u);
  EXPECT_EQ(a.pairs[2].map_index, 1u);
  EXPECT_EQ(a.pairs[3].map_index, 3u);
}

TEST(AlignPairs, NoOverlap) {
  const auto fp = constant_fingerprint(4, 500);
  try {
    align_pairs({{5000, {1, 0, 0}}}, fp);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNoOverlap);
  }
}

TEST(AlignPairs, PreservesOrderWithoutDuplicates) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> gap(1, 900);
  const auto fp = constant_fingerprint(40, 500);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<TraceSample> s;
    std::int64_t t = 0;
    while (t < 30000) {
      s.push_back({t, testing::random_unit(rng)});
      t += gap(rng);
    }
    const auto a = align_pairs(s, fp);
    EXPECT_EQ(a.pairs.size() + a.dropped, s.size());
    for (std::size_t i = 0; i < a.pairs.size(); ++i) {
      EXPECT_EQ(a.pairs[i].sample.t_ms, s[i].t_ms);
      if (i > 0) {
        EXPECT_GE(a.pairs[i].map_index, a.pairs[i - 1].map_index);
      }
      const auto idx = static_cast<std::int64_t>(a.pairs[i].map_index);
      // no map is closer than the chosen one
      const auto d = std::abs(s[i].t_ms - idx * 500);
      if (idx > 0) {
        EXPECT_LT(d, std::abs(s[i].t_ms - (idx - 1) * 500));
      }
      if (idx + 1 < 40) {
        EXPECT_LE(d, std::abs(s[i].t_ms - (idx + 1) * 500));
      }
    }
  }
}

TEST(Pgm, EncodeDecode) {
  PgmImage img{3, 2, {0, 1, 256, 65535, 4660, 7}};
  const auto bytes = encode_pgm16(img);
  EXPECT_EQ(bytes.substr(0, 13), "P5\n3 2\n65535\n");
  EXPECT_EQ(bytes.size(), 13u + 12u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[13 + 4]), 0x01);  // 256 big-endian
  EXPECT_EQ(static_cast<unsigned char>(bytes[13 + 5]), 0x00);
  EXPECT_EQ(decode_pgm16(bytes).pixels, img.pixels);
  EXPECT_THROW(decode_pgm16(bytes.substr(0, bytes.size() - 1)), Error);
  EXPECT_THROW(decode_pgm16("P2\n1 1\n65535\n1"), Error);
  EXPECT_THROW(decode_pgm16(std::string("P5\n1 1\n255\n\x01", 12)), Error);
}

TEST(FingerprintFiles, RoundTripIsByteExact) {
  TempDir tmp("fp_roundtrip");
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(1, 40);
  std::uniform_real_distribution<double> val(0.0, 1e3);
  for (int i = 0; i < 20; ++i) {
    VideoFingerprint fp;
    if (i % 2 == 0) {
      SynthSpec spec;
      spec.seed = static_cast<std::uint64_t>(i) + 1;
      spec.width = dim(rng);
      spec.height = dim(rng);
      spec.duration_s = 2.0;
      fp = synth_fingerprint(spec, "synth_" + std::to_string(i));
    } else {
      const int w = dim(rng);
      const int h = dim(rng);
      fp.video_id = "rand_" + std::to_string(i);
      fp.frame_interval_ms = 1 + i * 37;
      for (int k = 0; k < 1 + i % 4; ++k) {
        SaliencyMap m{w, h, k * fp.frame_interval_ms, std::vector<double>(static_cast<std::size_t>(w) * h)};
        for (auto& c : m.cells) c = val(rng);
        fp.maps.push_back(m);
      }
    }
    const auto d1 = tmp.path() / ("a" + std::to_string(i));
    const auto d2 = tmp.path() / ("b" + std::to_string(i));
    save_fingerprint(fp, d1);
    const auto loaded = load_fingerprint(d1);
    EXPECT_EQ(loaded.video_id, fp.video_id);
    EXPECT_EQ(loaded.maps.size(), fp.maps.size());
    EXPECT_EQ(fingerprint_scale_max(loaded), fingerprint_scale_max(fp));
    // Quantization error is at most half a level.
    const double level = fingerprint_scale_max(fp) / 65535.0;
    for (std::size_t k = 0; k < fp.maps.size(); ++k) {
      for (std::size_t c = 0; c < fp.maps[k].cells.size(); ++c) {
        EXPECT_LE(std::abs(loaded.maps[k].cells[c] - fp.maps[k].cells[c]), 0.5 * level + 1e-12);
      }
    }
    save_fingerprint(loaded, d2);
    for (const auto& entry : fs::directory_iterator(d1)) {
      EXPECT_EQ(io::read_file(entry.path()), io::read_file(d2 / entry.path().filename()))
          << entry.path();
    }
  }
}

TEST(FingerprintFiles, LibraryRoundTrip) {
  TempDir tmp("lib_roundtrip");
  FingerprintLibrary lib;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    SynthSpec spec;
    spec.seed = s;
    spec.duration_s = 1.0;
    lib.add(synth_fingerprint(spec, "video_" + std::to_string(s)));
  }
  save_library(lib, tmp.path() / "lib");
  const auto back = load_library(tmp.path() / "lib");
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[2].video_id, "video_3");
  save_library(back, tmp.path() / "lib2");
  EXPECT_EQ(io::read_file(tmp.path() / "lib" / "library.json"),
            io::read_file(tmp.path() / "lib2" / "library.json"));
}

TEST(FingerprintFiles, LoadRejectsMismatches) {
  TempDir tmp("fp_reject");
  SynthSpec spec;
  spec.duration_s = 2.0;
  spec.width = 8;
  spec.height = 4;
  const auto fp = synth_fingerprint(spec, "v");
  const auto dir = tmp.path() / "v";

  auto expect_format_error = [&] {
    try {
      load_fingerprint(dir);
      ADD_FAILURE() << "expected an error";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kFormat) << e.what();
    }
  };

  save_fingerprint(fp, dir);
  fs::remove(dir / frame_file_name(1));
  expect_format_error();

  save_fingerprint(fp, dir);
  io::write_file(dir / frame_file_name(fp.maps.size()), io::read_file(dir / frame_file_name(0)));
  expect_format_error();
  fs::remove(dir / frame_file_name(fp.maps.size()));

  save_fingerprint(fp, dir);
  io::write_file(dir / frame_file_name(2), encode_pgm16({4, 8, std::vector<std::uint16_t>(32, 1)}));
  expect_format_error();

  save_fingerprint(fp, dir);
  io::write_file(dir / "manifest.json", "{\"video_id\": \"v\"}");
  expect_format_error();
}

}  // namespace
}  // namespace headprint
