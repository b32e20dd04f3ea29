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

// On-disk fingerprints.
//
//   <library>/library.json            {"fingerprints": ["<dir>", ...]}
//   <library>/<dir>/manifest.json     {video_id, width, height,
//                                      frame_interval_ms, frame_count, scale_max}
//   <library>/<dir>/frame_000000.pgm  binary PGM (P5), maxval 65535,
//                                     big-endian samples,
//                                     value = round(65535 * cell / scale_max)

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "headprint/error.hpp"
#include "headprint/fingerprint.hpp"
#include "headprint/io_util.hpp"

namespace headprint {

struct PgmImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> pixels;
};

inline std::string encode_pgm16(const PgmImage& img) {
  std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n65535\n";
  out.reserve(out.size() + img.pixels.size() * 2);
  for (auto p : img.pixels) {
    out += static_cast<char>((p >> 8) & 0xff);
    out += static_cast<char>(p & 0xff);
  }
  return out;
}

inline PgmImage decode_pgm16(std::string_view data) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < data.size()) {
      if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (data[pos] == ' ' || data[pos] == '\n' || data[pos] == '\r' || data[pos] == '\t') {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto token = [&]() -> std::string_view {
    skip_space();
    const std::size_t start = pos;
    while (pos < data.size() && data[pos] != ' ' && data[pos] != '\n' && data[pos] != '\r' &&
           data[pos] != '\t') {
      ++pos;
    }
    return data.substr(start, pos - start);
  };
  if (token() != "P5") fail(ErrorKind::kFormat, "not a binary PGM (P5)");
  PgmImage img;
  img.width = static_cast<int>(io::parse_int(token(), "PGM width"));
  img.height = static_cast<int>(io::parse_int(token(), "PGM height"));
  const auto maxval = io::parse_int(token(), "PGM maxval");
  if (img.width < 1 || img.height < 1) fail(ErrorKind::kFormat, "PGM dimensions must be positive");
  if (maxval != 65535) fail(ErrorKind::kFormat, "PGM must be 16-bit (maxval 65535)");
  ++pos;  // single whitespace byte before the raster
  const std::size_t n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  if (data.size() < pos || data.size() - pos != 2 * n) {
    fail(ErrorKind::kFormat, "PGM raster size does not match its header");
  }
  img.pixels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto hi = static_cast<unsigned char>(data[pos + 2 * i]);
    const auto lo = static_cast<unsigned char>(data[pos + 2 * i + 1]);
    img.pixels[i] = static_cast<std::uint16_t>((hi << 8) | lo);
  }
  return img;
}

inline std::string frame_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06zu.pgm", index);
  return buf;
}

inline double fingerprint_scale_max(const VideoFingerprint& fp) {
  double peak = 0.0;
  for (const auto& m : fp.maps) {
    for (double c : m.cells) peak = std::max(peak, c);
  }
  return peak;
}

inline void save_fingerprint(const VideoFingerprint& fp, const std::filesystem::path& dir) {
  validate_fingerprint(fp);
  const double scale = fingerprint_scale_max(fp);
  if (!(scale > 0.0)) fail(ErrorKind::kDegenerateSaliency, "fingerprint '" + fp.video_id + "' is all zero");
  io::ensure_directory(dir);
  nlohmann::ordered_json manifest;
  manifest["video_id"] = fp.video_id;
  manifest["width"] = fp.width();
  manifest["height"] = fp.height();
  manifest["frame_interval_ms"] = fp.frame_interval_ms;
  manifest["frame_count"] = fp.maps.size();
  manifest["scale_max"] = scale;
  io::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  for (std::size_t i = 0; i < fp.maps.size(); ++i) {
    const auto& m = fp.maps[i];
    PgmImage img{m.width, m.height, std::vector<std::uint16_t>(m.cells.size())};
    for (std::size_t k = 0; k < m.cells.size(); ++k) {
      img.pixels[k] = static_cast<std::uint16_t>(std::lround(65535.0 * m.cells[k] / scale));
    }
    io::write_file(dir / frame_file_name(i), encode_pgm16(img));
  }
}

inline VideoFingerprint load_fingerprint(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(io::read_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, (dir / "manifest.json").string() + ": " + e.what());
  }
  VideoFingerprint fp;
  int width = 0;
  int height = 0;
  std::size_t count = 0;
  double scale = 0.0;
  try {
    fp.video_id = manifest.at("video_id").get<std::string>();
    width = manifest.at("width").get<int>();
    height = manifest.at("height").get<int>();
    fp.frame_interval_ms = manifest.at("frame_interval_ms").get<std::int64_t>();
    count = manifest.at("frame_count").get<std::size_t>();
    scale = manifest.at("scale_max").get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, (dir / "manifest.json").string() + ": " + e.what());
  }
  if (!(scale > 0.0)) fail(ErrorKind::kFormat, dir.string() + ": scale_max must be positive");
  if (count == 0) fail(ErrorKind::kFormat, dir.string() + ": frame_count must be positive");
  if (std::filesystem::exists(dir / frame_file_name(count))) {
    fail(ErrorKind::kFormat, dir.string() + ": more frames on disk than frame_count");
  }
  fp.maps.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto path = dir / frame_file_name(i);
    if (!std::filesystem::exists(path)) {
      fail(ErrorKind::kFormat, dir.string() + ": frame_count says " + std::to_string(count) +
                                   " but " + path.filename().string() + " is missing");
    }
    PgmImage img;
    try {
      img = decode_pgm16(io::read_file(path));
    } catch (const Error& e) {
      throw Error(e.kind(), path.string() + ": " + e.what());
    }
    if (img.width != width || img.height != height) {
      fail(ErrorKind::kFormat, path.string() + ": dimensions do not match manifest");
    }
    SaliencyMap m{width, height, static_cast<std::int64_t>(i) * fp.frame_interval_ms,
                  std::vector<double>(img.pixels.size())};
    for (std::size_t k = 0; k < img.pixels.size(); ++k) {
      // Dividing first keeps the full-scale value exactly equal to scale_max.
      m.cells[k] = scale * (static_cast<double>(img.pixels[k]) / 65535.0);
    }
    fp.maps.push_back(std::move(m));
  }
  validate_fingerprint(fp);
  return fp;
}

inline void save_library(const FingerprintLibrary& lib, const std::filesystem::path& dir) {
  io::ensure_directory(dir);
  nlohmann::ordered_json index;
  index["fingerprints"] = nlohmann::ordered_json::array();
  for (const auto& e : lib.entries()) {
    const auto& id = e->video_id;
    if (id.empty() || id.find_first_of("/\\") != std::string::npos || id == "." || id == "..") {
      fail(ErrorKind::kInvalidArgument, "video id '" + id + "' is not usable as a directory name");
    }
    save_fingerprint(*e, dir / id);
    index["fingerprints"].push_back(id);
  }
  io::write_file(dir / "library.json", index.dump(2) + "\n");
}

inline FingerprintLibrary load_library(const std::filesystem::path& dir) {
  nlohmann::json index;
  std::vector<std::string> subdirs;
  try {
    index = nlohmann::json::parse(io::read_file(dir / "library.json"));
    subdirs = index.at("fingerprints").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, (dir / "library.json").string() + ": " + e.what());
  }
  FingerprintLibrary lib;
  for (const auto& sub : subdirs) lib.add(load_fingerprint(dir / sub));
  return lib;
}

}  // namespace headprint
