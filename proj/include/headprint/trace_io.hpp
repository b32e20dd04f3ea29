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

// Trace CSV: header `t_ms,x,y,z,frame`, one sample per row, LF endings.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "headprint/io_util.hpp"
#include "headprint/trace.hpp"

namespace headprint {

inline constexpr std::string_view kTraceCsvHeader = "t_ms,x,y,z,frame";

inline std::string trace_to_csv(const HeadMovementTrace& trace) {
  std::string out(kTraceCsvHeader);
  out += '\n';
  const auto tag = to_string(trace.frame);
  for (const auto& s : trace.samples) {
    out += std::to_string(s.t_ms);
    for (double c : {s.v.x, s.v.y, s.v.z}) {
      out += ',';
      out += io::format_double(c);
    }
    out += ',';
    out += tag;
    out += '\n';
  }
  return out;
}

/// Rejects mixed frame tags, non-monotone timestamps and vectors more than
/// 1e-6 away from unit length.
inline HeadMovementTrace trace_from_csv(std::string_view text, std::string session_id = {}) {
  HeadMovementTrace trace;
  trace.session_id = std::move(session_id);
  bool header_seen = false;
  bool frame_seen = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      fail(ErrorKind::kFormat, "trace CSV must use LF line endings");
    }
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kTraceCsvHeader) {
        fail(ErrorKind::kFormat, "trace CSV header must be '" + std::string(kTraceCsvHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto f = io::split(line, ',');
    if (f.size() != 5) {
      fail(ErrorKind::kFormat, "line " + std::to_string(line_no) + ": expected 5 fields");
    }
    const Frame frame = parse_frame(f[4]);
    if (frame_seen && frame != trace.frame) {
      fail(ErrorKind::kFormat, "line " + std::to_string(line_no) + ": mixed frame tags");
    }
    trace.frame = frame;
    frame_seen = true;
    trace.samples.push_back({io::parse_int(f[0], "t_ms"),
                             {io::parse_double(f[1], "x"), io::parse_double(f[2], "y"),
                              io::parse_double(f[3], "z")}});
  }
  if (!header_seen) fail(ErrorKind::kFormat, "trace CSV is missing its header");
  validate_trace(trace);
  return trace;
}

inline void save_trace_csv(const HeadMovementTrace& trace, const std::filesystem::path& path) {
  io::write_file(path, trace_to_csv(trace));
}

inline HeadMovementTrace load_trace_csv(const std::filesystem::path& path) {
  try {
    return trace_from_csv(io::read_file(path), path.stem().string());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kIo) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace headprint
