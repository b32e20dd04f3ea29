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

// End-to-end identification experiments over synthetic libraries.
//
// Seeds: every random stream is derive_seed(master_seed, domain, i, j) for
// a fixed domain and index pair, so adding videos or victims never changes
// the outcome of an existing (video, victim) cell, and calibration victims
// never share a seed with test victims.

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "headprint/error.hpp"
#include "headprint/fingerprint.hpp"
#include "headprint/io_util.hpp"
#include "headprint/matcher.hpp"
#include "headprint/seed.hpp"
#include "headprint/simulate.hpp"
#include "headprint/trace.hpp"

namespace headprint {

struct CalibrationSettings {
  int traces = 20;
  double lr = 0.5;
  int epochs = 1000;
};

struct ExperimentConfig {
  int library_size = 50;
  int videos_tested = 10;  // the first videos_tested library entries are attacked
  SynthSpec synth;
  VictimParams victim;
  NoiseSpec noise = calibrated_estimation_noise();
  std::vector<double> T_list_s{60.0};
  std::vector<double> tau_list_s{0.8};
  int victims_per_video = 10;
  int k_max = 3;
  double window_start_s = 0.0;
  double smoothing_sigma_px = -1.0;  // negative: derive from the modeled yaw error
  CalibrationSettings calibration;
  std::uint64_t master_seed = 1;
  std::string output_dir;
};

inline void validate(const ExperimentConfig& c) {
  auto bad = [](const std::string& what) { fail(ErrorKind::kInvalidArgument, "config: " + what); };
  if (c.library_size < 1) bad("library_size must be >= 1");
  if (c.videos_tested < 1 || c.videos_tested > c.library_size) bad("videos_tested must be in [1, library_size]");
  if (c.victims_per_video < 0) bad("victims_per_video must be >= 0");
  if (c.k_max < 1) bad("k_max must be >= 1");
  if (c.T_list_s.empty()) bad("T_list_s must be nonempty");
  if (c.tau_list_s.empty()) bad("tau_list_s must be nonempty");
  for (double t : c.T_list_s) {
    if (!(t > 0.0)) bad("recording lengths must be positive");
  }
  for (double t : c.tau_list_s) {
    if (!(t > 0.0)) bad("sampling intervals must be positive");
  }
  if (!(c.window_start_s >= 0.0)) bad("window_start_s must be >= 0");
  if (c.calibration.traces < 1 || c.calibration.epochs < 0 || !(c.calibration.lr > 0.0)) {
    bad("invalid calibration settings");
  }
  validate(c.synth);
}

namespace detail {

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline SynthSpec synth_spec_from_json(const nlohmann::json& j, SynthSpec s = {}) {
  detail::read_opt(j, "blob_count", s.blob_count);
  detail::read_opt(j, "blob_sigma_deg", s.blob_sigma_deg);
  detail::read_opt(j, "drift_speed_deg_s", s.drift_speed_deg_s);
  detail::read_opt(j, "duration_s", s.duration_s);
  detail::read_opt(j, "frame_interval_ms", s.frame_interval_ms);
  detail::read_opt(j, "width", s.width);
  detail::read_opt(j, "height", s.height);
  detail::read_opt(j, "seed", s.seed);
  return s;
}

inline VictimParams victim_params_from_json(const nlohmann::json& j, VictimParams p = {}) {
  detail::read_opt(j, "switch_prob_per_s", p.switch_prob_per_s);
  detail::read_opt(j, "max_speed_deg_s", p.max_speed_deg_s);
  detail::read_opt(j, "jitter_sigma_deg", p.jitter_sigma_deg);
  detail::read_opt(j, "sample_period_ms", p.sample_period_ms);
  detail::read_opt(j, "seed", p.seed);
  return p;
}

inline NoiseSpec noise_spec_from_json(const nlohmann::json& j, NoiseSpec n = {}) {
  detail::read_opt(j, "yaw_sigma_deg", n.yaw_sigma_deg);
  detail::read_opt(j, "pitch_sigma_deg", n.pitch_sigma_deg);
  detail::read_opt(j, "drift_rate_deg_s", n.drift_rate_deg_s);
  detail::read_opt(j, "drift_offset_deg", n.drift_offset_deg);
  detail::read_opt(j, "seed", n.seed);
  return n;
}

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    detail::read_opt(j, "library_size", c.library_size);
    c.videos_tested = c.library_size;
    detail::read_opt(j, "videos_tested", c.videos_tested);
    if (j.contains("synth")) c.synth = synth_spec_from_json(j.at("synth"));
    if (j.contains("victim")) c.victim = victim_params_from_json(j.at("victim"));
    if (j.contains("noise")) c.noise = noise_spec_from_json(j.at("noise"), c.noise);
    detail::read_opt(j, "T_list_s", c.T_list_s);
    detail::read_opt(j, "tau_list_s", c.tau_list_s);
    detail::read_opt(j, "victims_per_video", c.victims_per_video);
    detail::read_opt(j, "k_max", c.k_max);
    detail::read_opt(j, "window_start_s", c.window_start_s);
    detail::read_opt(j, "smoothing_sigma_px", c.smoothing_sigma_px);
    if (j.contains("calibration")) {
      const auto& cal = j.at("calibration");
      detail::read_opt(cal, "traces", c.calibration.traces);
      detail::read_opt(cal, "lr", c.calibration.lr);
      detail::read_opt(cal, "epochs", c.calibration.epochs);
    }
    detail::read_opt(j, "master_seed", c.master_seed);
    detail::read_opt(j, "output_dir", c.output_dir);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, std::string("experiment config: ") + e.what());
  }
  validate(c);
  return c;
}

inline MatchConfig match_config_for(const ExperimentConfig& c) {
  MatchConfig m;
  m.map_width = c.synth.width;
  m.map_height = c.synth.height;
  m.tau_s = c.tau_list_s.front();
  // Smoothing follows the modeled yaw error: sigma * sqrt(2 / pi) is its MAE.
  m.smoothing_sigma_px = c.smoothing_sigma_px >= 0.0
                             ? c.smoothing_sigma_px
                             : default_smoothing_sigma(c.synth.width,
                                                       c.noise.yaw_sigma_deg * std::sqrt(2.0 / std::numbers::pi));
  return m;
}

struct TrialRow {
  std::string video_id;
  int victim = 0;
  std::uint64_t victim_seed = 0;
  double T_s = 0.0;
  double tau_s = 0.0;
  std::size_t rank_of_truth = 0;
  bool top1 = false;
  bool top2 = false;
  bool top3 = false;
};

struct AccuracyCell {
  double T_s = 0.0;
  double tau_s = 0.0;
  std::size_t trials = 0;
  double top1 = 0.0;
  double top2 = 0.0;
  double top3 = 0.0;
};

struct ExperimentReport {
  std::uint64_t master_seed = 0;
  int library_size = 0;
  Calibrator calibrator;
  std::vector<TrialRow> rows;
  std::vector<AccuracyCell> cells;  // one per (T, tau), in config order
};

/// Mean indicator columns grouped by (T, tau), in first-appearance order.
inline std::vector<AccuracyCell> aggregate(const std::vector<TrialRow>& rows) {
  std::vector<AccuracyCell> cells;
  std::map<std::pair<double, double>, std::size_t> index;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.T_s, r.tau_s);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, cells.size()).first;
      cells.push_back({r.T_s, r.tau_s, 0, 0.0, 0.0, 0.0});
    }
    auto& c = cells[it->second];
    ++c.trials;
    c.top1 += r.top1;
    c.top2 += r.top2;
    c.top3 += r.top3;
  }
  for (auto& c : cells) {
    const double n = static_cast<double>(c.trials);
    c.top1 /= n;
    c.top2 /= n;
    c.top3 /= n;
  }
  return cells;
}

/// Cell for (T, tau), or nullptr.
inline const AccuracyCell* find_cell(const ExperimentReport& r, double T_s, double tau_s) {
  for (const auto& c : r.cells) {
    if (c.T_s == T_s && c.tau_s == tau_s) return &c;
  }
  return nullptr;
}

namespace detail {

/// Noisy, drifted, drift-corrected observation of a victim's trace over [t0, t0 + T).
inline HeadMovementTrace observe_window(const HeadMovementTrace& clean_noisy, const DriftModel& drift,
                                        double t0_s, double T_s) {
  const HeadMovementTrace drifted = inject_yaw_drift(clean_noisy, drift);
  // Exact anchors at both window ends, as residuals against a known true yaw.
  const YawAnchor a{t0_s, wrap_deg(drift.at(t0_s))};
  const YawAnchor b{t0_s + T_s, wrap_deg(drift.at(t0_s + T_s))};
  const HeadMovementTrace corrected = remove_yaw_drift(drifted, fit_yaw_drift(a, b));
  return window(corrected, seconds_to_ms(t0_s), T_s);
}

inline HeadMovementTrace victim_observation(const VideoFingerprint& fp, const ExperimentConfig& c,
                                            std::uint64_t victim_seed, std::uint64_t noise_seed) {
  VictimParams vp = c.victim;
  vp.seed = victim_seed;
  NoiseSpec ns = c.noise;
  ns.seed = noise_seed;
  return inject_estimation_noise(simulate_victim(fp, vp), ns);
}

}  // namespace detail

inline FingerprintLibrary synth_library(const SynthSpec& base, int size, std::uint64_t master_seed) {
  FingerprintLibrary lib;
  for (int i = 0; i < size; ++i) {
    SynthSpec s = base;
    s.seed = derive_seed(master_seed, SeedDomain::kVideo, static_cast<std::uint64_t>(i));
    char id[32];
    std::snprintf(id, sizeof(id), "video_%03d", i);
    lib.add(synth_fingerprint(s, id));
  }
  return lib;
}

/// Trains the calibrator on held-out victims: each calibration trace is a
/// positive against its own video and a negative against every other one.
inline Calibrator calibrate_on_library(const ExperimentConfig& c, const FingerprintLibrary& lib,
                                       const PreparedLibrary& prepared, const MatchConfig& mcfg) {
  if (lib.size() < 2) return Calibrator{1.0, 0.0, 0.0, 1.0, config_hash(mcfg)};
  const double T_max = *std::max_element(c.T_list_s.begin(), c.T_list_s.end());
  const DriftModel drift{c.noise.drift_rate_deg_s, c.noise.drift_offset_deg};
  std::vector<double> scores;
  std::vector<int> labels;
  for (int k = 0; k < c.calibration.traces; ++k) {
    const auto v = static_cast<std::size_t>(k) % lib.size();
    const auto obs = detail::victim_observation(
        lib[v], c, derive_seed(c.master_seed, SeedDomain::kCalibrationVictim, static_cast<std::uint64_t>(k)),
        derive_seed(c.master_seed, SeedDomain::kCalibrationNoise, static_cast<std::uint64_t>(k)));
    const auto window = detail::observe_window(obs, drift, c.window_start_s, T_max);
    const auto s = prepared.score_all(window, {std::nullopt, seconds_to_ms(c.window_start_s)});
    for (std::size_t i = 0; i < s.size(); ++i) {
      scores.push_back(s[i].raw);
      labels.push_back(i == v ? 1 : 0);
    }
  }
  return fit_calibrator(scores, labels, c.calibration.lr, c.calibration.epochs, config_hash(mcfg))
      .calibrator;
}

inline ExperimentReport run_experiment(const ExperimentConfig& c) {
  validate(c);
  const FingerprintLibrary lib = synth_library(c.synth, c.library_size, c.master_seed);
  const MatchConfig mcfg = match_config_for(c);
  const PreparedLibrary prepared(lib, mcfg);

  ExperimentReport report;
  report.master_seed = c.master_seed;
  report.library_size = c.library_size;
  report.calibrator = calibrate_on_library(c, lib, prepared, mcfg);

  const DriftModel drift{c.noise.drift_rate_deg_s, c.noise.drift_offset_deg};
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(c.k_max), lib.size());
  const std::int64_t offset_ms = seconds_to_ms(c.window_start_s);
  for (int v = 0; v < c.videos_tested; ++v) {
    const auto& fp = lib[static_cast<std::size_t>(v)];
    for (int j = 0; j < c.victims_per_video; ++j) {
      const auto vi = static_cast<std::uint64_t>(v);
      const auto ji = static_cast<std::uint64_t>(j);
      const auto victim_seed = derive_seed(c.master_seed, SeedDomain::kTestVictim, vi, ji);
      const auto obs = detail::victim_observation(
          fp, c, victim_seed, derive_seed(c.master_seed, SeedDomain::kTestNoise, vi, ji));
      for (double T : c.T_list_s) {
        const auto window = detail::observe_window(obs, drift, c.window_start_s, T);
        for (double tau : c.tau_list_s) {
          const auto ranking = prepared.identify(window, report.calibrator, k, {tau, offset_ms});
          const auto rank = ranking.rank_of(fp.video_id).value_or(lib.size() + 1);
          report.rows.push_back({fp.video_id, j, victim_seed, T, tau, rank, rank <= 1, rank <= 2, rank <= 3});
        }
      }
    }
  }
  report.cells = aggregate(report.rows);
  return report;
}

inline constexpr std::string_view kTrialsCsvHeader =
    "video_id,victim,victim_seed,T_s,tau_s,rank_of_truth,top1,top2,top3";

inline std::string trials_csv(const ExperimentReport& r) {
  std::string out =
      "# headprint identification trials, one row per (video, victim, T, tau)\n"
      "# video_id: attacked library video; victim: victim index; victim_seed: derived seed\n"
      "# T_s: recording length (s); tau_s: sampling interval (s)\n"
      "# rank_of_truth: 1-based rank of the attacked video; top1..top3: 1 if rank <= k\n";
  out += kTrialsCsvHeader;
  out += '\n';
  for (const auto& t : r.rows) {
    out += t.video_id + "," + std::to_string(t.victim) + "," + std::to_string(t.victim_seed) + "," +
           io::format_double(t.T_s) + "," + io::format_double(t.tau_s) + "," +
           std::to_string(t.rank_of_truth) + "," + (t.top1 ? "1" : "0") + "," + (t.top2 ? "1" : "0") +
           "," + (t.top3 ? "1" : "0") + "\n";
  }
  return out;
}

inline std::vector<TrialRow> parse_trials_csv(std::string_view text) {
  std::vector<TrialRow> rows;
  bool header = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line != kTrialsCsvHeader) fail(ErrorKind::kFormat, "unexpected trials.csv header");
      header = true;
      continue;
    }
    const auto f = io::split(line, ',');
    if (f.size() != 9) fail(ErrorKind::kFormat, "trials.csv row must have 9 fields");
    TrialRow t;
    t.video_id = std::string(f[0]);
    t.victim = static_cast<int>(io::parse_int(f[1], "victim"));
    t.victim_seed = io::parse_uint(f[2], "victim_seed");
    t.T_s = io::parse_double(f[3], "T_s");
    t.tau_s = io::parse_double(f[4], "tau_s");
    t.rank_of_truth = static_cast<std::size_t>(io::parse_int(f[5], "rank_of_truth"));
    t.top1 = f[6] == "1";
    t.top2 = f[7] == "1";
    t.top3 = f[8] == "1";
    rows.push_back(std::move(t));
  }
  return rows;
}

namespace detail {

/// Accuracy marginalized over one sweep axis.
inline std::string sweep_csv(const std::vector<TrialRow>& rows, bool by_T) {
  const char* axis = by_T ? "T_s" : "tau_s";
  std::string out = std::string("# top-k accuracy per ") + axis +
                    ", pooled over all other sweep axes\n"
                    "# trials: trial count; top1..top3: fraction of trials with the truth within top k\n";
  out += std::string(axis) + ",trials,top1,top2,top3\n";
  std::vector<TrialRow> keyed = rows;
  for (auto& r : keyed) {
    if (by_T) {
      r.tau_s = 0.0;
    } else {
      r.T_s = 0.0;
    }
  }
  for (const auto& c : aggregate(keyed)) {
    out += io::format_double(by_T ? c.T_s : c.tau_s) + "," + std::to_string(c.trials) + "," +
           io::format_double(c.top1) + "," + io::format_double(c.top2) + "," + io::format_double(c.top3) +
           "\n";
  }
  return out;
}

}  // namespace detail

inline nlohmann::ordered_json summary_json(const ExperimentReport& r) {
  nlohmann::ordered_json j;
  j["master_seed"] = r.master_seed;
  j["library_size"] = r.library_size;
  j["trials"] = r.rows.size();
  j["calibrator"] = to_json(r.calibrator);
  j["cells"] = nlohmann::ordered_json::array();
  for (const auto& c : r.cells) {
    nlohmann::ordered_json e;
    e["T_s"] = c.T_s;
    e["tau_s"] = c.tau_s;
    e["trials"] = c.trials;
    e["top1"] = c.top1;
    e["top2"] = c.top2;
    e["top3"] = c.top3;
    j["cells"].push_back(std::move(e));
  }
  return j;
}

/// Writes trials.csv, summary.json, sweep_T.csv and sweep_tau.csv.
inline void emit_report(const ExperimentReport& r, const std::filesystem::path& dir) {
  io::ensure_directory(dir);
  io::write_file(dir / "trials.csv", trials_csv(r));
  io::write_file(dir / "summary.json", summary_json(r).dump(2) + "\n");
  io::write_file(dir / "sweep_T.csv", detail::sweep_csv(r.rows, true));
  io::write_file(dir / "sweep_tau.csv", detail::sweep_csv(r.rows, false));
}

}  // namespace headprint
