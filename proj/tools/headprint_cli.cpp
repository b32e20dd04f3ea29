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

// Command-line front end. Every subcommand prints JSON (or CSV) to stdout
// and exits 0; failures print one JSON line {"error", "message"} to stderr
// and exit nonzero (2 for usage errors, 1 otherwise).

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "headprint/headprint.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace headprint {
namespace {

json read_json(const fs::path& path) {
  try {
    return json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorKind::kFormat, path.string() + ": " + e.what());
  }
}

template <typename F>
auto parse_section(const fs::path& path, F&& f) {
  try {
    return f(read_json(path));
  } catch (const json::exception& e) {
    fail(ErrorKind::kFormat, path.string() + ": " + e.what());
  }
}

void write_output(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    io::write_file(out, text);
  }
}

void print(const ordered_json& j) { std::cout << j.dump(2) << "\n"; }

// synth-library: spec file holds SynthSpec fields plus optional
// library_size (default 1) and master_seed (default 1).
void synth_library_cmd(const std::string& spec_path, const std::string& out) {
  const auto j = read_json(spec_path);
  int size = 1;
  std::uint64_t master = 1;
  SynthSpec spec;
  try {
    spec = synth_spec_from_json(j.contains("synth") ? j.at("synth") : j);
    if (j.contains("library_size")) size = j.at("library_size").get<int>();
    if (j.contains("master_seed")) master = j.at("master_seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    fail(ErrorKind::kFormat, spec_path + ": " + e.what());
  }
  if (size < 1) fail(ErrorKind::kInvalidArgument, "library_size must be >= 1");
  const auto lib = synth_library(spec, size, master);
  save_library(lib, out);
  ordered_json r;
  r["library"] = out;
  r["videos"] = ordered_json::array();
  for (const auto& e : lib.entries()) r["videos"].push_back(e->video_id);
  print(r);
}

void simulate_victim_cmd(const std::string& library, const std::string& video,
                         const std::string& params_path, std::uint64_t seed, const std::string& out) {
  const auto lib = load_library(library);
  const auto fp = lib.find(video);
  if (!fp) fail(ErrorKind::kInvalidArgument, "video '" + video + "' is not in " + library);
  VictimParams p;
  if (!params_path.empty()) {
    p = parse_section(params_path, [](const json& j) { return victim_params_from_json(j); });
  }
  p.seed = seed;
  write_output(out, trace_to_csv(simulate_victim(*fp, p)));
}

// inject-noise: estimation noise first, then yaw drift from the same spec.
void inject_noise_cmd(const std::string& trace_path, const std::string& noise_path,
                      std::optional<std::uint64_t> seed, const std::string& out) {
  const auto trace = load_trace_csv(trace_path);
  auto spec = parse_section(noise_path, [](const json& j) { return noise_spec_from_json(j); });
  if (seed) spec.seed = *seed;
  const auto noisy = inject_estimation_noise(trace, spec);
  write_output(out, trace_to_csv(inject_yaw_drift(noisy, {spec.drift_rate_deg_s, spec.drift_offset_deg})));
}

void drift_fit_cmd(const std::string& anchors) {
  const auto f = io::split(anchors, ',');
  if (f.size() != 4) fail(ErrorKind::kInvalidArgument, "--anchors expects t0,y0,t1,y1");
  const auto m = fit_yaw_drift({io::parse_double(f[0], "t0"), io::parse_double(f[1], "y0")},
                               {io::parse_double(f[2], "t1"), io::parse_double(f[3], "y1")});
  ordered_json r;
  r["theta_deg_per_s"] = m.theta_deg_per_s;
  r["theta0_deg"] = m.theta0_deg;
  print(r);
}

void drift_remove_cmd(const std::string& trace_path, double theta, double theta0, const std::string& out) {
  write_output(out, trace_to_csv(remove_yaw_drift(load_trace_csv(trace_path), {theta, theta0})));
}

void convert_trace_cmd(const std::string& trace_path, const std::string& to, const std::string& out) {
  if (to != "vr") fail(ErrorKind::kInvalidArgument, "--to only supports 'vr'");
  write_output(out, trace_to_csv(trace_to_vr(load_trace_csv(trace_path))));
}

struct MatchArgs {
  std::string trace;
  std::string library;
  std::string cal;
  std::size_t k = 3;
  double tau = 0.8;
  double t0 = 0.0;
  std::optional<double> sigma;
  std::string truth;
  bool csv = false;
};

void match_cmd(const MatchArgs& a) {
  const auto trace = load_trace_csv(a.trace);
  const auto lib = load_library(a.library);
  if (lib.empty()) fail(ErrorKind::kInvalidArgument, "library is empty");
  MatchConfig cfg;
  cfg.tau_s = a.tau;
  cfg.map_width = lib[0].width();
  cfg.map_height = lib[0].height();
  cfg.smoothing_sigma_px = a.sigma.value_or(default_smoothing_sigma(cfg.map_width));
  const Calibrator cal = calibrator_from_json(read_json(a.cal));
  if (!cal.config_hash.empty() && cal.config_hash != config_hash(cfg)) {
    std::cerr << "warning: calibrator was trained under a different match configuration\n";
  }
  const auto ranking = PreparedLibrary(lib, cfg).identify(trace, cal, a.k, {std::nullopt, seconds_to_ms(a.t0)});
  if (a.csv) {
    std::cout << kRankingCsvHeader << "\n"
              << ranking_csv_row(fs::path(a.trace).stem().string(),
                                 a.truth.empty() ? std::nullopt : std::optional<std::string>(a.truth), ranking)
              << "\n";
    return;
  }
  auto j = to_json(ranking);
  j["config_hash"] = config_hash(cfg);
  print(j);
}

void experiment_cmd(const std::string& config_path, const std::string& out_override,
                    std::optional<double> t0) {
  auto cfg = experiment_config_from_json(read_json(config_path));
  if (!out_override.empty()) cfg.output_dir = out_override;
  if (t0) cfg.window_start_s = *t0;
  validate(cfg);
  const auto report = run_experiment(cfg);
  if (!cfg.output_dir.empty()) {
    emit_report(report, cfg.output_dir);
    io::write_file(fs::path(cfg.output_dir) / "calibrator.json", to_json(report.calibrator).dump(2) + "\n");
  }
  print(summary_json(report));
}

void bdr_cmd(double tpr, std::optional<double> fpr, std::optional<std::int64_t> P,
             std::optional<std::int64_t> N, double base) {
  if (fpr.has_value() == (P.has_value() || N.has_value())) {
    fail(ErrorKind::kInvalidArgument, "give either --fpr or both --P and --N");
  }
  if (!fpr && !(P && N)) fail(ErrorKind::kInvalidArgument, "--P and --N must be given together");
  const double f = fpr ? *fpr : fpr_from_tpr(tpr, *P, *N);
  print(to_json(make_report(tpr, f, base)));
}

void print_error(const std::string& kind, const std::string& message) {
  ordered_json e;
  e["error"] = kind;
  e["message"] = message;
  std::cerr << e.dump() << "\n";
}

}  // namespace
}  // namespace headprint

int main(int argc, char** argv) {
  using namespace headprint;
  CLI::App app{"headprint: head-movement video identification simulator"};
  app.require_subcommand(1);

  std::string spec, out, library, video, params, trace, noise, anchors, to, config;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> noise_seed;
  double theta = 0.0, theta0 = 0.0;
  MatchArgs m;
  std::optional<double> t0;
  double tpr = 0.0, base = 0.0;
  std::optional<double> fpr;
  std::optional<std::int64_t> P, N;

  auto* synth = app.add_subcommand("synth-library", "Synthesize a fingerprint library");
  synth->add_option("--spec", spec, "synthesis spec (JSON)")->required();
  synth->add_option("--out", out, "library directory")->required();

  auto* sim = app.add_subcommand("simulate-victim", "Simulate a victim watching one video");
  sim->add_option("--library", library)->required();
  sim->add_option("--video", video)->required();
  sim->add_option("--params", params, "victim parameters (JSON)");
  sim->add_option("--seed", seed)->required();
  sim->add_option("--out", out, "trace CSV (default stdout)");

  auto* inj = app.add_subcommand("inject-noise", "Add estimation noise and yaw drift to a trace");
  inj->add_option("--trace", trace)->required();
  inj->add_option("--noise", noise, "noise spec (JSON)")->required();
  inj->add_option("--seed", noise_seed, "overrides the spec seed");
  inj->add_option("--out", out);

  auto* fit = app.add_subcommand("drift-fit", "Fit a yaw drift line from two anchors");
  fit->add_option("--anchors", anchors, "t0,y0,t1,y1 (seconds, degrees)")->required();

  auto* rm = app.add_subcommand("drift-remove", "Remove a yaw drift model from a trace");
  rm->add_option("--trace", trace)->required();
  rm->add_option("--theta", theta, "drift rate, degrees per second")->required();
  rm->add_option("--theta0", theta0, "drift offset, degrees")->required();
  rm->add_option("--out", out);

  auto* conv = app.add_subcommand("convert-trace", "Convert a camera-based trace to the VR frame");
  conv->add_option("--trace", trace)->required();
  conv->add_option("--to", to)->required();
  conv->add_option("--out", out);

  auto* match = app.add_subcommand("match", "Rank library videos for a trace");
  match->add_option("--trace", m.trace)->required();
  match->add_option("--library", m.library)->required();
  match->add_option("--cal", m.cal, "calibrator (JSON)")->required();
  match->add_option("--k", m.k)->required();
  match->add_option("--tau", m.tau)->required();
  match->add_option("--t0", m.t0, "video time of the first trace sample, seconds");
  match->add_option("--sigma", m.sigma, "smoothing sigma in pixels");
  match->add_option("--truth", m.truth, "true video id, for the CSV summary");
  match->add_flag("--csv", m.csv, "print the CSV summary row instead of JSON");

  auto* exp = app.add_subcommand("experiment", "Run an identification experiment");
  exp->add_option("--config", config)->required();
  exp->add_option("--out", out, "overrides output_dir");
  exp->add_option("--t0", t0, "window start, seconds");

  auto* bdr_app = app.add_subcommand("bdr", "Bayesian detection rate");
  bdr_app->add_option("--tpr", tpr)->required();
  bdr_app->add_option("--fpr", fpr);
  bdr_app->add_option("--P", P);
  bdr_app->add_option("--N", N);
  bdr_app->add_option("--base", base)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    if (*synth) synth_library_cmd(spec, out);
    if (*sim) simulate_victim_cmd(library, video, params, seed, out);
    if (*inj) inject_noise_cmd(trace, noise, noise_seed, out);
    if (*fit) drift_fit_cmd(anchors);
    if (*rm) drift_remove_cmd(trace, theta, theta0, out);
    if (*conv) convert_trace_cmd(trace, to, out);
    if (*match) match_cmd(m);
    if (*exp) experiment_cmd(config, out, t0);
    if (*bdr_app) bdr_cmd(tpr, fpr, P, N, base);
  } catch (const Error& e) {
    print_error(std::string(to_string(e.kind())), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}
