// Acceptance run: one [PASS]/[FAIL] line per criterion, nonzero exit on any
// failure. An optional first argument lowers the number of runs per mode for
// quick local checks; the registered test always uses 50.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "common/oracles.hpp"
#include "rmaze/experiment.hpp"

using namespace rmaze;

namespace {

std::map<int, std::pair<bool, std::string>> verdicts;

void verdict(bool ok, int id, const std::string& text) {
  std::fprintf(stderr, "criterion %d %s\n", id, ok ? "passed" : "FAILED");
  verdicts[id] = {ok, text};
}

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Batch {
  std::vector<RunResult> runs;
  std::optional<EsnModel> first_model;
  TrajectoryDataset dataset;
  Aggregate nrmse;
  Aggregate r2;
};

Batch run_batch(const ExperimentConfig& config) {
  Batch b;
  const MazeMap maze = load_experiment_maze(config);
  b.dataset = make_dataset(config, maze);
  std::vector<double> nrmse, r2;
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < config.n_runs; ++i) {
    RunResult r = run_single(config, maze, b.dataset, i, i == 0 ? &b.first_model : nullptr);
    if (r.training) {
      nrmse.push_back(r.training->metrics.nrmse);
      r2.push_back(r.training->metrics.r2);
    } else {
      nrmse.push_back(std::nan(""));
      r2.push_back(std::nan(""));
    }
    std::fprintf(stderr, "  %s run %d: nrmse %.5f r2 %.6f behavior %s%s (%.0f s)\n",
                 to_string(config.mode), i, nrmse.back(), r2.back(), r.behavior_ok() ? "ok" : "FAILED",
                 r.ok() ? "" : (" [" + r.failed_stage + ": " + r.error + "]").c_str(), seconds_since(t0));
    b.runs.push_back(std::move(r));
  }
  b.nrmse = aggregate(nrmse);
  b.r2 = aggregate(r2);
  return b;
}

void uncued_criteria(int n_runs) {
  ExperimentConfig config = ExperimentConfig::uncued();
  config.n_runs = n_runs;
  config.seed = 2024;
  std::fprintf(stderr, "uncued: %d runs\n", n_runs);
  const Batch b = run_batch(config);

  verdict(b.nrmse.mean <= 0.05 && b.r2.mean >= 0.99, 1,
          fmt("uncued open-loop NRMSE mean %.5f (<= 0.05), R2 mean %.6f (>= 0.99)", b.nrmse.mean, b.r2.mean) +
              " over " + std::to_string(n_runs) + " runs");

  int passes = 0;
  for (const auto& r : b.runs) passes += r.behavior_ok();
  const int needed = (45 * n_runs + 49) / 50;
  verdict(passes >= needed, 3,
          "closed-loop alternation (>= 10 loops, no collision, period 280..420) in " + std::to_string(passes) +
              " of " + std::to_string(n_runs) + " runs (need " + std::to_string(needed) + ")");

  if (!b.first_model) {
    verdict(false, 4, "run 0 produced no model");
    verdict(false, 5, "run 0 produced no model");
    return;
  }
  std::fprintf(stderr, "analysis on run 0\n");
  const AnalysisReport a = run_analysis(config, *b.first_model, b.dataset);
  const bool res_ok = a.reservoir.knn >= 0.95 && a.reservoir.svm >= 0.95;
  const auto in_band = [](double v) { return v >= 0.35 && v <= 0.65; };
  const bool sens_ok = in_band(a.sensors.knn) && in_band(a.sensors.svm);
  verdict(res_ok && sens_ok, 4,
          fmt("reservoir KNN %.3f SVM %.3f (>= 0.95); sensor KNN %.3f SVM %.3f (in [0.35, 0.65])",
              a.reservoir.knn, a.reservoir.svm, a.sensors.knn, a.sensors.svm));
  verdict(a.separability.accuracy == 1.0, 5,
          fmt("2-component PCA linear separator training accuracy %.4f (== 1.0), margin %.4g",
              a.separability.accuracy, a.separability.margin));
}

std::string side_string(const std::vector<Side>& s) {
  std::string out;
  for (Side v : s) out += v == Side::kLeft ? 'A' : 'B';
  return out;
}

void cued_criteria(int n_runs) {
  ExperimentConfig config = ExperimentConfig::cued();
  config.n_runs = n_runs;
  config.seed = 2024;
  std::fprintf(stderr, "cued: %d runs\n", n_runs);
  const Batch b = run_batch(config);

  verdict(b.nrmse.mean <= 0.02 && b.r2.mean >= 0.995, 2,
          fmt("cued open-loop NRMSE mean %.5f (<= 0.02), R2 mean %.6f (>= 0.995)", b.nrmse.mean, b.r2.mean) +
              " over " + std::to_string(n_runs) + " runs");

  const RunResult& first = b.runs.front();
  std::string detail;
  bool ok = first.ok() && first.rollouts.size() == 2;
  for (const auto& r : first.rollouts) {
    ok = ok && r.passed;
    detail += " " + side_string(r.commanded) + "->" + side_string(r.executed) + " (" +
              std::to_string(r.collisions) + " collisions)";
  }
  int passes = 0;
  for (const auto& r : b.runs) passes += r.behavior_ok();
  verdict(ok, 6,
          "cued sequences executed exactly with no collision:" + detail + "; all sequences exact in " +
              std::to_string(passes) + " of " + std::to_string(n_runs) + " runs");
}

void property_criteria() {
  std::fprintf(stderr, "properties\n");
  const double ridge = oracle::ridge_max_error(500, 71);
  const int rays = oracle::raycast_mismatches(10000, 72);
  const double bound = oracle::boundedness_max_abs(1000000, 73);
  const double ident = oracle::metrics_identity_error(1000, 74);
  const int moves = oracle::collision_mismatches(10000, 75);

  ExperimentConfig c = ExperimentConfig::uncued();
  c.esn.n_units = 200;
  c.n_steps = 8000;
  c.rollout_loops = 4;
  c.n_runs = 2;
  c.seed = 99;
  const RunReport r1 = run_experiment(c);
  const RunReport r2 = run_experiment(c);
  const MazeMap maze = load_experiment_maze(c);
  const TrajectoryDataset data = make_dataset(c, maze);
  std::optional<EsnModel> m1, m2;
  run_single(c, maze, data, 0, &m1);
  run_single(c, maze, data, 0, &m2);
  const bool models_equal = m1 && m2 && m1->readout_weights() && m2->readout_weights() &&
                            *m1->readout_weights() == *m2->readout_weights();
  const bool deterministic = r1.to_json() == r2.to_json() && models_equal;

  const bool ok = ridge <= 1e-8 && rays == 0 && bound <= 1.0 && ident <= 1e-12 && moves == 0 && deterministic;
  verdict(ok, 7,
          fmt("ridge max err %.2e (<= 1e-8); ray-cast mismatches %.0f/10000; max |x| over 1e6 updates %.6f (<= 1); "
              "metric identity err %.2e (<= 1e-12)",
              ridge, rays, bound, ident) +
              "; collision mismatches " + std::to_string(moves) + "/10000; seeded experiment " +
              (deterministic ? "bit-identical" : "NOT identical") + " across reruns");
}

}  // namespace

int main(int argc, char** argv) {
  const int n_runs = argc > 1 ? std::atoi(argv[1]) : 50;
  if (n_runs < 1) {
    std::fprintf(stderr, "usage: acceptance [runs]\n");
    return 2;
  }
  const auto t0 = std::chrono::steady_clock::now();
  property_criteria();
  uncued_criteria(n_runs);
  cued_criteria(n_runs);
  int failures = 0;
  for (const auto& [id, v] : verdicts) {
    std::printf("[%s] criterion %d: %s\n", v.first ? "PASS" : "FAIL", id, v.second.c_str());
    failures += !v.first;
  }
  std::printf("%d of %zu criteria failed, %.0f s\n", failures, verdicts.size(), seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
