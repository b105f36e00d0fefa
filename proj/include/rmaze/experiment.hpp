#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmaze/analysis.hpp"
#include "rmaze/closed_loop.hpp"
#include "rmaze/esn.hpp"
#include "rmaze/maze.hpp"
#include "rmaze/metrics.hpp"
#include "rmaze/tutor.hpp"

namespace rmaze {

enum class Mode { kUncued, kCued };

const char* to_string(Mode mode);
Mode mode_from_string(const std::string& s);

struct ExperimentConfig {
  Mode mode = Mode::kUncued;
  EsnConfig esn = EsnConfig::without_context();
  std::string maze_file;  // empty: the built-in maze
  BraitenbergController tutor;
  int n_steps = 50000;
  double noise_std = 0.05;
  double train_fraction = 0.8;
  int washout = 100;
  // UNCUED: heading. CUED: heading_vector, since a random loop order lets the
  // unwrapped heading drift without bound.
  TargetKind target = TargetKind::kHeading;
  // Loop order of the cued training data; empty means i.i.d. fair coin flips.
  std::vector<Side> training_sequence;
  // Commanded sequences checked in closed loop (CUED only).
  std::vector<std::vector<Side>> loop_sequences;
  int rollout_loops = 12;  // UNCUED closed-loop length
  // Tutor-driven steps before hand-over. UNCUED: long enough for a full
  // LEFT/RIGHT pair, so the reservoir has seen the alternation.
  int warmup_steps = 1000;
  int n_runs = 1;
  std::uint64_t seed = 1;
  int threads = 0;         // 0: hardware concurrency
  std::string output_dir;  // empty: nothing is written
  bool save_models = false;

  // Mode presets: ESN column, output width, target and default sequences.
  static ExperimentConfig uncued();
  static ExperimentConfig cued();

  // Throws ContractError, e.g. CUED with n_inputs != 10.
  void validate() const;
};

nlohmann::json config_to_json(const ExperimentConfig& config);
// Keys absent from `j` keep the preset of the mode named in `j` (default UNCUED).
ExperimentConfig config_from_json(const nlohmann::json& j);

// Run i uses derive_seed(master, kSeedStream*, i). The dataset is shared by
// all runs and uses index 0 of its stream.
inline constexpr std::uint64_t kSeedStreamDataset = 1;
inline constexpr std::uint64_t kSeedStreamReservoir = 2;
inline constexpr std::uint64_t kSeedStreamStateNoise = 3;
inline constexpr std::uint64_t kSeedStreamSequence = 4;

MazeMap load_experiment_maze(const ExperimentConfig& config);
TrajectoryDataset make_dataset(const ExperimentConfig& config, const MazeMap& maze);

struct TrainOutcome {
  RegressionMetrics metrics;                // mean over outputs
  std::vector<RegressionMetrics> per_output;
  int train_steps = 0;
  int test_steps = 0;
};

// Builds nothing: trains `model` in place on the first train_fraction of the
// dataset (state noise on) and scores the rest open loop (state noise off).
TrainOutcome train_and_score(EsnModel& model, const TrajectoryDataset& dataset,
                             const ExperimentConfig& config, std::uint64_t noise_seed);

struct RolloutSummary {
  std::vector<Side> commanded;  // empty for UNCUED
  std::vector<Side> executed;
  std::vector<int> periods;
  int collisions = 0;
  bool stalled = false;
  bool passed = false;
};

struct RunResult {
  int run_id = 0;
  std::uint64_t seed = 0;  // reservoir seed
  std::optional<TrainOutcome> training;
  std::vector<RolloutSummary> rollouts;
  std::string failed_stage;  // empty on success
  std::string error;
  std::vector<std::string> files;  // written by this run

  bool ok() const { return failed_stage.empty(); }
  bool behavior_ok() const;
};

struct Aggregate {
  double mean = 0.0;
  double variance = 0.0;  // population variance
};

struct RunReport {
  Mode mode = Mode::kUncued;
  std::uint64_t master_seed = 0;
  std::vector<RunResult> runs;
  Aggregate nrmse;
  Aggregate r2;
  int behavior_passes = 0;
  std::vector<std::string> files;

  nlohmann::json to_json() const;
};

// NaN entries (failed runs) propagate.
Aggregate aggregate(const std::vector<double>& values);

RunReport run_experiment1(const ExperimentConfig& config);
RunReport run_experiment2(const ExperimentConfig& config);
// Dispatches on config.mode.
RunReport run_experiment(const ExperimentConfig& config);

// One full run with an already generated dataset; `model_out` receives the
// trained model when non-null.
RunResult run_single(const ExperimentConfig& config, const MazeMap& maze,
                     const TrajectoryDataset& dataset, int run_id,
                     std::optional<EsnModel>* model_out = nullptr);

// A UNCUED closed-loop rollout passes with at least 10 strictly alternating
// loops, no collision and every period in [280, 420].
bool alternation_passed(const RolloutResult& rollout);

struct AnalysisOptions {
  int n_decision_points = 900;
  double train_fraction = 0.8;
  int knn_k = 5;
  double svm_c = 1.0;
  int pca_window = 5000;
  std::uint64_t seed = 1;  // train/test shuffle
};

struct ClassifierScores {
  double knn = 0.0;
  double svm = 0.0;
};

struct AnalysisReport {
  ClassifierScores reservoir;
  ClassifierScores sensors;
  SeparabilityReport separability;
  Vector explained_variance;    // first components of the window PCA
  Matrix pca_points;            // pca_window x 2
  std::vector<Side> pca_labels;
  std::vector<int> pca_steps;   // dataset step of each window row
  LabelStream stream;           // SVM on reservoir states over the window
  std::vector<Side> stream_truth;
  double stream_accuracy = 0.0;
  double mean_switch_interval = 0.0;

  nlohmann::json to_json() const;
};

// Replays the dataset through the trained model without state noise, takes
// reservoir states and sensor vectors from the held-out part and labels each
// step with the side of the next loop entered. The PCA is fitted on the first
// pca_window labeled held-out steps; the separability check uses the corridor
// steps of that window.
AnalysisReport run_analysis(const ExperimentConfig& config, const EsnModel& model,
                            const TrajectoryDataset& dataset, const AnalysisOptions& options = {});

struct SweepRow {
  std::map<std::string, double> params;
  Aggregate nrmse;
  Aggregate r2;
};

// Parameter names: n_units, leak_rate, spectral_radius, regularization,
// input_connectivity, reservoir_connectivity, state_noise. Open-loop metrics
// only; rows sorted by mean NRMSE.
std::vector<SweepRow> sweep(const ExperimentConfig& config,
                            const std::map<std::string, std::vector<double>>& grid);

// CSV writers. metrics: run_id,seed,nrmse,r2. trajectory: t,x,y,theta,dtheta.
void write_metrics_csv(const RunReport& report, const std::string& path);
void write_trajectory_csv(const RolloutResult& rollout, const std::string& path);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

}  // namespace rmaze
