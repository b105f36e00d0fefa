// Command-line front end: dataset generation, training, evaluation,
// closed-loop rollouts, state analysis, parameter sweeps and reports.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rmaze/analysis.hpp"
#include "rmaze/closed_loop.hpp"
#include "rmaze/experiment.hpp"
#include "rmaze/maze_io.hpp"
#include "rmaze/model_io.hpp"
#include "rmaze/tutor.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rmaze;

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kBehaviorFailure = 2;  // collision, stall or sequence mismatch
constexpr int kError = 1;

struct Overrides {
  std::string config_file;
  std::string mode;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<int> steps;
  std::optional<double> noise;
  std::optional<int> threads;
  std::string maze;
  std::string target;
  std::vector<std::string> sequences;
  std::string out;
  std::string out_root = "runs";
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config_file, "Experiment config (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--mode", o.mode, "UNCUED or CUED");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--runs", o.runs, "Number of runs");
  cmd->add_option("--steps", o.steps, "Dataset length in steps");
  cmd->add_option("--noise", o.noise, "Position noise std");
  cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  cmd->add_option("--maze", o.maze, "Maze JSON file (default: built-in)");
  cmd->add_option("--target", o.target, "turn, heading or heading_vector");
  cmd->add_option("--sequence", o.sequences, "Commanded loop sequence, e.g. AABB (repeatable)");
  cmd->add_option("-o,--out", o.out, "Output directory (default: stamped under --out-root)");
  cmd->add_option("--out-root", o.out_root, "Parent of stamped output directories");
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(path + ": " + e.what());
  }
}

std::string stamp_dir(const std::string& root, const std::string& what, std::uint64_t seed) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  localtime_r(&now, &tm);
  std::ostringstream name;
  name << what << '-' << std::put_time(&tm, "%Y%m%d-%H%M%S") << "-s" << seed;
  return (fs::path(root) / name.str()).string();
}

ExperimentConfig resolve(const Overrides& o, const std::string& what) {
  json j = o.config_file.empty() ? json::object() : read_json(o.config_file);
  if (!o.mode.empty()) j["mode"] = o.mode;
  ExperimentConfig c = config_from_json(j);
  if (!o.target.empty()) {
    c.target = target_kind_from_string(o.target);
    c.esn.n_outputs = target_width(c.target);
  }
  if (o.seed) c.seed = *o.seed;
  if (o.runs) c.n_runs = *o.runs;
  if (o.steps) c.n_steps = *o.steps;
  if (o.noise) c.noise_std = *o.noise;
  if (o.threads) c.threads = *o.threads;
  if (!o.maze.empty()) c.maze_file = o.maze;
  if (!o.sequences.empty()) {
    c.loop_sequences.clear();
    for (const auto& s : o.sequences) c.loop_sequences.push_back(parse_sequence(s));
  }
  c.output_dir = o.out.empty() ? stamp_dir(o.out_root, what, c.seed) : o.out;
  c.validate();
  return c;
}

// Run directories hold config.json, dataset.csv/json and model_run<i>.bin.
struct RunDir {
  ExperimentConfig config;
  TrajectoryDataset dataset;
  fs::path dir;
};

RunDir open_run_dir(const std::string& dir) {
  const fs::path p(dir);
  if (!fs::exists(p / "config.json")) throw Error(dir + " has no config.json");
  if (!fs::exists(p / "dataset.csv")) throw Error(dir + " has no dataset.csv");
  return {config_from_json(read_json((p / "config.json").string())),
          load_dataset((p / "dataset.csv").string(), (p / "dataset.json").string()), p};
}

StoredModel open_model(const RunDir& run, int index) {
  const fs::path file = run.dir / ("model_run" + std::to_string(index) + ".bin");
  if (!fs::exists(file)) throw Error(file.string() + " not found; train with --save-models");
  return load_model(file.string());
}

void print_report(const json& r) {
  std::cout << "mode " << r.at("mode").get<std::string>() << ", " << r.at("n_runs") << " runs\n";
  std::cout << std::setprecision(6) << "NRMSE mean " << r["nrmse"]["mean"] << " var "
            << r["nrmse"]["variance"] << "\nR2    mean " << r["r2"]["mean"] << " var "
            << r["r2"]["variance"] << '\n';
  std::cout << "closed loop passed in " << r.at("behavior_passes") << " of " << r.at("n_runs")
            << " runs\n";
  for (const json& run : r.at("runs")) {
    std::cout << "  run " << run["run_id"];
    if (run.contains("metrics")) std::cout << "  nrmse " << run["metrics"]["nrmse"] << "  r2 " << run["metrics"]["r2"];
    for (const json& s : run["rollouts"]) {
      std::cout << "  [" << s["executed"].get<std::string>() << (s["passed"].get<bool>() ? " ok" : " FAIL") << ']';
    }
    if (run.contains("failed_stage")) {
      std::cout << "  failed at " << run["failed_stage"].get<std::string>() << ": " << run["error"].get<std::string>();
    }
    std::cout << '\n';
  }
}

int cmd_generate(const Overrides& o) {
  const ExperimentConfig c = resolve(o, "dataset");
  fs::create_directories(c.output_dir);
  const TrajectoryDataset d = make_dataset(c, load_experiment_maze(c));
  const fs::path dir(c.output_dir);
  save_dataset(d, (dir / "dataset.csv").string(), (dir / "dataset.json").string());
  std::ofstream(dir / "config.json") << config_to_json(c).dump(2) << '\n';
  std::cout << "wrote " << d.size() << " steps, " << d.meta.n_loops << " loops to " << c.output_dir << '\n';
  return kOk;
}

int cmd_train(const Overrides& o, bool save_models) {
  ExperimentConfig c = resolve(o, "train");
  c.save_models = save_models;
  const RunReport r = run_experiment(c);
  print_report(r.to_json());
  std::cout << "output in " << c.output_dir << '\n';
  return r.behavior_passes == static_cast<int>(r.runs.size()) ? kOk : kBehaviorFailure;
}

int cmd_eval(const std::string& dir, int index) {
  RunDir run = open_run_dir(dir);
  StoredModel stored = open_model(run, index);
  // Retraining is deterministic, so the stored readout is scored directly.
  const bool cued = run.config.mode == Mode::kCued;
  const Matrix inputs = run.dataset.inputs(cued);
  const Matrix targets = run.dataset.targets(stored.target);
  const int T = static_cast<int>(inputs.rows());
  const int split = static_cast<int>(T * run.config.train_fraction);
  ReservoirRunner runner(stored.model);
  std::vector<double> u(static_cast<std::size_t>(inputs.cols()));
  Matrix pred(T - split, targets.cols());
  for (int t = 0; t < T; ++t) {
    for (Eigen::Index j = 0; j < inputs.cols(); ++j) u[static_cast<std::size_t>(j)] = inputs(t, j);
    runner.step(u);
    if (t >= split) pred.row(t - split) = runner.output(u).transpose();
  }
  for (Eigen::Index k = 0; k < targets.cols(); ++k) {
    const Vector y = targets.col(k).tail(T - split);
    const Vector p = pred.col(k);
    const RegressionMetrics m = compute_metrics({y.data(), static_cast<std::size_t>(y.size())},
                                                {p.data(), static_cast<std::size_t>(p.size())});
    std::cout << "output " << k << "  nrmse " << m.nrmse << "  r2 " << m.r2 << '\n';
  }
  return kOk;
}

int cmd_rollout(const std::string& model_file, const std::string& maze_file,
                const std::vector<std::string>& sequences, int loops, int warmup,
                const std::string& out) {
  const StoredModel stored = load_model(model_file);
  const MazeMap maze = maze_file.empty() ? build_default_maze() : load_maze(maze_file);
  const bool cued = stored.model.n_inputs() == kSensorCount + kCueCount;
  std::vector<std::vector<Side>> commands;
  for (const auto& s : sequences) commands.push_back(parse_sequence(s));
  if (commands.empty()) {
    if (cued) throw ContractError("a cued model needs --sequence");
    commands.emplace_back();
  }
  int status = kOk;
  for (std::size_t k = 0; k < commands.size(); ++k) {
    RolloutOptions opt;
    opt.target = stored.target;
    opt.cue_sequence = commands[k];
    opt.target_loops = loops;
    opt.warmup_steps = warmup >= 0 ? warmup : cued ? 100 : 1000;
    const RolloutResult r = run_closed_loop(stored.model, maze, BraitenbergController{}, SensorLayout{}, opt);
    const bool ok = cued ? r.matches(commands[k]) && r.collisions == 0 : alternation_passed(r);
    std::cout << (cued ? "commanded " + format_sequence(commands[k]) + "  " : std::string())
              << "executed " << format_sequence(r.loops) << "  collisions " << r.collisions
              << (r.stalled ? "  stalled" : "") << (ok ? "  ok" : "  FAIL") << '\n';
    if (!out.empty()) {
      const std::string path = commands.size() == 1 ? out : out + "." + std::to_string(k) + ".csv";
      write_trajectory_csv(r, path);
    }
    if (!ok) status = kBehaviorFailure;
  }
  return status;
}

int cmd_analyze(const std::string& dir, int index, const AnalysisOptions& options) {
  RunDir run = open_run_dir(dir);
  const StoredModel stored = open_model(run, index);
  const AnalysisReport r = run_analysis(run.config, stored.model, run.dataset, options);
  std::ofstream(run.dir / "analysis.json") << r.to_json().dump(2) << '\n';
  {
    std::ofstream pca(run.dir / "pca.csv");
    pca << "t,pc1,pc2,label,x,y\n";
    for (Eigen::Index i = 0; i < r.pca_points.rows(); ++i) {
      const auto k = static_cast<std::size_t>(i);
      const TrajectoryRecord& rec = run.dataset.records[static_cast<std::size_t>(r.pca_steps[k])];
      pca << r.pca_steps[k] << ',' << r.pca_points(i, 0) << ',' << r.pca_points(i, 1) << ','
          << to_string(r.pca_labels[k]) << ',' << rec.position.x() << ',' << rec.position.y() << '\n';
    }
  }
  {
    std::ofstream stream(run.dir / "label_stream.csv");
    stream << "t,predicted,truth\n";
    for (std::size_t i = 0; i < r.stream.labels.size(); ++i) {
      stream << r.pca_steps[i] << ',' << to_string(r.stream.labels[i]) << ',' << to_string(r.stream_truth[i])
             << '\n';
    }
  }
  std::cout << std::setprecision(4) << "reservoir states  knn " << r.reservoir.knn << "  svm "
            << r.reservoir.svm << "\nraw sensors       knn " << r.sensors.knn << "  svm "
            << r.sensors.svm << "\nPC1-PC2 separator accuracy " << r.separability.accuracy
            << "  margin " << r.separability.margin << "\nlabel stream accuracy "
            << r.stream_accuracy << ", mean switch interval " << r.mean_switch_interval << '\n';
  return kOk;
}

int cmd_sweep(const Overrides& o, const std::vector<std::string>& axes) {
  ExperimentConfig c = resolve(o, "sweep");
  std::map<std::string, std::vector<double>> grid;
  for (const std::string& axis : axes) {
    const auto eq = axis.find('=');
    if (eq == std::string::npos) throw ContractError("grid axis must look like name=v1,v2: " + axis);
    std::vector<double>& values = grid[axis.substr(0, eq)];
    std::stringstream ss(axis.substr(eq + 1));
    for (std::string item; std::getline(ss, item, ',');) values.push_back(std::stod(item));
  }
  const auto rows = sweep(c, grid);
  fs::create_directories(c.output_dir);
  const std::string path = (fs::path(c.output_dir) / "sweep.csv").string();
  write_sweep_csv(rows, path);
  for (const SweepRow& r : rows) {
    for (const auto& [name, v] : r.params) std::cout << name << '=' << v << ' ';
    std::cout << " nrmse " << r.nrmse.mean << "  r2 " << r.r2.mean << '\n';
  }
  std::cout << "wrote " << path << '\n';
  return kOk;
}

int cmd_report(const std::string& path) {
  const fs::path p(path);
  const json r = read_json(fs::is_directory(p) ? (p / "report.json").string() : path);
  print_report(r);
  return r.at("behavior_passes").get<int>() == r.at("n_runs").get<int>() ? kOk : kBehaviorFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reservoir-computing navigation in a figure-eight maze"};
  app.require_subcommand(1);

  Overrides gen_o, train_o, sweep_o;
  auto* gen = app.add_subcommand("generate", "Generate a tutor dataset");
  add_common(gen, gen_o);

  auto* train = app.add_subcommand("train", "Train ESNs, score them and run the closed loop");
  add_common(train, train_o);
  bool no_models = false;
  train->add_flag("--no-models", no_models, "Do not write model files");

  std::string run_dir;
  int model_index = 0;
  auto* eval = app.add_subcommand("eval", "Open-loop metrics of a stored model");
  eval->add_option("run", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--model", model_index, "Run index of the model");

  std::string model_file, maze_file, traj_out;
  std::vector<std::string> sequences;
  int loops = 12, warmup = -1;
  auto* roll = app.add_subcommand("rollout", "Let a stored model drive the bot");
  roll->add_option("model", model_file, "Model file")->required()->check(CLI::ExistingFile);
  roll->add_option("--maze", maze_file, "Maze JSON file");
  roll->add_option("--sequence", sequences, "Commanded sequence for a cued model (repeatable)");
  roll->add_option("--loops", loops, "Loops to drive (uncued)");
  roll->add_option("--warmup", warmup, "Tutor-driven steps before hand-over (default 1000 uncued, 100 cued)");
  roll->add_option("--trajectory", traj_out, "Write t,x,y,theta,dtheta CSV here");

  AnalysisOptions aopt;
  auto* analyze = app.add_subcommand("analyze", "PCA and decision classifiers on reservoir states");
  analyze->add_option("run", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  analyze->add_option("--model", model_index, "Run index of the model");
  analyze->add_option("--points", aopt.n_decision_points, "Corridor decision points");
  analyze->add_option("--window", aopt.pca_window, "Steps in the PCA window");
  analyze->add_option("--k", aopt.knn_k, "KNN neighbours");
  analyze->add_option("--svm-c", aopt.svm_c, "SVM cost");

  std::vector<std::string> axes;
  auto* sw = app.add_subcommand("sweep", "Grid over ESN parameters, open-loop metrics only");
  add_common(sw, sweep_o);
  sw->add_option("--grid", axes, "name=v1,v2,... (repeatable)")->required();

  std::string report_path;
  auto* rep = app.add_subcommand("report", "Summarize a report.json");
  rep->add_option("path", report_path, "report.json or its directory")->required()->check(CLI::ExistingPath);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return cmd_generate(gen_o);
    if (*train) return cmd_train(train_o, !no_models);
    if (*eval) return cmd_eval(run_dir, model_index);
    if (*roll) return cmd_rollout(model_file, maze_file, sequences, loops, warmup, traj_out);
    if (*analyze) return cmd_analyze(run_dir, model_index, aopt);
    if (*sw) return cmd_sweep(sweep_o, axes);
    if (*rep) return cmd_report(report_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kOk;
}
