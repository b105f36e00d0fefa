#include "rmaze/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "rmaze/maze_io.hpp"
#include "rmaze/model_io.hpp"
#include "rmaze/random.hpp"

namespace rmaze {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw ContractError(message);
}

int worker_count(int requested, std::size_t jobs) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  n = std::max(n, 1);
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n), std::max<std::size_t>(jobs, 1)));
}

// Runs job(i) for i in [0, n) on a few threads. Results land by index, so
// the outcome does not depend on scheduling.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& job) {
  const int workers = worker_count(threads, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) job(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::vector<Side> random_sequence(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<Side> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(rng.uniform() < 0.5 ? Side::kLeft : Side::kRight);
  return out;
}

json rollout_json(const RolloutSummary& r) {
  return {{"commanded", format_sequence(r.commanded)},
          {"executed", format_sequence(r.executed)},
          {"loops", r.executed.size()},
          {"periods", r.periods},
          {"collisions", r.collisions},
          {"stalled", r.stalled},
          {"passed", r.passed}};
}

json metrics_json(const RegressionMetrics& m) { return {{"nrmse", m.nrmse}, {"r2", m.r2}}; }

void apply_param(EsnConfig& esn, const std::string& name, double v) {
  if (name == "n_units") esn.n_units = static_cast<int>(std::lround(v));
  else if (name == "leak_rate") esn.leak_rate = v;
  else if (name == "spectral_radius") esn.spectral_radius = v;
  else if (name == "regularization") esn.regularization = v;
  else if (name == "input_connectivity") esn.input_connectivity = v;
  else if (name == "reservoir_connectivity") esn.reservoir_connectivity = v;
  else if (name == "state_noise") esn.state_noise = v;
  else throw ContractError("unknown sweep parameter: " + name);
}

}  // namespace

const char* to_string(Mode mode) { return mode == Mode::kUncued ? "UNCUED" : "CUED"; }

Mode mode_from_string(const std::string& s) {
  if (s == "UNCUED" || s == "uncued") return Mode::kUncued;
  if (s == "CUED" || s == "cued") return Mode::kCued;
  throw ContractError("unknown mode: " + s);
}

ExperimentConfig ExperimentConfig::uncued() { return ExperimentConfig{}; }

ExperimentConfig ExperimentConfig::cued() {
  ExperimentConfig c;
  c.mode = Mode::kCued;
  c.esn = EsnConfig::with_context();
  c.target = TargetKind::kHeadingVector;
  c.esn.n_outputs = target_width(c.target);
  // A random loop order needs more data than plain alternation.
  c.n_steps = 150000;
  c.warmup_steps = 100;
  c.loop_sequences = {parse_sequence("AABBAABBAABB"), parse_sequence("AABAABBBABBAABAB")};
  return c;
}

void ExperimentConfig::validate() const {
  esn.validate();
  if (mode == Mode::kCued) require(esn.n_inputs == kSensorCount + kCueCount, "CUED mode needs n_inputs = 10");
  else require(esn.n_inputs == kSensorCount, "UNCUED mode needs n_inputs = 8");
  require(esn.n_outputs == target_width(target), "n_outputs must match the target width");
  require(n_steps > 0, "n_steps must be positive");
  require(noise_std >= 0.0, "noise_std must be nonnegative");
  require(train_fraction > 0.0 && train_fraction < 1.0, "train_fraction must lie in (0, 1)");
  require(washout >= 0, "washout must be nonnegative");
  require(n_runs >= 1, "n_runs must be at least 1");
  require(rollout_loops >= 1, "rollout_loops must be positive");
  require(warmup_steps >= 0, "warmup_steps must be nonnegative");
  for (const auto& s : loop_sequences) require(!s.empty(), "empty loop sequence");
}

json config_to_json(const ExperimentConfig& c) {
  json seqs = json::array();
  for (const auto& s : c.loop_sequences) seqs.push_back(format_sequence(s));
  return {{"mode", to_string(c.mode)},
          {"esn", esn_config_to_json(c.esn)},
          {"maze", c.maze_file.empty() ? "DEFAULT" : c.maze_file},
          {"tutor", {{"weights", c.tutor.weights}, {"gain", c.tutor.gain}}},
          {"n_steps", c.n_steps},
          {"noise_std", c.noise_std},
          {"train_fraction", c.train_fraction},
          {"washout", c.washout},
          {"target", to_string(c.target)},
          {"training_sequence", format_sequence(c.training_sequence)},
          {"loop_sequences", seqs},
          {"rollout_loops", c.rollout_loops},
          {"warmup_steps", c.warmup_steps},
          {"n_runs", c.n_runs},
          {"seed", c.seed},
          {"threads", c.threads},
          {"output_dir", c.output_dir},
          {"save_models", c.save_models}};
}

ExperimentConfig config_from_json(const json& j) {
  try {
    const Mode mode = mode_from_string(j.value("mode", std::string("UNCUED")));
    ExperimentConfig c = mode == Mode::kCued ? ExperimentConfig::cued() : ExperimentConfig::uncued();
    if (j.contains("target")) {
      c.target = target_kind_from_string(j.at("target").get<std::string>());
      c.esn.n_outputs = target_width(c.target);
    }
    if (j.contains("esn")) c.esn = esn_config_from_json(j.at("esn"), c.esn);
    const std::string maze = j.value("maze", std::string("DEFAULT"));
    c.maze_file = maze == "DEFAULT" ? "" : maze;
    if (j.contains("tutor")) {
      const json& t = j.at("tutor");
      c.tutor.weights = t.value("weights", c.tutor.weights);
      c.tutor.gain = t.value("gain", c.tutor.gain);
    }
    c.n_steps = j.value("n_steps", c.n_steps);
    c.noise_std = j.value("noise_std", c.noise_std);
    c.train_fraction = j.value("train_fraction", c.train_fraction);
    c.washout = j.value("washout", c.washout);
    if (j.contains("training_sequence")) {
      c.training_sequence = parse_sequence(j.at("training_sequence").get<std::string>());
    }
    if (j.contains("loop_sequences")) {
      c.loop_sequences.clear();
      for (const json& s : j.at("loop_sequences")) c.loop_sequences.push_back(parse_sequence(s.get<std::string>()));
    }
    c.rollout_loops = j.value("rollout_loops", c.rollout_loops);
    c.warmup_steps = j.value("warmup_steps", c.warmup_steps);
    c.n_runs = j.value("n_runs", c.n_runs);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.save_models = j.value("save_models", c.save_models);
    return c;
  } catch (const json::exception& e) {
    throw ContractError(std::string("bad experiment config: ") + e.what());
  }
}

MazeMap load_experiment_maze(const ExperimentConfig& config) {
  return config.maze_file.empty() ? build_default_maze() : load_maze(config.maze_file);
}

TrajectoryDataset make_dataset(const ExperimentConfig& config, const MazeMap& maze) {
  const SensorLayout layout;
  const std::uint64_t seed = derive_seed(config.seed, kSeedStreamDataset, 0);
  if (config.mode == Mode::kUncued) {
    return generate_standard8(maze, config.tutor, layout, config.n_steps, config.noise_std, seed);
  }
  // Enough coin flips to outlast n_steps; a loop takes about 350 steps.
  const std::vector<Side> sequence =
      config.training_sequence.empty()
          ? random_sequence(derive_seed(config.seed, kSeedStreamSequence, 0),
                            static_cast<std::size_t>(config.n_steps / 200 + 2))
          : config.training_sequence;
  return generate_cued(maze, config.tutor, layout, sequence, config.noise_std, seed, config.n_steps);
}

TrainOutcome train_and_score(EsnModel& model, const TrajectoryDataset& dataset,
                             const ExperimentConfig& config, std::uint64_t noise_seed) {
  const bool cued = config.mode == Mode::kCued;
  const Matrix inputs = dataset.inputs(cued);
  const Matrix targets = dataset.targets(config.target);
  require(inputs.cols() == model.n_inputs(), "dataset inputs do not match the model");
  require(targets.cols() == model.n_outputs(), "dataset targets do not match the model");
  const int T = static_cast<int>(inputs.rows());
  const int split = static_cast<int>(std::floor(T * config.train_fraction));
  require(split > config.washout && split < T, "dataset too short for the split and washout");

  ReservoirRunner runner(model);
  Rng noise(noise_seed);
  RidgeAccumulator acc(model.feature_size(), model.n_outputs());
  std::vector<double> u(static_cast<std::size_t>(inputs.cols()));
  auto load = [&](int t) {
    for (Eigen::Index j = 0; j < inputs.cols(); ++j) u[static_cast<std::size_t>(j)] = inputs(t, j);
  };
  for (int t = 0; t < split; ++t) {
    load(t);
    const Vector& x = runner.step(u, &noise);
    if (t >= config.washout) acc.add(feature_vector(u, x), Vector(targets.row(t).transpose()));
  }
  model.set_readout(acc.solve(model.config().regularization));

  Matrix predicted(T - split, model.n_outputs());
  for (int t = split; t < T; ++t) {
    load(t);
    runner.step(u);
    predicted.row(t - split) = runner.output(u).transpose();
  }

  TrainOutcome out;
  out.train_steps = split - config.washout;
  out.test_steps = T - split;
  for (Eigen::Index k = 0; k < targets.cols(); ++k) {
    const Vector y = targets.col(k).tail(T - split);
    const Vector p = predicted.col(k);
    out.per_output.push_back(compute_metrics(std::span<const double>(y.data(), y.size()),
                                             std::span<const double>(p.data(), p.size())));
  }
  for (const auto& m : out.per_output) {
    out.metrics.nrmse += m.nrmse / static_cast<double>(out.per_output.size());
    out.metrics.r2 += m.r2 / static_cast<double>(out.per_output.size());
  }
  return out;
}

bool alternation_passed(const RolloutResult& rollout) {
  if (rollout.collisions != 0 || rollout.loops.size() < 10 || !rollout.alternating()) return false;
  return std::all_of(rollout.periods.begin(), rollout.periods.end(),
                     [](int p) { return p >= 280 && p <= 420; });
}

bool RunResult::behavior_ok() const {
  return ok() && !rollouts.empty() &&
         std::all_of(rollouts.begin(), rollouts.end(), [](const RolloutSummary& r) { return r.passed; });
}

RunResult run_single(const ExperimentConfig& config, const MazeMap& maze,
                     const TrajectoryDataset& dataset, int run_id,
                     std::optional<EsnModel>* model_out) {
  RunResult result;
  result.run_id = run_id;
  result.seed = derive_seed(config.seed, kSeedStreamReservoir, static_cast<std::uint64_t>(run_id));
  std::string stage = "build";
  try {
    EsnConfig esn = config.esn;
    esn.seed = result.seed;
    EsnModel model = build_esn(esn);

    stage = "train";
    result.training = train_and_score(
        model, dataset, config,
        derive_seed(config.seed, kSeedStreamStateNoise, static_cast<std::uint64_t>(run_id)));

    stage = "rollout";
    const BraitenbergController tutor = config.tutor;
    const SensorLayout layout;
    std::vector<std::vector<Side>> commands;
    if (config.mode == Mode::kCued) commands = config.loop_sequences;
    else commands.emplace_back();
    for (std::size_t k = 0; k < commands.size(); ++k) {
      RolloutOptions opt;
      opt.warmup_steps = config.warmup_steps;
      opt.target_loops = config.rollout_loops;
      opt.cue_sequence = commands[k];
      opt.target = config.target;
      const RolloutResult rollout = run_closed_loop(model, maze, tutor, layout, opt);
      RolloutSummary s;
      s.commanded = commands[k];
      s.executed = rollout.loops;
      s.periods = rollout.periods;
      s.collisions = rollout.collisions;
      s.stalled = rollout.stalled;
      s.passed = config.mode == Mode::kCued ? rollout.matches(commands[k]) && rollout.collisions == 0
                                            : alternation_passed(rollout);
      result.rollouts.push_back(s);
      if (!config.output_dir.empty()) {
        std::string name = "trajectory_run" + std::to_string(run_id);
        if (config.mode == Mode::kCued) name += "_seq" + std::to_string(k);
        const std::string path = (fs::path(config.output_dir) / (name + ".csv")).string();
        write_trajectory_csv(rollout, path);
        result.files.push_back(path);
      }
    }

    if (!config.output_dir.empty() && config.save_models) {
      stage = "save";
      const std::string path =
          (fs::path(config.output_dir) / ("model_run" + std::to_string(run_id) + ".bin")).string();
      save_model(model, config.target, path);
      result.files.push_back(path);
    }
    if (model_out) model_out->emplace(std::move(model));
  } catch (const std::exception& e) {
    result.failed_stage = stage;
    result.error = e.what();
  }
  return result;
}

Aggregate aggregate(const std::vector<double>& values) {
  Aggregate a;
  if (values.empty()) return a;
  const double n = static_cast<double>(values.size());
  a.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  for (double v : values) a.variance += (v - a.mean) * (v - a.mean) / n;
  return a;
}

RunReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const MazeMap maze = load_experiment_maze(config);
  const TrajectoryDataset dataset = make_dataset(config, maze);

  RunReport report;
  report.mode = config.mode;
  report.master_seed = config.seed;
  if (!config.output_dir.empty()) {
    fs::create_directories(config.output_dir);
    const fs::path dir(config.output_dir);
    save_dataset(dataset, (dir / "dataset.csv").string(), (dir / "dataset.json").string());
    report.files.push_back((dir / "dataset.csv").string());
    report.files.push_back((dir / "dataset.json").string());
    std::ofstream((dir / "config.json").string()) << config_to_json(config).dump(2) << '\n';
    report.files.push_back((dir / "config.json").string());
  }

  report.runs.resize(static_cast<std::size_t>(config.n_runs));
  parallel_for(report.runs.size(), config.threads, [&](std::size_t i) {
    report.runs[i] = run_single(config, maze, dataset, static_cast<int>(i));
  });

  std::vector<double> nrmse;
  std::vector<double> r2;
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  for (const RunResult& r : report.runs) {
    nrmse.push_back(r.training ? r.training->metrics.nrmse : kNaN);
    r2.push_back(r.training ? r.training->metrics.r2 : kNaN);
    if (r.behavior_ok()) ++report.behavior_passes;
    report.files.insert(report.files.end(), r.files.begin(), r.files.end());
  }
  report.nrmse = aggregate(nrmse);
  report.r2 = aggregate(r2);

  if (!config.output_dir.empty()) {
    const fs::path dir(config.output_dir);
    write_metrics_csv(report, (dir / "metrics.csv").string());
    report.files.push_back((dir / "metrics.csv").string());
    report.files.push_back((dir / "report.json").string());
    std::ofstream((dir / "report.json").string()) << report.to_json().dump(2) << '\n';
  }
  return report;
}

RunReport run_experiment1(const ExperimentConfig& config) {
  require(config.mode == Mode::kUncued, "experiment 1 needs UNCUED mode");
  return run_experiment(config);
}

RunReport run_experiment2(const ExperimentConfig& config) {
  require(config.mode == Mode::kCued, "experiment 2 needs CUED mode");
  require(!config.loop_sequences.empty(), "experiment 2 needs at least one loop sequence");
  return run_experiment(config);
}

json RunReport::to_json() const {
  json runs_json = json::array();
  for (const RunResult& r : runs) {
    json jr = {{"run_id", r.run_id}, {"seed", r.seed}, {"ok", r.ok()}, {"behavior_ok", r.behavior_ok()}};
    if (r.training) {
      jr["metrics"] = metrics_json(r.training->metrics);
      json per = json::array();
      for (const auto& m : r.training->per_output) per.push_back(metrics_json(m));
      jr["per_output"] = per;
    }
    json rolls = json::array();
    for (const auto& s : r.rollouts) rolls.push_back(rollout_json(s));
    jr["rollouts"] = rolls;
    if (!r.ok()) {
      jr["failed_stage"] = r.failed_stage;
      jr["error"] = r.error;
    }
    runs_json.push_back(jr);
  }
  return {{"mode", to_string(mode)},
          {"master_seed", master_seed},
          {"n_runs", runs.size()},
          {"nrmse", {{"mean", nrmse.mean}, {"variance", nrmse.variance}}},
          {"r2", {{"mean", r2.mean}, {"variance", r2.variance}}},
          {"behavior_passes", behavior_passes},
          {"runs", runs_json},
          {"files", files}};
}

AnalysisReport run_analysis(const ExperimentConfig& config, const EsnModel& model,
                            const TrajectoryDataset& dataset, const AnalysisOptions& options) {
  if (!model.trained()) throw UntrainedModelError("analysis needs a trained model");
  const bool cued = config.mode == Mode::kCued;
  const Matrix inputs = dataset.inputs(cued);
  require(inputs.cols() == model.n_inputs(), "dataset inputs do not match the model");
  const int T = static_cast<int>(inputs.rows());
  const int split = static_cast<int>(std::floor(T * config.train_fraction));

  const DecisionLabels decisions = label_decisions(dataset, true);
  std::vector<int> label_of(static_cast<std::size_t>(T), -1);
  for (std::size_t i = 0; i < decisions.indices.size(); ++i) {
    label_of[decisions.indices[i]] = static_cast<int>(decisions.labels[i]);
  }

  // Held-out steps that carry a label: decision points (corridor) and the
  // PCA window (every step).
  std::vector<int> points;
  std::vector<int> window;
  for (int t = split; t < T; ++t) {
    if (label_of[static_cast<std::size_t>(t)] < 0) continue;
    if (dataset.records[static_cast<std::size_t>(t)].region == Region::kCorridor &&
        static_cast<int>(points.size()) < options.n_decision_points) {
      points.push_back(t);
    }
    if (static_cast<int>(window.size()) < options.pca_window) window.push_back(t);
  }
  require(points.size() >= 10, "too few labeled corridor steps in the held-out data");
  require(window.size() >= 10, "too few labeled held-out steps for PCA");

  const int last = std::max(points.back(), window.back());
  Matrix point_states(static_cast<Eigen::Index>(points.size()), model.n_units());
  Matrix window_states(static_cast<Eigen::Index>(window.size()), model.n_units());
  ReservoirRunner runner(model);
  std::vector<double> u(static_cast<std::size_t>(inputs.cols()));
  std::size_t pi = 0;
  std::size_t wi = 0;
  for (int t = 0; t <= last; ++t) {
    for (Eigen::Index j = 0; j < inputs.cols(); ++j) u[static_cast<std::size_t>(j)] = inputs(t, j);
    const Vector& x = runner.step(u);
    if (pi < points.size() && points[pi] == t) point_states.row(static_cast<Eigen::Index>(pi++)) = x.transpose();
    if (wi < window.size() && window[wi] == t) window_states.row(static_cast<Eigen::Index>(wi++)) = x.transpose();
  }

  LabeledStateSet reservoir;
  reservoir.points = point_states;
  reservoir.source = FeatureSource::kReservoir;
  LabeledStateSet sensors;
  sensors.points.resize(static_cast<Eigen::Index>(points.size()), kSensorCount);
  sensors.source = FeatureSource::kSensors;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& rec = dataset.records[static_cast<std::size_t>(points[i])];
    const Side side = static_cast<Side>(label_of[static_cast<std::size_t>(points[i])]);
    reservoir.labels.push_back(side);
    sensors.labels.push_back(side);
    for (int j = 0; j < kSensorCount; ++j) sensors.points(static_cast<Eigen::Index>(i), j) = rec.sensors[static_cast<std::size_t>(j)];
  }

  // Shuffled split of the decision points.
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(options.seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  const auto n_train = static_cast<std::size_t>(std::floor(order.size() * options.train_fraction));
  const std::vector<std::size_t> train_rows(order.begin(), order.begin() + static_cast<long>(n_train));
  const std::vector<std::size_t> test_rows(order.begin() + static_cast<long>(n_train), order.end());

  AnalysisReport report;
  auto score = [&](const LabeledStateSet& set) {
    const LabeledStateSet train = set.subset(train_rows);
    const LabeledStateSet test = set.subset(test_rows);
    ClassifierScores s;
    s.knn = evaluate(train_knn(train, options.knn_k), test).accuracy();
    s.svm = evaluate(train_linear_svm(train, options.svm_c), test).accuracy();
    return s;
  };
  report.reservoir = score(reservoir);
  report.sensors = score(sensors);

  for (int t : window) report.pca_labels.push_back(static_cast<Side>(label_of[static_cast<std::size_t>(t)]));
  report.pca_steps = window;
  const PcaModel pca = fit_pca(window_states);
  report.explained_variance = pca.explained_variance.head(std::min<Eigen::Index>(10, pca.explained_variance.size()));
  report.pca_points = project_rows(pca, window_states, 2);
  // Loop-bound states are the corridor steps, where the next loop is already
  // decided; the PCA itself uses the whole window.
  std::vector<Eigen::Index> bound;
  std::vector<Side> bound_labels;
  for (std::size_t i = 0; i < window.size(); ++i) {
    if (dataset.records[static_cast<std::size_t>(window[i])].region != Region::kCorridor) continue;
    bound.push_back(static_cast<Eigen::Index>(i));
    bound_labels.push_back(report.pca_labels[i]);
  }
  require(!bound.empty(), "PCA window holds no corridor steps");
  report.separability = linear_separability(pca, window_states(bound, Eigen::all), bound_labels);

  const LinearSvm svm = train_linear_svm(reservoir.subset(train_rows), options.svm_c);
  report.stream = predict_stream(svm, window_states);
  report.stream_truth = report.pca_labels;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < window.size(); ++i) hits += report.stream.labels[i] == report.stream_truth[i];
  report.stream_accuracy = static_cast<double>(hits) / static_cast<double>(window.size());
  if (report.stream.switches.size() >= 2) {
    report.mean_switch_interval =
        static_cast<double>(report.stream.switches.back() - report.stream.switches.front()) /
        static_cast<double>(report.stream.switches.size() - 1);
  }
  return report;
}

json AnalysisReport::to_json() const {
  return {{"reservoir", {{"knn", reservoir.knn}, {"svm", reservoir.svm}}},
          {"sensors", {{"knn", sensors.knn}, {"svm", sensors.svm}}},
          {"separability",
           {{"accuracy", separability.accuracy},
            {"margin", separability.margin},
            {"w", std::vector<double>(separability.w.data(), separability.w.data() + separability.w.size())},
            {"b", separability.b}}},
          {"explained_variance",
           std::vector<double>(explained_variance.data(), explained_variance.data() + explained_variance.size())},
          {"stream",
           {{"accuracy", stream_accuracy},
            {"switches", stream.switches.size()},
            {"mean_switch_interval", mean_switch_interval}}}};
}

std::vector<SweepRow> sweep(const ExperimentConfig& config,
                            const std::map<std::string, std::vector<double>>& grid) {
  config.validate();
  std::vector<std::pair<std::string, std::vector<double>>> axes(grid.begin(), grid.end());
  for (const auto& [name, values] : axes) {
    require(!values.empty(), "sweep axis " + name + " has no values");
    EsnConfig probe = config.esn;
    apply_param(probe, name, values.front());
  }
  std::vector<SweepRow> rows(1);
  for (const auto& [name, values] : axes) {
    std::vector<SweepRow> next;
    for (const SweepRow& r : rows) {
      for (double v : values) {
        SweepRow n = r;
        n.params[name] = v;
        next.push_back(n);
      }
    }
    rows = std::move(next);
  }

  const MazeMap maze = load_experiment_maze(config);
  const TrajectoryDataset dataset = make_dataset(config, maze);
  const std::size_t runs = static_cast<std::size_t>(config.n_runs);
  std::vector<double> nrmse(rows.size() * runs);
  std::vector<double> r2(rows.size() * runs);
  parallel_for(rows.size() * runs, config.threads, [&](std::size_t job) {
    const std::size_t cell = job / runs;
    const auto run = static_cast<std::uint64_t>(job % runs);
    EsnConfig esn = config.esn;
    for (const auto& [name, v] : rows[cell].params) apply_param(esn, name, v);
    esn.seed = derive_seed(config.seed, kSeedStreamReservoir, run);
    try {
      EsnModel model = build_esn(esn);
      const TrainOutcome out = train_and_score(model, dataset, config,
                                               derive_seed(config.seed, kSeedStreamStateNoise, run));
      nrmse[job] = out.metrics.nrmse;
      r2[job] = out.metrics.r2;
    } catch (const Error&) {
      nrmse[job] = std::numeric_limits<double>::quiet_NaN();
      r2[job] = std::numeric_limits<double>::quiet_NaN();
    }
  });
  for (std::size_t c = 0; c < rows.size(); ++c) {
    rows[c].nrmse = aggregate({nrmse.begin() + static_cast<long>(c * runs), nrmse.begin() + static_cast<long>((c + 1) * runs)});
    rows[c].r2 = aggregate({r2.begin() + static_cast<long>(c * runs), r2.begin() + static_cast<long>((c + 1) * runs)});
  }
  // NaN rows sort last.
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (std::isnan(a.nrmse.mean)) return false;
    if (std::isnan(b.nrmse.mean)) return true;
    return a.nrmse.mean < b.nrmse.mean;
  });
  return rows;
}

void write_metrics_csv(const RunReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "run_id,seed,nrmse,r2\n";
  for (const RunResult& r : report.runs) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out << r.run_id << ',' << r.seed << ',' << fmt(r.training ? r.training->metrics.nrmse : nan) << ','
        << fmt(r.training ? r.training->metrics.r2 : nan) << '\n';
  }
}

void write_trajectory_csv(const RolloutResult& rollout, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "t,x,y,theta,dtheta\n";
  for (std::size_t t = 0; t < rollout.trajectory.size(); ++t) {
    const RolloutStep& s = rollout.trajectory[t];
    out << t << ',' << fmt(s.position.x()) << ',' << fmt(s.position.y()) << ',' << fmt(s.heading)
        << ',' << fmt(s.turn) << '\n';
  }
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  if (rows.empty()) return;
  for (const auto& [name, v] : rows.front().params) out << name << ',';
  out << "nrmse_mean,nrmse_var,r2_mean,r2_var\n";
  for (const SweepRow& r : rows) {
    for (const auto& [name, v] : r.params) out << fmt(v) << ',';
    out << fmt(r.nrmse.mean) << ',' << fmt(r.nrmse.variance) << ',' << fmt(r.r2.mean) << ','
        << fmt(r.r2.variance) << '\n';
  }
}

}  // namespace rmaze
