#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "rmaze/experiment.hpp"
#include "rmaze/random.hpp"

using namespace rmaze;

namespace {

ExperimentConfig tiny(Mode mode) {
  ExperimentConfig c = mode == Mode::kUncued ? ExperimentConfig::uncued() : ExperimentConfig::cued();
  c.esn.n_units = 100;
  c.n_steps = 4000;
  c.rollout_loops = 3;
  c.n_runs = 2;
  c.threads = 1;
  c.seed = 11;
  if (mode == Mode::kCued) c.loop_sequences = {{Side::kLeft, Side::kRight, Side::kRight}};
  return c;
}

}  // namespace

TEST_CASE("experiment presets") {
  const ExperimentConfig u = ExperimentConfig::uncued();
  CHECK(u.esn.n_inputs == 8);
  CHECK(u.esn.spectral_radius == 1.4);
  const ExperimentConfig c = ExperimentConfig::cued();
  CHECK(c.esn.n_inputs == 10);
  CHECK(c.esn.n_outputs == target_width(c.target));
  CHECK(c.loop_sequences.size() == 2);
  u.validate();
  c.validate();
}

TEST_CASE("experiment config validation") {
  ExperimentConfig c = ExperimentConfig::cued();
  c.esn = EsnConfig::without_context();
  CHECK_THROWS_AS(c.validate(), ContractError);
  ExperimentConfig u = ExperimentConfig::uncued();
  u.train_fraction = 1.0;
  CHECK_THROWS_AS(u.validate(), ContractError);
  u = ExperimentConfig::uncued();
  u.n_runs = 0;
  CHECK_THROWS_AS(u.validate(), ContractError);
  CHECK_THROWS_AS(mode_from_string("SIDEWAYS"), ContractError);
  CHECK(mode_from_string(to_string(Mode::kCued)) == Mode::kCued);
}

TEST_CASE("experiment config JSON round trip") {
  ExperimentConfig c = ExperimentConfig::cued();
  c.seed = 77;
  c.n_runs = 5;
  c.noise_std = 0.2;
  c.training_sequence = {Side::kRight, Side::kLeft};
  const nlohmann::json j = config_to_json(c);
  const ExperimentConfig back = config_from_json(j);
  CHECK(config_to_json(back) == j);
  const ExperimentConfig partial = config_from_json({{"mode", "CUED"}, {"seed", 3}});
  CHECK(partial.seed == 3);
  CHECK(partial.esn.n_inputs == 10);
}

TEST_CASE("derived seeds are distinct across runs and streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t stream = 1; stream <= 4; ++stream) {
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(42, stream, i));
  }
  CHECK(seen.size() == 4000);
  CHECK(derive_seed(42, 2, 7) == derive_seed(42, 2, 7));
  CHECK(derive_seed(42, 2, 7) != derive_seed(43, 2, 7));
}

TEST_CASE("aggregate") {
  const Aggregate a = aggregate({1.0, 2.0, 3.0, 4.0});
  CHECK(a.mean == doctest::Approx(2.5));
  CHECK(a.variance == doctest::Approx(1.25));
  CHECK(std::isnan(aggregate({1.0, std::numeric_limits<double>::quiet_NaN()}).mean));
}

TEST_CASE("small uncued experiment is deterministic and writes recomputable metrics") {
  ExperimentConfig c = tiny(Mode::kUncued);
  const auto dir = std::filesystem::temp_directory_path() / "rmaze_exp_test";
  std::filesystem::remove_all(dir);
  c.output_dir = dir.string();
  const RunReport a = run_experiment(c);
  c.output_dir.clear();
  const RunReport b = run_experiment(c);
  REQUIRE(a.runs.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    REQUIRE(a.runs[i].ok());
    CHECK(a.runs[i].training->metrics.nrmse == b.runs[i].training->metrics.nrmse);
    CHECK(a.runs[i].training->metrics.r2 == b.runs[i].training->metrics.r2);
    CHECK(a.runs[i].rollouts.front().executed == b.runs[i].rollouts.front().executed);
  }
  CHECK(a.runs[0].seed != a.runs[1].seed);
  CHECK(a.runs[0].training->metrics.nrmse != a.runs[1].training->metrics.nrmse);
  CHECK(a.runs[0].training->train_steps + a.runs[0].training->test_steps + c.washout <= c.n_steps);

  std::ifstream in(dir / "metrics.csv");
  REQUIRE(in);
  std::string line;
  std::getline(in, line);
  CHECK(line == "run_id,seed,nrmse,r2");
  std::vector<double> nrmse;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 4);
    nrmse.push_back(std::stod(cells[2]));
  }
  REQUIRE(nrmse.size() == 2);
  const Aggregate re = aggregate(nrmse);
  CHECK(re.mean == doctest::Approx(a.nrmse.mean).epsilon(1e-9));
  CHECK(re.variance == doctest::Approx(a.nrmse.variance).epsilon(1e-6));
  CHECK(std::filesystem::exists(dir / "report.json"));
  CHECK(std::filesystem::exists(dir / "config.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("small cued experiment runs every commanded sequence") {
  ExperimentConfig c = tiny(Mode::kCued);
  c.n_runs = 1;
  const RunReport r = run_experiment(c);
  REQUIRE(r.runs.size() == 1);
  REQUIRE(r.runs[0].ok());
  REQUIRE(r.runs[0].rollouts.size() == 1);
  CHECK(r.runs[0].rollouts[0].commanded == c.loop_sequences[0]);
  CHECK(r.runs[0].training->per_output.size() == 2);
}

TEST_CASE("alternation rule") {
  RolloutResult ok;
  for (int i = 0; i < 12; ++i) ok.loops.push_back(i % 2 ? Side::kRight : Side::kLeft);
  ok.periods.assign(11, 350);
  CHECK(alternation_passed(ok));
  RolloutResult short_run = ok;
  short_run.loops.resize(9);
  short_run.periods.resize(8);
  CHECK_FALSE(alternation_passed(short_run));
  RolloutResult repeat = ok;
  repeat.loops[5] = repeat.loops[4];
  CHECK_FALSE(alternation_passed(repeat));
  RolloutResult slow = ok;
  slow.periods[3] = 421;
  CHECK_FALSE(alternation_passed(slow));
  RolloutResult crash = ok;
  crash.collisions = 1;
  CHECK_FALSE(alternation_passed(crash));
}

TEST_CASE("sweep") {
  ExperimentConfig c = tiny(Mode::kUncued);
  c.n_runs = 1;
  const auto one = sweep(c, {});
  CHECK(one.size() == 1);
  const auto rows = sweep(c, {{"leak_rate", {0.01, 0.0181, 0.05}}});
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i - 1].nrmse.mean <= rows[i].nrmse.mean);
  for (const auto& row : rows) {
    if (row.params.at("leak_rate") == 0.0181) CHECK(rows.front().nrmse.mean <= 1.5 * row.nrmse.mean);
  }
  const RunReport single = run_experiment1(c);
  CHECK(one.front().nrmse.mean == single.nrmse.mean);
  CHECK_THROWS_AS(sweep(c, {{"colour", {1.0}}}), ContractError);
}
