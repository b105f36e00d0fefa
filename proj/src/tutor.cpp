#include "rmaze/tutor.hpp"

#include <cmath>

#include "rmaze/random.hpp"

namespace rmaze {

void BraitenbergController::validate(const SensorLayout& layout) const {
  for (int i = 0; i < kSensorCount; ++i) {
    const int m = layout.mirror_of(i);
    if (m < 0) {
      if (weights[i] != 0.0) {
        throw ContractError("rays without a mirror partner (0, 180 deg) must have zero weight");
      }
    } else if (weights[i] != -weights[m]) {
      throw ContractError("mirrored rays must carry opposite weights");
    }
  }
}

double tutor_step(const BraitenbergController& ctrl, const SensorReading& reading) {
  double sum = 0.0;
  for (int i = 0; i < kSensorCount; ++i) sum += ctrl.weights[i] * reading.distances[i];
  return ctrl.gain * sum;
}

Matrix TrajectoryDataset::inputs(bool with_cues) const {
  const int cols = kSensorCount + (with_cues ? kCueCount : 0);
  Matrix m(static_cast<Eigen::Index>(records.size()), cols);
  for (std::size_t t = 0; t < records.size(); ++t) {
    const auto row = static_cast<Eigen::Index>(t);
    for (int i = 0; i < kSensorCount; ++i) m(row, i) = records[t].sensors[i];
    if (with_cues) {
      m(row, kSensorCount) = records[t].cues[0];
      m(row, kSensorCount + 1) = records[t].cues[1];
    }
  }
  return m;
}

Matrix TrajectoryDataset::targets(TargetKind kind) const {
  Matrix m(static_cast<Eigen::Index>(records.size()), target_width(kind));
  for (std::size_t t = 0; t < records.size(); ++t) {
    const TrajectoryRecord& r = records[t];
    const auto row = static_cast<Eigen::Index>(t);
    const double next = r.heading + r.target;
    switch (kind) {
      case TargetKind::kTurn: m(row, 0) = r.target; break;
      case TargetKind::kHeading: m(row, 0) = next; break;
      case TargetKind::kHeadingVector:
        m(row, 0) = std::cos(next);
        m(row, 1) = std::sin(next);
        break;
    }
  }
  return m;
}

int target_width(TargetKind kind) { return kind == TargetKind::kHeadingVector ? 2 : 1; }

const char* to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::kTurn: return "turn";
    case TargetKind::kHeading: return "heading";
    case TargetKind::kHeadingVector: return "heading_vector";
  }
  return "turn";
}

TargetKind target_kind_from_string(const std::string& s) {
  if (s == "turn") return TargetKind::kTurn;
  if (s == "heading") return TargetKind::kHeading;
  if (s == "heading_vector") return TargetKind::kHeadingVector;
  throw ContractError("unknown target kind: " + s);
}

TrajectoryDataset generate_trajectory(const MazeMap& maze, const BraitenbergController& ctrl,
                                      const SensorLayout& layout,
                                      const std::function<Side(int)>& next_loop, int n_loops,
                                      const GenerationOptions& options) {
  if (options.max_steps <= 0 && n_loops < 0) {
    throw ContractError("generation needs a step cap or a loop count");
  }
  if (n_loops == 0) throw ContractError("loop sequence is empty");
  ctrl.validate(layout);

  TrajectoryDataset data;
  data.meta.seed = options.seed;
  data.meta.noise_std = options.noise_std;
  data.meta.start_heading = maze.start_heading;
  Rng rng(options.seed);

  BotPose pose{maze.start_position, maze.start_heading};
  int k = 0;
  Side target = next_loop(0);
  bool left_corridor = false;
  std::optional<Region> visited;

  for (int t = 0; options.max_steps <= 0 || t < options.max_steps; ++t) {
    BotPose sensing = pose;
    if (options.noise_std > 0.0) {
      const Point jitter(rng.normal() * options.noise_std, rng.normal() * options.noise_std);
      if (in_free_space(maze, pose.position + jitter)) sensing.position += jitter;
    }
    const SensorReading forced = sense(maze, sensing, layout, target);
    const SensorReading truth = sense(maze, sensing, layout);
    const double turn = tutor_step(ctrl, forced);

    TrajectoryRecord rec;
    rec.sensors = truth.normalized(layout);
    rec.target = turn;
    rec.position = pose.position;
    rec.heading = pose.heading;
    rec.region = region_of(maze, pose.position);
    if (rec.region == Region::kCorridor) {
      rec.cues[static_cast<int>(target)] = 1.0;
    } else {
      rec.loop = target;
    }
    data.records.push_back(rec);

    const BotPose next = step_pose(pose, turn);
    if (check_collision(maze, pose.position, next.position)) {
      throw GenerationError("tutor collided with a wall at step " + std::to_string(t) +
                            "; controller weights or maze geometry need retuning");
    }
    pose = next;

    const Region region = region_of(maze, pose.position);
    if (region == Region::kLeftLoop || region == Region::kRightLoop) {
      if (!visited) visited = region;
      left_corridor = true;
    } else if (region == Region::kOther) {
      left_corridor = true;
    } else if (left_corridor && !visited) {
      // Dipped out of the corridor without entering a loop.
      left_corridor = false;
    } else if (left_corridor) {
      // Back in the corridor: the excursion is complete.
      const Region expected = target == Side::kLeft ? Region::kLeftLoop : Region::kRightLoop;
      if (visited != expected) {
        throw GenerationError("tutor left the corridor into the wrong loop at step " +
                              std::to_string(t));
      }
      data.meta.completed.push_back(target);
      ++data.meta.n_loops;
      left_corridor = false;
      visited.reset();
      ++k;
      if (n_loops > 0 && k >= n_loops) break;
      target = next_loop(k);
    }
  }
  return data;
}

TrajectoryDataset generate_standard8(const MazeMap& maze, const BraitenbergController& ctrl,
                                     const SensorLayout& layout, int n_steps, double noise_std,
                                     std::uint64_t seed) {
  if (n_steps <= 0) throw ContractError("n_steps must be positive");
  GenerationOptions opt{noise_std, seed, n_steps};
  return generate_trajectory(
      maze, ctrl, layout, [](int k) { return k % 2 == 0 ? Side::kLeft : Side::kRight; }, -1, opt);
}

TrajectoryDataset generate_cued(const MazeMap& maze, const BraitenbergController& ctrl,
                                const SensorLayout& layout, const std::vector<Side>& sequence,
                                double noise_std, std::uint64_t seed, int max_steps) {
  if (sequence.empty()) throw ContractError("loop sequence is empty");
  GenerationOptions opt{noise_std, seed, max_steps};
  return generate_trajectory(
      maze, ctrl, layout, [&](int k) { return sequence[static_cast<std::size_t>(k)]; },
      static_cast<int>(sequence.size()), opt);
}

DecisionLabels label_decisions(const TrajectoryDataset& dataset, bool all_records) {
  const auto& recs = dataset.records;
  // Excursions are maximal runs of records with a loop label.
  std::vector<Side> excursion_side;
  std::vector<int> excursion_of(recs.size(), -1);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (!recs[i].loop) continue;
    if (i == 0 || !recs[i - 1].loop) excursion_side.push_back(*recs[i].loop);
    excursion_of[i] = static_cast<int>(excursion_side.size()) - 1;
  }

  DecisionLabels out;
  std::size_t started = 0;  // excursions beginning at or before i
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (excursion_of[i] >= 0) started = static_cast<std::size_t>(excursion_of[i]) + 1;
    const bool wanted = all_records || recs[i].region == Region::kCorridor;
    if (!wanted) continue;
    // Inside an excursion the upcoming decision is the next excursion; in
    // the corridor it is the first excursion after this record.
    if (started >= excursion_side.size()) {
      ++out.dropped;
      continue;
    }
    out.indices.push_back(i);
    out.labels.push_back(excursion_side[started]);
  }
  return out;
}

std::vector<Side> parse_sequence(const std::string& text) {
  std::vector<Side> out;
  for (char c : text) {
    switch (c) {
      case 'A': case 'a': case 'L': case 'l': out.push_back(Side::kLeft); break;
      case 'B': case 'b': case 'R': case 'r': out.push_back(Side::kRight); break;
      case ' ': case ',': case '[': case ']': case '.': break;
      default: throw ContractError(std::string("bad loop sequence character '") + c + "'");
    }
  }
  return out;
}

std::string format_sequence(const std::vector<Side>& sequence) {
  std::string s;
  for (Side side : sequence) s.push_back(to_letter(side));
  return s;
}

}  // namespace rmaze
