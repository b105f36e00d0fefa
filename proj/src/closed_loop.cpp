#include "rmaze/closed_loop.hpp"

#include <cmath>
#include <numbers>

namespace rmaze {

bool RolloutResult::alternating() const {
  if (loops.empty()) return false;
  for (std::size_t i = 1; i < loops.size(); ++i) {
    if (loops[i] == loops[i - 1]) return false;
  }
  return true;
}

bool RolloutResult::matches(const std::vector<Side>& commanded) const {
  return loops == commanded;
}

RolloutResult run_closed_loop(const EsnModel& model, const MazeMap& maze,
                              const BraitenbergController& tutor, const SensorLayout& layout,
                              const RolloutOptions& options) {
  if (!model.trained()) throw UntrainedModelError("closed-loop rollout needs a trained readout");
  const bool cued = !options.cue_sequence.empty();
  const int expected_inputs = kSensorCount + (cued ? kCueCount : 0);
  if (model.n_inputs() != expected_inputs) {
    throw ContractError(cued ? "cued rollout needs a model with 10 inputs"
                             : "uncued rollout needs a model with 8 inputs");
  }
  if (model.config().n_outputs != target_width(options.target)) {
    throw ContractError(std::string("model output width does not match the ") +
                        to_string(options.target) + " target");
  }
  const int loops_wanted =
      cued ? static_cast<int>(options.cue_sequence.size()) : options.target_loops;

  RolloutResult result;
  ReservoirRunner runner(model);
  std::vector<double> input(static_cast<std::size_t>(expected_inputs), 0.0);
  std::vector<Vector> kept_states;

  BotPose pose{maze.start_position, maze.start_heading};
  // The tutor steers the warm-up towards the next commanded loop. Without
  // cues it alternates, starting LEFT.
  std::size_t k = 0;     // loops counted in the result
  std::size_t done = 0;  // all completed loops, warm-up included
  auto commanded = [&]() {
    if (!cued) return done % 2 == 0 ? Side::kLeft : Side::kRight;
    return options.cue_sequence[std::min(k, options.cue_sequence.size() - 1)];
  };
  bool left_corridor = false;
  Region visited = Region::kOther;  // first loop region since the corridor
  int entered = 0;
  int last_event = 0;

  for (int t = 0;; ++t) {
    const Region here = region_of(maze, pose.position);
    const SensorReading truth = sense(maze, pose, layout);
    const auto normalized = truth.normalized(layout);
    std::copy(normalized.begin(), normalized.end(), input.begin());
    if (cued) {
      input[kSensorCount] = 0.0;
      input[kSensorCount + 1] = 0.0;
      if (here == Region::kCorridor) input[kSensorCount + static_cast<int>(commanded())] = 1.0;
    }
    runner.step(input);
    if (options.record_states) kept_states.push_back(runner.state());

    const bool esn = t >= options.warmup_steps;
    double turn = 0.0;
    if (esn) {
      const Vector out = runner.output(input);
      switch (options.target) {
        case TargetKind::kTurn: turn = out[0]; break;
        case TargetKind::kHeading: turn = out[0] - pose.heading; break;
        case TargetKind::kHeadingVector:
          // Shortest rotation onto the predicted direction.
          turn = std::remainder(std::atan2(out[1], out[0]) - pose.heading, 2.0 * std::numbers::pi);
          break;
      }
    } else {
      turn = tutor_step(tutor, sense(maze, pose, layout, commanded()));
    }
    result.trajectory.push_back({pose.position, pose.heading, turn, here, esn});

    const BotPose next = step_pose(pose, turn);
    if (check_collision(maze, pose.position, next.position)) {
      result.collisions = 1;
      result.collision_step = t;
      break;
    }
    pose = next;

    const Region region = region_of(maze, pose.position);
    if (region == Region::kLeftLoop || region == Region::kRightLoop) {
      if (visited == Region::kOther) {
        visited = region;
        entered = t;
      }
      left_corridor = true;
    } else if (region == Region::kOther) {
      left_corridor = true;
    } else if (left_corridor) {
      left_corridor = false;
      if (visited != Region::kOther) {
        // Loops entered under the tutor are not the model's.
        if (entered >= options.warmup_steps) {
          result.loops.push_back(visited == Region::kLeftLoop ? Side::kLeft : Side::kRight);
          if (!result.loop_ends.empty()) result.periods.push_back(t + 1 - result.loop_ends.back());
          result.loop_ends.push_back(t + 1);
          ++k;
        }
        last_event = t + 1;
        ++done;
      }
      visited = Region::kOther;
      if (static_cast<int>(result.loops.size()) >= loops_wanted) break;
    }
    if (t + 1 - last_event > options.stall_steps) {
      result.stalled = true;
      break;
    }
  }

  if (options.record_states && !kept_states.empty()) {
    result.states.resize(model.n_units(), static_cast<Eigen::Index>(kept_states.size()));
    for (std::size_t i = 0; i < kept_states.size(); ++i) {
      result.states.col(static_cast<Eigen::Index>(i)) = kept_states[i];
    }
  }
  return result;
}

}  // namespace rmaze
