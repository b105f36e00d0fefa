#pragma once

#include <vector>

#include "rmaze/esn.hpp"
#include "rmaze/maze.hpp"
#include "rmaze/tutor.hpp"

namespace rmaze {

struct RolloutOptions {
  // Teacher-forced steps (tutor drives, reservoir listens) before hand-over.
  int warmup_steps = 100;
  // Stop once this many loops have completed. Ignored when cue_sequence is
  // set; the rollout then stops after the last commanded loop.
  int target_loops = 10;
  // Abort when no loop completes within this many steps.
  int stall_steps = 1200;
  // Commanded loops for a cued model; empty for the uncued model.
  std::vector<Side> cue_sequence;
  // Must match what the readout was trained on. A heading readout sets the
  // new heading directly.
  TargetKind target = TargetKind::kTurn;
  // Keep every ESN state (needed by the analysis stage).
  bool record_states = false;
};

struct RolloutStep {
  Point position = Point::Zero();
  double heading = 0.0;
  double turn = 0.0;
  Region region = Region::kOther;
  bool driven_by_esn = false;
};

struct RolloutResult {
  std::vector<RolloutStep> trajectory;
  std::vector<Side> loops;      // executed loop sides, in order
  std::vector<int> loop_ends;   // step at which each loop completed
  std::vector<int> periods;     // steps between consecutive completions
  int collisions = 0;
  int collision_step = -1;
  bool stalled = false;
  Matrix states;                // n_units x steps when record_states

  // Strict L/R alternation over every completed loop.
  bool alternating() const;
  bool matches(const std::vector<Side>& commanded) const;
};

// The trained ESN output is used as the turn command; sensors (and, for a
// cued model, the corridor-gated cue pair) are fed back every step. Evaluation
// runs without reservoir noise.
RolloutResult run_closed_loop(const EsnModel& model, const MazeMap& maze,
                              const BraitenbergController& tutor, const SensorLayout& layout,
                              const RolloutOptions& options);

}  // namespace rmaze
