#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rmaze/maze.hpp"
#include "rmaze/types.hpp"

namespace rmaze {

class GenerationError : public Error {
 public:
  using Error::Error;
};

// Reactive wall follower: turn = gain * sum_i weight_i * distance_i.
// Positive weights sit on the left-hand rays so the bot turns towards the
// more open side.
struct BraitenbergController {
  std::array<double, kSensorCount> weights{0.0, 0.3, -0.3, 0.6, -0.6, 1.0, -1.0, 0.0};
  double gain = 0.01;

  // Mirrored rays must carry opposite weights; the 0 and 180 degree rays
  // must carry none. Throws ContractError otherwise.
  void validate(const SensorLayout& layout) const;
};

double tutor_step(const BraitenbergController& ctrl, const SensorReading& reading);

inline constexpr int kCueCount = 2;

// What the readout is trained to emit: the per-step turn, the heading after
// the turn (unwrapped, so it stays continuous across loops), or that heading
// as a (cos, sin) pair.
enum class TargetKind { kTurn, kHeading, kHeadingVector };

int target_width(TargetKind kind);

const char* to_string(TargetKind kind);
TargetKind target_kind_from_string(const std::string& s);

struct TrajectoryRecord {
  std::array<double, kSensorCount> sensors{};  // normalized, forcing walls excluded
  std::array<double, kCueCount> cues{};        // {L, R}
  double target = 0.0;                         // turn applied at this step
  Point position = Point::Zero();
  double heading = 0.0;                        // before the turn, unwrapped
  Region region = Region::kOther;
  std::optional<Side> loop;                    // loop in progress, none in the corridor
};

struct DatasetMeta {
  std::uint64_t seed = 0;
  double noise_std = 0.0;
  double start_heading = 0.0;
  int n_loops = 0;              // completed loops (one per LEFT or RIGHT excursion)
  std::vector<Side> completed;  // side of each completed loop, in order
};

struct TrajectoryDataset {
  std::vector<TrajectoryRecord> records;
  DatasetMeta meta;

  std::size_t size() const { return records.size(); }
  // T x 8 sensors, or T x 10 with the cue pair appended.
  Matrix inputs(bool with_cues) const;
  // T x target_width(kind).
  Matrix targets(TargetKind kind = TargetKind::kTurn) const;
};

struct GenerationOptions {
  double noise_std = 0.05;
  std::uint64_t seed = 0;
  // Hard cap on the number of steps; 0 means no cap.
  int max_steps = 0;
};

// Drives the tutor through the loops returned by `next_loop(k)` for k = 0, 1,
// ... until `max_steps` steps are recorded or `n_loops` loops complete
// (n_loops < 0 means unbounded).
TrajectoryDataset generate_trajectory(const MazeMap& maze, const BraitenbergController& ctrl,
                                      const SensorLayout& layout,
                                      const std::function<Side(int)>& next_loop, int n_loops,
                                      const GenerationOptions& options);

// LEFT, RIGHT, LEFT, ... for exactly n_steps steps.
TrajectoryDataset generate_standard8(const MazeMap& maze, const BraitenbergController& ctrl,
                                     const SensorLayout& layout, int n_steps, double noise_std,
                                     std::uint64_t seed);

// Follows `sequence` and stops when its last loop completes, or at
// max_steps if that is positive.
TrajectoryDataset generate_cued(const MazeMap& maze, const BraitenbergController& ctrl,
                                const SensorLayout& layout, const std::vector<Side>& sequence,
                                double noise_std, std::uint64_t seed, int max_steps = 0);

struct DecisionLabels {
  std::vector<std::size_t> indices;
  std::vector<Side> labels;
  int dropped = 0;  // trailing records with no following loop
};

// Labels each corridor record (or every record when `all_records`) with the
// side of the next loop entered after it.
DecisionLabels label_decisions(const TrajectoryDataset& dataset, bool all_records = false);

// "AABAB" <-> {LEFT, LEFT, RIGHT, LEFT, RIGHT}; 'L'/'R' are accepted too.
std::vector<Side> parse_sequence(const std::string& text);
std::string format_sequence(const std::vector<Side>& sequence);

// Dataset CSV: t,s1..s8,cueL,cueR,target,x,y,region,loop_label
// Sidecar JSON: {"format": "rmaze-dataset", "version": 1, "seed", "noise_std",
//                "start_heading", "n_loops", "n_steps", "completed": "ABAB..."}
// The target column holds the turn; headings are rebuilt on load from
// start_heading and the running sum of turns.
void save_dataset(const TrajectoryDataset& dataset, const std::string& csv_path,
                  const std::string& meta_path);
TrajectoryDataset load_dataset(const std::string& csv_path, const std::string& meta_path);

}  // namespace rmaze
