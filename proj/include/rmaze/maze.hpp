#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "rmaze/types.hpp"

namespace rmaze {

class OutOfBoundsError : public Error {
 public:
  using Error::Error;
};

// Absolute tolerance for every geometric predicate, in world units.
inline constexpr double kGeometryEpsilon = 1e-9;
// Distance travelled per step.
inline constexpr double kSpeed = 2.0;
inline constexpr int kSensorCount = 8;

struct Segment {
  Point a;
  Point b;
};

struct Rect {
  Point lo;
  Point hi;

  // Closed rectangle (boundary points are inside).
  bool contains(const Point& p) const;
  Point center() const { return 0.5 * (lo + hi); }
};

using Polygon = std::vector<Point>;

// Closed polygon test: points on an edge count as inside.
bool polygon_contains(const Polygon& polygon, const Point& p);

enum class Region { kCorridor, kLeftLoop, kRightLoop, kOther };

const char* to_string(Region r);
Region region_from_string(const std::string& s);

// Two rectangular obstacles inside an outer rectangle. The gap between the
// obstacles is the central corridor; the ring around each obstacle is a loop.
struct MazeMap {
  std::vector<Segment> walls;
  // forcing_walls[side] are the temporary walls that steer the tutor into
  // the `side` loop. They are never part of the recorded sensor values.
  std::array<std::vector<Segment>, 2> forcing_walls;
  Rect bounds;
  std::vector<Polygon> obstacles;
  Rect corridor;
  Point intersection_point = Point::Zero();
  Polygon left_loop;
  Polygon right_loop;
  Point start_position = Point::Zero();
  double start_heading = 0.0;

  const std::vector<Segment>& forcing(Side side) const {
    return forcing_walls[static_cast<int>(side)];
  }
};

// Canonical maze: outer box 300 x 240, obstacles 120 x 200, all passages
// 20 units wide, plus a small triangular divider under the corridor. Loop
// centreline is 720 units; the tutor needs about 350 steps per loop.
MazeMap build_default_maze();

struct BotPose {
  Point position = Point::Zero();
  double heading = 0.0;  // radians, counter-clockwise from +x
};

// Ray layout relative to the heading. Positive offsets point to the left.
struct SensorLayout {
  std::array<double, kSensorCount> offsets_deg{0.0, 30.0, -30.0, 65.0, -65.0, 90.0, -90.0, 180.0};
  double max_range = 60.0;

  // Index of the ray mirrored across the heading, or -1.
  int mirror_of(int i) const;
};

struct SensorReading {
  std::array<double, kSensorCount> distances{};

  // distance / max_range, the representation fed to the reservoir.
  std::array<double, kSensorCount> normalized(const SensorLayout& layout) const;
};

bool in_free_space(const MazeMap& maze, const Point& p);

// Distance along the ray to the nearest segment, or +inf.
double ray_distance(const Point& origin, const Point& direction, const Segment& segment);

// Throws OutOfBoundsError when the pose is not in free space. Forcing walls
// for `forcing` are included when it is set.
SensorReading sense(const MazeMap& maze, const BotPose& pose, const SensorLayout& layout = {},
                    std::optional<Side> forcing = std::nullopt);

// heading += turn, then position += speed * (cos, sin)(heading).
BotPose step_pose(const BotPose& pose, double turn);

bool segments_intersect(const Point& p1, const Point& p2, const Segment& s);

// True iff the move from -> to touches any wall.
bool check_collision(const MazeMap& maze, const Point& from, const Point& to);
bool check_collision(const std::vector<Segment>& walls, const Point& from, const Point& to);

// CORRIDOR wins ties with the loop regions.
Region region_of(const MazeMap& maze, const Point& p);

}  // namespace rmaze
