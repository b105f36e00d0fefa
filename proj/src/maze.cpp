#include "rmaze/maze.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace rmaze {

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

bool on_segment(const Point& p, const Point& a, const Point& b) {
  const Point ab = b - a;
  const double len = ab.norm();
  if (len == 0.0) return (p - a).norm() <= kGeometryEpsilon;
  if (std::abs(cross(ab, p - a)) / len > kGeometryEpsilon) return false;
  const double t = ab.dot(p - a) / (len * len);
  return t >= -kGeometryEpsilon / len && t <= 1.0 + kGeometryEpsilon / len;
}

bool on_polygon_edge(const Polygon& polygon, const Point& p) {
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (on_segment(p, polygon[i], polygon[(i + 1) % n])) return true;
  }
  return false;
}

std::vector<Segment> closed_polyline(const std::vector<Point>& pts) {
  std::vector<Segment> out;
  for (std::size_t i = 0; i < pts.size(); ++i) out.push_back({pts[i], pts[(i + 1) % pts.size()]});
  return out;
}

Polygon rect_polygon(const Rect& r) {
  return {r.lo, Point(r.hi.x(), r.lo.y()), r.hi, Point(r.lo.x(), r.hi.y())};
}

}  // namespace

bool Rect::contains(const Point& p) const {
  return p.x() >= lo.x() - kGeometryEpsilon && p.x() <= hi.x() + kGeometryEpsilon &&
         p.y() >= lo.y() - kGeometryEpsilon && p.y() <= hi.y() + kGeometryEpsilon;
}

bool polygon_contains(const Polygon& polygon, const Point& p) {
  if (polygon.size() < 3) return false;
  if (on_polygon_edge(polygon, p)) return true;
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = polygon[i];
    const Point& b = polygon[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

const char* to_string(Region r) {
  switch (r) {
    case Region::kCorridor: return "CORRIDOR";
    case Region::kLeftLoop: return "LEFT_LOOP";
    case Region::kRightLoop: return "RIGHT_LOOP";
    case Region::kOther: return "OTHER";
  }
  return "OTHER";
}

Region region_from_string(const std::string& s) {
  if (s == "CORRIDOR") return Region::kCorridor;
  if (s == "LEFT_LOOP") return Region::kLeftLoop;
  if (s == "RIGHT_LOOP") return Region::kRightLoop;
  if (s == "OTHER") return Region::kOther;
  throw ContractError("unknown region label: " + s);
}

MazeMap build_default_maze() {
  MazeMap m;
  m.bounds = {Point(0, 0), Point(300, 240)};
  const Rect left_block{Point(20, 20), Point(140, 220)};
  const Rect right_block{Point(160, 20), Point(280, 220)};
  // Low divider on the floor below the corridor. Returning from either loop
  // the bot would otherwise see the far bottom passage straight ahead and
  // turn into the corridor late.
  const Polygon divider{Point(135, 0), Point(165, 0), Point(150, 14)};
  m.obstacles = {rect_polygon(left_block), rect_polygon(right_block), divider};
  for (const Polygon& p : {rect_polygon(m.bounds), m.obstacles[0], m.obstacles[1], divider}) {
    const auto segs = closed_polyline(p);
    m.walls.insert(m.walls.end(), segs.begin(), segs.end());
  }
  // Going LEFT: a wall across the right-hand branch of the top junction,
  // and vice versa. It sits 45 units into the branch so that it only biases
  // the tutor; the bottom junction needs no forcing.
  m.forcing_walls[static_cast<int>(Side::kLeft)] = {{Point(195, 220), Point(195, 240)}};
  m.forcing_walls[static_cast<int>(Side::kRight)] = {{Point(105, 220), Point(105, 240)}};
  m.corridor = {Point(140, 20), Point(160, 220)};
  m.intersection_point = m.corridor.center();
  m.left_loop = rect_polygon({Point(0, 0), Point(140, 240)});
  m.right_loop = rect_polygon({Point(160, 0), Point(300, 240)});
  m.start_position = Point(150, 24);
  m.start_heading = std::numbers::pi / 2;
  return m;
}

int SensorLayout::mirror_of(int i) const {
  for (int j = 0; j < kSensorCount; ++j) {
    const double a = offsets_deg[i];
    const double b = offsets_deg[j];
    if (std::abs(a + b) < 1e-12 && std::abs(std::abs(a) - 180.0) > 1e-12 && a != 0.0) return j;
  }
  return -1;
}

std::array<double, kSensorCount> SensorReading::normalized(const SensorLayout& layout) const {
  std::array<double, kSensorCount> out{};
  for (int i = 0; i < kSensorCount; ++i) out[i] = distances[i] / layout.max_range;
  return out;
}

bool in_free_space(const MazeMap& maze, const Point& p) {
  if (!maze.bounds.contains(p)) return false;
  for (const Polygon& o : maze.obstacles) {
    if (polygon_contains(o, p) && !on_polygon_edge(o, p)) return false;
  }
  return true;
}

double ray_distance(const Point& origin, const Point& direction, const Segment& segment) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const Point e = segment.b - segment.a;
  const Point w = segment.a - origin;
  const double denom = cross(direction, e);
  const double elen = e.norm();
  if (std::abs(denom) <= kGeometryEpsilon * std::max(elen, 1.0)) {
    // Parallel. Only a collinear segment can be hit.
    if (std::abs(cross(direction, w)) > kGeometryEpsilon) return kInf;
    const double ta = direction.dot(segment.a - origin);
    const double tb = direction.dot(segment.b - origin);
    if (std::max(ta, tb) < -kGeometryEpsilon) return kInf;
    if (std::min(ta, tb) <= 0.0) return 0.0;
    return std::min(ta, tb);
  }
  const double t = cross(w, e) / denom;
  const double s = cross(w, direction) / denom;
  const double s_eps = elen > 0.0 ? kGeometryEpsilon / elen : kGeometryEpsilon;
  if (t < -kGeometryEpsilon || s < -s_eps || s > 1.0 + s_eps) return kInf;
  return std::max(t, 0.0);
}

SensorReading sense(const MazeMap& maze, const BotPose& pose, const SensorLayout& layout,
                    std::optional<Side> forcing) {
  if (!in_free_space(maze, pose.position)) {
    throw OutOfBoundsError("pose (" + std::to_string(pose.position.x()) + ", " +
                           std::to_string(pose.position.y()) + ") is outside free space");
  }
  SensorReading reading;
  const std::vector<Segment>* extra = forcing ? &maze.forcing(*forcing) : nullptr;
  for (int i = 0; i < kSensorCount; ++i) {
    const double angle = pose.heading + layout.offsets_deg[i] * std::numbers::pi / 180.0;
    const Point dir(std::cos(angle), std::sin(angle));
    double best = layout.max_range;
    for (const Segment& s : maze.walls) best = std::min(best, ray_distance(pose.position, dir, s));
    if (extra) {
      for (const Segment& s : *extra) best = std::min(best, ray_distance(pose.position, dir, s));
    }
    reading.distances[i] = best;
  }
  return reading;
}

BotPose step_pose(const BotPose& pose, double turn) {
  BotPose next;
  next.heading = pose.heading + turn;
  next.position = pose.position + kSpeed * Point(std::cos(next.heading), std::sin(next.heading));
  return next;
}

bool segments_intersect(const Point& p1, const Point& p2, const Segment& s) {
  const Point d1 = p2 - p1;
  const Point d2 = s.b - s.a;
  const double o1 = cross(d1, s.a - p1);
  const double o2 = cross(d1, s.b - p1);
  const double o3 = cross(d2, p1 - s.a);
  const double o4 = cross(d2, p2 - s.a);
  const double eps1 = kGeometryEpsilon * std::max(d1.norm(), 1.0);
  const double eps2 = kGeometryEpsilon * std::max(d2.norm(), 1.0);
  const bool straddle1 = (o1 > eps1 && o2 < -eps1) || (o1 < -eps1 && o2 > eps1);
  const bool straddle2 = (o3 > eps2 && o4 < -eps2) || (o3 < -eps2 && o4 > eps2);
  if (straddle1 && straddle2) return true;
  // Touching or collinear configurations.
  return on_segment(s.a, p1, p2) || on_segment(s.b, p1, p2) || on_segment(p1, s.a, s.b) ||
         on_segment(p2, s.a, s.b);
}

bool check_collision(const std::vector<Segment>& walls, const Point& from, const Point& to) {
  return std::any_of(walls.begin(), walls.end(),
                     [&](const Segment& s) { return segments_intersect(from, to, s); });
}

bool check_collision(const MazeMap& maze, const Point& from, const Point& to) {
  return check_collision(maze.walls, from, to);
}

Region region_of(const MazeMap& maze, const Point& p) {
  if (maze.corridor.contains(p)) return Region::kCorridor;
  if (!maze.bounds.contains(p)) return Region::kOther;
  if (polygon_contains(maze.left_loop, p)) return Region::kLeftLoop;
  if (polygon_contains(maze.right_loop, p)) return Region::kRightLoop;
  return Region::kOther;
}

}  // namespace rmaze
