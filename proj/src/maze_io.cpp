#include "rmaze/maze_io.hpp"

#include <fstream>

namespace rmaze {

using nlohmann::json;

namespace {

json point_json(const Point& p) { return json::array({p.x(), p.y()}); }
Point point_from(const json& j) { return Point(j.at(0).get<double>(), j.at(1).get<double>()); }

json segment_json(const Segment& s) { return json::array({s.a.x(), s.a.y(), s.b.x(), s.b.y()}); }
Segment segment_from(const json& j) {
  return {Point(j.at(0).get<double>(), j.at(1).get<double>()),
          Point(j.at(2).get<double>(), j.at(3).get<double>())};
}

json rect_json(const Rect& r) { return json::array({r.lo.x(), r.lo.y(), r.hi.x(), r.hi.y()}); }
Rect rect_from(const json& j) {
  const Segment s = segment_from(j);
  return {s.a, s.b};
}

json polygon_json(const Polygon& p) {
  json out = json::array();
  for (const Point& q : p) out.push_back(point_json(q));
  return out;
}
Polygon polygon_from(const json& j) {
  Polygon p;
  for (const json& q : j) p.push_back(point_from(q));
  return p;
}

json segments_json(const std::vector<Segment>& v) {
  json out = json::array();
  for (const Segment& s : v) out.push_back(segment_json(s));
  return out;
}
std::vector<Segment> segments_from(const json& j) {
  std::vector<Segment> v;
  for (const json& s : j) v.push_back(segment_from(s));
  return v;
}

}  // namespace

json maze_to_json(const MazeMap& maze) {
  json j;
  j["format"] = "rmaze-maze";
  j["version"] = 1;
  j["bounds"] = rect_json(maze.bounds);
  j["walls"] = segments_json(maze.walls);
  j["obstacles"] = json::array();
  for (const Polygon& o : maze.obstacles) j["obstacles"].push_back(polygon_json(o));
  j["forcing_walls"]["LEFT"] = segments_json(maze.forcing(Side::kLeft));
  j["forcing_walls"]["RIGHT"] = segments_json(maze.forcing(Side::kRight));
  j["corridor"] = rect_json(maze.corridor);
  j["intersection_point"] = point_json(maze.intersection_point);
  j["left_loop"] = polygon_json(maze.left_loop);
  j["right_loop"] = polygon_json(maze.right_loop);
  j["start"]["position"] = point_json(maze.start_position);
  j["start"]["heading"] = maze.start_heading;
  return j;
}

MazeMap maze_from_json(const json& j) {
  try {
    if (j.value("format", std::string()) != "rmaze-maze") {
      throw ContractError("maze file: missing or wrong \"format\" tag");
    }
    if (j.at("version").get<int>() != 1) throw ContractError("maze file: unsupported version");
    MazeMap m;
    m.bounds = rect_from(j.at("bounds"));
    m.walls = segments_from(j.at("walls"));
    for (const json& o : j.at("obstacles")) m.obstacles.push_back(polygon_from(o));
    m.forcing_walls[static_cast<int>(Side::kLeft)] = segments_from(j.at("forcing_walls").at("LEFT"));
    m.forcing_walls[static_cast<int>(Side::kRight)] =
        segments_from(j.at("forcing_walls").at("RIGHT"));
    m.corridor = rect_from(j.at("corridor"));
    m.intersection_point = point_from(j.at("intersection_point"));
    m.left_loop = polygon_from(j.at("left_loop"));
    m.right_loop = polygon_from(j.at("right_loop"));
    m.start_position = point_from(j.at("start").at("position"));
    m.start_heading = j.at("start").at("heading").get<double>();
    return m;
  } catch (const json::exception& e) {
    throw ContractError(std::string("maze file: ") + e.what());
  }
}

MazeMap load_maze(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open maze file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ContractError("maze file " + path + ": " + e.what());
  }
  return maze_from_json(j);
}

void save_maze(const MazeMap& maze, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write maze file " + path);
  out << maze_to_json(maze).dump(2) << '\n';
}

}  // namespace rmaze
