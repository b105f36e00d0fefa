#pragma once

#include <string>

#include <json.hpp>

#include "rmaze/maze.hpp"

namespace rmaze {

// Maze file schema (JSON):
//   {
//     "format": "rmaze-maze", "version": 1,
//     "bounds": [x0, y0, x1, y1],
//     "walls": [[ax, ay, bx, by], ...],
//     "obstacles": [[[x, y], ...], ...],
//     "forcing_walls": {"LEFT": [[ax, ay, bx, by], ...], "RIGHT": [...]},
//     "corridor": [x0, y0, x1, y1],
//     "intersection_point": [x, y],
//     "left_loop": [[x, y], ...], "right_loop": [[x, y], ...],
//     "start": {"position": [x, y], "heading": radians}
//   }
nlohmann::json maze_to_json(const MazeMap& maze);
MazeMap maze_from_json(const nlohmann::json& j);

MazeMap load_maze(const std::string& path);
void save_maze(const MazeMap& maze, const std::string& path);

}  // namespace rmaze
