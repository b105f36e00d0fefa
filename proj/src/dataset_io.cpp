#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rmaze/tutor.hpp"

namespace rmaze {

namespace {

std::string loop_string(const std::optional<Side>& s) { return s ? to_string(*s) : "NONE"; }

std::optional<Side> loop_from_string(const std::string& s) {
  if (s == "LEFT") return Side::kLeft;
  if (s == "RIGHT") return Side::kRight;
  if (s == "NONE") return std::nullopt;
  throw ContractError("unknown loop label: " + s);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void save_dataset(const TrajectoryDataset& dataset, const std::string& csv_path,
                  const std::string& meta_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw Error("cannot write dataset file " + csv_path);
  csv << "t";
  for (int i = 1; i <= kSensorCount; ++i) csv << ",s" << i;
  csv << ",cueL,cueR,target,x,y,region,loop_label\n";
  for (std::size_t t = 0; t < dataset.records.size(); ++t) {
    const TrajectoryRecord& r = dataset.records[t];
    csv << t;
    for (double s : r.sensors) csv << ',' << fmt(s);
    csv << ',' << fmt(r.cues[0]) << ',' << fmt(r.cues[1]) << ',' << fmt(r.target) << ','
        << fmt(r.position.x()) << ',' << fmt(r.position.y()) << ',' << to_string(r.region) << ','
        << loop_string(r.loop) << '\n';
  }

  nlohmann::json meta;
  meta["format"] = "rmaze-dataset";
  meta["version"] = 1;
  meta["seed"] = dataset.meta.seed;
  meta["noise_std"] = dataset.meta.noise_std;
  meta["start_heading"] = dataset.meta.start_heading;
  meta["n_loops"] = dataset.meta.n_loops;
  meta["n_steps"] = dataset.records.size();
  meta["completed"] = format_sequence(dataset.meta.completed);
  std::ofstream out(meta_path);
  if (!out) throw Error("cannot write dataset metadata " + meta_path);
  out << meta.dump(2) << '\n';
}

TrajectoryDataset load_dataset(const std::string& csv_path, const std::string& meta_path) {
  TrajectoryDataset data;
  {
    std::ifstream in(meta_path);
    if (!in) throw Error("cannot open dataset metadata " + meta_path);
    nlohmann::json meta;
    try {
      in >> meta;
      if (meta.value("format", std::string()) != "rmaze-dataset" || meta.at("version") != 1) {
        throw ContractError("dataset metadata " + meta_path + " has the wrong format tag");
      }
      data.meta.seed = meta.at("seed").get<std::uint64_t>();
      data.meta.noise_std = meta.at("noise_std").get<double>();
      data.meta.start_heading = meta.at("start_heading").get<double>();
      data.meta.n_loops = meta.at("n_loops").get<int>();
      data.meta.completed = parse_sequence(meta.at("completed").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw ContractError("dataset metadata " + meta_path + ": " + e.what());
    }
  }

  std::ifstream in(csv_path);
  if (!in) throw Error("cannot open dataset file " + csv_path);
  std::string line;
  std::getline(in, line);  // header
  std::size_t line_no = 1;
  double heading = data.meta.start_heading;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 1 + kSensorCount + 2 + 3 + 2) {
      throw ContractError(csv_path + ":" + std::to_string(line_no) + ": expected 16 columns");
    }
    TrajectoryRecord r;
    try {
      std::size_t c = 1;
      for (int i = 0; i < kSensorCount; ++i) r.sensors[i] = std::stod(cells[c++]);
      r.cues[0] = std::stod(cells[c++]);
      r.cues[1] = std::stod(cells[c++]);
      r.target = std::stod(cells[c++]);
      r.position.x() = std::stod(cells[c++]);
      r.position.y() = std::stod(cells[c++]);
      r.region = region_from_string(cells[c++]);
      r.loop = loop_from_string(cells[c++]);
    } catch (const std::invalid_argument&) {
      throw ContractError(csv_path + ":" + std::to_string(line_no) + ": malformed number");
    }
    r.heading = heading;
    heading += r.target;
    data.records.push_back(r);
  }
  return data;
}

}  // namespace rmaze
