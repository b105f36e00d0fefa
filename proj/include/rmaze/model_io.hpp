#pragma once

#include <string>

#include <json.hpp>

#include "rmaze/esn.hpp"
#include "rmaze/tutor.hpp"

namespace rmaze {

class FormatError : public Error {
 public:
  using Error::Error;
};

nlohmann::json esn_config_to_json(const EsnConfig& config);
// Missing keys keep the value from `base`.
EsnConfig esn_config_from_json(const nlohmann::json& j, const EsnConfig& base = {});

struct StoredModel {
  EsnModel model;
  TargetKind target = TargetKind::kTurn;
};

// Model file layout, all integers and doubles little-endian:
//   char[8]  magic "RMZESN1\0"
//   u32      format version (1)
//   u64      header length, then that many bytes of JSON:
//            {"config": {...}, "target": "turn" | "heading" | "heading_vector"}
//   u64      nnz, then nnz x (i32 row, i32 col, f64 value) for W
//   u64 rows, u64 cols, rows*cols f64 column-major for W_in
//   u8       1 if a readout follows, else 0
//   u64 rows, u64 cols, rows*cols f64 column-major for W_out
void save_model(const EsnModel& model, TargetKind target, const std::string& path);
// Throws FormatError on a bad magic, an unknown version or a truncated file.
StoredModel load_model(const std::string& path);

}  // namespace rmaze
