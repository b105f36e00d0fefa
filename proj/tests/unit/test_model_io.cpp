#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "rmaze/model_io.hpp"

using namespace rmaze;

namespace {

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("config JSON round trip") {
  EsnConfig c = EsnConfig::with_context();
  c.seed = 1234567890123ULL;
  const EsnConfig back = esn_config_from_json(esn_config_to_json(c));
  CHECK(back.n_units == c.n_units);
  CHECK(back.input_scaling == c.input_scaling);
  CHECK(back.leak_rate == c.leak_rate);
  CHECK(back.regularization == c.regularization);
  CHECK(back.seed == c.seed);
  const EsnConfig partial = esn_config_from_json({{"leak_rate", 0.5}});
  CHECK(partial.leak_rate == 0.5);
  CHECK(partial.n_units == 1400);
}

TEST_CASE("model file round trip is exact") {
  EsnConfig c;
  c.n_units = 80;
  c.n_outputs = 2;
  c.seed = 3;
  EsnModel m = build_esn(c);
  const auto path = temp_file("rmaze_model_test.bin");
  save_model(m, TargetKind::kTurn, path.string());
  StoredModel untrained = load_model(path.string());
  CHECK_FALSE(untrained.model.trained());
  CHECK(untrained.target == TargetKind::kTurn);

  Matrix w(2, m.feature_size());
  w.setRandom();
  m.set_readout(w);
  save_model(m, TargetKind::kHeadingVector, path.string());
  const StoredModel s = load_model(path.string());
  CHECK(s.target == TargetKind::kHeadingVector);
  CHECK(Matrix(s.model.reservoir()) == Matrix(m.reservoir()));
  CHECK(s.model.input_weights() == m.input_weights());
  REQUIRE(s.model.trained());
  CHECK(*s.model.readout_weights() == w);
  CHECK(s.model.config().seed == 3);
  std::filesystem::remove(path);
}

TEST_CASE("bad model files are rejected") {
  const auto path = temp_file("rmaze_bad_model.bin");
  {
    std::ofstream out(path, std::ios::binary);
    out << "not a model at all";
  }
  CHECK_THROWS_AS(load_model(path.string()), FormatError);

  EsnConfig c;
  c.n_units = 20;
  save_model(build_esn(c), TargetKind::kHeading, path.string());
  const auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - 7);
  CHECK_THROWS_AS(load_model(path.string()), FormatError);

  save_model(build_esn(c), TargetKind::kHeading, path.string());
  {
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(8);
    const std::uint32_t v = 99;
    f.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  CHECK_THROWS_AS(load_model(path.string()), FormatError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_model(path.string()), Error);
}
