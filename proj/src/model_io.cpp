#include "rmaze/model_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace rmaze {

namespace {

static_assert(std::endian::native == std::endian::little, "model files are little-endian");

constexpr char kMagic[8] = {'R', 'M', 'Z', 'E', 'S', 'N', '1', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw FormatError("model file is truncated");
  return value;
}

void put_dense(std::ofstream& out, const Matrix& m) {
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
}

Matrix get_dense(std::ifstream& in) {
  const auto rows = get<std::uint64_t>(in);
  const auto cols = get<std::uint64_t>(in);
  if (rows > (1u << 24) || cols > (1u << 24)) throw FormatError("implausible matrix size");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!in) throw FormatError("model file is truncated");
  return m;
}

}  // namespace

nlohmann::json esn_config_to_json(const EsnConfig& c) {
  return {{"n_units", c.n_units},
          {"n_inputs", c.n_inputs},
          {"n_outputs", c.n_outputs},
          {"input_connectivity", c.input_connectivity},
          {"reservoir_connectivity", c.reservoir_connectivity},
          {"spectral_radius", c.spectral_radius},
          {"leak_rate", c.leak_rate},
          {"state_noise", c.state_noise},
          {"input_scaling", c.input_scaling},
          {"regularization", c.regularization},
          {"seed", c.seed}};
}

EsnConfig esn_config_from_json(const nlohmann::json& j, const EsnConfig& base) {
  EsnConfig c = base;
  try {
    c.n_units = j.value("n_units", c.n_units);
    c.n_inputs = j.value("n_inputs", c.n_inputs);
    c.n_outputs = j.value("n_outputs", c.n_outputs);
    c.input_connectivity = j.value("input_connectivity", c.input_connectivity);
    c.reservoir_connectivity = j.value("reservoir_connectivity", c.reservoir_connectivity);
    c.spectral_radius = j.value("spectral_radius", c.spectral_radius);
    c.leak_rate = j.value("leak_rate", c.leak_rate);
    c.state_noise = j.value("state_noise", c.state_noise);
    c.input_scaling = j.value("input_scaling", c.input_scaling);
    c.regularization = j.value("regularization", c.regularization);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ContractError(std::string("bad ESN config: ") + e.what());
  }
  return c;
}

void save_model(const EsnModel& model, TargetKind target, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  const std::string header =
      nlohmann::json{{"config", esn_config_to_json(model.config())}, {"target", to_string(target)}}
          .dump();
  put<std::uint64_t>(out, header.size());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));

  const SparseMatrix& w = model.reservoir();
  put<std::uint64_t>(out, static_cast<std::uint64_t>(w.nonZeros()));
  for (Eigen::Index r = 0; r < w.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(w, r); it; ++it) {
      put<std::int32_t>(out, static_cast<std::int32_t>(it.row()));
      put<std::int32_t>(out, static_cast<std::int32_t>(it.col()));
      put<double>(out, it.value());
    }
  }
  put_dense(out, model.input_weights());
  put<std::uint8_t>(out, model.trained() ? 1 : 0);
  if (model.trained()) put_dense(out, *model.readout_weights());
  if (!out) throw Error("failed writing " + path);
}

StoredModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw FormatError(path + " is not a model file");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) throw FormatError("unsupported model format version " + std::to_string(version));
  const auto header_len = get<std::uint64_t>(in);
  if (header_len > (1u << 20)) throw FormatError("implausible header length");
  std::string header(header_len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw FormatError("model file is truncated");

  EsnConfig config;
  TargetKind target;
  try {
    const auto j = nlohmann::json::parse(header);
    config = esn_config_from_json(j.at("config"));
    target = target_kind_from_string(j.at("target").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad model header: ") + e.what());
  }

  const auto nnz = get<std::uint64_t>(in);
  const auto n = static_cast<std::uint64_t>(config.n_units);
  if (nnz > n * n) throw FormatError("reservoir has more entries than cells");
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(nnz);
  for (std::uint64_t i = 0; i < nnz; ++i) {
    const auto r = get<std::int32_t>(in);
    const auto c = get<std::int32_t>(in);
    const auto v = get<double>(in);
    if (r < 0 || c < 0 || r >= config.n_units || c >= config.n_units) {
      throw FormatError("reservoir entry out of range");
    }
    triplets.emplace_back(r, c, v);
  }
  SparseMatrix w(config.n_units, config.n_units);
  w.setFromTriplets(triplets.begin(), triplets.end());
  Matrix w_in = get_dense(in);
  EsnModel model(config, std::move(w), std::move(w_in));
  if (get<std::uint8_t>(in) != 0) model.set_readout(get_dense(in));
  return {std::move(model), target};
}

}  // namespace rmaze
