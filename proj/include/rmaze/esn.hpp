#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rmaze/random.hpp"
#include "rmaze/types.hpp"

namespace rmaze {

class DegenerateDrawError : public Error {
 public:
  using Error::Error;
};

class UntrainedModelError : public Error {
 public:
  using Error::Error;
};

class SingularSystemError : public Error {
 public:
  using Error::Error;
};

struct EsnConfig {
  int n_units = 1400;
  int n_inputs = 8;
  int n_outputs = 1;
  double input_connectivity = 0.2;
  double reservoir_connectivity = 0.19;
  double spectral_radius = 1.4;
  double leak_rate = 0.0181;
  double state_noise = 1e-2;
  std::vector<double> input_scaling = std::vector<double>(8, 1.0);
  double regularization = 4.1e-8;
  std::uint64_t seed = 0;

  // Throws ContractError when a field is out of range.
  void validate() const;

  // Reservoir for the eight sensor inputs alone.
  static EsnConfig without_context();
  // Eight sensors plus the LEFT/RIGHT cue pair.
  static EsnConfig with_context();
};

// Fixed reservoir W (n_units x n_units), fixed input matrix W_in
// (n_units x (1 + n_inputs), bias column first) and a readout W_out
// (n_outputs x (1 + n_inputs + n_units)) that is only set by training.
class EsnModel {
 public:
  EsnModel(EsnConfig config, SparseMatrix reservoir, Matrix input_weights);

  const EsnConfig& config() const { return config_; }
  const SparseMatrix& reservoir() const { return reservoir_; }
  const Matrix& input_weights() const { return input_weights_; }
  const std::optional<Matrix>& readout_weights() const { return readout_; }

  bool trained() const { return readout_.has_value(); }
  void set_readout(Matrix w_out);

  int n_units() const { return config_.n_units; }
  int n_inputs() const { return config_.n_inputs; }
  int n_outputs() const { return config_.n_outputs; }
  // Length of the regression vector [1; u; x].
  int feature_size() const { return 1 + config_.n_inputs + config_.n_units; }

 private:
  EsnConfig config_;
  SparseMatrix reservoir_;
  Matrix input_weights_;
  std::optional<Matrix> readout_;
};

// Samples W and W_in from config.seed and rescales W to the configured
// spectral radius. Throws DegenerateDrawError if the raw W has radius 0.
EsnModel build_esn(const EsnConfig& config);

// x[n] = (1 - a) x[n-1] + a tanh(W x[n-1] + W_in [1; u] + noise).
// Noise is uniform in [-state_noise, state_noise] and only drawn when
// `noise` is non-null.
Vector update_state(const EsnModel& model, const Vector& state,
                    std::span<const double> input, Rng* noise = nullptr);

// [1; u; x]
Vector feature_vector(std::span<const double> input, const Vector& state);

// W_out * features (identity output nonlinearity).
Vector readout(const EsnModel& model, const Vector& features);

// Stateful wrapper used by the rollouts; avoids per-step allocation.
class ReservoirRunner {
 public:
  explicit ReservoirRunner(const EsnModel& model);

  void reset();
  const Vector& step(std::span<const double> input, Rng* noise = nullptr);
  const Vector& state() const { return state_; }
  // Readout for the most recent step; requires a trained model.
  Vector output(std::span<const double> input) const;

 private:
  const EsnModel* model_;
  Vector state_;
  Vector drive_;
};

// Streams regression vectors into X X^T and Y X^T so that 50k-step runs
// never materialize the full state matrix.
class RidgeAccumulator {
 public:
  RidgeAccumulator(int n_features, int n_outputs, int batch = 256);

  void add(const Vector& features, const Vector& target);
  void add(const Vector& features, double target);
  std::int64_t samples() const { return samples_; }

  // W_out = Y X^T (X X^T + beta I)^-1, solved with an LDL^T factorization.
  Matrix solve(double beta);

 private:
  void flush();

  Matrix gram_;    // X X^T
  Matrix cross_;   // Y X^T
  Matrix xbuf_;
  Matrix ybuf_;
  int fill_ = 0;
  std::int64_t samples_ = 0;
};

// Columns of `features` are regression vectors, columns of `targets` the
// matching outputs.
Matrix train_readout(const Matrix& features, const Matrix& targets, double beta);

struct OpenLoopResult {
  Matrix states;    // n_units x (T - washout)
  Matrix features;  // feature_size x (T - washout)
  Matrix outputs;   // n_outputs x (T - washout), empty when untrained
};

// Runs the reservoir from the zero state over `inputs` (T x n_inputs,
// time-major) and drops the first `washout` steps.
OpenLoopResult run_open_loop(const EsnModel& model, const Matrix& inputs, int washout,
                             Rng* noise = nullptr);

}  // namespace rmaze
