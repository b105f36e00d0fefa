#include "rmaze/esn.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/SparseCore>

#include "rmaze/spectral.hpp"

namespace rmaze {

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw ContractError(message);
}

}  // namespace

void EsnConfig::validate() const {
  require(n_units > 0, "n_units must be positive");
  require(n_inputs > 0, "n_inputs must be positive");
  require(n_outputs > 0, "n_outputs must be positive");
  require(input_connectivity >= 0.0 && input_connectivity <= 1.0,
          "input_connectivity must lie in [0, 1]");
  require(reservoir_connectivity >= 0.0 && reservoir_connectivity <= 1.0,
          "reservoir_connectivity must lie in [0, 1]");
  require(spectral_radius > 0.0, "spectral_radius must be positive");
  require(leak_rate > 0.0 && leak_rate <= 1.0, "leak_rate must lie in (0, 1]");
  require(state_noise >= 0.0, "state_noise must be nonnegative");
  require(regularization >= 0.0, "regularization must be nonnegative");
  require(static_cast<int>(input_scaling.size()) == n_inputs,
          "input_scaling needs one entry per input");
  for (double s : input_scaling) require(s > 0.0, "input_scaling entries must be positive");
}

EsnConfig EsnConfig::without_context() { return EsnConfig{}; }

EsnConfig EsnConfig::with_context() {
  EsnConfig c;
  c.n_inputs = 10;
  c.spectral_radius = 1.505;
  c.leak_rate = 0.06455;
  c.regularization = 1e-3;
  c.input_scaling = std::vector<double>(8, 1.0);
  c.input_scaling.push_back(10.4695);
  c.input_scaling.push_back(10.4695);
  return c;
}

EsnModel::EsnModel(EsnConfig config, SparseMatrix reservoir, Matrix input_weights)
    : config_(std::move(config)),
      reservoir_(std::move(reservoir)),
      input_weights_(std::move(input_weights)) {
  config_.validate();
  require(reservoir_.rows() == config_.n_units && reservoir_.cols() == config_.n_units,
          "reservoir matrix must be n_units x n_units");
  require(input_weights_.rows() == config_.n_units &&
              input_weights_.cols() == 1 + config_.n_inputs,
          "input matrix must be n_units x (1 + n_inputs)");
  reservoir_.makeCompressed();
}

void EsnModel::set_readout(Matrix w_out) {
  require(w_out.rows() == n_outputs() && w_out.cols() == feature_size(),
          "readout must be n_outputs x (1 + n_inputs + n_units)");
  readout_ = std::move(w_out);
}

EsnModel build_esn(const EsnConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const int n = config.n_units;

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(config.reservoir_connectivity * n * n * 1.05) + 16);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (rng.uniform() < config.reservoir_connectivity) {
        triplets.emplace_back(i, j, rng.uniform(-1.0, 1.0));
      }
    }
  }
  SparseMatrix w(n, n);
  w.setFromTriplets(triplets.begin(), triplets.end());

  Matrix w_in = Matrix::Zero(n, 1 + config.n_inputs);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 1 + config.n_inputs; ++j) {
      if (rng.uniform() < config.input_connectivity) {
        const double scale = j == 0 ? 1.0 : config.input_scaling[j - 1];
        w_in(i, j) = scale * rng.uniform(-1.0, 1.0);
      }
    }
  }

  const double raw_radius = w.nonZeros() == 0 ? 0.0 : spectral_radius(w);
  if (!(raw_radius > 0.0)) {
    throw DegenerateDrawError("sampled reservoir has spectral radius 0 (seed " +
                              std::to_string(config.seed) +
                              "); rebuild with a perturbed seed or higher connectivity");
  }
  w *= config.spectral_radius / raw_radius;
  return EsnModel(config, std::move(w), std::move(w_in));
}

Vector update_state(const EsnModel& model, const Vector& state, std::span<const double> input,
                    Rng* noise) {
  require(state.size() == model.n_units(), "state has wrong length");
  require(static_cast<int>(input.size()) == model.n_inputs(), "input has wrong length");
  const Matrix& w_in = model.input_weights();
  Vector drive = model.reservoir() * state;
  drive += w_in.col(0);
  for (int j = 0; j < model.n_inputs(); ++j) drive += w_in.col(j + 1) * input[j];
  const double amplitude = model.config().state_noise;
  if (noise != nullptr && amplitude > 0.0) {
    for (Eigen::Index i = 0; i < drive.size(); ++i) drive[i] += noise->uniform(-amplitude, amplitude);
  }
  const double a = model.config().leak_rate;
  return (1.0 - a) * state + a * drive.array().tanh().matrix();
}

Vector feature_vector(std::span<const double> input, const Vector& state) {
  Vector f(1 + static_cast<Eigen::Index>(input.size()) + state.size());
  f[0] = 1.0;
  for (std::size_t j = 0; j < input.size(); ++j) f[1 + static_cast<Eigen::Index>(j)] = input[j];
  f.tail(state.size()) = state;
  return f;
}

Vector readout(const EsnModel& model, const Vector& features) {
  if (!model.trained()) throw UntrainedModelError("readout requested before training");
  require(features.size() == model.feature_size(), "feature vector has wrong length");
  return *model.readout_weights() * features;
}

ReservoirRunner::ReservoirRunner(const EsnModel& model)
    : model_(&model), state_(Vector::Zero(model.n_units())), drive_(model.n_units()) {}

void ReservoirRunner::reset() { state_.setZero(); }

const Vector& ReservoirRunner::step(std::span<const double> input, Rng* noise) {
  require(static_cast<int>(input.size()) == model_->n_inputs(), "input has wrong length");
  const Matrix& w_in = model_->input_weights();
  drive_.noalias() = model_->reservoir() * state_;
  drive_ += w_in.col(0);
  for (int j = 0; j < model_->n_inputs(); ++j) drive_ += w_in.col(j + 1) * input[j];
  const double amplitude = model_->config().state_noise;
  if (noise != nullptr && amplitude > 0.0) {
    for (Eigen::Index i = 0; i < drive_.size(); ++i) drive_[i] += noise->uniform(-amplitude, amplitude);
  }
  const double a = model_->config().leak_rate;
  state_ = (1.0 - a) * state_ + a * drive_.array().tanh().matrix();
  return state_;
}

Vector ReservoirRunner::output(std::span<const double> input) const {
  if (!model_->trained()) throw UntrainedModelError("readout requested before training");
  const Matrix& w = *model_->readout_weights();
  const int ni = model_->n_inputs();
  Vector y = w.col(0);
  for (int j = 0; j < ni; ++j) y += w.col(1 + j) * input[j];
  y.noalias() += w.rightCols(model_->n_units()) * state_;
  return y;
}

RidgeAccumulator::RidgeAccumulator(int n_features, int n_outputs, int batch)
    : gram_(Matrix::Zero(n_features, n_features)),
      cross_(Matrix::Zero(n_outputs, n_features)),
      xbuf_(n_features, batch),
      ybuf_(n_outputs, batch) {
  require(n_features > 0 && n_outputs > 0 && batch > 0, "accumulator sizes must be positive");
}

void RidgeAccumulator::add(const Vector& features, const Vector& target) {
  require(features.size() == gram_.rows(), "feature vector has wrong length");
  require(target.size() == cross_.rows(), "target vector has wrong length");
  xbuf_.col(fill_) = features;
  ybuf_.col(fill_) = target;
  ++samples_;
  if (++fill_ == xbuf_.cols()) flush();
}

void RidgeAccumulator::add(const Vector& features, double target) {
  add(features, Vector::Constant(1, target));
}

void RidgeAccumulator::flush() {
  if (fill_ == 0) return;
  const auto x = xbuf_.leftCols(fill_);
  gram_.selfadjointView<Eigen::Lower>().rankUpdate(x);
  cross_.noalias() += ybuf_.leftCols(fill_) * x.transpose();
  fill_ = 0;
}

Matrix RidgeAccumulator::solve(double beta) {
  require(beta >= 0.0, "regularization must be nonnegative");
  flush();
  Matrix system = gram_.selfadjointView<Eigen::Lower>();
  system.diagonal().array() += beta;
  Eigen::LDLT<Matrix> ldlt(system);
  const auto d = ldlt.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  const bool singular = ldlt.info() != Eigen::Success || !(dmax > 0.0) ||
                        (beta == 0.0 && d.minCoeff() <= dmax * 1e-13 * gram_.rows());
  if (singular) {
    throw SingularSystemError(
        "X X^T + beta I is singular; use a positive regularization beta");
  }
  // (X X^T + beta I) W_out^T = X Y^T
  return ldlt.solve(cross_.transpose()).transpose();
}

Matrix train_readout(const Matrix& features, const Matrix& targets, double beta) {
  require(features.cols() == targets.cols(), "features and targets differ in length");
  require(features.cols() > 0, "no samples to train on");
  RidgeAccumulator acc(static_cast<int>(features.rows()), static_cast<int>(targets.rows()));
  for (Eigen::Index t = 0; t < features.cols(); ++t) acc.add(features.col(t), targets.col(t));
  return acc.solve(beta);
}

OpenLoopResult run_open_loop(const EsnModel& model, const Matrix& inputs, int washout,
                             Rng* noise) {
  require(inputs.rows() > 0, "input sequence is empty");
  require(inputs.cols() == model.n_inputs(), "input rows must have n_inputs entries");
  require(washout >= 0 && washout < inputs.rows(), "washout must be shorter than the sequence");
  const Eigen::Index kept = inputs.rows() - washout;
  OpenLoopResult out;
  out.states.resize(model.n_units(), kept);
  out.features.resize(model.feature_size(), kept);
  if (model.trained()) out.outputs.resize(model.n_outputs(), kept);

  ReservoirRunner runner(model);
  std::vector<double> u(model.n_inputs());
  for (Eigen::Index t = 0; t < inputs.rows(); ++t) {
    for (int j = 0; j < model.n_inputs(); ++j) u[j] = inputs(t, j);
    const Vector& x = runner.step(u, noise);
    if (t < washout) continue;
    const Eigen::Index c = t - washout;
    out.states.col(c) = x;
    out.features.col(c) = feature_vector(u, x);
    if (model.trained()) out.outputs.col(c) = runner.output(u);
  }
  return out;
}

}  // namespace rmaze
