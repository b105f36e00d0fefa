#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "rmaze/types.hpp"

namespace rmaze {

class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

class DegenerateLabelsError : public Error {
 public:
  using Error::Error;
};

struct PcaModel {
  Vector mean;
  Matrix components;          // one orthonormal component per column
  Vector explained_variance;  // descending, sample covariance normalization

  int dimension() const { return static_cast<int>(mean.size()); }
};

// Rows are observations. Throws DegenerateDataError with fewer than two rows
// or when every row is identical.
PcaModel fit_pca(const Matrix& rows);

// (x - mean) . components[0..k)
Vector project(const PcaModel& pca, const Vector& x, int k);
Matrix project_rows(const PcaModel& pca, const Matrix& rows, int k);

enum class FeatureSource { kReservoir, kSensors };

const char* to_string(FeatureSource source);

struct LabeledStateSet {
  Matrix points;  // one snapshot per row
  std::vector<Side> labels;
  FeatureSource source = FeatureSource::kReservoir;

  std::size_t size() const { return labels.size(); }
  // Throws ContractError when the row and label counts differ.
  void validate() const;
  LabeledStateSet subset(const std::vector<std::size_t>& rows) const;
};

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual Side predict(const Vector& x) const = 0;
  virtual int dimension() const = 0;
};

class KnnClassifier : public Classifier {
 public:
  KnnClassifier(LabeledStateSet train, int k);

  Side predict(const Vector& x) const override;
  int dimension() const override { return static_cast<int>(train_.points.cols()); }
  int k() const { return k_; }

 private:
  LabeledStateSet train_;
  int k_;
};

// Decision w.x + b; positive means RIGHT.
class LinearSvm : public Classifier {
 public:
  LinearSvm(Vector w, double b) : w_(std::move(w)), b_(b) {}

  double decision(const Vector& x) const { return w_.dot(x) + b_; }
  Side predict(const Vector& x) const override {
    return decision(x) > 0.0 ? Side::kRight : Side::kLeft;
  }
  int dimension() const override { return static_cast<int>(w_.size()); }
  const Vector& weights() const { return w_; }
  double bias() const { return b_; }
  // Geometric margin width 2 / |w|.
  double margin_width() const;

 private:
  Vector w_;
  double b_;
};

// Throws DegenerateLabelsError unless both classes are present, and
// ContractError when k is even or not positive.
KnnClassifier train_knn(const LabeledStateSet& set, int k = 5);

struct SvmOptions {
  int max_epochs = 2000;
  double tolerance = 1e-6;  // on the projected-gradient spread
  std::uint64_t seed = 1;   // coordinate visiting order
};

// Soft-margin L1-loss linear SVM solved in the dual by coordinate descent;
// the bias is learned as the weight of an extra constant feature.
LinearSvm train_linear_svm(const LabeledStateSet& set, double C = 1.0,
                           const SvmOptions& options = {});

struct ConfusionCounts {
  int left_as_left = 0;
  int left_as_right = 0;
  int right_as_left = 0;
  int right_as_right = 0;

  int total() const { return left_as_left + left_as_right + right_as_left + right_as_right; }
  double accuracy() const;
};

ConfusionCounts evaluate(const Classifier& classifier, const LabeledStateSet& set);

struct LabelStream {
  std::vector<Side> labels;
  std::vector<std::size_t> switches;  // i such that labels[i] != labels[i - 1]
};

LabelStream predict_stream(const Classifier& classifier, const Matrix& rows);

struct SeparabilityReport {
  double accuracy = 0.0;
  double margin = 0.0;  // 2 / |w| in the projected plane
  Vector w;
  double b = 0.0;
};

// Projects onto the first two components of `pca` and fits a near
// hard-margin linear separator there.
SeparabilityReport linear_separability(const PcaModel& pca, const Matrix& rows,
                                       const std::vector<Side>& labels, double C = 1e6);
// Same, with a PCA fitted on `rows` themselves.
SeparabilityReport linear_separability(const Matrix& rows, const std::vector<Side>& labels,
                                       double C = 1e6);

}  // namespace rmaze
