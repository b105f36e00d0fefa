#include "rmaze/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "rmaze/random.hpp"

namespace rmaze {

namespace {

bool has_both_classes(const std::vector<Side>& labels) {
  const auto left = std::count(labels.begin(), labels.end(), Side::kLeft);
  return left > 0 && left < static_cast<long>(labels.size());
}

double sign_of(Side s) { return s == Side::kRight ? 1.0 : -1.0; }

}  // namespace

PcaModel fit_pca(const Matrix& rows) {
  if (rows.rows() < 2) throw DegenerateDataError("PCA needs at least two observations");
  PcaModel pca;
  pca.mean = rows.colwise().mean().transpose();
  const Matrix centered = rows.rowwise() - pca.mean.transpose();
  if (centered.cwiseAbs().maxCoeff() == 0.0) {
    throw DegenerateDataError("PCA input has zero variance");
  }
  const Matrix cov = (centered.transpose() * centered) / static_cast<double>(rows.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.info() != Eigen::Success) throw DegenerateDataError("covariance eigensolver failed");
  // Eigen returns ascending eigenvalues.
  const Eigen::Index d = cov.rows();
  pca.components.resize(d, d);
  pca.explained_variance.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    pca.components.col(i) = solver.eigenvectors().col(d - 1 - i);
    pca.explained_variance[i] = std::max(solver.eigenvalues()[d - 1 - i], 0.0);
  }
  // Deterministic sign: largest-magnitude entry of each component positive.
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::Index arg = 0;
    pca.components.col(i).cwiseAbs().maxCoeff(&arg);
    if (pca.components(arg, i) < 0.0) pca.components.col(i) *= -1.0;
  }
  return pca;
}

Vector project(const PcaModel& pca, const Vector& x, int k) {
  if (x.size() != pca.dimension()) throw ContractError("projection dimension mismatch");
  if (k < 1 || k > pca.dimension()) throw ContractError("invalid number of components");
  return pca.components.leftCols(k).transpose() * (x - pca.mean);
}

Matrix project_rows(const PcaModel& pca, const Matrix& rows, int k) {
  if (rows.cols() != pca.dimension()) throw ContractError("projection dimension mismatch");
  if (k < 1 || k > pca.dimension()) throw ContractError("invalid number of components");
  return (rows.rowwise() - pca.mean.transpose()) * pca.components.leftCols(k);
}

const char* to_string(FeatureSource source) {
  return source == FeatureSource::kReservoir ? "reservoir" : "sensors";
}

void LabeledStateSet::validate() const {
  if (static_cast<std::size_t>(points.rows()) != labels.size()) {
    throw ContractError("labeled set has " + std::to_string(points.rows()) + " rows but " +
                        std::to_string(labels.size()) + " labels");
  }
}

LabeledStateSet LabeledStateSet::subset(const std::vector<std::size_t>& rows) const {
  validate();
  LabeledStateSet out;
  out.source = source;
  out.points.resize(static_cast<Eigen::Index>(rows.size()), points.cols());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= labels.size()) throw ContractError("subset row out of range");
    out.points.row(static_cast<Eigen::Index>(i)) = points.row(static_cast<Eigen::Index>(rows[i]));
    out.labels.push_back(labels[rows[i]]);
  }
  return out;
}

KnnClassifier::KnnClassifier(LabeledStateSet train, int k) : train_(std::move(train)), k_(k) {}

Side KnnClassifier::predict(const Vector& x) const {
  if (x.size() != train_.points.cols()) throw ContractError("KNN query dimension mismatch");
  const Eigen::Index n = train_.points.rows();
  std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    dist[static_cast<std::size_t>(i)] = {(train_.points.row(i).transpose() - x).squaredNorm(), i};
  }
  // Equal distances go to the lower training index.
  const int k = static_cast<int>(std::min<Eigen::Index>(k_, n));
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
  int right = 0;
  for (int i = 0; i < k; ++i) {
    if (train_.labels[static_cast<std::size_t>(dist[static_cast<std::size_t>(i)].second)] ==
        Side::kRight) {
      ++right;
    }
  }
  return 2 * right > k ? Side::kRight : Side::kLeft;
}

KnnClassifier train_knn(const LabeledStateSet& set, int k) {
  set.validate();
  if (k < 1 || k % 2 == 0) throw ContractError("k must be a positive odd number");
  if (!has_both_classes(set.labels)) throw DegenerateLabelsError("KNN needs both classes");
  return KnnClassifier(set, k);
}

double LinearSvm::margin_width() const {
  const double n = w_.norm();
  return n > 0.0 ? 2.0 / n : std::numeric_limits<double>::infinity();
}

LinearSvm train_linear_svm(const LabeledStateSet& set, double C, const SvmOptions& options) {
  set.validate();
  if (!(C > 0.0)) throw ContractError("SVM cost must be positive");
  if (!has_both_classes(set.labels)) throw DegenerateLabelsError("SVM needs both classes");

  const Eigen::Index n = set.points.rows();
  const Eigen::Index d = set.points.cols();
  // Augmented weights: w_aug = [w; b], x_aug = [x; 1].
  Vector w = Vector::Zero(d + 1);
  Vector alpha = Vector::Zero(n);
  Vector qdiag(n);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    qdiag[i] = set.points.row(i).squaredNorm() + 1.0;
    y[i] = sign_of(set.labels[static_cast<std::size_t>(i)]);
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(options.seed);

  for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }
    double pg_max = -std::numeric_limits<double>::infinity();
    double pg_min = std::numeric_limits<double>::infinity();
    for (const Eigen::Index i : order) {
      const double margin = set.points.row(i).dot(w.head(d)) + w[d];
      const double g = y[i] * margin - 1.0;
      double pg = g;
      if (alpha[i] == 0.0) pg = std::min(g, 0.0);
      else if (alpha[i] == C) pg = std::max(g, 0.0);
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (pg == 0.0) continue;
      const double old = alpha[i];
      alpha[i] = std::clamp(old - g / qdiag[i], 0.0, C);
      const double delta = (alpha[i] - old) * y[i];
      w.head(d) += delta * set.points.row(i).transpose();
      w[d] += delta;
    }
    if (pg_max - pg_min < options.tolerance) break;
  }
  return LinearSvm(w.head(d), w[d]);
}

double ConfusionCounts::accuracy() const {
  const int n = total();
  return n == 0 ? 0.0 : static_cast<double>(left_as_left + right_as_right) / n;
}

ConfusionCounts evaluate(const Classifier& classifier, const LabeledStateSet& set) {
  set.validate();
  ConfusionCounts c;
  for (Eigen::Index i = 0; i < set.points.rows(); ++i) {
    const Side truth = set.labels[static_cast<std::size_t>(i)];
    const Side guess = classifier.predict(set.points.row(i).transpose());
    if (truth == Side::kLeft) (guess == Side::kLeft ? c.left_as_left : c.left_as_right)++;
    else (guess == Side::kLeft ? c.right_as_left : c.right_as_right)++;
  }
  return c;
}

LabelStream predict_stream(const Classifier& classifier, const Matrix& rows) {
  LabelStream stream;
  stream.labels.reserve(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    stream.labels.push_back(classifier.predict(rows.row(i).transpose()));
    if (i > 0 && stream.labels.back() != stream.labels[static_cast<std::size_t>(i - 1)]) {
      stream.switches.push_back(static_cast<std::size_t>(i));
    }
  }
  return stream;
}

SeparabilityReport linear_separability(const PcaModel& pca, const Matrix& rows,
                                       const std::vector<Side>& labels, double C) {
  LabeledStateSet set;
  set.points = project_rows(pca, rows, 2);
  set.labels = labels;
  const LinearSvm svm = train_linear_svm(set, C, {.max_epochs = 20000});
  SeparabilityReport report;
  report.accuracy = evaluate(svm, set).accuracy();
  report.margin = svm.margin_width();
  report.w = svm.weights();
  report.b = svm.bias();
  return report;
}

SeparabilityReport linear_separability(const Matrix& rows, const std::vector<Side>& labels,
                                       double C) {
  return linear_separability(fit_pca(rows), rows, labels, C);
}

}  // namespace rmaze
