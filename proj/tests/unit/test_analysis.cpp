#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rmaze/analysis.hpp"
#include "rmaze/random.hpp"

using namespace rmaze;

namespace {

LabeledStateSet make_set(const Matrix& points, std::vector<Side> labels) {
  LabeledStateSet s;
  s.points = points;
  s.labels = std::move(labels);
  return s;
}

// Two Gaussian blobs centred at (+-3, 0, ...).
LabeledStateSet blobs(int n, int dim, double sep, std::uint64_t seed) {
  Rng rng(seed);
  Matrix p(n, dim);
  std::vector<Side> l;
  for (int i = 0; i < n; ++i) {
    const bool right = i % 2 == 1;
    for (int j = 0; j < dim; ++j) p(i, j) = rng.normal();
    p(i, 0) += right ? sep : -sep;
    l.push_back(right ? Side::kRight : Side::kLeft);
  }
  return make_set(p, l);
}

// Brute-force KNN with the same tie rule, via a full sort.
Side knn_oracle(const LabeledStateSet& train, const Vector& x, int k) {
  std::vector<std::pair<double, int>> d;
  for (int i = 0; i < train.points.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < train.points.cols(); ++j) s += (train.points(i, j) - x[j]) * (train.points(i, j) - x[j]);
    d.emplace_back(s, i);
  }
  std::sort(d.begin(), d.end());
  int right = 0;
  for (int i = 0; i < k; ++i) right += train.labels[static_cast<std::size_t>(d[static_cast<std::size_t>(i)].second)] == Side::kRight;
  return 2 * right > k ? Side::kRight : Side::kLeft;
}

}  // namespace

TEST_CASE("PCA of points on a line") {
  Matrix p(5, 2);
  for (int i = 0; i < 5; ++i) p.row(i) << i - 2.0, 2.0 * (i - 2.0);
  const PcaModel pca = fit_pca(p);
  const Vector dir = Vector(pca.components.col(0));
  CHECK(std::abs(std::abs(dir[0]) - 1.0 / std::sqrt(5.0)) < 1e-12);
  CHECK(std::abs(std::abs(dir[1]) - 2.0 / std::sqrt(5.0)) < 1e-12);
  CHECK(std::abs(pca.explained_variance[1]) < 1e-12);
}

TEST_CASE("PCA of an isotropic cloud") {
  Rng rng(3);
  Matrix p(10000, 3);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = rng.normal();
  const PcaModel pca = fit_pca(p);
  const double ratio = pca.explained_variance[0] / pca.explained_variance[2];
  CHECK(ratio >= 0.8);
  CHECK(ratio <= 1.25);
}

TEST_CASE("PCA invariants") {
  Rng rng(5);
  Matrix p(300, 6);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = rng.normal() * (1 + i % 6);
  const PcaModel pca = fit_pca(p);
  const Matrix gram = pca.components.transpose() * pca.components;
  CHECK((gram - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-10);
  for (int i = 1; i < 6; ++i) CHECK(pca.explained_variance[i] <= pca.explained_variance[i - 1]);
  const Matrix c = p.rowwise() - p.colwise().mean();
  const double trace = (c.transpose() * c).trace() / 299.0;
  CHECK(std::abs(pca.explained_variance.sum() - trace) < 1e-8);
}

TEST_CASE("projection examples") {
  Rng rng(7);
  Matrix p(50, 4);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = rng.uniform(-1, 1);
  const PcaModel pca = fit_pca(p);
  CHECK(project(pca, pca.mean, 3).norm() == 0.0);
  const Vector e = project(pca, Vector(pca.mean + pca.components.col(0)), 4);
  CHECK(std::abs(e[0] - 1.0) < 1e-12);
  CHECK(e.tail(3).cwiseAbs().maxCoeff() < 1e-12);
  const Vector x = p.row(3).transpose();
  const Vector back = pca.mean + pca.components * project(pca, x, 4);
  CHECK((back - x).cwiseAbs().maxCoeff() < 1e-8);
  CHECK_THROWS_AS(project(pca, Vector::Zero(3), 2), ContractError);
  CHECK_THROWS_AS(project(pca, x, 5), ContractError);
  CHECK(project_rows(pca, p, 2).rows() == 50);
}

TEST_CASE("PCA degenerate input") {
  CHECK_THROWS_AS(fit_pca(Matrix::Ones(1, 3)), DegenerateDataError);
  CHECK_THROWS_AS(fit_pca(Matrix::Ones(10, 3)), DegenerateDataError);
}

TEST_CASE("KNN basics") {
  const LabeledStateSet set = blobs(40, 3, 3.0, 1);
  const KnnClassifier one = train_knn(set, 1);
  for (int i = 0; i < 40; ++i) CHECK(one.predict(set.points.row(i).transpose()) == set.labels[static_cast<std::size_t>(i)]);
  CHECK_THROWS_AS(train_knn(set, 4), ContractError);
  CHECK_THROWS_AS(train_knn(set, 0), ContractError);
  LabeledStateSet single = set;
  std::fill(single.labels.begin(), single.labels.end(), Side::kLeft);
  CHECK_THROWS_AS(train_knn(single, 5), DegenerateLabelsError);
  LabeledStateSet broken = set;
  broken.labels.pop_back();
  CHECK_THROWS_AS(train_knn(broken, 5), ContractError);
}

TEST_CASE("KNN distance ties go to the lower index") {
  Matrix p(2, 1);
  p << -1.0, 1.0;
  const KnnClassifier a = train_knn(make_set(p, {Side::kRight, Side::kLeft}), 1);
  CHECK(a.predict(Vector::Zero(1)) == Side::kRight);
  const KnnClassifier b = train_knn(make_set(p, {Side::kLeft, Side::kRight}), 1);
  CHECK(b.predict(Vector::Zero(1)) == Side::kLeft);
}

TEST_CASE("KNN matches a brute-force oracle") {
  const LabeledStateSet train = blobs(200, 5, 0.7, 2);
  const LabeledStateSet query = blobs(200, 5, 0.7, 3);
  const KnnClassifier knn = train_knn(train, 5);
  for (int i = 0; i < 200; ++i) {
    const Vector x = query.points.row(i).transpose();
    CHECK(knn.predict(x) == knn_oracle(train, x, 5));
  }
}

TEST_CASE("SVM separates a separable set") {
  const LabeledStateSet set = blobs(200, 4, 5.0, 4);
  const LinearSvm svm = train_linear_svm(set, 1.0);
  CHECK(evaluate(svm, set).accuracy() == 1.0);
  LabeledStateSet single = set;
  std::fill(single.labels.begin(), single.labels.end(), Side::kRight);
  CHECK_THROWS_AS(train_linear_svm(single, 1.0), DegenerateLabelsError);
  CHECK_THROWS_AS(train_linear_svm(set, 0.0), ContractError);
}

TEST_CASE("SVM sign pattern is invariant to input scaling") {
  const LabeledStateSet set = blobs(120, 3, 4.0, 6);
  const LinearSvm base = train_linear_svm(set, 1e3);
  REQUIRE(evaluate(base, set).accuracy() == 1.0);
  for (double c : {0.01, 0.5, 7.0}) {
    LabeledStateSet scaled = set;
    scaled.points *= c;
    const LinearSvm svm = train_linear_svm(scaled, 1e3);
    for (int i = 0; i < 120; ++i) {
      const Vector x = set.points.row(i).transpose();
      CHECK(svm.predict(Vector(c * x)) == base.predict(x));
    }
  }
}

TEST_CASE("KNN with k = 1 fits its training set") {
  const LabeledStateSet set = blobs(500, 4, 0.2, 10);
  CHECK(evaluate(train_knn(set, 1), set).accuracy() == 1.0);
}

TEST_CASE("near hard-margin SVM finds the maximum margin") {
  // Classes on the lines x = -1 and x = +1: w = (1, 0), b = 0, width 2.
  Matrix p(6, 2);
  p << -1, -1, -1, 0, -1, 1, 1, -1, 1, 0, 1, 1;
  const LabeledStateSet set =
      make_set(p, {Side::kLeft, Side::kLeft, Side::kLeft, Side::kRight, Side::kRight, Side::kRight});
  const LinearSvm svm = train_linear_svm(set, 1e6, {.max_epochs = 100000, .tolerance = 1e-10});
  CHECK(svm.weights()[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(svm.weights()[1]) < 1e-6);
  CHECK(std::abs(svm.bias()) < 1e-6);
  CHECK(svm.margin_width() == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("confusion counts") {
  Matrix p(4, 1);
  p << -2, -1, 1, 2;
  const LabeledStateSet set = make_set(p, {Side::kLeft, Side::kRight, Side::kLeft, Side::kRight});
  const LinearSvm rule(Vector::Ones(1), 0.0);
  const ConfusionCounts c = evaluate(rule, set);
  CHECK(c.left_as_left == 1);
  CHECK(c.right_as_left == 1);
  CHECK(c.left_as_right == 1);
  CHECK(c.right_as_right == 1);
  CHECK(c.accuracy() == 0.5);
}

TEST_CASE("label streams") {
  const LinearSvm rule(Vector::Ones(1), 0.0);
  const LabelStream flat = predict_stream(rule, Matrix::Constant(20, 1, 0.5));
  CHECK(flat.switches.empty());
  CHECK(std::all_of(flat.labels.begin(), flat.labels.end(), [](Side s) { return s == Side::kRight; }));
  Matrix wave(700, 1);
  for (int i = 0; i < 700; ++i) wave(i, 0) = std::sin(2 * 3.14159265358979 * (i + 0.5) / 350.0);
  const LabelStream s = predict_stream(rule, wave);
  REQUIRE(s.switches.size() == 3);
  CHECK(s.switches[0] == 175);
  CHECK(s.switches[1] == 350);
  CHECK(s.labels[s.switches[0]] != s.labels[s.switches[0] - 1]);
}

TEST_CASE("separability reports") {
  Matrix xor_pts(4, 2);
  xor_pts << 0, 0, 1, 1, 0, 1, 1, 0;
  const auto x = linear_separability(xor_pts, {Side::kLeft, Side::kLeft, Side::kRight, Side::kRight});
  CHECK(x.accuracy <= 0.75);
  Rng rng(9);
  Matrix halves(400, 3);
  std::vector<Side> labels;
  for (int i = 0; i < 400; ++i) {
    const bool right = i % 2 == 0;
    halves.row(i) << (right ? 1 : -1) * rng.uniform(0.5, 5.0), rng.uniform(-1, 1), 0.01 * rng.normal();
    labels.push_back(right ? Side::kRight : Side::kLeft);
  }
  const auto h = linear_separability(halves, labels);
  CHECK(h.accuracy == 1.0);
  CHECK(h.margin > 0.9);
}
