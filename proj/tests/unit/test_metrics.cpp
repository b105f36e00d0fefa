#include <doctest.h>

#include <vector>

#include "../common/oracles.hpp"
#include "rmaze/metrics.hpp"

using namespace rmaze;

TEST_CASE("perfect prediction") {
  const std::vector<double> y{1.0, -2.0, 3.5, 0.0};
  const auto m = compute_metrics(y, y);
  CHECK(m.nrmse == 0.0);
  CHECK(m.r2 == 1.0);
}

TEST_CASE("mean predictor has r2 0 and nrmse 1") {
  const std::vector<double> y{1.0, 2.0, 3.0, 6.0};
  const std::vector<double> p(4, 3.0);
  const auto m = compute_metrics(y, p);
  CHECK(m.r2 == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(m.nrmse == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("hand-computed four-point example") {
  const std::vector<double> y{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> p{0.0, 1.0, 2.0, 4.0};
  const auto m = compute_metrics(y, p);
  CHECK(std::abs(m.r2 - 0.8) < 1e-12);
  // sqrt(1/4) / sqrt(1.25)
  CHECK(std::abs(m.nrmse - 0.5 / std::sqrt(1.25)) < 1e-12);
  CHECK(std::abs(m.nrmse - 0.4472135955) < 1e-10);
}

TEST_CASE("metric errors") {
  const std::vector<double> y{2.0, 2.0, 2.0};
  const std::vector<double> p{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(compute_metrics(y, p), UndefinedNormalizationError);
  const std::vector<double> shorter{1.0, 2.0};
  CHECK_THROWS_AS(compute_metrics(p, shorter), ContractError);
  CHECK_THROWS_AS(compute_metrics(std::vector<double>{}, std::vector<double>{}), ContractError);
}

TEST_CASE("r2 and nrmse cross-identity") {
  CHECK(oracle::metrics_identity_error(500, 3) < 1e-12);
}

TEST_CASE("zero nrmse iff zero residual") {
  const std::vector<double> y{0.0, 1.0, 5.0};
  std::vector<double> p = y;
  p[1] += 1e-6;
  const auto m = compute_metrics(y, p);
  CHECK(m.nrmse > 0.0);
  CHECK(m.r2 < 1.0);
}

TEST_CASE("population mean and variance") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto mv = mean_variance(v);
  CHECK(mv.mean == 2.5);
  CHECK(mv.variance == doctest::Approx(1.25).epsilon(1e-15));
}
