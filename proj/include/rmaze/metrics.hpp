#pragma once

#include <span>

#include "rmaze/types.hpp"

namespace rmaze {

class UndefinedNormalizationError : public Error {
 public:
  using Error::Error;
};

struct RegressionMetrics {
  double nrmse = 0.0;  // RMSE / population std of the target
  double r2 = 0.0;     // 1 - SS_res / SS_tot
};

// Throws ContractError on empty or unequal lengths and
// UndefinedNormalizationError when the target is constant.
RegressionMetrics compute_metrics(std::span<const double> target,
                                  std::span<const double> predicted);

struct MeanVariance {
  double mean = 0.0;
  double variance = 0.0;  // population variance
};

MeanVariance mean_variance(std::span<const double> values);

}  // namespace rmaze
