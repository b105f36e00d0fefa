#include "rmaze/metrics.hpp"

#include <cmath>

namespace rmaze {

RegressionMetrics compute_metrics(std::span<const double> target,
                                  std::span<const double> predicted) {
  if (target.empty() || target.size() != predicted.size()) {
    throw ContractError("metrics need equal, nonzero lengths");
  }
  const double n = static_cast<double>(target.size());
  double mean = 0.0;
  for (double y : target) mean += y;
  mean /= n;

  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double e = target[i] - predicted[i];
    const double d = target[i] - mean;
    ss_res += e * e;
    ss_tot += d * d;
  }
  if (!(ss_tot > 0.0)) {
    throw UndefinedNormalizationError("target is constant; NRMSE and R2 are undefined");
  }
  const double sigma = std::sqrt(ss_tot / n);
  RegressionMetrics m;
  m.nrmse = std::sqrt(ss_res / n) / sigma;
  m.r2 = 1.0 - ss_res / ss_tot;
  return m;
}

MeanVariance mean_variance(std::span<const double> values) {
  MeanVariance mv;
  if (values.empty()) return mv;
  const double n = static_cast<double>(values.size());
  for (double v : values) mv.mean += v;
  mv.mean /= n;
  for (double v : values) mv.variance += (v - mv.mean) * (v - mv.mean);
  mv.variance /= n;
  return mv;
}

}  // namespace rmaze
