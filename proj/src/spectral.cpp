#include "rmaze/spectral.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "rmaze/random.hpp"

namespace rmaze {

double spectral_radius(const Matrix& matrix) {
  if (matrix.rows() != matrix.cols()) throw ContractError("spectral radius needs a square matrix");
  if (matrix.size() == 0) return 0.0;
  Eigen::RealSchur<Matrix> schur(matrix, /*computeU=*/false);
  if (schur.info() != Eigen::Success) throw Error("real Schur decomposition did not converge");
  const Matrix& t = schur.matrixT();
  const Eigen::Index n = t.rows();
  double radius = 0.0;
  for (Eigen::Index i = 0; i < n;) {
    if (i + 1 < n && t(i + 1, i) != 0.0) {
      // 2x2 block carrying a complex pair: |lambda|^2 = det.
      const double det = t(i, i) * t(i + 1, i + 1) - t(i, i + 1) * t(i + 1, i);
      radius = std::max(radius, std::sqrt(std::abs(det)));
      i += 2;
    } else {
      radius = std::max(radius, std::abs(t(i, i)));
      i += 1;
    }
  }
  return radius;
}

double spectral_radius(const SparseMatrix& matrix) { return spectral_radius(Matrix(matrix)); }

PowerIterationResult power_iteration_radius(const SparseMatrix& matrix, int max_iterations,
                                            double tolerance, std::uint64_t seed) {
  if (matrix.rows() != matrix.cols()) throw ContractError("spectral radius needs a square matrix");
  PowerIterationResult result;
  const Eigen::Index n = matrix.rows();
  if (n == 0 || matrix.nonZeros() == 0) {
    result.converged = true;
    return result;
  }
  Rng rng(seed);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
  v.normalize();

  double previous = -1.0;
  for (int it = 1; it <= max_iterations; ++it) {
    Vector y1 = matrix * v;
    Vector y2 = matrix * y1;
    const double n1 = y1.norm();
    if (n1 == 0.0) {
      result = {0.0, it, true};
      return result;
    }

    // Real dominant eigenvalue: y1 ~ lambda v.
    const double lambda = v.dot(y1);
    const double real_residual = (y1 - lambda * v).norm();

    // Dominant pair: y2 ~ a y1 + b v, eigenvalues are roots of z^2 - a z - b.
    const double g11 = y1.dot(y1), g12 = y1.dot(v), g22 = v.dot(v);
    const double r1 = y1.dot(y2), r2 = v.dot(y2);
    const double det = g11 * g22 - g12 * g12;
    double estimate = std::abs(lambda);
    if (real_residual > 1e-10 * n1 && det > 1e-14 * g11 * g22) {
      const double a = (r1 * g22 - r2 * g12) / det;
      const double b = (g11 * r2 - g12 * r1) / det;
      const double disc = a * a + 4.0 * b;
      if (disc < 0.0) {
        estimate = std::sqrt(-b);
      } else {
        const double s = std::sqrt(disc);
        estimate = std::max(std::abs(0.5 * (a + s)), std::abs(0.5 * (a - s)));
      }
    }

    result.radius = estimate;
    result.iterations = it;
    if (previous >= 0.0 && std::abs(estimate - previous) <= tolerance * estimate) {
      result.converged = true;
      return result;
    }
    previous = estimate;
    v = y2 / y2.norm();
  }
  return result;
}

}  // namespace rmaze
