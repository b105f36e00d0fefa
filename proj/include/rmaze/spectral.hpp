#pragma once

#include "rmaze/types.hpp"

namespace rmaze {

// Largest eigenvalue modulus from the real Schur form of the dense matrix.
// Exact up to rounding; cost is cubic in the dimension.
double spectral_radius(const SparseMatrix& matrix);
double spectral_radius(const Matrix& matrix);

struct PowerIterationResult {
  double radius = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Power iteration that also tracks a dominant complex-conjugate pair by
// fitting x_{k+2} = a x_{k+1} + b x_k on the normalized iterates. Converges
// geometrically in |lambda_2 / lambda_1|, so it is only accurate when the
// dominant eigenvalue (or pair) is well separated.
PowerIterationResult power_iteration_radius(const SparseMatrix& matrix,
                                            int max_iterations = 1000,
                                            double tolerance = 1e-9,
                                            std::uint64_t seed = 1);

}  // namespace rmaze
