#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace rmaze {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Point = Eigen::Vector2d;

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition (wrong dimensions, bad config).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Which loop of the figure-eight. Also used as the binary decision label.
enum class Side : int { kLeft = 0, kRight = 1 };

inline Side opposite(Side s) { return s == Side::kLeft ? Side::kRight : Side::kLeft; }
inline const char* to_string(Side s) { return s == Side::kLeft ? "LEFT" : "RIGHT"; }
inline char to_letter(Side s) { return s == Side::kLeft ? 'A' : 'B'; }

}  // namespace rmaze
