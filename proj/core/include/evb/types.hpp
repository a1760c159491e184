#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace evb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// Latent state paths: one row per time point, so x_t is contiguous.
using StateMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input outside a model's parameter domain or otherwise malformed.
class DomainError : public Error {
 public:
  using Error::Error;
};

// The kernel parameters at time `t` imply a non-positive-definite precision.
class CalibrationError : public Error {
 public:
  CalibrationError(int t, const std::string& what) : Error(what), t_(t) {}
  int time_index() const noexcept { return t_; }

 private:
  int t_;
};

// A method was asked of a model that does not support it.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kLogTwoPi = 1.8378770664093454836;

}  // namespace evb
