#pragma once

#include <filesystem>
#include <string>

#include "multiexec/model.hpp"

namespace multiexec::testing {

// Two assets, lambda = diag(10, 1), unit gamma, rho and variances, correlation k.
inline ModelParams fig1(double k = 0.0) {
  MatrixXd lambda(2, 2);
  lambda << 10.0, 0.0, 0.0, 1.0;
  MatrixXd sigma(2, 2);
  sigma << 1.0, k, k, 1.0;
  return make_constant_params(lambda, VectorXd::Ones(2), VectorXd::Ones(2), sigma, 1.0);
}

inline ModelParams scalar(double lambda, double gamma, double rho, double sigma, double horizon = 1.0) {
  return make_constant_params(MatrixXd::Constant(1, 1, lambda), VectorXd::Constant(1, gamma),
                              VectorXd::Constant(1, rho), MatrixXd::Constant(1, 1, sigma), horizon);
}

// Risk-neutral, resilience-free single asset: the closed-form regime.
inline ModelParams twap() { return scalar(1.0, 1.0, 0.0, 0.0); }

inline std::string scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("multiexec_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace multiexec::testing
