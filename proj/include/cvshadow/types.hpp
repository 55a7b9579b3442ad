#pragma once

#include <complex>

#include <Eigen/Dense>

namespace cvshadow {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

}  // namespace cvshadow
