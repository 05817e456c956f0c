#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace nhf {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kQuarterPi = std::numbers::pi / 4.0;
inline constexpr cplx kI{0.0, 1.0};

}  // namespace nhf
