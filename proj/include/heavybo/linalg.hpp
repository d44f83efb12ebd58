#pragma once

#include <Eigen/Dense>

namespace heavybo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace heavybo
