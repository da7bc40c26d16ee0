#pragma once

#include <Eigen/Dense>

namespace abmsurrogate {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

}  // namespace abmsurrogate
