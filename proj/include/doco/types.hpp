#pragma once

#include <Eigen/Dense>

namespace doco {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace doco
