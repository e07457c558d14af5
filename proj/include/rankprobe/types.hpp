#pragma once

#include <Eigen/Dense>

namespace rankprobe {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace rankprobe
