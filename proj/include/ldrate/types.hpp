#pragma once

#include <Eigen/Dense>

namespace ldrate {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace ldrate
