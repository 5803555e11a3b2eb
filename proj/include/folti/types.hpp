#pragma once

#include <Eigen/Dense>
#include <vector>

namespace folti {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Time-indexed sequence of vectors (states, inputs, noise, ...).
using VecSeq = std::vector<Vec>;
using MatSeq = std::vector<Mat>;

}  // namespace folti
