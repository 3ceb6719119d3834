#ifndef CURVLAB_COMMON_HPP
#define CURVLAB_COMMON_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace curvlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

/// Raised when a numeric precondition fails (degenerate input, tolerance
/// violation, non-positive maximum in a pinching ratio, ...).  The CLI maps
/// this to exit code 3, while std::invalid_argument maps to exit code 2.
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace curvlab

#endif
