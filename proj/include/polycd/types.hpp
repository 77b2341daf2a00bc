#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace polycd {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a caller breaks a documented precondition.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when internal bookkeeping (cached products, convex weights) no
/// longer matches the iterate it describes.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an exact computation is requested beyond its size cap.
class UnsupportedSize : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ContractViolation(what);
}

/// Number of entries with |x_j| > threshold.
inline Index count_nonzeros(const Vector& x, double threshold = 1e-10) {
  Index n = 0;
  for (Index j = 0; j < x.size(); ++j)
    if (std::abs(x[j]) > threshold) ++n;
  return n;
}

}  // namespace polycd
