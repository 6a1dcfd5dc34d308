#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace psichain {

// Row-major so that sample rows are contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace psichain
