#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace osgood {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = std::size_t;

/// Subset of a finite state space, given by indices.
using Subset = std::vector<Index>;

}  // namespace osgood
