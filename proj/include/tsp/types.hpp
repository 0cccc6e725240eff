#pragma once

#include <cstdint>
#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace tsp {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

}  // namespace tsp
