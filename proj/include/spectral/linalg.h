#ifndef SPECTRAL_LINALG_H_
#define SPECTRAL_LINALG_H_

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace spectral {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Index = Eigen::Index;

}  // namespace spectral

#endif  // SPECTRAL_LINALG_H_
