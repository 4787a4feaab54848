#ifndef SPECTRAL_MATRIX_IO_H_
#define SPECTRAL_MATRIX_IO_H_

#include <ostream>
#include <string>

#include "spectral/linalg.h"

namespace spectral {

// MatrixMarket coordinate format (real/integer; general/symmetric). Symmetric
// files store one triangle and are mirrored on read.
SpMat read_matrix_market(const std::string& path);

// Whitespace-separated rows of numbers; '#' starts a comment line.
Mat read_dense_matrix(const std::string& path);

void write_dense_matrix(const Mat& m, std::ostream& out);

// Relative symmetry test: max|A - A^T| <= tol * max(1, max|A|).
bool is_symmetric(const SpMat& a, double tol = 1e-12);
bool is_symmetric(const Mat& a, double tol = 1e-12);

}  // namespace spectral

#endif  // SPECTRAL_MATRIX_IO_H_
