#pragma once

#include <vector>

#include "attnlab/rng.hpp"

namespace attnlab {

std::vector<double> gaussian(int n, double stddev, RngStream& rng);

// Haar-distributed d x d orthogonal matrix, row-major: QR of a Gaussian
// matrix with the R diagonal forced positive.
std::vector<double> orthogonal(int d, RngStream& rng);

// rows x cols matrix (rows <= cols) whose rows are orthonormal.
std::vector<double> orthonormal_rows(int rows, int cols, RngStream& rng);

}  // namespace attnlab
