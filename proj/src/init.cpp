#include "attnlab/init.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace attnlab {

std::vector<double> gaussian(int n, double stddev, RngStream& rng) {
  std::vector<double> v(static_cast<size_t>(n));
  for (double& x : v) x = stddev * rng.normal();
  return v;
}

namespace {

// Thin QR of a row-major (m,n) Gaussian matrix, m >= n. Returns Q (m,n) with
// orthonormal columns and R's diagonal forced positive, which makes Q Haar
// distributed when the input is iid standard normal.
std::vector<double> thin_q(std::vector<double> a, int m, int n) {
  std::vector<std::vector<double>> reflectors(static_cast<size_t>(n));
  std::vector<double> diag(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    std::vector<double>& v = reflectors[static_cast<size_t>(k)];
    v.assign(static_cast<size_t>(m - k), 0.0);
    double norm2 = 0.0;
    for (int i = k; i < m; ++i) {
      v[static_cast<size_t>(i - k)] = a[static_cast<size_t>(i) * n + k];
      norm2 += v[static_cast<size_t>(i - k)] * v[static_cast<size_t>(i - k)];
    }
    double norm = std::sqrt(norm2);
    if (norm == 0.0) {
      v[0] = 1.0;
      diag[static_cast<size_t>(k)] = 0.0;
      continue;
    }
    double alpha = v[0] > 0.0 ? -norm : norm;
    v[0] -= alpha;
    double vnorm = 0.0;
    for (double x : v) vnorm += x * x;
    vnorm = std::sqrt(vnorm);
    for (double& x : v) x /= vnorm;
    for (int j = k; j < n; ++j) {
      double s = 0.0;
      for (int i = k; i < m; ++i) s += v[static_cast<size_t>(i - k)] * a[static_cast<size_t>(i) * n + j];
      for (int i = k; i < m; ++i) a[static_cast<size_t>(i) * n + j] -= 2.0 * s * v[static_cast<size_t>(i - k)];
    }
    diag[static_cast<size_t>(k)] = a[static_cast<size_t>(k) * n + k];
  }
  // Q = H_0 ... H_{n-1} applied to the first n columns of the identity.
  std::vector<double> q(static_cast<size_t>(m) * n, 0.0);
  for (int j = 0; j < n; ++j) q[static_cast<size_t>(j) * n + j] = 1.0;
  for (int k = n - 1; k >= 0; --k) {
    const std::vector<double>& v = reflectors[static_cast<size_t>(k)];
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int i = k; i < m; ++i) s += v[static_cast<size_t>(i - k)] * q[static_cast<size_t>(i) * n + j];
      for (int i = k; i < m; ++i) q[static_cast<size_t>(i) * n + j] -= 2.0 * s * v[static_cast<size_t>(i - k)];
    }
  }
  for (int j = 0; j < n; ++j) {
    if (diag[static_cast<size_t>(j)] < 0.0) {
      for (int i = 0; i < m; ++i) q[static_cast<size_t>(i) * n + j] = -q[static_cast<size_t>(i) * n + j];
    }
  }
  return q;
}

}  // namespace

std::vector<double> orthogonal(int d, RngStream& rng) {
  if (d <= 0) throw std::invalid_argument("orthogonal: dimension must be positive");
  return thin_q(gaussian(d * d, 1.0, rng), d, d);
}

std::vector<double> orthonormal_rows(int rows, int cols, RngStream& rng) {
  if (rows <= 0 || cols < rows) {
    throw std::invalid_argument("orthonormal_rows: need 0 < rows <= cols, got " + std::to_string(rows) + " x " +
                                std::to_string(cols));
  }
  // Q (cols, rows) has orthonormal columns; its transpose has orthonormal rows.
  std::vector<double> q = thin_q(gaussian(cols * rows, 1.0, rng), cols, rows);
  std::vector<double> out(static_cast<size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out[static_cast<size_t>(i) * cols + j] = q[static_cast<size_t>(j) * rows + i];
  return out;
}

}  // namespace attnlab
