#pragma once

#include <vector>

#include "attnlab/tensor.hpp"

namespace attnlab {

// All ops are pure: they allocate a fresh output and, when any operand sits on
// a recording tape, push one backward step that accumulates into the operands'
// grads. Mixing operands from two different tapes is an error.

Tensor matmul(const Tensor& a, const Tensor& b);     // (m,k) x (k,n)
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // (m,k) x (n,k)^T

// Block-diagonal batched matmuls: operands are `blocks` stacked matrices and
// block i of the output is the product of block i of each operand.
Tensor block_matmul_nn(const Tensor& a, const Tensor& b, int blocks);  // (B*m,k) x (B*k,n)
Tensor block_matmul_nt(const Tensor& a, const Tensor& b, int blocks);  // (B*m,k) x (B*n,k)^T

Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor scale(const Tensor& a, double c);

// a + bias broadcast over rows; bias has a.cols() entries.
Tensor add_row_broadcast(const Tensor& a, const Tensor& bias);
// a (B*n, d) + block (n, d) repeated down the rows.
Tensor add_tiled(const Tensor& a, const Tensor& block, int blocks);

Tensor relu(const Tensor& a);

// Row-wise softmax, max-shifted. Non-finite input raises NumericError.
Tensor softmax_rows(const Tensor& a);

// Mean over rows of -log softmax(logits)[label]. labels.size() must equal
// logits.rows(); out-of-range labels raise IndexError.
Tensor cross_entropy(const Tensor& logits, const std::vector<int>& labels);

Tensor layer_norm(const Tensor& a, double eps = 1e-5);
Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& bias, double eps = 1e-5);

// out row i = table row ids[i]; also serves as embedding lookup.
Tensor gather_rows(const Tensor& table, const std::vector<int>& ids);

Tensor rows(const Tensor& a, int r0, int r1);                // [r0, r1)
Tensor col_slice(const Tensor& a, int c0, int c1);           // [c0, c1)
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor reshape(const Tensor& a, std::vector<int> shape);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

namespace detail {
// Accumulating kernels, c += op(a, b). Shapes in comments are (rows, cols).
void mm_nn_acc(const double* a, const double* b, double* c, int m, int k, int n);  // c(m,n) += a(m,k) b(k,n)
void mm_nt_acc(const double* a, const double* b, double* c, int m, int k, int n);  // c(m,n) += a(m,k) b(n,k)^T
void mm_tn_acc(const double* a, const double* b, double* c, int m, int k, int n);  // c(m,n) += a(k,m)^T b(k,n)
double dot(const double* x, const double* y, int n);
}  // namespace detail

}  // namespace attnlab
