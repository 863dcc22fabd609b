#include "attnlab/ops.hpp"

#include <cmath>
#include <cstddef>
#include <string>

namespace attnlab {

namespace detail {

double dot(const double* x, const double* y, int n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += x[i] * y[i];
    s1 += x[i + 1] * y[i + 1];
    s2 += x[i + 2] * y[i + 2];
    s3 += x[i + 3] * y[i + 3];
  }
  double s = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void mm_nn_acc(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<size_t>(i) * k;
    double* crow = c + static_cast<size_t>(i) * n;
    for (int l = 0; l < k; ++l) {
      double av = arow[l];
      const double* brow = b + static_cast<size_t>(l) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void mm_nt_acc(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<size_t>(i) * k;
    double* crow = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) crow[j] += dot(arow, b + static_cast<size_t>(j) * k, k);
  }
}

void mm_tn_acc(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int l = 0; l < k; ++l) {
    const double* arow = a + static_cast<size_t>(l) * m;
    const double* brow = b + static_cast<size_t>(l) * n;
    for (int i = 0; i < m; ++i) {
      double av = arow[i];
      double* crow = c + static_cast<size_t>(i) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace detail

namespace {

using detail::mm_nn_acc;
using detail::mm_nt_acc;
using detail::mm_tn_acc;

Tape* joint_tape(std::initializer_list<const Tensor*> ts) {
  Tape* tape = nullptr;
  for (const Tensor* t : ts) {
    if (!t->tape()) continue;
    if (tape && tape != t->tape()) throw NumericError("operands were recorded on different tapes");
    tape = t->tape();
  }
  return tape;
}

bool live(Tape* t) { return t && t->recording(); }

void attach(Tensor& out, Tape* t) {
  out.impl()->tape = t;
  out.impl()->requires_grad = true;
}

void ensure_grad(TensorImpl* t) {
  if (t->grad.empty()) t->grad.assign(t->data.size(), 0.0);
}

void check_2d(const Tensor& t, const char* op) {
  if (t.ndim() != 2) throw ShapeError(std::string(op) + " needs a 2-D operand, got " + shape_to_string(t.shape()));
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shapes differ, " + shape_to_string(a.shape()) + " vs " +
                     shape_to_string(b.shape()));
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_2d(a, "matmul");
  check_2d(b, "matmul");
  int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw ShapeError("matmul: inner dimensions differ, " + shape_to_string(a.shape()) + " x " +
                     shape_to_string(b.shape()));
  }
  Tensor c = Tensor::zeros({m, n});
  mm_nn_acc(a.data().data(), b.data().data(), c.data().data(), m, k, n);
  Tape* tape = joint_tape({&a, &b});
  if (live(tape)) {
    attach(c, tape);
    auto ai = a.impl(), bi = b.impl(), ci = c.impl();
    tape->record([ai, bi, ci, m, k, n] {
      if (ci->grad.empty()) return;
      if (ai->tape) {
        ensure_grad(ai.get());
        mm_nt_acc(ci->grad.data(), bi->data.data(), ai->grad.data(), m, n, k);
      }
      if (bi->tape) {
        ensure_grad(bi.get());
        mm_tn_acc(ai->data.data(), ci->grad.data(), bi->grad.data(), k, m, n);
      }
    });
  }
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  check_2d(a, "matmul_nt");
  check_2d(b, "matmul_nt");
  int m = a.dim(0), k = a.dim(1), n = b.dim(0);
  if (b.dim(1) != k) {
    throw ShapeError("matmul_nt: inner dimensions differ, " + shape_to_string(a.shape()) + " x " +
                     shape_to_string(b.shape()) + "^T");
  }
  Tensor c = Tensor::zeros({m, n});
  mm_nt_acc(a.data().data(), b.data().data(), c.data().data(), m, k, n);
  Tape* tape = joint_tape({&a, &b});
  if (live(tape)) {
    attach(c, tape);
    auto ai = a.impl(), bi = b.impl(), ci = c.impl();
    tape->record([ai, bi, ci, m, k, n] {
      if (ci->grad.empty()) return;
      if (ai->tape) {
        ensure_grad(ai.get());
        mm_nn_acc(ci->grad.data(), bi->data.data(), ai->grad.data(), m, n, k);
      }
      if (bi->tape) {
        ensure_grad(bi.get());
        mm_tn_acc(ci->grad.data(), ai->data.data(), bi->grad.data(), n, m, k);
      }
    });
  }
  return c;
}

Tensor block_matmul_nn(const Tensor& a, const Tensor& b, int blocks) {
  check_2d(a, "block_matmul_nn");
  check_2d(b, "block_matmul_nn");
  if (blocks <= 0) throw ShapeError("block_matmul_nn: blocks must be positive");
  if (a.dim(0) % blocks || b.dim(0) % blocks) {
    throw ShapeError("block_matmul_nn: rows of " + shape_to_string(a.shape()) + " and " +
                     shape_to_string(b.shape()) + " must divide into " + std::to_string(blocks) + " blocks");
  }
  int m = a.dim(0) / blocks, k = a.dim(1), n = b.dim(1);
  if (b.dim(0) / blocks != k) {
    throw ShapeError("block_matmul_nn: inner dimensions differ per block, " + shape_to_string(a.shape()) + " x " +
                     shape_to_string(b.shape()));
  }
  Tensor c = Tensor::zeros({blocks * m, n});
  for (int bl = 0; bl < blocks; ++bl) {
    mm_nn_acc(a.data().data() + static_cast<size_t>(bl) * m * k, b.data().data() + static_cast<size_t>(bl) * k * n,
              c.data().data() + static_cast<size_t>(bl) * m * n, m, k, n);
  }
  Tape* tape = joint_tape({&a, &b});
  if (live(tape)) {
    attach(c, tape);
    auto ai = a.impl(), bi = b.impl(), ci = c.impl();
    tape->record([ai, bi, ci, blocks, m, k, n] {
      if (ci->grad.empty()) return;
      for (int bl = 0; bl < blocks; ++bl) {
        const double* gc = ci->grad.data() + static_cast<size_t>(bl) * m * n;
        if (ai->tape) {
          ensure_grad(ai.get());
          mm_nt_acc(gc, bi->data.data() + static_cast<size_t>(bl) * k * n,
                    ai->grad.data() + static_cast<size_t>(bl) * m * k, m, n, k);
        }
        if (bi->tape) {
          ensure_grad(bi.get());
          mm_tn_acc(ai->data.data() + static_cast<size_t>(bl) * m * k, gc,
                    bi->grad.data() + static_cast<size_t>(bl) * k * n, k, m, n);
        }
      }
    });
  }
  return c;
}

Tensor block_matmul_nt(const Tensor& a, const Tensor& b, int blocks) {
  check_2d(a, "block_matmul_nt");
  check_2d(b, "block_matmul_nt");
  if (blocks <= 0) throw ShapeError("block_matmul_nt: blocks must be positive");
  if (a.dim(0) % blocks || b.dim(0) % blocks) {
    throw ShapeError("block_matmul_nt: rows of " + shape_to_string(a.shape()) + " and " +
                     shape_to_string(b.shape()) + " must divide into " + std::to_string(blocks) + " blocks");
  }
  int m = a.dim(0) / blocks, k = a.dim(1), n = b.dim(0) / blocks;
  if (b.dim(1) != k) {
    throw ShapeError("block_matmul_nt: inner dimensions differ, " + shape_to_string(a.shape()) + " x " +
                     shape_to_string(b.shape()) + "^T");
  }
  Tensor c = Tensor::zeros({blocks * m, n});
  for (int bl = 0; bl < blocks; ++bl) {
    mm_nt_acc(a.data().data() + static_cast<size_t>(bl) * m * k, b.data().data() + static_cast<size_t>(bl) * n * k,
              c.data().data() + static_cast<size_t>(bl) * m * n, m, k, n);
  }
  Tape* tape = joint_tape({&a, &b});
  if (live(tape)) {
    attach(c, tape);
    auto ai = a.impl(), bi = b.impl(), ci = c.impl();
    tape->record([ai, bi, ci, blocks, m, k, n] {
      if (ci->grad.empty()) return;
      for (int bl = 0; bl < blocks; ++bl) {
        const double* gc = ci->grad.data() + static_cast<size_t>(bl) * m * n;
        if (ai->tape) {
          ensure_grad(ai.get());
          mm_nn_acc(gc, bi->data.data() + static_cast<size_t>(bl) * n * k,
                    ai->grad.data() + static_cast<size_t>(bl) * m * k, m, n, k);
        }
        if (bi->tape) {
          ensure_grad(bi.get());
          mm_tn_acc(gc, ai->data.data() + static_cast<size_t>(bl) * m * k,
                    bi->grad.data() + static_cast<size_t>(bl) * n * k, n, m, k);
        }
      }
    });
  }
  return c;
}

Tensor transpose(const Tensor& a) {
  check_2d(a, "transpose");
  int m = a.dim(0), n = a.dim(1);
  Tensor c = Tensor::zeros({n, m});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) c[static_cast<int64_t>(j) * m + i] = a[static_cast<int64_t>(i) * n + j];
  Tape* tape = joint_tape({&a});
  if (live(tape)) {
    attach(c, tape);
    auto ai = a.impl(), ci = c.impl();
    tape->record([ai, ci, m, n] {
      if (ci->grad.empty() || !ai->tape) return;
      ensure_grad(ai.get());
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
          ai->grad[static_cast<size_t>(i) * n + j] += ci->grad[static_cast<size_t>(j) * m + i];
    });
  }
  return c;
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  Tensor c = Tensor::zeros(a.shape());
  int64_t n = a.size();
  for (int64_t i = 0; i < n; ++i) c[i] = a[i] + b[i];
  Tape* tape = joint_tape({&a, &b});
  if (live(tape)) {
    attach(c, tape);
    auto ai = a.impl(), bi = b.impl(), ci = c.impl();
    tape->record([ai, bi, ci] {
      if (ci->grad.empty()) return;
      if (ai->tape) ai->accumulate_grad(ci->grad.data(), ci->grad.size());
      if (bi->tape) bi->accumulate_grad(ci->grad.data(), ci->grad.size());
    });
  }
  return c;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  Tensor c = Tensor::zeros(a.shape());
  int64_t n = a.size();
  for (int64_t i = 0; i < n; ++i) c[i] = a[i] - b[i];
  Tape* tape = joint_tape({&a, &b});
  if (live(tape)) {
    attach(c, tape);
    auto ai = a.impl(), bi = b.impl(), ci = c.impl();
    tape->record([ai, bi, ci] {
      if (ci->grad.empty()) return;
      if (ai->tape) ai->accumulate_grad(ci->grad.data(), ci->grad.size());
      if (bi->tape) {
        ensure_grad(bi.get());
        for (size_t i = 0; i < ci->grad.size(); ++i) bi->grad[i] -= ci->grad[i];
      }
    });
  }
  return c;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  Tensor c = Tensor::zeros(a.shape());
  int64_t n = a.size();
  for (int64_t i = 0; i < n; ++i) c[i] = a[i] * b[i];
  Tape* tape = joint_tape({&a, &b});
  if (live(tape)) {
    attach(c, tape);
    auto ai = a.impl(), bi = b.impl(), ci = c.impl();
    tape->record([ai, bi, ci] {
      if (ci->grad.empty()) return;
      if (ai->tape) {
        ensure_grad(ai.get());
        for (size_t i = 0; i < ci->grad.size(); ++i) ai->grad[i] += ci->grad[i] * bi->data[i];
      }
      if (bi->tape) {
        ensure_grad(bi.get());
        for (size_t i = 0; i < ci->grad.size(); ++i) bi->grad[i] += ci->grad[i] * ai->data[i];
      }
    });
  }
  return c;
}

Tensor scale(const Tensor& a, double cfac) {
  Tensor c = Tensor::zeros(a.shape());
  int64_t n = a.size();
  for (int64_t i = 0; i < n; ++i) c[i] = a[i] * cfac;
  Tape* tape = joint_tape({&a});
  if (live(tape)) {
    attach(c, tape);
    auto ai = a.impl(), ci = c.impl();
    tape->record([ai, ci, cfac] {
      if (ci->grad.empty() || !ai->tape) return;
      ensure_grad(ai.get());
      for (size_t i = 0; i < ci->grad.size(); ++i) ai->grad[i] += cfac * ci->grad[i];
    });
  }
  return c;
}

Tensor add_row_broadcast(const Tensor& a, const Tensor& bias) {
  check_2d(a, "add_row_broadcast");
  int m = a.dim(0), n = a.dim(1);
  if (bias.size() != n) {
    throw ShapeError("add_row_broadcast: bias " + shape_to_string(bias.shape()) + " does not match row width of " +
                     shape_to_string(a.shape()));
  }
  Tensor c = Tensor::zeros({m, n});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) c[static_cast<int64_t>(i) * n + j] = a[static_cast<int64_t>(i) * n + j] + bias[j];
  Tape* tape = joint_tape({&a, &bias});
  if (live(tape)) {
    attach(c, tape);
    auto ai = a.impl(), bi = bias.impl(), ci = c.impl();
    tape->record([ai, bi, ci, m, n] {
      if (ci->grad.empty()) return;
      if (ai->tape) ai->accumulate_grad(ci->grad.data(), ci->grad.size());
      if (bi->tape) {
        ensure_grad(bi.get());
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) bi->grad[j] += ci->grad[static_cast<size_t>(i) * n + j];
      }
    });
  }
  return c;
}

Tensor add_tiled(const Tensor& a, const Tensor& block, int blocks) {
  check_2d(a, "add_tiled");
  check_2d(block, "add_tiled");
  if (blocks <= 0 || a.dim(0) != blocks * block.dim(0) || a.dim(1) != block.dim(1)) {
    throw ShapeError("add_tiled: " + shape_to_string(a.shape()) + " is not " + std::to_string(blocks) +
                     " tiles of " + shape_to_string(block.shape()));
  }
  int r = block.dim(0), n = block.dim(1);
  Tensor c = Tensor::zeros(a.shape());
  for (int bl = 0; bl < blocks; ++bl) {
    const double* src = a.data().data() + static_cast<size_t>(bl) * r * n;
    double* dst = c.data().data() + static_cast<size_t>(bl) * r * n;
    for (int i = 0; i < r * n; ++i) dst[i] = src[i] + block[i];
  }
  Tape* tape = joint_tape({&a, &block});
  if (live(tape)) {
    attach(c, tape);
    auto ai = a.impl(), bi = block.impl(), ci = c.impl();
    tape->record([ai, bi, ci, blocks, r, n] {
      if (ci->grad.empty()) return;
      if (ai->tape) ai->accumulate_grad(ci->grad.data(), ci->grad.size());
      if (bi->tape) {
        ensure_grad(bi.get());
        for (int bl = 0; bl < blocks; ++bl) {
          const double* g = ci->grad.data() + static_cast<size_t>(bl) * r * n;
          for (int i = 0; i < r * n; ++i) bi->grad[i] += g[i];
        }
      }
    });
  }
  return c;
}

Tensor relu(const Tensor& a) {
  Tensor c = Tensor::zeros(a.shape());
  int64_t n = a.size();
  for (int64_t i = 0; i < n; ++i) c[i] = a[i] > 0.0 ? a[i] : 0.0;
  Tape* tape = joint_tape({&a});
  if (live(tape)) {
    attach(c, tape);
    auto ai = a.impl(), ci = c.impl();
    tape->record([ai, ci] {
      if (ci->grad.empty() || !ai->tape) return;
      ensure_grad(ai.get());
      for (size_t i = 0; i < ci->grad.size(); ++i)
        if (ai->data[i] > 0.0) ai->grad[i] += ci->grad[i];
    });
  }
  return c;
}

Tensor softmax_rows(const Tensor& a) {
  int m = a.rows(), n = a.cols();
  Tensor c = Tensor::zeros(a.shape());
  for (int i = 0; i < m; ++i) {
    const double* x = a.data().data() + static_cast<size_t>(i) * n;
    double* y = c.data().data() + static_cast<size_t>(i) * n;
    double mx = x[0];
    for (int j = 0; j < n; ++j) {
      if (!std::isfinite(x[j])) throw NumericError("softmax_rows: input is not finite");
      if (x[j] > mx) mx = x[j];
    }
    double denom = 0.0;
    for (int j = 0; j < n; ++j) {
      y[j] = std::exp(x[j] - mx);
      denom += y[j];
    }
    for (int j = 0; j < n; ++j) y[j] /= denom;
  }
  Tape* tape = joint_tape({&a});
  if (live(tape)) {
    attach(c, tape);
    auto ai = a.impl(), ci = c.impl();
    tape->record([ai, ci, m, n] {
      if (ci->grad.empty() || !ai->tape) return;
      ensure_grad(ai.get());
      for (int i = 0; i < m; ++i) {
        const double* y = ci->data.data() + static_cast<size_t>(i) * n;
        const double* gy = ci->grad.data() + static_cast<size_t>(i) * n;
        double* gx = ai->grad.data() + static_cast<size_t>(i) * n;
        double inner = detail::dot(y, gy, n);
        for (int j = 0; j < n; ++j) gx[j] += y[j] * (gy[j] - inner);
      }
    });
  }
  return c;
}

Tensor cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
  check_2d(logits, "cross_entropy");
  int m = logits.dim(0), n = logits.dim(1);
  if (static_cast<int>(labels.size()) != m) {
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for " + std::to_string(m) +
                     " rows");
  }
  std::vector<double> probs(static_cast<size_t>(m) * n);
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    int y = labels[static_cast<size_t>(i)];
    if (y < 0 || y >= n) {
      throw IndexError("cross_entropy: label " + std::to_string(y) + " out of range [0," + std::to_string(n) +
                       ") at row " + std::to_string(i));
    }
    const double* x = logits.data().data() + static_cast<size_t>(i) * n;
    double mx = x[0];
    for (int j = 1; j < n; ++j)
      if (x[j] > mx) mx = x[j];
    if (!std::isfinite(mx)) throw NumericError("cross_entropy: logits are not finite");
    double denom = 0.0;
    for (int j = 0; j < n; ++j) denom += std::exp(x[j] - mx);
    double lse = mx + std::log(denom);
    total += lse - x[y];
    for (int j = 0; j < n; ++j) probs[static_cast<size_t>(i) * n + j] = std::exp(x[j] - lse);
  }
  Tensor c = Tensor::scalar(total / m);
  Tape* tape = joint_tape({&logits});
  if (live(tape)) {
    attach(c, tape);
    auto li = logits.impl(), ci = c.impl();
    std::vector<int> ylab = labels;
    tape->record([li, ci, probs = std::move(probs), ylab = std::move(ylab), m, n] {
      if (ci->grad.empty() || !li->tape) return;
      ensure_grad(li.get());
      double g = ci->grad[0] / m;
      for (int i = 0; i < m; ++i) {
        double* gx = li->grad.data() + static_cast<size_t>(i) * n;
        const double* p = probs.data() + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) gx[j] += g * p[j];
        gx[ylab[static_cast<size_t>(i)]] -= g;
      }
    });
  }
  return c;
}

namespace {

// Shared layer_norm forward/backward. gain/bias may be null (plain variant).
Tensor layer_norm_impl(const Tensor& a, const Tensor* gain, const Tensor* bias, double eps) {
  check_2d(a, "layer_norm");
  int m = a.dim(0), n = a.dim(1);
  if (gain && (gain->size() != n || bias->size() != n)) {
    throw ShapeError("layer_norm: gain/bias must have " + std::to_string(n) + " entries, got " +
                     shape_to_string(gain->shape()) + " and " + shape_to_string(bias->shape()));
  }
  Tensor c = Tensor::zeros({m, n});
  std::vector<double> xhat(static_cast<size_t>(m) * n);
  std::vector<double> inv_sigma(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    const double* x = a.data().data() + static_cast<size_t>(i) * n;
    double mu = 0.0;
    for (int j = 0; j < n; ++j) mu += x[j];
    mu /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) var += (x[j] - mu) * (x[j] - mu);
    var /= n;
    double inv = 1.0 / std::sqrt(var + eps);
    inv_sigma[static_cast<size_t>(i)] = inv;
    double* xh = xhat.data() + static_cast<size_t>(i) * n;
    double* y = c.data().data() + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      xh[j] = (x[j] - mu) * inv;
      y[j] = gain ? xh[j] * (*gain)[j] + (*bias)[j] : xh[j];
    }
  }
  Tape* tape = gain ? joint_tape({&a, gain, bias}) : joint_tape({&a});
  if (live(tape)) {
    attach(c, tape);
    auto ai = a.impl(), ci = c.impl();
    std::shared_ptr<TensorImpl> gi = gain ? gain->impl() : nullptr;
    std::shared_ptr<TensorImpl> bi = bias ? bias->impl() : nullptr;
    tape->record([ai, ci, gi, bi, xhat = std::move(xhat), inv_sigma = std::move(inv_sigma), m, n] {
      if (ci->grad.empty()) return;
      for (int i = 0; i < m; ++i) {
        const double* gy = ci->grad.data() + static_cast<size_t>(i) * n;
        const double* xh = xhat.data() + static_cast<size_t>(i) * n;
        if (gi && gi->tape) {
          ensure_grad(gi.get());
          for (int j = 0; j < n; ++j) gi->grad[j] += gy[j] * xh[j];
        }
        if (bi && bi->tape) {
          ensure_grad(bi.get());
          for (int j = 0; j < n; ++j) bi->grad[j] += gy[j];
        }
        if (!ai->tape) continue;
        ensure_grad(ai.get());
        double* gx = ai->grad.data() + static_cast<size_t>(i) * n;
        double mean_g = 0.0, mean_gx = 0.0;
        for (int j = 0; j < n; ++j) {
          double gh = gi ? gy[j] * gi->data[j] : gy[j];
          mean_g += gh;
          mean_gx += gh * xh[j];
        }
        mean_g /= n;
        mean_gx /= n;
        double inv = inv_sigma[static_cast<size_t>(i)];
        for (int j = 0; j < n; ++j) {
          double gh = gi ? gy[j] * gi->data[j] : gy[j];
          gx[j] += inv * (gh - mean_g - xh[j] * mean_gx);
        }
      }
    });
  }
  return c;
}

}  // namespace

Tensor layer_norm(const Tensor& a, double eps) { return layer_norm_impl(a, nullptr, nullptr, eps); }

Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& bias, double eps) {
  return layer_norm_impl(a, &gain, &bias, eps);
}

Tensor gather_rows(const Tensor& table, const std::vector<int>& ids) {
  check_2d(table, "gather_rows");
  if (ids.empty()) throw ShapeError("gather_rows: empty index list");
  int v = table.dim(0), n = table.dim(1);
  int m = static_cast<int>(ids.size());
  Tensor c = Tensor::zeros({m, n});
  for (int i = 0; i < m; ++i) {
    int r = ids[static_cast<size_t>(i)];
    if (r < 0 || r >= v) {
      throw IndexError("gather_rows: index " + std::to_string(r) + " out of range [0," + std::to_string(v) +
                       ") at position " + std::to_string(i));
    }
    const double* src = table.data().data() + static_cast<size_t>(r) * n;
    double* dst = c.data().data() + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) dst[j] = src[j];
  }
  Tape* tape = joint_tape({&table});
  if (live(tape)) {
    attach(c, tape);
    auto ti = table.impl(), ci = c.impl();
    std::vector<int> idx = ids;
    tape->record([ti, ci, idx = std::move(idx), m, n] {
      if (ci->grad.empty() || !ti->tape) return;
      ensure_grad(ti.get());
      for (int i = 0; i < m; ++i) {
        double* dst = ti->grad.data() + static_cast<size_t>(idx[static_cast<size_t>(i)]) * n;
        const double* g = ci->grad.data() + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) dst[j] += g[j];
      }
    });
  }
  return c;
}

Tensor rows(const Tensor& a, int r0, int r1) {
  check_2d(a, "rows");
  int m = a.dim(0), n = a.dim(1);
  if (r0 < 0 || r1 > m || r0 >= r1) {
    throw IndexError("rows: range [" + std::to_string(r0) + "," + std::to_string(r1) + ") invalid for " +
                     shape_to_string(a.shape()));
  }
  Tensor c = Tensor::zeros({r1 - r0, n});
  for (int64_t i = 0; i < c.size(); ++i) c[i] = a[static_cast<int64_t>(r0) * n + i];
  Tape* tape = joint_tape({&a});
  if (live(tape)) {
    attach(c, tape);
    auto ai = a.impl(), ci = c.impl();
    tape->record([ai, ci, r0, n] {
      if (ci->grad.empty() || !ai->tape) return;
      ensure_grad(ai.get());
      for (size_t i = 0; i < ci->grad.size(); ++i) ai->grad[static_cast<size_t>(r0) * n + i] += ci->grad[i];
    });
  }
  return c;
}

Tensor col_slice(const Tensor& a, int c0, int c1) {
  check_2d(a, "col_slice");
  int m = a.dim(0), n = a.dim(1);
  if (c0 < 0 || c1 > n || c0 >= c1) {
    throw IndexError("col_slice: range [" + std::to_string(c0) + "," + std::to_string(c1) + ") invalid for " +
                     shape_to_string(a.shape()));
  }
  int w = c1 - c0;
  Tensor c = Tensor::zeros({m, w});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < w; ++j)
      c[static_cast<int64_t>(i) * w + j] = a[static_cast<int64_t>(i) * n + c0 + j];
  Tape* tape = joint_tape({&a});
  if (live(tape)) {
    attach(c, tape);
    auto ai = a.impl(), ci = c.impl();
    tape->record([ai, ci, m, n, c0, w] {
      if (ci->grad.empty() || !ai->tape) return;
      ensure_grad(ai.get());
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < w; ++j)
          ai->grad[static_cast<size_t>(i) * n + c0 + j] += ci->grad[static_cast<size_t>(i) * w + j];
    });
  }
  return c;
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no parts");
  int n = parts[0].cols();
  int m = 0;
  for (const Tensor& p : parts) {
    if (p.cols() != n) {
      throw ShapeError("concat_rows: column widths differ, " + shape_to_string(parts[0].shape()) + " vs " +
                       shape_to_string(p.shape()));
    }
    m += p.rows();
  }
  Tensor c = Tensor::zeros({m, n});
  int64_t off = 0;
  for (const Tensor& p : parts) {
    for (int64_t i = 0; i < p.size(); ++i) c[off + i] = p[i];
    off += p.size();
  }
  Tape* tape = nullptr;
  for (const Tensor& p : parts) {
    if (!p.tape()) continue;
    if (tape && tape != p.tape()) throw NumericError("operands were recorded on different tapes");
    tape = p.tape();
  }
  if (live(tape)) {
    attach(c, tape);
    auto ci = c.impl();
    std::vector<std::shared_ptr<TensorImpl>> impls;
    impls.reserve(parts.size());
    for (const Tensor& p : parts) impls.push_back(p.impl());
    tape->record([ci, impls = std::move(impls)] {
      if (ci->grad.empty()) return;
      size_t off = 0;
      for (const auto& pi : impls) {
        if (pi->tape) pi->accumulate_grad(ci->grad.data() + off, pi->data.size());
        off += pi->data.size();
      }
    });
  }
  return c;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no parts");
  int m = parts[0].rows();
  int n = 0;
  for (const Tensor& p : parts) {
    if (p.rows() != m) {
      throw ShapeError("concat_cols: row counts differ, " + shape_to_string(parts[0].shape()) + " vs " +
                       shape_to_string(p.shape()));
    }
    n += p.cols();
  }
  Tensor c = Tensor::zeros({m, n});
  int off = 0;
  for (const Tensor& p : parts) {
    int w = p.cols();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < w; ++j) c[static_cast<int64_t>(i) * n + off + j] = p[static_cast<int64_t>(i) * w + j];
    off += w;
  }
  Tape* tape = nullptr;
  for (const Tensor& p : parts) {
    if (!p.tape()) continue;
    if (tape && tape != p.tape()) throw NumericError("operands were recorded on different tapes");
    tape = p.tape();
  }
  if (live(tape)) {
    attach(c, tape);
    auto ci = c.impl();
    std::vector<std::shared_ptr<TensorImpl>> impls;
    std::vector<int> widths;
    for (const Tensor& p : parts) {
      impls.push_back(p.impl());
      widths.push_back(p.cols());
    }
    tape->record([ci, impls = std::move(impls), widths = std::move(widths), m, n] {
      if (ci->grad.empty()) return;
      int off = 0;
      for (size_t pi = 0; pi < impls.size(); ++pi) {
        int w = widths[pi];
        if (impls[pi]->tape) {
          ensure_grad(impls[pi].get());
          for (int i = 0; i < m; ++i)
            for (int j = 0; j < w; ++j)
              impls[pi]->grad[static_cast<size_t>(i) * w + j] += ci->grad[static_cast<size_t>(i) * n + off + j];
        }
        off += w;
      }
    });
  }
  return c;
}

Tensor reshape(const Tensor& a, std::vector<int> shape) {
  int64_t n = 1;
  for (int d : shape) n *= d;
  if (shape.empty() || n != a.size()) {
    throw ShapeError("reshape: " + shape_to_string(a.shape()) + " has " + std::to_string(a.size()) +
                     " elements, target " + shape_to_string(shape) + " has " + std::to_string(n));
  }
  Tensor c = Tensor::from(std::move(shape), a.data());
  Tape* tape = joint_tape({&a});
  if (live(tape)) {
    attach(c, tape);
    auto ai = a.impl(), ci = c.impl();
    tape->record([ai, ci] {
      if (ci->grad.empty() || !ai->tape) return;
      ai->accumulate_grad(ci->grad.data(), ci->grad.size());
    });
  }
  return c;
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (int64_t i = 0; i < a.size(); ++i) s += a[i];
  Tensor c = Tensor::scalar(s);
  Tape* tape = joint_tape({&a});
  if (live(tape)) {
    attach(c, tape);
    auto ai = a.impl(), ci = c.impl();
    tape->record([ai, ci] {
      if (ci->grad.empty() || !ai->tape) return;
      ensure_grad(ai.get());
      for (double& g : ai->grad) g += ci->grad[0];
    });
  }
  return c;
}

Tensor mean(const Tensor& a) {
  double s = 0.0;
  for (int64_t i = 0; i < a.size(); ++i) s += a[i];
  double inv = 1.0 / static_cast<double>(a.size());
  Tensor c = Tensor::scalar(s * inv);
  Tape* tape = joint_tape({&a});
  if (live(tape)) {
    attach(c, tape);
    auto ai = a.impl(), ci = c.impl();
    tape->record([ai, ci, inv] {
      if (ci->grad.empty() || !ai->tape) return;
      ensure_grad(ai.get());
      for (double& g : ai->grad) g += ci->grad[0] * inv;
    });
  }
  return c;
}

}  // namespace attnlab
