#include "attnlab/attention.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace attnlab {

namespace {

Tensor make_tensor(std::vector<int> shape, std::vector<double> data, Tape* tape) {
  if (tape) return Tensor::param(std::move(shape), std::move(data), *tape);
  return Tensor::from(std::move(shape), std::move(data));
}

AttentionResult attend(const Tensor& q, const Tensor& k, const Tensor& v) {
  Tensor scores = scale(matmul_nt(q, k), 1.0 / std::sqrt(static_cast<double>(q.cols())));
  Tensor weights = softmax_rows(scores);
  return {matmul(weights, v), weights};
}

}  // namespace

void AttentionConfig::validate() const {
  if (d_model <= 0 || n_heads <= 0 || n_keys <= 0 || n_queries <= 0) {
    throw ShapeError("AttentionConfig: all dimensions must be positive");
  }
  if (d_model % n_heads != 0) {
    throw ShapeError("AttentionConfig: n_heads " + std::to_string(n_heads) + " does not divide d_model " +
                     std::to_string(d_model));
  }
  if (n_queries > n_keys) {
    throw ShapeError("AttentionConfig: n_queries " + std::to_string(n_queries) + " exceeds n_keys " +
                     std::to_string(n_keys));
  }
}

ProjectionSet ProjectionSet::init_orthogonal(int d, RngStream& rng, Tape* tape) {
  ProjectionSet p;
  p.w_q = make_tensor({d, d}, orthogonal(d, rng), tape);
  p.w_k = make_tensor({d, d}, orthogonal(d, rng), tape);
  p.w_v = make_tensor({d, d}, orthogonal(d, rng), tape);
  return p;
}

ProjectionSet ProjectionSet::init_gaussian(int d, double stddev, RngStream& rng, Tape* tape) {
  ProjectionSet p;
  p.w_q = make_tensor({d, d}, gaussian(d * d, stddev, rng), tape);
  p.w_k = make_tensor({d, d}, gaussian(d * d, stddev, rng), tape);
  p.w_v = make_tensor({d, d}, gaussian(d * d, stddev, rng), tape);
  return p;
}

BiasMlp BiasMlp::init(int hidden, RngStream& rng, Tape* tape) {
  BiasMlp f;
  f.w1 = make_tensor({1, hidden}, gaussian(hidden, 1.0, rng), tape);
  // spread the ReLU kinks over the offset range instead of stacking them at 0
  f.b1 = make_tensor({hidden}, gaussian(hidden, 0.5, rng), tape);
  // small but nonzero so hidden units receive gradient from the first step
  f.w2 = make_tensor({hidden, 1}, gaussian(hidden, 0.1, rng), tape);
  f.b2 = make_tensor({1}, {0.0}, tape);
  return f;
}

BiasMlp BiasMlp::zeros(int hidden) {
  BiasMlp f;
  f.w1 = Tensor::zeros({1, hidden});
  f.b1 = Tensor::zeros({hidden});
  f.w2 = Tensor::zeros({hidden, 1});
  f.b2 = Tensor::zeros({1});
  return f;
}

Tensor BiasMlp::apply(const Tensor& p) const {
  int m = p.rows(), n = p.cols();
  Tensor flat = reshape(p, {m * n, 1});
  Tensor hidden = relu(add_row_broadcast(matmul(flat, w1), b1));
  Tensor out = add_row_broadcast(matmul(hidden, w2), b2);
  return reshape(out, {m, n});
}

Tensor RelationalState::initial_offsets(int m, int n) {
  Tensor p = Tensor::zeros({m, n});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) p.at(i, j) = static_cast<double>(j - i) / n;
  return p;
}

RelationalState RelationalState::init(int m, int n, int d_model, int f_hidden, RngStream& rng, Tape* tape) {
  RelationalState s;
  s.p = initial_offsets(m, n);
  s.f = BiasMlp::init(f_hidden, rng, tape);
  s.g_w = make_tensor({d_model, n}, gaussian(d_model * n, 1.0 / std::sqrt(static_cast<double>(d_model)), rng), tape);
  s.layer_index = 0;
  return s;
}

AttentionResult standard_attention(const Tensor& x, const ProjectionSet& proj) {
  Tensor q = matmul(x, proj.w_q);
  Tensor k = matmul(x, proj.w_k);
  Tensor v = matmul(x, proj.w_v);
  return attend(q, k, v);
}

AttentionResult cross_attention(const Tensor& queries_from, const Tensor& kv_from, const ProjectionSet& proj) {
  Tensor q = matmul(queries_from, proj.w_q);
  Tensor k = matmul(kv_from, proj.w_k);
  Tensor v = matmul(kv_from, proj.w_v);
  return attend(q, k, v);
}

AttentionResult naive_misaligned_attention(const Tensor& x_keys, const Tensor& y_values, const Tensor& queries,
                                           const ProjectionSet& proj) {
  if (x_keys.rows() != y_values.rows()) {
    throw ShapeError("naive_misaligned_attention: key sequence length " + std::to_string(x_keys.rows()) +
                     " differs from value sequence length " + std::to_string(y_values.rows()));
  }
  Tensor q = matmul(queries, proj.w_q);
  Tensor k = matmul(x_keys, proj.w_k);
  Tensor v = matmul(y_values, proj.w_v);
  return attend(q, k, v);
}

Tensor build_queries(const QueryEmbeddings& emb, const Tensor& y) {
  return add(emb.m, gather_rows(y, emb.pi));
}

Tensor indirect_scores(const Tensor& q, const Tensor& k, const RelationalState& state) {
  int m = q.rows(), n = k.rows();
  if (state.p.rows() != m || state.p.cols() != n) {
    throw ShapeError("indirect_scores: offset matrix " + shape_to_string(state.p.shape()) + " does not match " +
                     std::to_string(m) + " queries x " + std::to_string(n) + " keys");
  }
  Tensor bias = state.f.apply(state.p);
  return scale(add(matmul_nt(q, k), bias), 1.0 / std::sqrt(static_cast<double>(q.cols())));
}

Tensor update_offsets(const Tensor& output, const RelationalState& state) {
  return matmul(output, state.g_w);
}

IndirectResult indirect_attention(const Tensor& x_keys, const Tensor& y_values, const QueryEmbeddings& emb,
                                  const RelationalState& state, const ProjectionSet& proj) {
  Tensor q = matmul(build_queries(emb, y_values), proj.w_q);
  Tensor k = matmul(x_keys, proj.w_k);
  Tensor v = matmul(y_values, proj.w_v);
  Tensor weights = softmax_rows(indirect_scores(q, k, state));
  Tensor output = matmul(weights, v);
  RelationalState next = state;
  next.p = update_offsets(output, state);
  next.layer_index = state.layer_index + 1;
  return {output, weights, next};
}

MultiHeadResult multi_head(Variant variant, const Tensor& x_keys, const Tensor& y_values,
                           const QueryEmbeddings* emb, const RelationalState* state,
                           const std::vector<BiasMlp>* f_heads, const ProjectionSet& proj, const Tensor& w_o,
                           int n_heads) {
  int d = proj.w_q.dim(1);
  if (n_heads <= 0 || d % n_heads != 0) {
    throw ShapeError("multi_head: " + std::to_string(n_heads) + " heads do not divide width " + std::to_string(d));
  }
  bool indirect = variant == Variant::indirect;
  bool needs_queries = indirect || variant == Variant::naive_misaligned;
  if (needs_queries && !emb) throw std::invalid_argument("multi_head: this variant needs query embeddings");
  if (indirect) {
    if (!state) throw std::invalid_argument("multi_head: indirect variant needs a RelationalState");
    if (!f_heads || static_cast<int>(f_heads->size()) != n_heads) {
      throw std::invalid_argument("multi_head: indirect variant needs one BiasMlp per head");
    }
  }

  Tensor queries_raw;
  switch (variant) {
    case Variant::standard:
    case Variant::cross:
      queries_raw = x_keys;
      break;
    case Variant::naive_misaligned:
    case Variant::indirect:
      queries_raw = build_queries(*emb, y_values);
      break;
  }
  const Tensor& key_src = variant == Variant::cross ? y_values : x_keys;
  if (variant == Variant::naive_misaligned && x_keys.rows() != y_values.rows()) {
    throw ShapeError("multi_head: key sequence length " + std::to_string(x_keys.rows()) +
                     " differs from value sequence length " + std::to_string(y_values.rows()));
  }

  int dh = d / n_heads;
  double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Tensor> outputs, weights;
  outputs.reserve(static_cast<size_t>(n_heads));
  weights.reserve(static_cast<size_t>(n_heads));
  for (int h = 0; h < n_heads; ++h) {
    int c0 = h * dh, c1 = (h + 1) * dh;
    Tensor q = matmul(queries_raw, col_slice(proj.w_q, c0, c1));
    Tensor k = matmul(key_src, col_slice(proj.w_k, c0, c1));
    Tensor v = matmul(y_values, col_slice(proj.w_v, c0, c1));
    Tensor scores = matmul_nt(q, k);
    if (indirect) scores = add(scores, (*f_heads)[static_cast<size_t>(h)].apply(state->p));
    Tensor a = softmax_rows(scale(scores, inv_sqrt));
    outputs.push_back(matmul(a, v));
    weights.push_back(a);
  }
  MultiHeadResult res;
  res.output = matmul(concat_cols(outputs), w_o);
  res.head_weights = std::move(weights);
  if (indirect) {
    res.new_state = *state;
    res.new_state.p = update_offsets(res.output, *state);
    res.new_state.layer_index = state->layer_index + 1;
  }
  return res;
}

}  // namespace attnlab
