#pragma once

#include <vector>

#include "attnlab/init.hpp"
#include "attnlab/ops.hpp"
#include "attnlab/rng.hpp"
#include "attnlab/tensor.hpp"

namespace attnlab {

struct AttentionConfig {
  int d_model = 64;
  int n_heads = 1;
  int n_keys = 10;
  int n_queries = 10;

  int d_k() const { return d_model / n_heads; }
  void validate() const;
};

// W_q, W_k, W_v, each d x d. Heads use column slices.
struct ProjectionSet {
  Tensor w_q, w_k, w_v;

  // tape == nullptr makes plain constants (analysis use); with a tape the
  // matrices are trainable parameters.
  static ProjectionSet init_orthogonal(int d, RngStream& rng, Tape* tape = nullptr);
  static ProjectionSet init_gaussian(int d, double stddev, RngStream& rng, Tape* tape = nullptr);
};

// Scalar bias f: one hidden ReLU layer, applied entrywise to the offset
// matrix at face value. Initial offsets are stored pre-divided by n so the
// MLP sees values of order one; offsets produced by g keep their own scale.
struct BiasMlp {
  Tensor w1, b1, w2, b2;  // (1,h), (h), (h,1), (1)

  static BiasMlp init(int hidden, RngStream& rng, Tape* tape);
  static BiasMlp zeros(int hidden);
  Tensor apply(const Tensor& p) const;
};

// Offset matrix plus the parameters that bias and update it. One state is
// carried per layer; heads share P but apply their own BiasMlp.
struct RelationalState {
  Tensor p;    // (m, n), layer 0 holds p_ij = (j - i) / n
  BiasMlp f;
  Tensor g_w;  // (d_model, n): linear map from attention output to next P
  int layer_index = 0;

  static RelationalState init(int m, int n, int d_model, int f_hidden, RngStream& rng, Tape* tape);
  static Tensor initial_offsets(int m, int n);
};

struct QueryEmbeddings {
  Tensor m;             // (n_queries, d)
  std::vector<int> pi;  // size n_queries, values into the value sequence
};

struct AttentionResult {
  Tensor output;
  Tensor weights;
};

struct IndirectResult {
  Tensor output;
  Tensor weights;
  RelationalState new_state;
};

// Self-attention: queries, keys and values all from x (n, d).
AttentionResult standard_attention(const Tensor& x, const ProjectionSet& proj);

// Queries from one sequence, keys and values from the other.
AttentionResult cross_attention(const Tensor& queries_from, const Tensor& kv_from, const ProjectionSet& proj);

// Keys from one sequence, values from another of the same length; plain
// softmax routing with no positional repair.
AttentionResult naive_misaligned_attention(const Tensor& x_keys, const Tensor& y_values, const Tensor& queries,
                                           const ProjectionSet& proj);

// q_i = m_i + y_{pi(i)}
Tensor build_queries(const QueryEmbeddings& emb, const Tensor& y);

// (q_i . k_j + f(P_ij)) / sqrt(d_k) for projected Q (m, d_k), K (n, d_k).
Tensor indirect_scores(const Tensor& q, const Tensor& k, const RelationalState& state);

// P^{l+1} row i = g(o_i): pure linear map, so zero output maps to zero offsets.
Tensor update_offsets(const Tensor& output, const RelationalState& state);

IndirectResult indirect_attention(const Tensor& x_keys, const Tensor& y_values, const QueryEmbeddings& emb,
                                  const RelationalState& state, const ProjectionSet& proj);

enum class Variant { standard, cross, naive_misaligned, indirect };

struct MultiHeadResult {
  Tensor output;
  std::vector<Tensor> head_weights;
  RelationalState new_state;  // meaningful for indirect only
};

// Splits the d x d projections into H column slices of width d/H, runs the
// variant per head (indirect heads get their own bias MLP but share P),
// concatenates and applies w_o. For indirect, x_keys is the key sequence and
// y_values the value sequence; for standard both must alias the same data;
// for cross, x_keys carries the query-side sequence and y_values the shared
// key/value sequence.
MultiHeadResult multi_head(Variant variant, const Tensor& x_keys, const Tensor& y_values,
                           const QueryEmbeddings* emb, const RelationalState* state,
                           const std::vector<BiasMlp>* f_heads, const ProjectionSet& proj, const Tensor& w_o,
                           int n_heads);

}  // namespace attnlab
