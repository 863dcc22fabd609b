#include "attnlab/attention.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "grad_check.hpp"

using namespace attnlab;
using attnlab::testutil::grad_check;
using attnlab::testutil::uniform_data;

namespace {

Tensor random_tokens(int n, int d, RngStream& rng) { return Tensor::from({n, d}, uniform_data(n * d, rng)); }

// Plain-double re-derivation of softmax((q kT + bias)/sqrt(dk)) v.
struct ScalarOracle {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> output;
};

ScalarOracle oracle_attend(const Tensor& q, const Tensor& k, const Tensor& v,
                           const std::vector<std::vector<double>>* bias = nullptr) {
  int m = q.rows(), n = k.rows(), dk = q.cols(), dv = v.cols();
  ScalarOracle res;
  res.weights.assign(m, std::vector<double>(n, 0.0));
  res.output.assign(m, std::vector<double>(dv, 0.0));
  for (int i = 0; i < m; ++i) {
    std::vector<double> logits(n, 0.0);
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int t = 0; t < dk; ++t) s += q.at(i, t) * k.at(j, t);
      if (bias) s += (*bias)[i][j];
      logits[j] = s / std::sqrt(static_cast<double>(dk));
    }
    double mx = logits[0];
    for (double l : logits) mx = std::max(mx, l);
    double denom = 0.0;
    for (int j = 0; j < n; ++j) denom += std::exp(logits[j] - mx);
    for (int j = 0; j < n; ++j) res.weights[i][j] = std::exp(logits[j] - mx) / denom;
    for (int j = 0; j < n; ++j)
      for (int t = 0; t < dv; ++t) res.output[i][t] += res.weights[i][j] * v.at(j, t);
  }
  return res;
}

double mlp_scalar(const BiasMlp& f, double x) {
  double out = f.b2[0];
  for (int h = 0; h < f.w1.cols(); ++h) {
    double a = f.w1[h] * x + f.b1[h];
    if (a > 0.0) out += f.w2[h] * a;
  }
  return out;
}

}  // namespace

TEST_CASE("attention config validation") {
  AttentionConfig cfg;
  cfg.d_model = 64;
  cfg.n_heads = 4;
  cfg.n_keys = 10;
  cfg.n_queries = 10;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.d_k() == 16);
  cfg.n_heads = 3;
  CHECK_THROWS_AS(cfg.validate(), ShapeError);
  cfg.n_heads = 4;
  cfg.n_queries = 11;
  CHECK_THROWS_AS(cfg.validate(), ShapeError);
}

TEST_CASE("orthogonal projection sets satisfy the gram identity") {
  RngStream rng(1, 0);
  ProjectionSet proj = ProjectionSet::init_orthogonal(16, rng);
  for (const Tensor* w : {&proj.w_q, &proj.w_k, &proj.w_v}) {
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j) {
        double s = detail::dot(w->data().data() + i * 16, w->data().data() + j * 16, 16);
        CHECK(s == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-8));
      }
  }
}

TEST_CASE("standard attention with one key copies the projected value") {
  RngStream rng(2, 0);
  Tensor x = random_tokens(1, 8, rng);
  ProjectionSet proj = ProjectionSet::init_orthogonal(8, rng);
  AttentionResult r = standard_attention(x, proj);
  CHECK(r.weights.item() == 1.0);
  Tensor v = matmul(x, proj.w_v);
  for (int64_t i = 0; i < v.size(); ++i) CHECK(r.output[i] == doctest::Approx(v[i]).epsilon(1e-14));
}

TEST_CASE("identical tokens spread weight uniformly") {
  RngStream rng(3, 0);
  std::vector<double> row = uniform_data(8, rng);
  std::vector<double> two = row;
  two.insert(two.end(), row.begin(), row.end());
  Tensor x = Tensor::from({2, 8}, two);
  ProjectionSet proj = ProjectionSet::init_orthogonal(8, rng);
  AttentionResult r = standard_attention(x, proj);
  for (int64_t i = 0; i < r.weights.size(); ++i) CHECK(r.weights[i] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("standard attention matches the scalar oracle") {
  RngStream rng(4, 0);
  Tensor x = random_tokens(2, 6, rng);
  ProjectionSet proj = ProjectionSet::init_gaussian(6, 0.7, rng);
  AttentionResult r = standard_attention(x, proj);
  ScalarOracle o = oracle_attend(matmul(x, proj.w_q), matmul(x, proj.w_k), matmul(x, proj.w_v));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(r.weights.at(i, j) == doctest::Approx(o.weights[i][j]).epsilon(1e-12));
  for (int i = 0; i < 2; ++i)
    for (int t = 0; t < 6; ++t) CHECK(r.output.at(i, t) == doctest::Approx(o.output[i][t]).epsilon(1e-12));
}

TEST_CASE("naive misaligned attention") {
  RngStream rng(5, 0);
  Tensor x = random_tokens(3, 6, rng);
  ProjectionSet proj = ProjectionSet::init_orthogonal(6, rng);

  SUBCASE("aligned values reduce to standard attention bit for bit") {
    AttentionResult naive = naive_misaligned_attention(x, x, x, proj);
    AttentionResult std_r = standard_attention(x, proj);
    for (int64_t i = 0; i < naive.output.size(); ++i) CHECK(naive.output[i] == std_r.output[i]);
    for (int64_t i = 0; i < naive.weights.size(); ++i) CHECK(naive.weights[i] == std_r.weights[i]);
  }
  SUBCASE("single key returns the projected value regardless of key content") {
    Tensor keys = random_tokens(1, 6, rng);
    Tensor values = random_tokens(1, 6, rng);
    AttentionResult r = naive_misaligned_attention(keys, values, random_tokens(1, 6, rng), proj);
    Tensor v = matmul(values, proj.w_v);
    for (int64_t i = 0; i < v.size(); ++i) CHECK(r.output[i] == doctest::Approx(v[i]).epsilon(1e-14));
  }
  SUBCASE("random case matches the loop oracle") {
    Tensor values = random_tokens(3, 6, rng);
    Tensor queries = random_tokens(2, 6, rng);
    AttentionResult r = naive_misaligned_attention(x, values, queries, proj);
    ScalarOracle o = oracle_attend(matmul(queries, proj.w_q), matmul(x, proj.w_k), matmul(values, proj.w_v));
    for (int i = 0; i < 2; ++i)
      for (int t = 0; t < 6; ++t) CHECK(r.output.at(i, t) == doctest::Approx(o.output[i][t]).epsilon(1e-12));
  }
  SUBCASE("length mismatch is rejected") {
    CHECK_THROWS_AS(naive_misaligned_attention(x, random_tokens(2, 6, rng), x, proj), ShapeError);
  }
}

TEST_CASE("cross attention routes queries and keys from different sequences") {
  RngStream rng(6, 0);
  Tensor a = random_tokens(2, 6, rng);
  Tensor b = random_tokens(4, 6, rng);
  ProjectionSet proj = ProjectionSet::init_gaussian(6, 0.5, rng);
  AttentionResult r = cross_attention(a, b, proj);
  REQUIRE(r.weights.shape() == std::vector<int>{2, 4});
  ScalarOracle o = oracle_attend(matmul(a, proj.w_q), matmul(b, proj.w_k), matmul(b, proj.w_v));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 4; ++j) CHECK(r.weights.at(i, j) == doctest::Approx(o.weights[i][j]).epsilon(1e-12));
  for (int i = 0; i < 2; ++i)
    for (int t = 0; t < 6; ++t) CHECK(r.output.at(i, t) == doctest::Approx(o.output[i][t]).epsilon(1e-12));
}

TEST_CASE("build_queries composes embeddings with gathered value features") {
  RngStream rng(7, 0);
  Tensor y = random_tokens(4, 5, rng);
  QueryEmbeddings emb;
  emb.m = random_tokens(3, 5, rng);
  emb.pi = {2, 0, 3};

  Tensor q = build_queries(emb, y);
  for (int i = 0; i < 3; ++i)
    for (int t = 0; t < 5; ++t) CHECK(q.at(i, t) == emb.m.at(i, t) + y.at(emb.pi[static_cast<size_t>(i)], t));

  QueryEmbeddings zero_m;
  zero_m.m = Tensor::zeros({3, 5});
  zero_m.pi = {2, 0, 3};
  Tensor q0 = build_queries(zero_m, y);
  for (int i = 0; i < 3; ++i)
    for (int t = 0; t < 5; ++t) CHECK(q0.at(i, t) == y.at(zero_m.pi[static_cast<size_t>(i)], t));

  Tensor qm = build_queries(emb, Tensor::zeros({4, 5}));
  for (int64_t i = 0; i < qm.size(); ++i) CHECK(qm[i] == emb.m[i]);

  emb.pi = {0, 4, 1};
  CHECK_THROWS_AS(build_queries(emb, y), IndexError);
}

TEST_CASE("initial offsets are (j - i) / n") {
  Tensor p = RelationalState::initial_offsets(3, 5);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 5; ++j) CHECK(p.at(i, j) == static_cast<double>(j - i) / 5.0);
}

TEST_CASE("indirect scores") {
  RngStream rng(8, 0);
  const int d = 6, m = 3, n = 4;
  Tensor q = random_tokens(m, d, rng);
  Tensor k = random_tokens(n, d, rng);
  RelationalState state = RelationalState::init(m, n, d, 4, rng, nullptr);

  SUBCASE("zero bias MLP reduces to plain scaled scores") {
    state.f = BiasMlp::zeros(4);
    Tensor s = indirect_scores(q, k, state);
    Tensor plain = scale(matmul_nt(q, k), 1.0 / std::sqrt(6.0));
    for (int64_t i = 0; i < s.size(); ++i) CHECK(s[i] == doctest::Approx(plain[i]).epsilon(1e-14));
  }
  SUBCASE("zero queries leave pure positional scores") {
    Tensor s = indirect_scores(Tensor::zeros({m, d}), k, state);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        double expect = mlp_scalar(state.f, state.p.at(i, j)) / std::sqrt(6.0);
        CHECK(s.at(i, j) == doctest::Approx(expect).epsilon(1e-12));
      }
  }
  SUBCASE("hand-set 2x2 case matches the scalar recomputation") {
    BiasMlp f;
    f.w1 = Tensor::from({1, 2}, {1.0, -1.0});
    f.b1 = Tensor::from({2}, {0.5, 0.25});
    f.w2 = Tensor::from({2, 1}, {2.0, -1.0});
    f.b2 = Tensor::from({1}, {0.3});
    RelationalState st;
    st.p = RelationalState::initial_offsets(2, 2);
    st.f = f;
    Tensor q2 = random_tokens(2, d, rng);
    Tensor k2 = random_tokens(2, d, rng);
    Tensor s = indirect_scores(q2, k2, st);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double dotqk = 0.0;
        for (int t = 0; t < d; ++t) dotqk += q2.at(i, t) * k2.at(j, t);
        double expect = (dotqk + mlp_scalar(f, (j - i) / 2.0)) / std::sqrt(6.0);
        CHECK(s.at(i, j) == doctest::Approx(expect).epsilon(1e-12));
      }
  }
  SUBCASE("offset shape mismatch is rejected") {
    RelationalState bad = state;
    bad.p = Tensor::zeros({m, n + 1});
    CHECK_THROWS_AS(indirect_scores(q, k, bad), ShapeError);
  }
}

TEST_CASE("update_offsets is a pure linear map") {
  RngStream rng(9, 0);
  const int d = 5, m = 3, n = 4;
  RelationalState state = RelationalState::init(m, n, d, 4, rng, nullptr);
  Tensor out = random_tokens(m, d, rng);

  Tensor p1 = update_offsets(out, state);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double expect = 0.0;
      for (int t = 0; t < d; ++t) expect += out.at(i, t) * state.g_w.at(t, j);
      CHECK(p1.at(i, j) == doctest::Approx(expect).epsilon(1e-12));
    }

  RelationalState zero_g = state;
  zero_g.g_w = Tensor::zeros({d, n});
  Tensor pz = update_offsets(out, zero_g);
  for (int64_t i = 0; i < pz.size(); ++i) CHECK(pz[i] == 0.0);

  Tensor p0 = update_offsets(Tensor::zeros({m, d}), state);
  for (int64_t i = 0; i < p0.size(); ++i) CHECK(p0[i] == 0.0);
}

TEST_CASE("indirect attention") {
  RngStream rng(10, 0);
  const int d = 6, n = 4;
  Tensor x = random_tokens(n, d, rng);
  ProjectionSet proj = ProjectionSet::init_orthogonal(d, rng);
  QueryEmbeddings emb;
  emb.m = Tensor::zeros({n, d});
  emb.pi = {0, 1, 2, 3};
  RelationalState state = RelationalState::init(n, n, d, 4, rng, nullptr);

  SUBCASE("reduction identity against standard attention") {
    state.f = BiasMlp::zeros(4);
    IndirectResult r = indirect_attention(x, x, emb, state, proj);
    AttentionResult s = standard_attention(x, proj);
    for (int64_t i = 0; i < r.output.size(); ++i) CHECK(r.output[i] == doctest::Approx(s.output[i]).epsilon(1e-10));
    for (int64_t i = 0; i < r.weights.size(); ++i)
      CHECK(r.weights[i] == doctest::Approx(s.weights[i]).epsilon(1e-10));
  }
  SUBCASE("weights rows sum to one and state advances") {
    Tensor y = random_tokens(n, d, rng);
    emb.m = random_tokens(n, d, rng);
    IndirectResult r = indirect_attention(x, y, emb, state, proj);
    CHECK(r.new_state.layer_index == 1);
    REQUIRE(r.new_state.p.shape() == std::vector<int>{n, n});
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) {
        CHECK(r.weights.at(i, j) >= 0.0);
        s += r.weights.at(i, j);
      }
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
    Tensor expect_p = update_offsets(r.output, state);
    for (int64_t i = 0; i < expect_p.size(); ++i) CHECK(r.new_state.p[i] == expect_p[i]);
  }
  SUBCASE("full scalar pipeline oracle on three keys") {
    Tensor keys = random_tokens(3, d, rng);
    Tensor values = random_tokens(3, d, rng);
    QueryEmbeddings e3;
    e3.m = random_tokens(3, d, rng);
    e3.pi = {0, 1, 2};
    RelationalState st = RelationalState::init(3, 3, d, 4, rng, nullptr);
    IndirectResult r = indirect_attention(keys, values, e3, st, proj);

    Tensor q = matmul(build_queries(e3, values), proj.w_q);
    Tensor k = matmul(keys, proj.w_k);
    Tensor v = matmul(values, proj.w_v);
    std::vector<std::vector<double>> bias(3, std::vector<double>(3, 0.0));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) bias[i][j] = mlp_scalar(st.f, st.p.at(i, j));
    ScalarOracle o = oracle_attend(q, k, v, &bias);
    for (int i = 0; i < 3; ++i)
      for (int t = 0; t < d; ++t) CHECK(r.output.at(i, t) == doctest::Approx(o.output[i][t]).epsilon(1e-12));
  }
}

TEST_CASE("logit shift in one row leaves that row's weights unchanged") {
  RngStream rng(11, 0);
  Tensor q = random_tokens(3, 6, rng);
  Tensor k = random_tokens(4, 6, rng);
  RelationalState state = RelationalState::init(3, 4, 6, 4, rng, nullptr);
  Tensor s = indirect_scores(q, k, state);
  Tensor w1 = softmax_rows(s);
  Tensor shifted = Tensor::from(s.shape(), s.data());
  for (int j = 0; j < 4; ++j) shifted.at(1, j) += 17.25;
  Tensor w2 = softmax_rows(shifted);
  for (int j = 0; j < 4; ++j) CHECK(w2.at(1, j) == doctest::Approx(w1.at(1, j)).epsilon(1e-12));
}

TEST_CASE("standard attention is permutation equivariant") {
  RngStream rng(12, 0);
  const int n = 5, d = 8;
  Tensor x = random_tokens(n, d, rng);
  ProjectionSet proj = ProjectionSet::init_gaussian(d, 0.6, rng);
  std::vector<int> perm = {3, 0, 4, 1, 2};
  Tensor xp = gather_rows(x, perm);
  AttentionResult base = standard_attention(x, proj);
  AttentionResult permuted = standard_attention(xp, proj);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < d; ++t)
      CHECK(permuted.output.at(i, t) == doctest::Approx(base.output.at(perm[static_cast<size_t>(i)], t)).epsilon(1e-10));
}

TEST_CASE("multi-head attention") {
  RngStream rng(13, 0);
  const int d = 4, n = 3;
  Tensor x = random_tokens(n, d, rng);
  Tensor y = random_tokens(n, d, rng);
  ProjectionSet proj = ProjectionSet::init_gaussian(d, 0.7, rng);
  QueryEmbeddings emb;
  emb.m = random_tokens(n, d, rng);
  emb.pi = {0, 1, 2};
  RelationalState state = RelationalState::init(n, n, d, 4, rng, nullptr);
  Tensor identity = Tensor::zeros({d, d});
  for (int i = 0; i < d; ++i) identity.at(i, i) = 1.0;

  SUBCASE("one head with identity output projection reduces to the single-head op") {
    std::vector<BiasMlp> fs = {state.f};
    MultiHeadResult r = multi_head(Variant::indirect, x, y, &emb, &state, &fs, proj, identity, 1);
    IndirectResult single = indirect_attention(x, y, emb, state, proj);
    for (int64_t i = 0; i < r.output.size(); ++i) CHECK(r.output[i] == single.output[i]);
    for (int64_t i = 0; i < r.head_weights[0].size(); ++i) CHECK(r.head_weights[0][i] == single.weights[i]);
    for (int64_t i = 0; i < r.new_state.p.size(); ++i) CHECK(r.new_state.p[i] == single.new_state.p[i]);
  }
  SUBCASE("identical head slices produce identical concatenated halves") {
    ProjectionSet tiled = proj;
    for (Tensor* w : {&tiled.w_q, &tiled.w_k, &tiled.w_v}) {
      Tensor half = col_slice(*w, 0, d / 2);
      *w = concat_cols({half, half});
    }
    std::vector<BiasMlp> fs = {state.f, state.f};
    MultiHeadResult r = multi_head(Variant::indirect, x, y, &emb, &state, &fs, tiled, identity, 2);
    for (int i = 0; i < n; ++i)
      for (int t = 0; t < d / 2; ++t) CHECK(r.output.at(i, t) == r.output.at(i, t + d / 2));
  }
  SUBCASE("two heads match the per-head loop oracle") {
    RngStream frng(14, 0);
    std::vector<BiasMlp> fs = {BiasMlp::init(4, frng, nullptr), BiasMlp::init(4, frng, nullptr)};
    Tensor w_o = random_tokens(d, d, rng);
    MultiHeadResult r = multi_head(Variant::indirect, x, y, &emb, &state, &fs, proj, w_o, 2);

    Tensor queries = build_queries(emb, y);
    std::vector<std::vector<double>> concat(n, std::vector<double>(d, 0.0));
    for (int h = 0; h < 2; ++h) {
      Tensor q = matmul(queries, col_slice(proj.w_q, h * 2, h * 2 + 2));
      Tensor k = matmul(x, col_slice(proj.w_k, h * 2, h * 2 + 2));
      Tensor v = matmul(y, col_slice(proj.w_v, h * 2, h * 2 + 2));
      std::vector<std::vector<double>> bias(n, std::vector<double>(n, 0.0));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) bias[i][j] = mlp_scalar(fs[static_cast<size_t>(h)], state.p.at(i, j));
      ScalarOracle o = oracle_attend(q, k, v, &bias);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          CHECK(r.head_weights[static_cast<size_t>(h)].at(i, j) == doctest::Approx(o.weights[i][j]).epsilon(1e-12));
      for (int i = 0; i < n; ++i)
        for (int t = 0; t < 2; ++t) concat[static_cast<size_t>(i)][static_cast<size_t>(h * 2 + t)] = o.output[i][t];
    }
    for (int i = 0; i < n; ++i)
      for (int t = 0; t < d; ++t) {
        double expect = 0.0;
        for (int u = 0; u < d; ++u) expect += concat[static_cast<size_t>(i)][static_cast<size_t>(u)] * w_o.at(u, t);
        CHECK(r.output.at(i, t) == doctest::Approx(expect).epsilon(1e-12));
      }
  }
  SUBCASE("head count must divide the width") {
    std::vector<BiasMlp> fs = {state.f, state.f, state.f};
    CHECK_THROWS_AS(multi_head(Variant::indirect, x, y, &emb, &state, &fs, proj, identity, 3), ShapeError);
  }
  SUBCASE("missing pieces are reported") {
    std::vector<BiasMlp> fs = {state.f};
    CHECK_THROWS_AS(multi_head(Variant::indirect, x, y, nullptr, &state, &fs, proj, identity, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(multi_head(Variant::indirect, x, y, &emb, nullptr, &fs, proj, identity, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(multi_head(Variant::indirect, x, y, &emb, &state, nullptr, proj, identity, 1),
                    std::invalid_argument);
  }
}

TEST_CASE("gradients flow through the full indirect pipeline") {
  for (uint64_t seed : {21u, 22u}) {
    RngStream rng(seed, 0);
    Tape tape;
    const int d = 4, n = 3, heads = 2;

    Tensor x = random_tokens(n, d, rng);
    Tensor y = random_tokens(n, d, rng);
    ProjectionSet proj = ProjectionSet::init_gaussian(d, 0.6, rng, &tape);
    Tensor w_o = Tensor::param({d, d}, uniform_data(d * d, rng, -0.5, 0.5), tape);
    QueryEmbeddings emb;
    emb.m = Tensor::param({n, d}, uniform_data(n * d, rng, -0.5, 0.5), tape);
    emb.pi = {0, 1, 2};
    RelationalState state = RelationalState::init(n, n, d, 3, rng, &tape);
    std::vector<BiasMlp> fs1 = {BiasMlp::init(3, rng, &tape), BiasMlp::init(3, rng, &tape)};
    std::vector<BiasMlp> fs2 = {BiasMlp::init(3, rng, &tape), BiasMlp::init(3, rng, &tape)};

    auto build = [&] {
      MultiHeadResult l1 = multi_head(Variant::indirect, x, y, &emb, &state, &fs1, proj, w_o, heads);
      MultiHeadResult l2 = multi_head(Variant::indirect, x, l1.output, &emb, &l1.new_state, &fs2, proj, w_o, heads);
      RngStream wrng(seed, 77);
      Tensor w = Tensor::from({n, d}, uniform_data(n * d, wrng, 0.2, 1.0));
      return sum(mul(l2.output, w));
    };

    std::vector<Tensor> params = {proj.w_q, proj.w_k, proj.w_v, w_o,      emb.m,
                                  state.g_w, fs1[0].w1, fs1[0].b1, fs1[0].w2, fs1[0].b2,
                                  fs1[1].w1,  fs2[0].w1, fs2[0].b1, fs2[0].w2, fs2[1].w2};
    auto res = grad_check(tape, build, params);
    CHECK(res.max_rel_err < 1e-4);

    // every parameter participates: the layer-1 state's g feeds layer 2
    tape.reset();
    Tensor loss = build();
    tape.backward(loss);
    CHECK(state.g_w.has_grad());
    double gnorm = 0.0;
    for (double g : state.g_w.grad()) gnorm += g * g;
    CHECK(gnorm > 0.0);
  }
}
