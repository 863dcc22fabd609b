#include "attnlab/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "attnlab/init.hpp"
#include "attnlab/io.hpp"
#include "attnlab/ops.hpp"
#include "attnlab/rng.hpp"

namespace attnlab {

namespace {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::standard: return "standard";
    case Variant::cross: return "cross";
    case Variant::naive_misaligned: return "naive_misaligned";
    case Variant::indirect: return "indirect";
  }
  throw std::invalid_argument("unknown variant");
}

Variant variant_from_name(const std::string& s) {
  if (s == "standard") return Variant::standard;
  if (s == "cross") return Variant::cross;
  if (s == "naive_misaligned") return Variant::naive_misaligned;
  if (s == "indirect") return Variant::indirect;
  throw std::invalid_argument("unknown variant: " + s);
}

const char* task_name(Task t) { return t == Task::sorting ? "sorting" : "retrieval"; }

Task task_from_name(const std::string& s) {
  if (s == "sorting") return Task::sorting;
  if (s == "retrieval") return Task::retrieval;
  throw std::invalid_argument("unknown task: " + s);
}

}  // namespace

KvAssignment assign_kv(Variant variant, Task task) {
  KvAssignment a;
  switch (variant) {
    case Variant::indirect:
    case Variant::naive_misaligned:
      a = {SeqSource::conditioning, SeqSource::content, SeqSource::learned};
      break;
    case Variant::cross:
      // Queries ride the sequence the predictions align with: the target for
      // sorting, the (padded) query for retrieval. Keys and values share the
      // other sequence.
      if (task == Task::sorting)
        a = {SeqSource::conditioning, SeqSource::conditioning, SeqSource::content};
      else
        a = {SeqSource::content, SeqSource::content, SeqSource::conditioning};
      break;
    default:
      throw std::invalid_argument("assign_kv: standard attention has no split assignment");
  }
  validate_assignment(a, variant, task);
  return a;
}

void validate_assignment(const KvAssignment& a, Variant variant, Task task) {
  auto fail = [&](const char* what) {
    throw std::logic_error(std::string("kv assignment swapped or invalid: ") + what);
  };
  if (variant == Variant::indirect || variant == Variant::naive_misaligned) {
    if (a.keys != SeqSource::conditioning) fail("keys must come from the conditioning sequence");
    if (a.values != SeqSource::content) fail("values must come from the content sequence");
    if (a.queries != SeqSource::learned) fail("queries must be learned embeddings");
    return;
  }
  if (variant == Variant::cross) {
    if (a.keys != a.values) fail("cross attention keys and values must share a source");
    if (a.queries == a.keys) fail("cross attention queries must use the other sequence");
    if (a.queries == SeqSource::learned) fail("cross attention has no learned queries");
    const SeqSource want_q = task == Task::sorting ? SeqSource::content : SeqSource::conditioning;
    if (a.queries != want_q) fail("cross attention queries ride the prediction sequence");
    return;
  }
  fail("variant has no assignment");
}

void ModelSpec::validate() const {
  if (variant == Variant::standard)
    throw std::invalid_argument("ModelSpec: standard attention is not a task variant");
  if (n_layers < 1) throw std::invalid_argument("ModelSpec: n_layers must be >= 1");
  if (n_heads < 1) throw std::invalid_argument("ModelSpec: n_heads must be >= 1");
  if (d_model < 1 || d_model % n_heads != 0)
    throw std::invalid_argument("ModelSpec: d_model must be a positive multiple of n_heads");
  if (vocab_size < kAlphabet + 1)
    throw std::invalid_argument("ModelSpec: vocab_size must cover the alphabet and the pad token");
  if (max_len != kSeqLen) throw std::invalid_argument("ModelSpec: max_len must match the task length");
  if (f_hidden < 1) throw std::invalid_argument("ModelSpec: f_hidden must be >= 1");
}

ModelSpec fast_spec(Variant variant, Task task) {
  ModelSpec s;
  s.variant = variant;
  s.task = task;
  s.n_layers = 2;
  s.d_model = 64;
  return s;
}

void TrainConfig::validate() const {
  if (!(lr >= 0.0)) throw std::invalid_argument("TrainConfig: lr must be >= 0");
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (weight_decay < 0.0) throw std::invalid_argument("TrainConfig: weight_decay must be >= 0");
}

std::string TrainLog::to_csv() const {
  CsvWriter w({"epoch", "train_loss", "test_accuracy", "wall_ms"});
  for (const auto& r : rows) {
    w.cell(r.epoch).cell(r.train_loss).cell(r.test_accuracy).cell(r.wall_ms);
    w.end_row();
  }
  return w.str();
}

Batch make_batch(const std::vector<SortingInstance>& pool, const std::vector<int>& idx) {
  Batch b;
  b.size = static_cast<int>(idx.size());
  b.content_ids.reserve(idx.size() * kSeqLen);
  b.cond_ids.reserve(idx.size() * kSeqLen);
  b.labels.reserve(idx.size() * kSeqLen);
  for (int i : idx) {
    const auto& inst = pool.at(static_cast<size_t>(i));
    b.content_ids.insert(b.content_ids.end(), inst.target.begin(), inst.target.end());
    b.cond_ids.insert(b.cond_ids.end(), inst.ordering.begin(), inst.ordering.end());
    b.labels.insert(b.labels.end(), inst.labels.begin(), inst.labels.end());
  }
  return b;
}

Batch make_batch(const std::vector<RetrievalInstance>& pool, const std::vector<int>& idx) {
  Batch b;
  b.size = static_cast<int>(idx.size());
  b.content_ids.reserve(idx.size() * kSeqLen);
  b.cond_ids.reserve(idx.size() * kSeqLen);
  b.labels.reserve(idx.size());
  for (int i : idx) {
    const auto& inst = pool.at(static_cast<size_t>(i));
    b.content_ids.insert(b.content_ids.end(), inst.reference.begin(), inst.reference.end());
    b.cond_ids.insert(b.cond_ids.end(), inst.query.begin(), inst.query.end());
    for (int p = kQueryLen; p < kSeqLen; ++p) b.cond_ids.push_back(kPadToken);
    b.labels.push_back(inst.start);
  }
  return b;
}

Tensor Model::reg(const std::string& name, std::vector<int> shape, std::vector<double> data) {
  Tensor t = Tensor::param(std::move(shape), std::move(data), tape_);
  params_.emplace_back(name, t);
  return t;
}

Model::Model(const ModelSpec& spec, uint64_t seed) : spec_(spec) {
  spec_.validate();
  const int d = spec_.d_model;
  const int n = spec_.max_len;
  RngStream rng(seed, 0xA77);

  embedding_ = reg("embedding", {spec_.vocab_size, d}, gaussian(spec_.vocab_size * d, 0.1, rng));
  pos_content_ = reg("pos_content", {n, d}, gaussian(n * d, 0.1, rng));
  pos_cond_ = reg("pos_cond", {n, d}, gaussian(n * d, 0.1, rng));

  const bool learned_queries = spec_.variant != Variant::cross;
  const bool indirect = spec_.variant == Variant::indirect;
  if (learned_queries) queries_m_ = reg("queries.m", {n, d}, gaussian(n * d, 0.1, rng));
  blocks_.resize(static_cast<size_t>(spec_.n_layers));
  for (int l = 0; l < spec_.n_layers; ++l) {
    Block& blk = blocks_[static_cast<size_t>(l)];
    const std::string p = "layer" + std::to_string(l) + ".";
    blk.w_q = reg(p + "w_q", {d, d}, orthogonal(d, rng));
    blk.w_k = reg(p + "w_k", {d, d}, orthogonal(d, rng));
    blk.w_v = reg(p + "w_v", {d, d}, orthogonal(d, rng));
    auto w_o = orthogonal(d, rng);
    for (double& x : w_o) x *= 0.5;  // keep early residual updates modest
    blk.w_o = reg(p + "w_o", {d, d}, std::move(w_o));
    if (indirect) {
      for (int h = 0; h < spec_.n_heads; ++h) {
        const std::string fp = p + "f" + std::to_string(h) + ".";
        BiasMlp f;
        f.w1 = reg(fp + "w1", {1, spec_.f_hidden}, gaussian(spec_.f_hidden, 1.0, rng));
        f.b1 = reg(fp + "b1", {spec_.f_hidden}, gaussian(spec_.f_hidden, 0.5, rng));
        f.w2 = reg(fp + "w2", {spec_.f_hidden, 1}, gaussian(spec_.f_hidden, 0.1, rng));
        // Row softmax ignores a uniform shift, so an output bias would never
        // receive gradient; keep it a fixed zero instead of a parameter.
        f.b2 = Tensor::zeros({1});
        blk.f_heads.push_back(std::move(f));
      }
      // g produces the next layer's offsets; the last block has no consumer.
      if (l + 1 < spec_.n_layers)
        blk.g_w = reg(p + "g_w", {d, n}, gaussian(d * n, 1.0 / std::sqrt(static_cast<double>(d)), rng));
    }
    const int d_ff = 2 * d;
    blk.ffn_w1 = reg(p + "ffn_w1", {d, d_ff}, gaussian(d * d_ff, std::sqrt(2.0 / d), rng));
    blk.ffn_b1 = reg(p + "ffn_b1", {d_ff}, std::vector<double>(static_cast<size_t>(d_ff), 0.0));
    blk.ffn_w2 = reg(p + "ffn_w2", {d_ff, d}, gaussian(d_ff * d, std::sqrt(1.0 / d_ff), rng));
    blk.ffn_b2 = reg(p + "ffn_b2", {d}, std::vector<double>(static_cast<size_t>(d), 0.0));
    blk.ln1_g = reg(p + "ln1_g", {d}, std::vector<double>(static_cast<size_t>(d), 1.0));
    blk.ln1_b = reg(p + "ln1_b", {d}, std::vector<double>(static_cast<size_t>(d), 0.0));
    blk.ln2_g = reg(p + "ln2_g", {d}, std::vector<double>(static_cast<size_t>(d), 1.0));
    blk.ln2_b = reg(p + "ln2_b", {d}, std::vector<double>(static_cast<size_t>(d), 0.0));
  }

  const int classes = spec_.n_classes();
  head_w_ = reg("head_w", {d, classes}, gaussian(d * classes, 0.02, rng));
  head_b_ = reg("head_b", {classes}, std::vector<double>(static_cast<size_t>(classes), 0.0));
}

Tensor Model::forward(const Batch& batch) {
  if (batch.size < 1) throw std::invalid_argument("forward: empty batch");
  const int B = batch.size;
  const int n = spec_.max_len;
  const int d = spec_.d_model;
  const int H = spec_.n_heads;
  const int dk = d / H;
  if (static_cast<int>(batch.content_ids.size()) != B * n ||
      static_cast<int>(batch.cond_ids.size()) != B * n)
    throw std::invalid_argument("forward: batch id buffers have the wrong length");

  Tensor content = add_tiled(gather_rows(embedding_, batch.content_ids), pos_content_, B);
  Tensor cond = add_tiled(gather_rows(embedding_, batch.cond_ids), pos_cond_, B);

  const bool cross = spec_.variant == Variant::cross;
  const bool indirect = spec_.variant == Variant::indirect;
  // Indirect and naive evolve a learned query stream seeded with the content
  // encoding; keys and values are recomputed each layer from the fixed
  // conditioning and content encodings. Cross evolves the prediction-side
  // stream and takes both keys and values from the other sequence.
  Tensor h, k_src, v_src;
  if (cross) {
    h = spec_.task == Task::retrieval ? cond : content;
    k_src = v_src = spec_.task == Task::retrieval ? content : cond;
  } else {
    // v_src left undefined: values track the evolving stream layer by layer.
    h = add_tiled(content, queries_m_, B);
    k_src = cond;
  }

  // The first layer's offsets are the same j - i matrix for every instance,
  // so its bias is computed once and tiled; later layers carry per-instance
  // offsets produced by g.
  Tensor p;
  const Tensor unit_p = indirect ? RelationalState::initial_offsets(n, n) : Tensor();

  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dk));
  for (Block& blk : blocks_) {
    Tensor q_all = matmul(h, blk.w_q);
    Tensor k_all = matmul(k_src, blk.w_k);
    Tensor v_all = matmul(v_src.defined() ? v_src : h, blk.w_v);

    std::vector<Tensor> head_outs;
    head_outs.reserve(static_cast<size_t>(H));
    for (int hd = 0; hd < H; ++hd) {
      Tensor qh = col_slice(q_all, hd * dk, (hd + 1) * dk);
      Tensor kh = col_slice(k_all, hd * dk, (hd + 1) * dk);
      Tensor vh = col_slice(v_all, hd * dk, (hd + 1) * dk);
      Tensor scores = block_matmul_nt(qh, kh, B);
      if (indirect) {
        BiasMlp& f = blk.f_heads[static_cast<size_t>(hd)];
        scores = p.defined() ? add(scores, f.apply(p))
                             : add_tiled(scores, f.apply(unit_p), B);
      }
      Tensor a = softmax_rows(scale(scores, inv_sqrt_dk));
      head_outs.push_back(block_matmul_nn(a, vh, B));
    }
    Tensor attn = matmul(concat_cols(head_outs), blk.w_o);
    if (indirect && blk.g_w.defined()) p = matmul(attn, blk.g_w);

    h = layer_norm(add(h, attn), blk.ln1_g, blk.ln1_b);
    Tensor ff = relu(add_row_broadcast(matmul(h, blk.ffn_w1), blk.ffn_b1));
    ff = add_row_broadcast(matmul(ff, blk.ffn_w2), blk.ffn_b2);
    h = layer_norm(add(h, ff), blk.ln2_g, blk.ln2_b);
  }

  if (spec_.task == Task::sorting) return add_row_broadcast(matmul(h, head_w_), head_b_);
  std::vector<int> first(static_cast<size_t>(B));
  for (int b = 0; b < B; ++b) first[static_cast<size_t>(b)] = b * n;
  Tensor readout = gather_rows(h, first);
  return add_row_broadcast(matmul(readout, head_w_), head_b_);
}

Tensor Model::loss(const Batch& batch) { return cross_entropy(forward(batch), batch.labels); }

int64_t Model::param_count() const {
  int64_t total = 0;
  for (const auto& [name, t] : params_) total += t.size();
  return total;
}

void Model::zero_grads() {
  for (auto& [name, t] : params_) t.zero_grad();
}

void Model::load_state(const std::vector<std::pair<std::string, std::vector<double>>>& state) {
  if (state.size() != params_.size())
    throw std::invalid_argument("load_state: expected " + std::to_string(params_.size()) +
                                " tensors, got " + std::to_string(state.size()));
  for (size_t i = 0; i < state.size(); ++i) {
    auto& [name, t] = params_[i];
    const auto& [in_name, in_data] = state[i];
    if (in_name != name)
      throw std::invalid_argument("load_state: tensor " + std::to_string(i) + " is " + in_name +
                                  ", expected " + name);
    if (in_data.size() != t.data().size())
      throw std::invalid_argument("load_state: size mismatch for " + name);
    t.data() = in_data;
  }
}

namespace {

template <typename Inst>
double evaluate_impl(Model& model, const std::vector<Inst>& test) {
  if (test.empty()) throw std::invalid_argument("evaluate: empty test set");
  NoGradGuard guard(model.tape());
  const int chunk = 256;
  long correct = 0, total = 0;
  std::vector<int> idx;
  for (size_t s = 0; s < test.size(); s += chunk) {
    idx.clear();
    for (size_t i = s; i < std::min(test.size(), s + chunk); ++i) idx.push_back(static_cast<int>(i));
    Batch b = make_batch(test, idx);
    Tensor logits = model.forward(b);
    const int rows = logits.rows(), cols = logits.cols();
    for (int r = 0; r < rows; ++r) {
      int best = 0;
      for (int c = 1; c < cols; ++c)
        if (logits.at(r, c) > logits.at(r, best)) best = c;
      correct += best == b.labels[static_cast<size_t>(r)];
      ++total;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

struct AdamState {
  std::vector<std::vector<double>> m, v;
  long t = 0;
};

void optimizer_step(Model& model, const TrainConfig& cfg, AdamState& st) {
  auto& params = model.named_params();
  if (st.m.empty()) {
    st.m.resize(params.size());
    st.v.resize(params.size());
    for (size_t i = 0; i < params.size(); ++i) {
      st.m[i].assign(params[i].second.data().size(), 0.0);
      st.v[i].assign(params[i].second.data().size(), 0.0);
    }
  }
  ++st.t;
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(st.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(st.t));
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor t = params[i].second;
    if (!t.has_grad()) continue;
    auto& theta = t.data();
    const auto& g = t.grad();
    if (cfg.optimizer == TrainConfig::Optimizer::sgd) {
      for (size_t j = 0; j < theta.size(); ++j)
        theta[j] -= cfg.lr * (g[j] + cfg.weight_decay * theta[j]);
      continue;
    }
    auto& m = st.m[i];
    auto& v = st.v[i];
    for (size_t j = 0; j < theta.size(); ++j) {
      const double gj = g[j] + cfg.weight_decay * theta[j];
      m[j] = b1 * m[j] + (1.0 - b1) * gj;
      v[j] = b2 * v[j] + (1.0 - b2) * gj * gj;
      theta[j] -= cfg.lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps);
    }
  }
}

template <typename Inst>
TrainLog train_impl(Model& model, const std::vector<Inst>& train_set, const std::vector<Inst>& test_set,
                    const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.empty()) throw std::invalid_argument("train: empty training set");
  const int N = static_cast<int>(train_set.size());
  std::vector<int> order(static_cast<size_t>(N));
  std::iota(order.begin(), order.end(), 0);
  RngStream shuffle(cfg.seed, 0x7EA1);
  AdamState opt;
  TrainLog log;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = N - 1; i > 0; --i) std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(shuffle.uniform_int(i + 1))]);

    double loss_sum = 0.0;
    std::vector<int> idx;
    for (int s = 0; s < N; s += cfg.batch_size) {
      idx.assign(order.begin() + s, order.begin() + std::min(N, s + cfg.batch_size));
      Batch b = make_batch(train_set, idx);
      Tensor batch_loss = model.loss(b);
      const double lv = batch_loss.item();
      if (!std::isfinite(lv))
        throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(s / cfg.batch_size) + " (lr " + format_real(cfg.lr) + ")");
      model.tape().backward(batch_loss);
      optimizer_step(model, cfg, opt);
      model.zero_grads();
      model.tape().reset();
      loss_sum += lv * static_cast<double>(idx.size());
    }

    EpochStats row;
    row.epoch = epoch;
    row.train_loss = loss_sum / static_cast<double>(N);
    row.test_accuracy = evaluate_impl(model, test_set);
    row.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    log.rows.push_back(row);
  }
  return log;
}

}  // namespace

double evaluate(Model& model, const std::vector<SortingInstance>& test) {
  if (model.spec().task != Task::sorting) throw std::invalid_argument("evaluate: model is not a sorting model");
  return evaluate_impl(model, test);
}

double evaluate(Model& model, const std::vector<RetrievalInstance>& test) {
  if (model.spec().task != Task::retrieval) throw std::invalid_argument("evaluate: model is not a retrieval model");
  return evaluate_impl(model, test);
}

TrainLog train(Model& model, const SortingDataset& data, const TrainConfig& cfg) {
  if (model.spec().task != Task::sorting) throw std::invalid_argument("train: model is not a sorting model");
  return train_impl(model, data.train, data.test, cfg);
}

TrainLog train(Model& model, const RetrievalDataset& data, const TrainConfig& cfg) {
  if (model.spec().task != Task::retrieval) throw std::invalid_argument("train: model is not a retrieval model");
  return train_impl(model, data.train, data.test, cfg);
}

void save_checkpoint(const Model& model, const std::string& path) {
  const ModelSpec& s = model.spec();
  std::ostringstream head;
  head << "attnlab checkpoint 1\n";
  head << "variant " << variant_name(s.variant) << "\n";
  head << "task " << task_name(s.task) << "\n";
  head << "n_layers " << s.n_layers << "\n";
  head << "n_heads " << s.n_heads << "\n";
  head << "d_model " << s.d_model << "\n";
  head << "vocab_size " << s.vocab_size << "\n";
  head << "max_len " << s.max_len << "\n";
  head << "f_hidden " << s.f_hidden << "\n";
  head << "tensors " << model.named_params().size() << "\n";
  for (const auto& [name, t] : model.named_params()) {
    head << name << " " << t.ndim();
    for (int i = 0; i < t.ndim(); ++i) head << " " << t.dim(i);
    head << "\n";
  }
  head << "data\n";
  std::string out = head.str();
  for (const auto& [name, t] : model.named_params()) {
    const size_t bytes = t.data().size() * sizeof(double);
    const size_t at = out.size();
    out.resize(at + bytes);
    std::memcpy(out.data() + at, t.data().data(), bytes);
  }
  write_file_atomic(path, out);
}

namespace {

std::string take_line(const std::string& text, size_t& pos, const std::string& path) {
  const size_t nl = text.find('\n', pos);
  if (nl == std::string::npos) throw IoError("truncated checkpoint header in " + path);
  std::string line = text.substr(pos, nl - pos);
  pos = nl + 1;
  return line;
}

std::string keyed_value(const std::string& line, const std::string& key, const std::string& path) {
  if (line.rfind(key + " ", 0) != 0) throw IoError("expected '" + key + "' line in " + path);
  return line.substr(key.size() + 1);
}

}  // namespace

Checkpoint load_checkpoint(const std::string& path) {
  const std::string text = read_file(path);
  size_t pos = 0;
  if (take_line(text, pos, path) != "attnlab checkpoint 1")
    throw IoError("not a version-1 checkpoint: " + path);

  Checkpoint ckpt;
  ModelSpec& s = ckpt.spec;
  try {
    s.variant = variant_from_name(keyed_value(take_line(text, pos, path), "variant", path));
    s.task = task_from_name(keyed_value(take_line(text, pos, path), "task", path));
    s.n_layers = std::stoi(keyed_value(take_line(text, pos, path), "n_layers", path));
    s.n_heads = std::stoi(keyed_value(take_line(text, pos, path), "n_heads", path));
    s.d_model = std::stoi(keyed_value(take_line(text, pos, path), "d_model", path));
    s.vocab_size = std::stoi(keyed_value(take_line(text, pos, path), "vocab_size", path));
    s.max_len = std::stoi(keyed_value(take_line(text, pos, path), "max_len", path));
    s.f_hidden = std::stoi(keyed_value(take_line(text, pos, path), "f_hidden", path));
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("bad checkpoint header in ") + path + ": " + e.what());
  }

  const long n_tensors = std::stol(keyed_value(take_line(text, pos, path), "tensors", path));
  std::vector<std::pair<std::string, size_t>> sizes;
  for (long i = 0; i < n_tensors; ++i) {
    std::istringstream line(take_line(text, pos, path));
    std::string name;
    int ndim = 0;
    if (!(line >> name >> ndim) || ndim < 1)
      throw IoError("bad tensor line in checkpoint " + path);
    size_t count = 1;
    for (int k = 0; k < ndim; ++k) {
      int dim = 0;
      if (!(line >> dim) || dim < 1) throw IoError("bad tensor shape in checkpoint " + path);
      count *= static_cast<size_t>(dim);
    }
    sizes.emplace_back(name, count);
  }
  if (take_line(text, pos, path) != "data") throw IoError("missing data marker in checkpoint " + path);

  size_t need = 0;
  for (const auto& [name, count] : sizes) need += count * sizeof(double);
  if (text.size() - pos != need)
    throw IoError("checkpoint payload size mismatch in " + path + ": expected " +
                  std::to_string(need) + " bytes, got " + std::to_string(text.size() - pos));

  for (const auto& [name, count] : sizes) {
    std::vector<double> data(count);
    std::memcpy(data.data(), text.data() + pos, count * sizeof(double));
    pos += count * sizeof(double);
    ckpt.state.emplace_back(name, std::move(data));
  }
  return ckpt;
}

std::unique_ptr<Model> model_from_checkpoint(const Checkpoint& ckpt) {
  auto model = std::make_unique<Model>(ckpt.spec, 0);
  model->load_state(ckpt.state);
  return model;
}

}  // namespace attnlab
