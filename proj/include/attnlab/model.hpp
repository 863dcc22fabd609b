#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "attnlab/attention.hpp"
#include "attnlab/tasks.hpp"
#include "attnlab/tensor.hpp"

namespace attnlab {

// Which sequence feeds each attention role. `learned` marks the
// embedding-plus-content queries of the indirect and naive variants.
enum class SeqSource { conditioning, content, learned };

struct KvAssignment {
  SeqSource keys;
  SeqSource values;
  SeqSource queries;
};

// The per-variant key/value/query wiring. Conditioning means the ordering
// (sorting) or the padded query (retrieval); content means the target or the
// reference. Throws on an assignment no variant produces.
KvAssignment assign_kv(Variant variant, Task task);
void validate_assignment(const KvAssignment& a, Variant variant, Task task);

struct ModelSpec {
  Variant variant = Variant::indirect;
  Task task = Task::sorting;
  int n_layers = 6;
  int n_heads = 4;
  int d_model = 128;
  int vocab_size = kAlphabet + 1;  // tokens plus the pad id
  int max_len = kSeqLen;
  int f_hidden = 32;

  int n_classes() const { return task == Task::sorting ? kSeqLen : kMaxStart + 1; }
  void validate() const;
};

// 2 layers, d = 64: the profile used by CI-scale experiments.
ModelSpec fast_spec(Variant variant, Task task);

struct TrainConfig {
  enum class Optimizer { adam, sgd };
  Optimizer optimizer = Optimizer::adam;
  double lr = 3e-4;
  int epochs = 200;
  int batch_size = 64;
  uint64_t seed = 1;
  double weight_decay = 0.0;

  void validate() const;  // lr >= 0 (zero freezes the model), epochs/batch >= 1
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double test_accuracy = 0.0;
  long wall_ms = 0;
};

struct TrainLog {
  std::vector<EpochStats> rows;

  // CSV with header epoch,train_loss,test_accuracy,wall_ms. Every column
  // except wall_ms is reproducible bit-for-bit under a fixed seed.
  std::string to_csv() const;
};

// A batch flattened for the (B*max_len, d) layout.
struct Batch {
  int size = 0;
  std::vector<int> content_ids;  // size * max_len
  std::vector<int> cond_ids;     // size * max_len, query padded with kPadToken
  std::vector<int> labels;       // size * max_len (sorting) or size (retrieval)
};

Batch make_batch(const std::vector<SortingInstance>& pool, const std::vector<int>& idx);
Batch make_batch(const std::vector<RetrievalInstance>& pool, const std::vector<int>& idx);

class Model {
 public:
  Model(const ModelSpec& spec, uint64_t seed);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelSpec& spec() const { return spec_; }
  Tape& tape() { return tape_; }

  // Logits: (B*10, 10) for sorting, (B, 8) for retrieval.
  Tensor forward(const Batch& batch);
  // Mean cross-entropy over the batch labels.
  Tensor loss(const Batch& batch);

  // Stable construction order; names match the checkpoint header.
  const std::vector<std::pair<std::string, Tensor>>& named_params() const { return params_; }
  int64_t param_count() const;
  void zero_grads();

  // Overwrites parameter data; shapes must match the current spec.
  void load_state(const std::vector<std::pair<std::string, std::vector<double>>>& state);

 private:
  struct Block {
    Tensor w_q, w_k, w_v, w_o;
    std::vector<BiasMlp> f_heads; // indirect
    Tensor g_w;                   // indirect
    Tensor ffn_w1, ffn_b1, ffn_w2, ffn_b2;
    Tensor ln1_g, ln1_b, ln2_g, ln2_b;
  };

  Tensor reg(const std::string& name, std::vector<int> shape, std::vector<double> data);

  ModelSpec spec_;
  Tape tape_;
  Tensor embedding_;
  Tensor pos_content_, pos_cond_;
  Tensor queries_m_;  // indirect and naive_misaligned
  std::vector<Block> blocks_;
  Tensor head_w_, head_b_;
  std::vector<std::pair<std::string, Tensor>> params_;
};

// Fraction of correct argmax predictions (per token for sorting, exact start
// for retrieval). Forward-only; runs in eval-sized chunks.
double evaluate(Model& model, const std::vector<SortingInstance>& test);
double evaluate(Model& model, const std::vector<RetrievalInstance>& test);

// Cross-entropy training with per-epoch test evaluation. Deterministic given
// (model seed, cfg.seed, dataset) apart from the wall_ms column. Throws
// NumericError with epoch/batch context if the loss turns non-finite.
TrainLog train(Model& model, const SortingDataset& data, const TrainConfig& cfg);
TrainLog train(Model& model, const RetrievalDataset& data, const TrainConfig& cfg);

// Versioned text header (spec, tensor names and shapes) followed by the raw
// little-endian doubles in header order. Written atomically.
void save_checkpoint(const Model& model, const std::string& path);
struct Checkpoint {
  ModelSpec spec;
  std::vector<std::pair<std::string, std::vector<double>>> state;
};
Checkpoint load_checkpoint(const std::string& path);
std::unique_ptr<Model> model_from_checkpoint(const Checkpoint& ckpt);

}  // namespace attnlab
