#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <vector>

#include "attnlab/io.hpp"
#include "attnlab/model.hpp"
#include "attnlab/tasks.hpp"
#include "doctest.h"

using namespace attnlab;

namespace {

SortingDataset small_sorting(int n_train, int n_test, uint64_t seed) {
  DatasetSpec spec;
  spec.n_train = n_train;
  spec.n_test = n_test;
  spec.seed = seed;
  return gen_sorting(spec);
}

RetrievalDataset small_retrieval(int n_train, int n_test, uint64_t seed) {
  DatasetSpec spec;
  spec.n_train = n_train;
  spec.n_test = n_test;
  spec.seed = seed;
  spec.task = Task::retrieval;
  return gen_retrieval(spec);
}

std::vector<int> iota_idx(int n) {
  std::vector<int> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

// Capacity set with duplicate-free targets. When a target token repeats, the
// repeated rows' labels differ only through a tie-break on sibling rows, which
// the cross wiring structurally cannot observe, so such instances are not
// memorizable by every variant.
SortingDataset distinct_token_sorting(int count, uint64_t seed) {
  SortingDataset ds = small_sorting(count, 4, seed);
  std::mt19937_64 rng(seed * 7919 + 1);
  for (SortingInstance& inst : ds.train) {
    std::array<int, kSeqLen> perm{};
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    inst.target = perm;
    const std::vector<int> labels = sorting_labels(
        std::vector<int>(perm.begin(), perm.end()),
        std::vector<int>(inst.ordering.begin(), inst.ordering.end()));
    std::copy(labels.begin(), labels.end(), inst.labels.begin());
  }
  return ds;
}

const Variant kVariants[] = {Variant::indirect, Variant::naive_misaligned, Variant::cross};

}  // namespace

TEST_CASE("assign_kv pins the per-variant wiring") {
  for (Task task : {Task::sorting, Task::retrieval}) {
    for (Variant v : {Variant::indirect, Variant::naive_misaligned}) {
      const auto a = assign_kv(v, task);
      CHECK(a.keys == SeqSource::conditioning);
      CHECK(a.values == SeqSource::content);
      CHECK(a.queries == SeqSource::learned);
    }
  }
  const auto cs = assign_kv(Variant::cross, Task::sorting);
  CHECK(cs.keys == SeqSource::conditioning);
  CHECK(cs.values == SeqSource::conditioning);
  CHECK(cs.queries == SeqSource::content);
  const auto cr = assign_kv(Variant::cross, Task::retrieval);
  CHECK(cr.keys == SeqSource::content);
  CHECK(cr.values == SeqSource::content);
  CHECK(cr.queries == SeqSource::conditioning);

  CHECK_THROWS_AS(assign_kv(Variant::standard, Task::sorting), std::invalid_argument);
  KvAssignment swapped{SeqSource::content, SeqSource::conditioning, SeqSource::learned};
  CHECK_THROWS_AS(validate_assignment(swapped, Variant::indirect, Task::sorting), std::logic_error);
  KvAssignment learned_cross{SeqSource::content, SeqSource::content, SeqSource::learned};
  CHECK_THROWS_AS(validate_assignment(learned_cross, Variant::cross, Task::retrieval), std::logic_error);
}

TEST_CASE("model spec validation") {
  ModelSpec s = fast_spec(Variant::indirect, Task::sorting);
  CHECK_NOTHROW(s.validate());
  CHECK(s.n_layers == 2);
  CHECK(s.d_model == 64);
  CHECK(s.n_classes() == 10);
  CHECK(fast_spec(Variant::indirect, Task::retrieval).n_classes() == 8);

  ModelSpec bad = s;
  bad.d_model = 63;
  CHECK_THROWS_AS(Model(bad, 1), std::invalid_argument);
  bad = s;
  bad.variant = Variant::standard;
  CHECK_THROWS_AS(Model(bad, 1), std::invalid_argument);

  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.lr = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.lr = 0.0;
  CHECK_NOTHROW(cfg.validate());
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("parameter count is seed-independent and variant-graded") {
  for (Task task : {Task::sorting, Task::retrieval}) {
    int64_t counts[3] = {0, 0, 0};
    for (int i = 0; i < 3; ++i) {
      Model a(fast_spec(kVariants[i], task), 1);
      Model b(fast_spec(kVariants[i], task), 2);
      CHECK(a.param_count() == b.param_count());
      CHECK(a.named_params().size() == b.named_params().size());
      bool any_diff = false;
      for (size_t p = 0; p < a.named_params().size(); ++p)
        if (a.named_params()[p].second.data() != b.named_params()[p].second.data()) any_diff = true;
      CHECK(any_diff);
      counts[i] = a.param_count();
    }
    // indirect adds the bias MLPs and g on top of naive, which adds M on top of cross
    CHECK(counts[0] > counts[1]);
    CHECK(counts[1] > counts[2]);
  }
}

TEST_CASE("forward obeys the shape contracts") {
  const auto sorting = small_sorting(4, 2, 5);
  const auto retrieval = small_retrieval(4, 2, 5);
  for (Variant v : kVariants) {
    Model ms(fast_spec(v, Task::sorting), 3);
    Tensor ls = ms.forward(make_batch(sorting.train, iota_idx(3)));
    CHECK(ls.rows() == 3 * kSeqLen);
    CHECK(ls.cols() == 10);

    Model mr(fast_spec(v, Task::retrieval), 3);
    Tensor lr = mr.forward(make_batch(retrieval.train, iota_idx(3)));
    CHECK(lr.rows() == 3);
    CHECK(lr.cols() == 8);
  }
}

TEST_CASE("untrained loss sits near the uniform entropy") {
  const auto sorting = small_sorting(64, 2, 7);
  const auto retrieval = small_retrieval(64, 2, 7);
  for (Variant v : kVariants) {
    Model ms(fast_spec(v, Task::sorting), 11);
    const double loss_s = ms.loss(make_batch(sorting.train, iota_idx(64))).item();
    CHECK(loss_s == doctest::Approx(std::log(10.0)).epsilon(0.10));
    ms.tape().reset();

    Model mr(fast_spec(v, Task::retrieval), 11);
    const double loss_r = mr.loss(make_batch(retrieval.train, iota_idx(64))).item();
    CHECK(loss_r == doctest::Approx(std::log(8.0)).epsilon(0.10));
    mr.tape().reset();
  }
}

TEST_CASE("every parameter receives gradient") {
  const auto sorting = small_sorting(8, 2, 9);
  const auto retrieval = small_retrieval(8, 2, 9);
  for (Variant v : kVariants) {
    for (Task task : {Task::sorting, Task::retrieval}) {
      Model model(fast_spec(v, task), 21);
      Tensor loss = task == Task::sorting ? model.loss(make_batch(sorting.train, iota_idx(8)))
                                          : model.loss(make_batch(retrieval.train, iota_idx(8)));
      model.tape().backward(loss);
      for (const auto& [name, t] : model.named_params()) {
        INFO("param ", name);
        REQUIRE(t.has_grad());
        double norm = 0.0;
        for (double g : t.grad()) norm += g * g;
        CHECK(norm > 0.0);
      }
      model.zero_grads();
      model.tape().reset();
    }
  }
}

TEST_CASE("batched forward equals per-instance forward") {
  const auto sorting = small_sorting(6, 2, 13);
  const auto retrieval = small_retrieval(6, 2, 13);
  for (Variant v : kVariants) {
    Model ms(fast_spec(v, Task::sorting), 31);
    NoGradGuard gs(ms.tape());
    Tensor batched = ms.forward(make_batch(sorting.train, {0, 1, 2}));
    for (int i = 0; i < 3; ++i) {
      Tensor single = ms.forward(make_batch(sorting.train, {i}));
      for (int r = 0; r < kSeqLen; ++r)
        for (int c = 0; c < 10; ++c) CHECK(batched.at(i * kSeqLen + r, c) == single.at(r, c));
    }

    Model mr(fast_spec(v, Task::retrieval), 31);
    NoGradGuard gr(mr.tape());
    Tensor rbatched = mr.forward(make_batch(retrieval.train, {0, 1, 2}));
    for (int i = 0; i < 3; ++i) {
      Tensor rsingle = mr.forward(make_batch(retrieval.train, {i}));
      for (int c = 0; c < 8; ++c) CHECK(rbatched.at(i, c) == rsingle.at(0, c));
    }
  }
}

TEST_CASE("zero learning rate freezes the model") {
  const auto data = small_sorting(48, 16, 15);
  Model model(fast_spec(Variant::indirect, Task::sorting), 41);
  std::vector<std::vector<double>> before;
  for (const auto& [name, t] : model.named_params()) before.push_back(t.data());

  TrainConfig cfg;
  cfg.lr = 0.0;
  cfg.epochs = 2;
  cfg.batch_size = 16;
  cfg.seed = 5;
  const TrainLog log = train(model, data, cfg);

  REQUIRE(log.rows.size() == 2);
  // Identical per-instance losses; the epoch means differ only by the
  // summation order the reshuffled batches induce.
  CHECK(log.rows[0].train_loss == doctest::Approx(log.rows[1].train_loss).epsilon(1e-12));
  CHECK(log.rows[0].test_accuracy == log.rows[1].test_accuracy);
  size_t i = 0;
  for (const auto& [name, t] : model.named_params()) {
    INFO("param ", name);
    CHECK(t.data() == before[i]);
    ++i;
  }
}

TEST_CASE("training is deterministic apart from wall time") {
  const auto data = small_retrieval(64, 16, 17);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 32;
  cfg.seed = 9;

  TrainLog logs[2];
  for (int run = 0; run < 2; ++run) {
    Model model(fast_spec(Variant::indirect, Task::retrieval), 43);
    logs[run] = train(model, data, cfg);
  }
  REQUIRE(logs[0].rows.size() == logs[1].rows.size());
  for (size_t r = 0; r < logs[0].rows.size(); ++r) {
    CHECK(logs[0].rows[r].epoch == logs[1].rows[r].epoch);
    CHECK(logs[0].rows[r].train_loss == logs[1].rows[r].train_loss);
    CHECK(logs[0].rows[r].test_accuracy == logs[1].rows[r].test_accuracy);
  }
}

TEST_CASE("loss decreases over the first ten epochs") {
  ModelSpec base = fast_spec(Variant::indirect, Task::sorting);
  base.d_model = 32;  // smoke-test scale
  const auto sorting = small_sorting(96, 16, 19);
  const auto retrieval = small_retrieval(96, 16, 19);
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.batch_size = 48;
  cfg.seed = 3;
  for (Variant v : kVariants) {
    ModelSpec spec = base;
    spec.variant = v;
    spec.task = Task::sorting;
    Model ms(spec, 51);
    const TrainLog ls = train(ms, sorting, cfg);
    INFO("variant ", static_cast<int>(v), " sorting");
    CHECK(ls.rows.back().train_loss < ls.rows.front().train_loss);

    spec.task = Task::retrieval;
    Model mr(spec, 51);
    const TrainLog lr = train(mr, retrieval, cfg);
    INFO("variant ", static_cast<int>(v), " retrieval");
    CHECK(lr.rows.back().train_loss < lr.rows.front().train_loss);
  }
}

TEST_CASE("any variant can overfit sixteen instances") {
  const auto base = distinct_token_sorting(16, 29);
  for (Variant v : kVariants) {
    Model model(fast_spec(v, Task::sorting), 61);
    TrainConfig cfg;
    cfg.lr = 1e-3;
    cfg.batch_size = 16;
    cfg.epochs = 100;
    double train_acc = 0.0;
    for (int chunk = 0; chunk < 5 && train_acc < 0.99; ++chunk) {
      cfg.seed = 100 + static_cast<uint64_t>(chunk);
      train(model, base, cfg);
      train_acc = evaluate(model, base.train);
    }
    INFO("variant ", static_cast<int>(v));
    CHECK(train_acc >= 0.99);
  }
}

TEST_CASE("evaluate matches the final train log row and ignores order") {
  const auto data = small_sorting(48, 24, 33);
  Model model(fast_spec(Variant::cross, Task::sorting), 71);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 24;
  const TrainLog log = train(model, data, cfg);
  CHECK(evaluate(model, data.test) == log.rows.back().test_accuracy);

  auto shuffled = data.test;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(evaluate(model, shuffled) == evaluate(model, data.test));
}

TEST_CASE("an all-equal-logits model scores the base rate") {
  // Zeroing the head makes argmax return class 0 for every input. Sorting
  // labels contain exactly one zero per instance, so per-token accuracy is
  // exactly 0.1; retrieval accuracy is the empirical frequency of start 0.
  const auto sorting = small_sorting(8, 200, 37);
  Model ms(fast_spec(Variant::naive_misaligned, Task::sorting), 81);
  std::vector<std::pair<std::string, std::vector<double>>> state;
  for (const auto& [name, t] : ms.named_params()) {
    auto data = t.data();
    if (name == "head_w" || name == "head_b") std::fill(data.begin(), data.end(), 0.0);
    state.emplace_back(name, std::move(data));
  }
  ms.load_state(state);
  CHECK(evaluate(ms, sorting.test) == doctest::Approx(0.1).epsilon(1e-12));

  const auto retrieval = small_retrieval(8, 200, 37);
  Model mr(fast_spec(Variant::naive_misaligned, Task::retrieval), 81);
  state.clear();
  for (const auto& [name, t] : mr.named_params()) {
    auto data = t.data();
    if (name == "head_w" || name == "head_b") std::fill(data.begin(), data.end(), 0.0);
    state.emplace_back(name, std::move(data));
  }
  mr.load_state(state);
  long zeros = 0;
  for (const auto& inst : retrieval.test) zeros += inst.start == 0;
  CHECK(evaluate(mr, retrieval.test) ==
        doctest::Approx(static_cast<double>(zeros) / 200.0).epsilon(1e-12));
}

TEST_CASE("train aborts on poisoned parameters") {
  const auto data = small_sorting(16, 4, 39);
  Model model(fast_spec(Variant::indirect, Task::sorting), 91);
  Tensor poisoned = model.named_params().front().second;
  poisoned.data()[0] = std::nan("");
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 16;
  CHECK_THROWS_AS(train(model, data, cfg), NumericError);
}

TEST_CASE("train log csv format") {
  TrainLog log;
  log.rows.push_back({1, 2.25, 0.5, 12});
  log.rows.push_back({2, 1.0, 0.625, 11});
  CHECK(log.to_csv() ==
        "epoch,train_loss,test_accuracy,wall_ms\n"
        "1,2.25,0.5,12\n"
        "2,1,0.625,11\n");
}

TEST_CASE("checkpoints round-trip the model") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "attnlab_ckpt_test";
  fs::remove_all(dir);
  const std::string path = (dir / "model.ckpt").string();

  const auto data = small_retrieval(24, 8, 41);
  Model model(fast_spec(Variant::indirect, Task::retrieval), 97);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 24;
  train(model, data, cfg);
  save_checkpoint(model, path);

  const Checkpoint ckpt = load_checkpoint(path);
  CHECK(ckpt.spec.variant == Variant::indirect);
  CHECK(ckpt.spec.task == Task::retrieval);
  CHECK(ckpt.spec.n_layers == 2);
  CHECK(ckpt.spec.d_model == 64);
  REQUIRE(ckpt.state.size() == model.named_params().size());
  for (size_t i = 0; i < ckpt.state.size(); ++i) {
    CHECK(ckpt.state[i].first == model.named_params()[i].first);
    CHECK(ckpt.state[i].second == model.named_params()[i].second.data());
  }

  auto restored = model_from_checkpoint(ckpt);
  CHECK(evaluate(*restored, data.test) == evaluate(model, data.test));
  {
    NoGradGuard g1(model.tape());
    NoGradGuard g2(restored->tape());
    Tensor a = model.forward(make_batch(data.test, {0, 1}));
    Tensor b = restored->forward(make_batch(data.test, {0, 1}));
    CHECK(a.data() == b.data());
  }

  SUBCASE("corrupt version line") {
    std::string text = read_file(path);
    text[0] = 'x';
    write_file_atomic(path, text);
    CHECK_THROWS_AS(load_checkpoint(path), IoError);
  }
  SUBCASE("truncated payload") {
    std::string text = read_file(path);
    text.resize(text.size() - 16);
    write_file_atomic(path, text);
    CHECK_THROWS_AS(load_checkpoint(path), IoError);
  }
  SUBCASE("load_state rejects reordered tensors") {
    Model fresh(fast_spec(Variant::indirect, Task::retrieval), 3);
    auto state = load_checkpoint(path).state;
    std::swap(state[0], state[1]);
    CHECK_THROWS_AS(fresh.load_state(state), std::invalid_argument);
  }
  fs::remove_all(dir);
}
