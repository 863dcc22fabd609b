// Exercises the shared library strictly through the C header, the way the
// CLI consumes it.
#include "attnlab.h"

#include <unistd.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("attnlab_capi_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string sub(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("version and error message are always addressable") {
  CHECK(attnlab_version() != nullptr);
  CHECK(attnlab_error_message() != nullptr);
}

TEST_CASE("analyze rejects bad arguments with messages") {
  attnlab_analyze_params p;
  attnlab_analyze_params_init(&p);
  TempDir dir("reject");

  p.trials = 0;
  int32_t pass = -1;
  CHECK(attnlab_analyze("lemma1", &p, dir.sub("a").c_str(), 0, &pass, nullptr) ==
        ATTNLAB_ERR_INVALID);
  CHECK(std::string(attnlab_error_message()).find("trials") != std::string::npos);

  attnlab_analyze_params_init(&p);
  p.trials = 10;
  CHECK(attnlab_analyze("bogus", &p, dir.sub("a").c_str(), 0, &pass, nullptr) ==
        ATTNLAB_ERR_INVALID);
  CHECK(std::string(attnlab_error_message()).find("lemma1") != std::string::npos);

  CHECK(attnlab_analyze(nullptr, &p, dir.sub("a").c_str(), 0, &pass, nullptr) ==
        ATTNLAB_ERR_INVALID);
}

TEST_CASE("analyze lemma1 writes csv and manifest and honors overwrite") {
  attnlab_analyze_params p;
  attnlab_analyze_params_init(&p);
  p.trials = 200;
  const int32_t dims[] = {8};
  p.d_list = dims;
  p.n_d = 1;
  p.sigma_start = 1.0;
  p.sigma_stop = 1.0;
  p.sigma_step = 0.5;
  TempDir dir("lemma1");

  int32_t pass = -1;
  const char* summary = nullptr;
  REQUIRE(attnlab_analyze("lemma1", &p, dir.path.string().c_str(), 0, &pass, &summary) ==
          ATTNLAB_OK);
  CHECK(pass == 1);
  REQUIRE(summary != nullptr);
  CHECK(std::string(summary).find("violations=0") != std::string::npos);
  CHECK(fs::exists(dir.sub("lemma1.csv")));
  const std::string manifest = slurp(dir.sub("manifest.txt"));
  CHECK(manifest.find("lemma1.csv") != std::string::npos);

  CHECK(attnlab_analyze("lemma1", &p, dir.path.string().c_str(), 0, &pass, nullptr) ==
        ATTNLAB_ERR_EXISTS);
  CHECK(attnlab_analyze("lemma1", &p, dir.path.string().c_str(), 1, &pass, nullptr) ==
        ATTNLAB_OK);
}

TEST_CASE("analyze kinds emit their files at smoke scale") {
  attnlab_analyze_params p;
  attnlab_analyze_params_init(&p);
  p.trials = 300;
  p.n = 8;
  TempDir dir("kinds");

  const int32_t snr_dims[] = {8, 16};
  p.d_list = snr_dims;
  p.n_d = 2;
  p.sigma_start = 0.5;
  p.sigma_stop = 1.5;
  p.sigma_step = 0.25;
  p.tolerance = 0.5;  // smoke run, not a precision gate
  int32_t pass = -1;
  REQUIRE(attnlab_analyze("snr", &p, dir.sub("snr").c_str(), 0, &pass, nullptr) == ATTNLAB_OK);
  CHECK(fs::exists(dir.sub("snr") + "/snr_vs_sigma.csv"));
  CHECK(fs::exists(dir.sub("snr") + "/snr_crossings.csv"));

  const int32_t gdims[] = {8, 16, 32};
  p.d_list = gdims;
  p.n_d = 3;
  REQUIRE(attnlab_analyze("gamma", &p, dir.sub("gamma").c_str(), 0, &pass, nullptr) == ATTNLAB_OK);
  CHECK(fs::exists(dir.sub("gamma") + "/gamma_vs_d.csv"));
  CHECK(fs::exists(dir.sub("gamma") + "/gamma_fit.csv"));

  const int32_t mdims[] = {16};
  const int32_t mheads[] = {2};
  p.d_list = mdims;
  p.n_d = 1;
  p.heads_list = mheads;
  p.n_heads = 1;
  REQUIRE(attnlab_analyze("mha", &p, dir.sub("mha").c_str(), 0, &pass, nullptr) == ATTNLAB_OK);
  CHECK(fs::exists(dir.sub("mha") + "/mha.csv"));

  const int32_t ldims[] = {8};
  p.d_list = ldims;
  p.n_d = 1;
  REQUIRE(attnlab_analyze("lemma2", &p, dir.sub("lemma2").c_str(), 0, &pass, nullptr) ==
          ATTNLAB_OK);
  CHECK(fs::exists(dir.sub("lemma2") + "/lemma2.csv"));
}

TEST_CASE("generate then train then eval round-trips through files") {
  TempDir dir("pipeline");
  REQUIRE(attnlab_generate("sorting", 32, 8, 5, dir.sub("data").c_str(), 0) == ATTNLAB_OK);
  CHECK(fs::exists(dir.sub("data") + "/train.txt"));
  CHECK(fs::exists(dir.sub("data") + "/test.txt"));
  CHECK(fs::exists(dir.sub("data") + "/manifest.txt"));
  CHECK(attnlab_generate("sorting", 32, 8, 5, dir.sub("data").c_str(), 0) == ATTNLAB_ERR_EXISTS);
  CHECK(attnlab_generate("walking", 8, 4, 5, dir.sub("x").c_str(), 0) == ATTNLAB_ERR_INVALID);

  attnlab_train_params tp;
  attnlab_train_params_init(&tp);
  tp.task = "sorting";
  tp.variant = "cross";
  tp.n_layers = 1;
  tp.d_model = 32;
  tp.epochs = 2;
  tp.batch_size = 16;
  double final_acc = -1.0;
  REQUIRE(attnlab_train_run(&tp, dir.sub("data").c_str(), dir.sub("run").c_str(), 0, &final_acc) ==
          ATTNLAB_OK);
  CHECK(final_acc >= 0.0);
  CHECK(fs::exists(dir.sub("run") + "/metrics.csv"));
  CHECK(fs::exists(dir.sub("run") + "/model.ckpt"));

  // metrics.csv: header plus one row per epoch, wall clock excluded.
  const auto rows = lines_of(slurp(dir.sub("run") + "/metrics.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "epoch,train_loss,test_accuracy");

  attnlab_model* model = nullptr;
  REQUIRE(attnlab_model_load((dir.sub("run") + "/model.ckpt").c_str(), &model) == ATTNLAB_OK);
  const char* name = nullptr;
  REQUIRE(attnlab_model_variant(model, &name) == ATTNLAB_OK);
  CHECK(std::string(name) == "cross");
  REQUIRE(attnlab_model_task(model, &name) == ATTNLAB_OK);
  CHECK(std::string(name) == "sorting");
  int64_t params = 0;
  REQUIRE(attnlab_model_param_count(model, &params) == ATTNLAB_OK);
  CHECK(params > 0);

  // Eval of the saved checkpoint reproduces the final train-log accuracy.
  double acc = -1.0;
  REQUIRE(attnlab_model_eval_file(model, (dir.sub("data") + "/test.txt").c_str(), &acc) ==
          ATTNLAB_OK);
  const std::string last = rows.back();
  const std::string logged = last.substr(last.rfind(',') + 1);
  CHECK(acc == doctest::Approx(std::stod(logged)).epsilon(1e-12));
  CHECK(acc == final_acc);
  attnlab_model_free(model);

  CHECK(attnlab_model_load(dir.sub("missing.ckpt").c_str(), &model) != ATTNLAB_OK);
  CHECK(std::strlen(attnlab_error_message()) > 0);
}

TEST_CASE("repro fig1 is reproducible at the byte level") {
  TempDir dir("fig1");
  REQUIRE(attnlab_repro_fig1(7, 300, dir.sub("a").c_str(), 0) == ATTNLAB_OK);
  REQUIRE(attnlab_repro_fig1(7, 300, dir.sub("b").c_str(), 0) == ATTNLAB_OK);
  const char* names[] = {"snr_vs_sigma.csv", "snr_vs_d_misaligned.csv", "gamma_vs_d.csv",
                         "manifest.txt"};
  for (const char* n : names) {
    CHECK(slurp(dir.sub("a") + "/" + n) == slurp(dir.sub("b") + "/" + n));
  }
  CHECK(attnlab_repro_fig1(7, 300, dir.sub("a").c_str(), 0) == ATTNLAB_ERR_EXISTS);
}

TEST_CASE("repro fig2 smoke run emits per-task curves") {
  TempDir dir("fig2");
  attnlab_fig2_params p;
  attnlab_fig2_params_init(&p);
  CHECK(p.n_seeds == 3);
  p.n_seeds = 1;
  p.epochs = 1;
  p.n_train = 16;
  p.n_test = 8;
  p.batch_size = 16;
  p.run_retrieval = 0;
  REQUIRE(attnlab_repro_fig2(&p, dir.path.string().c_str(), 0) == ATTNLAB_OK);
  const auto rows = lines_of(slurp(dir.sub("fig2_sorting.csv")));
  REQUIRE(rows.size() == 4);  // header + three variants x one seed x one epoch
  CHECK(rows[0] == "task,variant,seed,epoch,train_loss,test_accuracy");
  CHECK(rows[1].find("sorting,indirect,1,1,") == 0);
  CHECK(!fs::exists(dir.sub("fig2_retrieval.csv")));
  const std::string manifest = slurp(dir.sub("manifest.txt"));
  CHECK(manifest.find("fig2_sorting.csv") != std::string::npos);
  CHECK(manifest.find("fig2_retrieval.csv") == std::string::npos);

  p.run_sorting = 0;
  p.run_retrieval = 0;
  CHECK(attnlab_repro_fig2(&p, dir.sub("none").c_str(), 0) == ATTNLAB_ERR_INVALID);
}
