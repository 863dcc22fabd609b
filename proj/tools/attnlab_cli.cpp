// Command-line front end. Everything flows through the C interface in
// attnlab.h; this translation unit never touches the C++ core directly.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "attnlab.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;   // tolerance or runtime failure
constexpr int kExitUsage = 2;  // bad arguments, unknown choices, overwrite refusal

struct SigmaRange {
  double start = 1.0, stop = 1.0, step = 1.0;
};

// Accepts "start:stop:step" or a single value.
SigmaRange parse_sigma(const std::string& text) {
  SigmaRange r;
  const auto c1 = text.find(':');
  if (c1 == std::string::npos) {
    r.start = r.stop = std::stod(text);
    r.step = 1.0;
    return r;
  }
  const auto c2 = text.find(':', c1 + 1);
  if (c2 == std::string::npos) throw CLI::ValidationError("--sigma expects start:stop:step");
  r.start = std::stod(text.substr(0, c1));
  r.stop = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
  r.step = std::stod(text.substr(c2 + 1));
  return r;
}

int exit_code_for(attnlab_status s) {
  switch (s) {
    case ATTNLAB_OK: return kExitOk;
    case ATTNLAB_ERR_INVALID:
    case ATTNLAB_ERR_EXISTS: return kExitUsage;
    default: return kExitFail;
  }
}

int report_error(const std::string& what, attnlab_status s) {
  std::fprintf(stderr, "attnlab: %s: %s\n", what.c_str(), attnlab_error_message());
  return exit_code_for(s);
}

// Temp-file-plus-rename so a crash never leaves a half-written config echo.
// Only the parsed subcommand's section is recorded; echoing every
// subcommand's unset options would not re-parse.
void write_resolved_config(const std::string& out_dir, const std::string& out_root,
                           const std::string& section, CLI::App* sub) {
  fs::create_directories(out_dir);
  const fs::path final_path = fs::path(out_dir) / "resolved.cfg";
  const fs::path tmp_path = final_path.string() + ".tmp";
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    out << "out-root=\"" << out_root << "\"\n";
    out << "[" << section << "]\n";
    out << sub->config_to_str(true, false);
  }
  fs::rename(tmp_path, final_path);
}

std::string default_out(const std::string& root, const std::string& leaf) {
  return (fs::path(root) / leaf).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"attnlab: attention noise analysis, synthetic tasks, and training runs"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Config file; sections mirror the subcommands");
  app.get_config_formatter_base()->section("");

  std::string out_root = "out";
  app.add_option("--out-root", out_root, "Root for default output directories")
      ->envname("ATTNLAB_OUT")
      ->capture_default_str();

  // ---- analyze ----------------------------------------------------------
  auto* analyze = app.add_subcommand("analyze", "Monte Carlo sweeps against closed forms");
  std::string an_kind;
  std::vector<int32_t> an_d;
  std::vector<int32_t> an_heads;
  std::string an_sigma;
  int64_t an_trials = 20000;
  uint64_t an_seed = 7;
  int32_t an_n = 16;
  double an_tol = 0.0;
  std::string an_out;
  bool an_overwrite = false;
  analyze->add_option("kind", an_kind, "One of lemma1, lemma2, snr, gamma, mha")
      ->required()
      ->check(CLI::IsMember({"lemma1", "lemma2", "snr", "gamma", "mha"}));
  analyze->add_option("--d", an_d, "Working dimensions, comma separated")->delimiter(',');
  analyze->add_option("--sigma", an_sigma, "Noise grid start:stop:step or a single value");
  analyze->add_option("--trials", an_trials, "Monte Carlo resamples per cell")
      ->capture_default_str();
  analyze->add_option("--seed", an_seed, "Root seed for every cell")->capture_default_str();
  analyze->add_option("--n", an_n, "Values per attention instance")->capture_default_str();
  analyze->add_option("--heads", an_heads, "Head counts for the mha kind")->delimiter(',');
  analyze->add_option("--tol", an_tol, "Relative tolerance (0 uses the kind default)");
  analyze->add_option("--out", an_out, "Output directory (default <out-root>/analyze/<kind>)");
  analyze->add_flag("--overwrite", an_overwrite, "Replace existing outputs");

  // ---- gen --------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  std::string gen_task;
  int32_t gen_train = 1000, gen_test = 200;
  uint64_t gen_seed = 29;
  std::string gen_out;
  bool gen_overwrite = false;
  gen->add_option("--task", gen_task, "sorting or retrieval")
      ->required()
      ->check(CLI::IsMember({"sorting", "retrieval"}));
  gen->add_option("--n-train", gen_train, "Training instances")->capture_default_str();
  gen->add_option("--n-test", gen_test, "Test instances")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Dataset seed")->capture_default_str();
  gen->add_option("--out", gen_out, "Output directory (default <out-root>/data/<task>)");
  gen->add_flag("--overwrite", gen_overwrite, "Replace existing outputs");

  // ---- train ------------------------------------------------------------
  auto* tr = app.add_subcommand("train", "Train one attention variant");
  attnlab_train_params tp;
  attnlab_train_params_init(&tp);
  std::string tr_variant, tr_task, tr_data, tr_out;
  double tr_lr = tp.lr, tr_wd = tp.weight_decay;
  int32_t tr_epochs = tp.epochs, tr_batch = tp.batch_size;
  int32_t tr_layers = 0, tr_heads = 0, tr_dmodel = 0, tr_fhidden = 0;
  int32_t tr_ntrain = tp.n_train, tr_ntest = tp.n_test;
  uint64_t tr_seed = tp.seed, tr_dseed = tp.data_seed;
  bool tr_full = false, tr_overwrite = false;
  tr->add_option("--variant", tr_variant, "indirect, naive_misaligned or cross")
      ->required()
      ->check(CLI::IsMember({"indirect", "naive_misaligned", "cross"}));
  tr->add_option("--task", tr_task, "sorting or retrieval")
      ->required()
      ->check(CLI::IsMember({"sorting", "retrieval"}));
  tr->add_option("--data", tr_data, "Dataset directory from gen (omit to generate on the fly)");
  tr->add_option("--lr", tr_lr, "Learning rate")->capture_default_str();
  tr->add_option("--epochs", tr_epochs, "Training epochs")->capture_default_str();
  tr->add_option("--batch", tr_batch, "Batch size")->capture_default_str();
  tr->add_option("--weight-decay", tr_wd, "Decoupled weight decay")->capture_default_str();
  tr->add_option("--seed", tr_seed, "Model init and batch order seed")->capture_default_str();
  tr->add_option("--data-seed", tr_dseed, "Dataset seed when generating")->capture_default_str();
  tr->add_option("--n-train", tr_ntrain, "Training instances when generating")
      ->capture_default_str();
  tr->add_option("--n-test", tr_ntest, "Test instances when generating")->capture_default_str();
  tr->add_flag("--full", tr_full, "Full profile (6 layers, d = 128) instead of the fast one");
  tr->add_option("--layers", tr_layers, "Override layer count");
  tr->add_option("--heads", tr_heads, "Override head count");
  tr->add_option("--d-model", tr_dmodel, "Override model width");
  tr->add_option("--f-hidden", tr_fhidden, "Override bias-MLP hidden width");
  tr->add_option("--out", tr_out,
                 "Output directory (default <out-root>/train/<variant>_<task>_seed<seed>)");
  tr->add_flag("--overwrite", tr_overwrite, "Replace existing outputs");

  // ---- eval -------------------------------------------------------------
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset file");
  std::string ev_ckpt, ev_data;
  ev->add_option("checkpoint", ev_ckpt, "Path to model.ckpt")
      ->required()
      ->check(CLI::ExistingFile);
  ev->add_option("dataset", ev_data, "Serialized instances of the model's task")
      ->required()
      ->check(CLI::ExistingFile);

  // ---- repro ------------------------------------------------------------
  auto* rp = app.add_subcommand("repro", "Reproduce a figure's data files");
  std::string rp_figure;
  uint64_t rp_seed = 0;
  bool rp_seed_given = false;
  int64_t rp_trials = 20000;
  int32_t rp_seeds = 3;
  attnlab_fig2_params f2;
  attnlab_fig2_params_init(&f2);
  double rp_lr = f2.lr;
  int32_t rp_epochs = f2.epochs, rp_batch = f2.batch_size;
  int32_t rp_ntrain = f2.n_train, rp_ntest = f2.n_test;
  std::string rp_task = "both";
  std::string rp_out;
  bool rp_overwrite = false;
  rp->add_option("figure", rp_figure, "fig1 or fig2")
      ->required()
      ->check(CLI::IsMember({"fig1", "fig2"}));
  rp->add_option("--seed", rp_seed, "Root seed (default 7 for fig1, 29 for fig2)")
      ->trigger_on_parse()
      ->each([&](const std::string&) { rp_seed_given = true; });
  rp->add_option("--trials", rp_trials, "fig1 Monte Carlo resamples per cell")
      ->capture_default_str();
  rp->add_option("--seeds", rp_seeds, "fig2 training runs per variant")->capture_default_str();
  rp->add_option("--lr", rp_lr, "fig2 learning rate")->capture_default_str();
  rp->add_option("--epochs", rp_epochs, "fig2 epochs")->capture_default_str();
  rp->add_option("--batch", rp_batch, "fig2 batch size")->capture_default_str();
  rp->add_option("--n-train", rp_ntrain, "fig2 training instances")->capture_default_str();
  rp->add_option("--n-test", rp_ntest, "fig2 test instances")->capture_default_str();
  rp->add_option("--task", rp_task, "fig2 task selection")
      ->check(CLI::IsMember({"sorting", "retrieval", "both"}))
      ->capture_default_str();
  rp->add_option("--out", rp_out, "Output directory (default <out-root>/figure1 or /figure2)");
  rp->add_flag("--overwrite", rp_overwrite, "Replace existing outputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (analyze->parsed()) {
    attnlab_analyze_params p;
    attnlab_analyze_params_init(&p);
    if (!an_d.empty()) {
      p.d_list = an_d.data();
      p.n_d = static_cast<int32_t>(an_d.size());
    }
    if (!an_heads.empty()) {
      p.heads_list = an_heads.data();
      p.n_heads = static_cast<int32_t>(an_heads.size());
    }
    if (!an_sigma.empty()) {
      SigmaRange r;
      try {
        r = parse_sigma(an_sigma);
      } catch (const std::exception&) {
        std::fprintf(stderr, "attnlab: --sigma expects start:stop:step\n");
        return kExitUsage;
      }
      p.sigma_start = r.start;
      p.sigma_stop = r.stop;
      p.sigma_step = r.step;
    } else if (an_kind == "snr") {
      p.sigma_start = 0.1;
      p.sigma_stop = 2.0;
      p.sigma_step = 0.1;
    }
    p.trials = an_trials;
    p.seed = an_seed;
    p.n = an_n;
    p.tolerance = an_tol;
    const std::string out =
        an_out.empty() ? default_out(out_root, "analyze/" + an_kind) : an_out;
    int32_t pass = 0;
    const char* summary = nullptr;
    const attnlab_status s =
        attnlab_analyze(an_kind.c_str(), &p, out.c_str(), an_overwrite ? 1 : 0, &pass, &summary);
    if (s != ATTNLAB_OK) return report_error("analyze " + an_kind, s);
    write_resolved_config(out, out_root, "analyze", analyze);
    std::printf("analyze %s: %s seed=%llu %s -> %s\n", an_kind.c_str(),
                pass ? "pass" : "fail", static_cast<unsigned long long>(an_seed),
                summary != nullptr ? summary : "", out.c_str());
    return pass ? kExitOk : kExitFail;
  }

  if (gen->parsed()) {
    const std::string out = gen_out.empty() ? default_out(out_root, "data/" + gen_task) : gen_out;
    const attnlab_status s = attnlab_generate(gen_task.c_str(), gen_train, gen_test, gen_seed,
                                              out.c_str(), gen_overwrite ? 1 : 0);
    if (s != ATTNLAB_OK) return report_error("gen " + gen_task, s);
    write_resolved_config(out, out_root, "gen", gen);
    std::printf("gen %s: done seed=%llu train=%d test=%d -> %s\n", gen_task.c_str(),
                static_cast<unsigned long long>(gen_seed), gen_train, gen_test, out.c_str());
    return kExitOk;
  }

  if (tr->parsed()) {
    tp.variant = tr_variant.c_str();
    tp.task = tr_task.c_str();
    tp.fast_profile = tr_full ? 0 : 1;
    tp.n_layers = tr_layers;
    tp.n_heads = tr_heads;
    tp.d_model = tr_dmodel;
    tp.f_hidden = tr_fhidden;
    tp.lr = tr_lr;
    tp.epochs = tr_epochs;
    tp.batch_size = tr_batch;
    tp.weight_decay = tr_wd;
    tp.seed = tr_seed;
    tp.data_seed = tr_dseed;
    tp.n_train = tr_ntrain;
    tp.n_test = tr_ntest;
    const std::string out =
        tr_out.empty()
            ? default_out(out_root, "train/" + tr_variant + "_" + tr_task + "_seed" +
                                        std::to_string(tr_seed))
            : tr_out;
    double final_acc = 0.0;
    const attnlab_status s =
        attnlab_train_run(&tp, tr_data.empty() ? nullptr : tr_data.c_str(), out.c_str(),
                          tr_overwrite ? 1 : 0, &final_acc);
    if (s != ATTNLAB_OK) return report_error("train", s);
    write_resolved_config(out, out_root, "train", tr);
    std::printf("train %s %s: done seed=%llu final_test_accuracy=%.6f -> %s\n",
                tr_variant.c_str(), tr_task.c_str(), static_cast<unsigned long long>(tr_seed),
                final_acc, out.c_str());
    return kExitOk;
  }

  if (ev->parsed()) {
    attnlab_model* model = nullptr;
    attnlab_status s = attnlab_model_load(ev_ckpt.c_str(), &model);
    if (s != ATTNLAB_OK) return report_error("eval", s);
    const char* name = nullptr;
    double acc = 0.0;
    s = attnlab_model_variant(model, &name);
    const std::string variant = s == ATTNLAB_OK ? name : "";
    if (s == ATTNLAB_OK) s = attnlab_model_task(model, &name);
    const std::string task = s == ATTNLAB_OK ? name : "";
    if (s == ATTNLAB_OK) s = attnlab_model_eval_file(model, ev_data.c_str(), &acc);
    if (s != ATTNLAB_OK) {
      attnlab_model_free(model);
      return report_error("eval", s);
    }
    std::printf("eval %s %s: accuracy=%.6f checkpoint=%s data=%s\n", variant.c_str(),
                task.c_str(), acc, ev_ckpt.c_str(), ev_data.c_str());
    attnlab_model_free(model);
    return kExitOk;
  }

  if (rp->parsed()) {
    if (rp_figure == "fig1") {
      const uint64_t seed = rp_seed_given ? rp_seed : 7;
      const std::string out = rp_out.empty() ? default_out(out_root, "figure1") : rp_out;
      const attnlab_status s =
          attnlab_repro_fig1(seed, rp_trials, out.c_str(), rp_overwrite ? 1 : 0);
      if (s != ATTNLAB_OK) return report_error("repro fig1", s);
      write_resolved_config(out, out_root, "repro", rp);
      std::printf("repro fig1: done seed=%llu trials=%lld -> %s\n",
                  static_cast<unsigned long long>(seed), static_cast<long long>(rp_trials),
                  out.c_str());
      return kExitOk;
    }
    f2.seed = rp_seed_given ? rp_seed : 29;
    f2.n_seeds = rp_seeds;
    f2.lr = rp_lr;
    f2.epochs = rp_epochs;
    f2.batch_size = rp_batch;
    f2.n_train = rp_ntrain;
    f2.n_test = rp_ntest;
    f2.run_sorting = rp_task != "retrieval";
    f2.run_retrieval = rp_task != "sorting";
    const std::string out = rp_out.empty() ? default_out(out_root, "figure2") : rp_out;
    const attnlab_status s = attnlab_repro_fig2(&f2, out.c_str(), rp_overwrite ? 1 : 0);
    if (s != ATTNLAB_OK) return report_error("repro fig2", s);
    write_resolved_config(out, out_root, "repro", rp);
    std::printf("repro fig2: done seed=%llu seeds=%d task=%s -> %s\n",
                static_cast<unsigned long long>(f2.seed), rp_seeds, rp_task.c_str(), out.c_str());
    return kExitOk;
  }

  return kExitUsage;
}
