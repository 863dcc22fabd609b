#include "attnlab.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "attnlab/io.hpp"
#include "attnlab/model.hpp"
#include "attnlab/noise_analysis.hpp"
#include "attnlab/tasks.hpp"
#include "attnlab/tensor.hpp"

using namespace attnlab;

namespace {

thread_local std::string t_error;
thread_local std::string t_summary;
thread_local std::string t_name;

attnlab_status fail(attnlab_status s, const std::string& msg) {
  t_error = msg;
  return s;
}

template <typename Fn>
attnlab_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ExistsError& e) {
    return fail(ATTNLAB_ERR_EXISTS, e.what());
  } catch (const IoError& e) {
    return fail(ATTNLAB_ERR_IO, e.what());
  } catch (const ParseError& e) {
    return fail(ATTNLAB_ERR_INVALID, e.what());
  } catch (const NumericError& e) {
    return fail(ATTNLAB_ERR_NUMERIC, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(ATTNLAB_ERR_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(ATTNLAB_ERR_INVALID, e.what());
  } catch (const std::logic_error& e) {
    return fail(ATTNLAB_ERR_INVALID, e.what());
  } catch (const std::exception& e) {
    return fail(ATTNLAB_ERR_INTERNAL, e.what());
  }
}

std::string join_path(const char* dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void refuse_existing(const char* out_dir, const std::vector<const char*>& names, bool overwrite) {
  if (overwrite) return;
  for (const char* name : names) {
    const std::string p = join_path(out_dir, name);
    if (std::filesystem::exists(p))
      throw ExistsError(p + " already exists; enable overwrite to replace it");
  }
}

Variant parse_variant(const char* s) {
  require(s != nullptr, "variant name required");
  const std::string v(s);
  if (v == "indirect") return Variant::indirect;
  if (v == "naive_misaligned") return Variant::naive_misaligned;
  if (v == "cross") return Variant::cross;
  if (v == "standard") return Variant::standard;
  throw std::invalid_argument("unknown variant '" + v +
                              "' (choices: indirect, naive_misaligned, cross)");
}

Task parse_task(const char* s) {
  require(s != nullptr, "task name required");
  const std::string t(s);
  if (t == "sorting") return Task::sorting;
  if (t == "retrieval") return Task::retrieval;
  throw std::invalid_argument("unknown task '" + t + "' (choices: sorting, retrieval)");
}

const char* variant_cstr(Variant v) {
  switch (v) {
    case Variant::standard: return "standard";
    case Variant::cross: return "cross";
    case Variant::naive_misaligned: return "naive_misaligned";
    case Variant::indirect: return "indirect";
  }
  return "unknown";
}

std::vector<int> int_list(const int32_t* data, int32_t count, std::vector<int> fallback) {
  if (data == nullptr || count <= 0) return fallback;
  return std::vector<int>(data, data + count);
}

struct AffineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

AffineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("affine fit needs at least two distinct x");
  AffineFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

double rel_gap(double value, double target) {
  return std::abs(value - target) / std::max(std::abs(target), 1e-12);
}

/* ---- analyze kinds ----------------------------------------------------- */

struct AnalyzeResult {
  bool pass = true;
  std::string summary;
  std::vector<std::string> files;
};

uint64_t cell_stream(uint64_t index) { return index << 32; }

AnalyzeResult run_lemma1(const attnlab_analyze_params& p, const char* out_dir) {
  const auto dims = int_list(p.d_list, p.n_d, {16, 64, 128});
  const auto sigmas = sigma_grid(p.sigma_start, p.sigma_stop, p.sigma_step);
  const std::vector<int> ns = {4, 16};
  CsvWriter w({"d", "n", "sigma", "n_trials", "violation_rate"});
  long total_violations = 0;
  long total_trials = 0;
  uint64_t cell = 0;
  for (int d : dims) {
    for (int n : ns) {
      for (double sigma : sigmas) {
        TrialConfig cfg;
        cfg.d = d;
        cfg.n = n;
        cfg.n_trials = p.trials;
        cfg.seed = p.seed;
        cfg.stream_base = cell_stream(cell++);
        cfg.weights_mode = WeightsMode::random_softmax;
        const double rate = lemma1_check(cfg, NoiseSpec{sigma});
        total_violations += std::lround(rate * static_cast<double>(cfg.n_trials));
        total_trials += cfg.n_trials;
        w.cell(d).cell(n).cell(sigma).cell(cfg.n_trials).cell(rate);
        w.end_row();
      }
    }
  }
  const std::string path = join_path(out_dir, "lemma1.csv");
  write_file_atomic(path, w.str());
  AnalyzeResult r;
  r.pass = total_violations == 0;
  std::ostringstream os;
  os << "lemma1 trials=" << total_trials << " violations=" << total_violations;
  r.summary = os.str();
  r.files = {path};
  return r;
}

AnalyzeResult run_lemma2(const attnlab_analyze_params& p, const char* out_dir) {
  const double tol = p.tolerance > 0.0 ? p.tolerance : 0.03;
  const auto dims = int_list(p.d_list, p.n_d, {64});
  const auto sigmas = sigma_grid(p.sigma_start, p.sigma_stop, p.sigma_step);
  const WeightsMode modes[] = {WeightsMode::uniform, WeightsMode::peaked,
                               WeightsMode::random_softmax};
  const char* mode_names[] = {"uniform", "peaked", "random_softmax"};
  CsvWriter w({"weights", "d", "n", "sigma", "empirical", "theoretical", "rel_error", "n_trials"});
  double worst = 0.0;
  uint64_t cell = 0;
  for (int m = 0; m < 3; ++m) {
    for (int d : dims) {
      for (double sigma : sigmas) {
        TrialConfig cfg;
        cfg.d = d;
        cfg.n = p.n;
        cfg.n_trials = p.trials;
        cfg.seed = p.seed;
        cfg.stream_base = cell_stream(cell++);
        cfg.weights_mode = modes[m];
        const ErrorEstimate est = lemma2_error(cfg, NoiseSpec{sigma});
        worst = std::max(worst, est.rel_error);
        w.cell(mode_names[m]).cell(d).cell(cfg.n).cell(sigma).cell(est.empirical);
        w.cell(est.theoretical).cell(est.rel_error).cell(est.n_trials);
        w.end_row();
      }
    }
  }
  const std::string path = join_path(out_dir, "lemma2.csv");
  write_file_atomic(path, w.str());
  AnalyzeResult r;
  r.pass = worst <= tol;
  std::ostringstream os;
  os << "lemma2 worst_rel_error=" << format_real(worst) << " tol=" << format_real(tol);
  r.summary = os.str();
  r.files = {path};
  return r;
}

AnalyzeResult run_snr(const attnlab_analyze_params& p, const char* out_dir) {
  const double tol = p.tolerance > 0.0 ? p.tolerance : 0.05;
  const auto dims = int_list(p.d_list, p.n_d, {32, 64, 128});
  const auto sigmas = sigma_grid(p.sigma_start, p.sigma_stop, p.sigma_step);
  TrialConfig base;
  base.n = p.n;
  base.n_trials = p.trials;
  base.seed = p.seed;
  base.weights_mode = WeightsMode::uniform;
  const auto rows = snr_sweep(dims, sigmas, base);

  CsvWriter w({"d", "sigma", "snr_empirical", "snr_theoretical", "n_trials"});
  for (const auto& r : rows) {
    w.cell(r.d).cell(r.sigma).cell(r.snr_empirical).cell(r.snr_theoretical).cell(r.n_trials);
    w.end_row();
  }
  const std::string sweep_path = join_path(out_dir, "snr_vs_sigma.csv");
  write_file_atomic(sweep_path, w.str());

  bool pass = true;
  CsvWriter wc({"d", "sigma_crossing"});
  std::ostringstream os;
  os << "snr crossings";
  for (int d : dims) {
    const double c = snr_crossing(rows, d);
    wc.cell(d).cell(c);
    wc.end_row();
    os << " d" << d << "=" << format_real(c);
    if (!(std::abs(c - 1.0) <= tol)) pass = false;
  }
  // Pointwise coincidence across d: the curves depend on sigma alone.
  double spread = 0.0;
  for (double sigma : sigmas) {
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const auto& r : rows) {
      if (r.sigma != sigma) continue;
      lo = first ? r.snr_empirical : std::min(lo, r.snr_empirical);
      hi = first ? r.snr_empirical : std::max(hi, r.snr_empirical);
      first = false;
    }
    if (lo > 0.0) spread = std::max(spread, (hi - lo) / lo);
  }
  if (spread > tol) pass = false;
  const std::string cross_path = join_path(out_dir, "snr_crossings.csv");
  write_file_atomic(cross_path, wc.str());
  os << " max_spread=" << format_real(spread);
  AnalyzeResult r;
  r.pass = pass;
  r.summary = os.str();
  r.files = {sweep_path, cross_path};
  return r;
}

AnalyzeResult run_gamma(const attnlab_analyze_params& p, const char* out_dir) {
  const double tol = p.tolerance > 0.0 ? p.tolerance : 0.05;
  const auto dims = int_list(p.d_list, p.n_d, {16, 32, 64, 128, 256});
  const double shift_sq = 32.0;

  CsvWriter w({"d", "mean_shift_sq", "gamma_empirical", "gamma_theoretical", "rel_error",
               "n_trials"});
  std::vector<double> xs, ys;
  uint64_t cell = 0;
  for (int d : dims) {
    TrialConfig cfg;
    cfg.d = d;
    cfg.n = p.n;
    cfg.n_trials = p.trials;
    cfg.seed = p.seed;
    cfg.stream_base = cell_stream(cell++);
    cfg.weights_mode = WeightsMode::peaked;
    const auto mis = MisalignmentSpec::mean_shift(d, 8.0, shift_sq);
    const GammaEstimate est = gamma_estimate(cfg, mis);
    w.cell(d).cell(shift_sq).cell(est.empirical).cell(est.theoretical).cell(est.rel_error);
    w.cell(est.n_trials);
    w.end_row();
    xs.push_back(static_cast<double>(d));
    ys.push_back(est.empirical);
  }
  const std::string sweep_path = join_path(out_dir, "gamma_vs_d.csv");
  write_file_atomic(sweep_path, w.str());

  // Zero-shift point at d = 64: mu_y = mu_x, so gamma reduces to 2d.
  TrialConfig cfg;
  cfg.d = 64;
  cfg.n = p.n;
  cfg.n_trials = p.trials;
  cfg.seed = p.seed;
  cfg.stream_base = cell_stream(cell++);
  cfg.weights_mode = WeightsMode::peaked;
  const auto aligned_means = MisalignmentSpec::mean_shift(64, 8.0, 0.0);
  const GammaEstimate point = gamma_estimate(cfg, aligned_means);
  const AffineFit fit = least_squares(xs, ys);

  CsvWriter ws({"gamma64_empirical", "gamma64_theoretical", "fit_slope", "fit_intercept",
                "mean_shift_sq", "n_trials"});
  ws.cell(point.empirical).cell(point.theoretical).cell(fit.slope).cell(fit.intercept);
  ws.cell(shift_sq).cell(point.n_trials);
  ws.end_row();
  const std::string fit_path = join_path(out_dir, "gamma_fit.csv");
  write_file_atomic(fit_path, ws.str());

  const bool point_ok = rel_gap(point.empirical, 128.0) <= tol;
  const bool slope_ok = std::abs(fit.slope - 2.0) <= 0.1;
  const bool intercept_ok = rel_gap(fit.intercept, shift_sq) <= tol;
  AnalyzeResult r;
  r.pass = point_ok && slope_ok && intercept_ok;
  std::ostringstream os;
  os << "gamma64=" << format_real(point.empirical) << " slope=" << format_real(fit.slope)
     << " intercept=" << format_real(fit.intercept);
  r.summary = os.str();
  r.files = {sweep_path, fit_path};
  return r;
}

AnalyzeResult run_mha(const attnlab_analyze_params& p, const char* out_dir) {
  const double tol = p.tolerance > 0.0 ? p.tolerance : 0.05;
  const auto dims = int_list(p.d_list, p.n_d, {64});
  const auto heads = int_list(p.heads_list, p.n_heads, {2, 4});
  CsvWriter w({"d", "heads", "error_empirical", "error_theoretical", "error_rel",
               "error_single_head", "snr_empirical", "snr_theoretical", "gamma_empirical",
               "gamma_theoretical", "gamma_rel", "n_trials"});
  bool pass = true;
  double worst = 0.0;
  uint64_t cell = 0;
  for (int d : dims) {
    for (int h : heads) {
      TrialConfig cfg;
      cfg.d = d;
      cfg.n = p.n;
      cfg.n_trials = p.trials;
      cfg.seed = p.seed;
      cfg.stream_base = cell_stream(cell++);
      cfg.weights_mode = WeightsMode::peaked;
      cfg.heads = h;
      const auto mis = MisalignmentSpec::mean_shift(d, 8.0, 32.0);
      const MhaReport rep = mha_variants(cfg, NoiseSpec{1.0}, mis);
      worst = std::max({worst, rep.error.rel_error, rep.gamma.rel_error});
      if (rep.error.rel_error > tol || rep.gamma.rel_error > tol) pass = false;
      w.cell(d).cell(h).cell(rep.error.empirical).cell(rep.error.theoretical);
      w.cell(rep.error.rel_error).cell(rep.error_single.empirical);
      w.cell(rep.snr.empirical).cell(rep.snr.theoretical);
      w.cell(rep.gamma.empirical).cell(rep.gamma.theoretical).cell(rep.gamma.rel_error);
      w.cell(rep.n_trials);
      w.end_row();
    }
  }
  const std::string path = join_path(out_dir, "mha.csv");
  write_file_atomic(path, w.str());
  AnalyzeResult r;
  r.pass = pass;
  std::ostringstream os;
  os << "mha worst_rel_error=" << format_real(worst) << " tol=" << format_real(tol);
  r.summary = os.str();
  r.files = {path};
  return r;
}

/* ---- training helpers --------------------------------------------------- */

ModelSpec resolve_spec(const attnlab_train_params& p, Variant v, Task t) {
  ModelSpec spec = p.fast_profile ? fast_spec(v, t) : ModelSpec{};
  spec.variant = v;
  spec.task = t;
  if (p.n_layers > 0) spec.n_layers = p.n_layers;
  if (p.n_heads > 0) spec.n_heads = p.n_heads;
  if (p.d_model > 0) spec.d_model = p.d_model;
  if (p.f_hidden > 0) spec.f_hidden = p.f_hidden;
  return spec;
}

SortingDataset load_sorting_dir(const std::string& dir) {
  SortingDataset ds;
  ds.train = parse_sorting(read_file((std::filesystem::path(dir) / "train.txt").string()));
  ds.test = parse_sorting(read_file((std::filesystem::path(dir) / "test.txt").string()));
  return ds;
}

RetrievalDataset load_retrieval_dir(const std::string& dir) {
  RetrievalDataset ds;
  ds.train = parse_retrieval(read_file((std::filesystem::path(dir) / "train.txt").string()));
  ds.test = parse_retrieval(read_file((std::filesystem::path(dir) / "test.txt").string()));
  return ds;
}

std::string strip_wall_ms(const TrainLog& log) {
  // wall_ms is the one nondeterministic column; keep it out of artifacts.
  CsvWriter w({"epoch", "train_loss", "test_accuracy"});
  for (const auto& row : log.rows) {
    w.cell(row.epoch).cell(row.train_loss).cell(row.test_accuracy);
    w.end_row();
  }
  return w.str();
}

}  // namespace

extern "C" {

const char* attnlab_version(void) { return "0.1.0"; }

const char* attnlab_error_message(void) { return t_error.c_str(); }

void attnlab_analyze_params_init(attnlab_analyze_params* p) {
  if (p == nullptr) return;
  *p = attnlab_analyze_params{};
  p->sigma_start = 0.5;
  p->sigma_stop = 2.0;
  p->sigma_step = 0.5;
  p->trials = 20000;
  p->seed = 7;
  p->n = 16;
  p->tolerance = 0.0;
}

attnlab_status attnlab_analyze(const char* kind, const attnlab_analyze_params* p,
                               const char* out_dir, int32_t overwrite, int32_t* pass_out,
                               const char** summary_out) {
  return guarded([&]() -> attnlab_status {
    require(kind != nullptr, "analysis kind required");
    require(p != nullptr, "analyze params required");
    require(out_dir != nullptr && out_dir[0] != '\0', "output directory required");
    require(p->trials >= 1, "trials must be >= 1");
    require(p->n >= 1, "n must be >= 1");
    const std::string k(kind);

    AnalyzeResult result;
    if (k == "lemma1") {
      refuse_existing(out_dir, {"lemma1.csv", "manifest.txt"}, overwrite != 0);
      result = run_lemma1(*p, out_dir);
    } else if (k == "lemma2") {
      refuse_existing(out_dir, {"lemma2.csv", "manifest.txt"}, overwrite != 0);
      result = run_lemma2(*p, out_dir);
    } else if (k == "snr") {
      refuse_existing(out_dir, {"snr_vs_sigma.csv", "snr_crossings.csv", "manifest.txt"},
                      overwrite != 0);
      result = run_snr(*p, out_dir);
    } else if (k == "gamma") {
      refuse_existing(out_dir, {"gamma_vs_d.csv", "gamma_fit.csv", "manifest.txt"},
                      overwrite != 0);
      result = run_gamma(*p, out_dir);
    } else if (k == "mha") {
      refuse_existing(out_dir, {"mha.csv", "manifest.txt"}, overwrite != 0);
      result = run_mha(*p, out_dir);
    } else {
      throw std::invalid_argument("unknown analysis kind '" + k +
                                  "' (choices: lemma1, lemma2, snr, gamma, mha)");
    }

    const std::string manifest_path = join_path(out_dir, "manifest.txt");
    write_file_atomic(manifest_path, manifest_for(result.files, out_dir));
    if (pass_out != nullptr) *pass_out = result.pass ? 1 : 0;
    if (summary_out != nullptr) {
      t_summary = result.summary;
      *summary_out = t_summary.c_str();
    }
    return ATTNLAB_OK;
  });
}

attnlab_status attnlab_generate(const char* task, int32_t n_train, int32_t n_test, uint64_t seed,
                                const char* out_dir, int32_t overwrite) {
  return guarded([&]() -> attnlab_status {
    const Task t = parse_task(task);
    require(out_dir != nullptr && out_dir[0] != '\0', "output directory required");
    refuse_existing(out_dir, {"train.txt", "test.txt", "manifest.txt"}, overwrite != 0);
    DatasetSpec spec;
    spec.n_train = n_train;
    spec.n_test = n_test;
    spec.seed = seed;
    spec.task = t;
    spec.validate();
    std::string train_text, test_text;
    if (t == Task::sorting) {
      const SortingDataset ds = gen_sorting(spec);
      train_text = serialize(ds.train);
      test_text = serialize(ds.test);
    } else {
      const RetrievalDataset ds = gen_retrieval(spec);
      train_text = serialize(ds.train);
      test_text = serialize(ds.test);
    }
    const std::string train_path = join_path(out_dir, "train.txt");
    const std::string test_path = join_path(out_dir, "test.txt");
    write_file_atomic(train_path, train_text);
    write_file_atomic(test_path, test_text);
    write_file_atomic(join_path(out_dir, "manifest.txt"),
                      manifest_for({train_path, test_path}, out_dir));
    return ATTNLAB_OK;
  });
}

void attnlab_train_params_init(attnlab_train_params* p) {
  if (p == nullptr) return;
  *p = attnlab_train_params{};
  p->variant = "indirect";
  p->task = "sorting";
  p->fast_profile = 1;
  p->lr = 3e-4;
  p->epochs = 200;
  p->batch_size = 64;
  p->seed = 1;
  p->data_seed = 29;
  p->n_train = 1000;
  p->n_test = 200;
}

attnlab_status attnlab_train_run(const attnlab_train_params* p, const char* data_dir,
                                 const char* out_dir, int32_t overwrite,
                                 double* final_test_accuracy_out) {
  return guarded([&]() -> attnlab_status {
    require(p != nullptr, "train params required");
    require(out_dir != nullptr && out_dir[0] != '\0', "output directory required");
    const Variant v = parse_variant(p->variant);
    const Task t = parse_task(p->task);
    refuse_existing(out_dir, {"metrics.csv", "model.ckpt", "manifest.txt"}, overwrite != 0);

    const ModelSpec spec = resolve_spec(*p, v, t);
    spec.validate();
    TrainConfig cfg;
    cfg.lr = p->lr;
    cfg.epochs = p->epochs;
    cfg.batch_size = p->batch_size;
    cfg.seed = p->seed;
    cfg.weight_decay = p->weight_decay;
    cfg.validate();

    Model model(spec, p->seed);
    TrainLog log;
    if (t == Task::sorting) {
      SortingDataset data;
      if (data_dir != nullptr && data_dir[0] != '\0') {
        data = load_sorting_dir(data_dir);
      } else {
        DatasetSpec dspec;
        dspec.n_train = p->n_train;
        dspec.n_test = p->n_test;
        dspec.seed = p->data_seed;
        data = gen_sorting(dspec);
      }
      log = train(model, data, cfg);
    } else {
      RetrievalDataset data;
      if (data_dir != nullptr && data_dir[0] != '\0') {
        data = load_retrieval_dir(data_dir);
      } else {
        DatasetSpec dspec;
        dspec.n_train = p->n_train;
        dspec.n_test = p->n_test;
        dspec.seed = p->data_seed;
        dspec.task = Task::retrieval;
        data = gen_retrieval(dspec);
      }
      log = train(model, data, cfg);
    }

    const std::string metrics_path = join_path(out_dir, "metrics.csv");
    const std::string ckpt_path = join_path(out_dir, "model.ckpt");
    write_file_atomic(metrics_path, strip_wall_ms(log));
    save_checkpoint(model, ckpt_path);
    write_file_atomic(join_path(out_dir, "manifest.txt"),
                      manifest_for({metrics_path, ckpt_path}, out_dir));
    if (final_test_accuracy_out != nullptr)
      *final_test_accuracy_out = log.rows.empty() ? 0.0 : log.rows.back().test_accuracy;
    return ATTNLAB_OK;
  });
}

struct attnlab_model {
  std::unique_ptr<Model> model;
};

attnlab_status attnlab_model_load(const char* checkpoint_path, attnlab_model** out) {
  return guarded([&]() -> attnlab_status {
    require(checkpoint_path != nullptr, "checkpoint path required");
    require(out != nullptr, "output handle required");
    const Checkpoint ckpt = load_checkpoint(checkpoint_path);
    auto handle = std::make_unique<attnlab_model>();
    handle->model = model_from_checkpoint(ckpt);
    *out = handle.release();
    return ATTNLAB_OK;
  });
}

void attnlab_model_free(attnlab_model* m) { delete m; }

attnlab_status attnlab_model_variant(const attnlab_model* m, const char** name_out) {
  return guarded([&]() -> attnlab_status {
    require(m != nullptr && name_out != nullptr, "model handle and output required");
    t_name = variant_cstr(m->model->spec().variant);
    *name_out = t_name.c_str();
    return ATTNLAB_OK;
  });
}

attnlab_status attnlab_model_task(const attnlab_model* m, const char** name_out) {
  return guarded([&]() -> attnlab_status {
    require(m != nullptr && name_out != nullptr, "model handle and output required");
    t_name = m->model->spec().task == Task::sorting ? "sorting" : "retrieval";
    *name_out = t_name.c_str();
    return ATTNLAB_OK;
  });
}

attnlab_status attnlab_model_param_count(const attnlab_model* m, int64_t* out) {
  return guarded([&]() -> attnlab_status {
    require(m != nullptr && out != nullptr, "model handle and output required");
    *out = m->model->param_count();
    return ATTNLAB_OK;
  });
}

attnlab_status attnlab_model_eval_file(attnlab_model* m, const char* data_path,
                                       double* accuracy_out) {
  return guarded([&]() -> attnlab_status {
    require(m != nullptr, "model handle required");
    require(data_path != nullptr, "dataset path required");
    require(accuracy_out != nullptr, "accuracy output required");
    const std::string text = read_file(data_path);
    if (m->model->spec().task == Task::sorting) {
      *accuracy_out = evaluate(*m->model, parse_sorting(text));
    } else {
      *accuracy_out = evaluate(*m->model, parse_retrieval(text));
    }
    return ATTNLAB_OK;
  });
}

attnlab_status attnlab_repro_fig1(uint64_t seed, int64_t trials, const char* out_dir,
                                  int32_t overwrite) {
  return guarded([&]() -> attnlab_status {
    require(out_dir != nullptr && out_dir[0] != '\0', "output directory required");
    Figure1Options opt;
    opt.out_dir = out_dir;
    opt.seed = seed;
    if (trials > 0) opt.trials = trials;
    opt.overwrite = overwrite != 0;
    figure1_emit(opt);
    return ATTNLAB_OK;
  });
}

void attnlab_fig2_params_init(attnlab_fig2_params* p) {
  if (p == nullptr) return;
  *p = attnlab_fig2_params{};
  p->seed = 29;
  p->n_seeds = 3;
  p->lr = 5e-3;
  p->epochs = 100;
  p->batch_size = 64;
  p->n_train = 1000;
  p->n_test = 200;
  p->fast_profile = 1;
  p->run_sorting = 1;
  p->run_retrieval = 1;
}

attnlab_status attnlab_repro_fig2(const attnlab_fig2_params* p, const char* out_dir,
                                  int32_t overwrite) {
  return guarded([&]() -> attnlab_status {
    require(p != nullptr, "fig2 params required");
    require(out_dir != nullptr && out_dir[0] != '\0', "output directory required");
    require(p->n_seeds >= 1, "n_seeds must be >= 1");
    require(p->run_sorting || p->run_retrieval, "select at least one task");
    std::vector<const char*> expected;
    if (p->run_sorting) expected.push_back("fig2_sorting.csv");
    if (p->run_retrieval) expected.push_back("fig2_retrieval.csv");
    expected.push_back("manifest.txt");
    refuse_existing(out_dir, expected, overwrite != 0);

    const Variant variants[] = {Variant::indirect, Variant::cross, Variant::naive_misaligned};
    std::vector<std::string> files;
    for (Task t : {Task::sorting, Task::retrieval}) {
      if (t == Task::sorting && !p->run_sorting) continue;
      if (t == Task::retrieval && !p->run_retrieval) continue;
      DatasetSpec dspec;
      dspec.n_train = p->n_train;
      dspec.n_test = p->n_test;
      dspec.seed = p->seed;
      dspec.task = t;
      SortingDataset sorting_data;
      RetrievalDataset retrieval_data;
      if (t == Task::sorting)
        sorting_data = gen_sorting(dspec);
      else
        retrieval_data = gen_retrieval(dspec);

      CsvWriter w({"task", "variant", "seed", "epoch", "train_loss", "test_accuracy"});
      const char* task_name = t == Task::sorting ? "sorting" : "retrieval";
      for (Variant v : variants) {
        for (int s = 1; s <= p->n_seeds; ++s) {
          ModelSpec spec = p->fast_profile ? fast_spec(v, t) : ModelSpec{};
          spec.variant = v;
          spec.task = t;
          TrainConfig cfg;
          cfg.lr = p->lr;
          cfg.epochs = p->epochs;
          cfg.batch_size = p->batch_size;
          cfg.seed = static_cast<uint64_t>(s);
          cfg.validate();
          Model model(spec, cfg.seed);
          const TrainLog log = t == Task::sorting ? train(model, sorting_data, cfg)
                                                  : train(model, retrieval_data, cfg);
          for (const auto& row : log.rows) {
            w.cell(task_name).cell(variant_cstr(v)).cell(s).cell(row.epoch);
            w.cell(row.train_loss).cell(row.test_accuracy);
            w.end_row();
          }
        }
      }
      const std::string path =
          join_path(out_dir, t == Task::sorting ? "fig2_sorting.csv" : "fig2_retrieval.csv");
      write_file_atomic(path, w.str());
      files.push_back(path);
    }
    write_file_atomic(join_path(out_dir, "manifest.txt"), manifest_for(files, out_dir));
    return ATTNLAB_OK;
  });
}

}  // extern "C"
