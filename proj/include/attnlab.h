/* C interface to the attnlab core. All entry points return a status code;
 * attnlab_error_message() describes the most recent failure on the calling
 * thread. Pointer outputs are only written on ATTNLAB_OK. Strings returned
 * through const char** live in thread-local storage and stay valid until the
 * next attnlab call on the same thread. */
#ifndef ATTNLAB_H
#define ATTNLAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum attnlab_status {
  ATTNLAB_OK = 0,
  ATTNLAB_ERR_INVALID = 1,  /* bad argument or config value */
  ATTNLAB_ERR_IO = 2,       /* filesystem failure */
  ATTNLAB_ERR_EXISTS = 3,   /* output present and overwrite not set */
  ATTNLAB_ERR_NUMERIC = 4,  /* non-finite loss or numeric breakdown */
  ATTNLAB_ERR_INTERNAL = 5,
} attnlab_status;

const char* attnlab_version(void);
const char* attnlab_error_message(void);

/* ---- analysis sweeps -------------------------------------------------- */

typedef struct attnlab_analyze_params {
  const int32_t* d_list; /* working dimensions; NULL uses the kind default */
  int32_t n_d;
  double sigma_start, sigma_stop, sigma_step; /* additive-noise grid */
  int64_t trials;                             /* Monte Carlo resamples per cell */
  uint64_t seed;                              /* root seed for every cell */
  int32_t n;                                  /* values per trial */
  const int32_t* heads_list;                  /* mha only; NULL -> {2, 4} */
  int32_t n_heads;
  double tolerance; /* relative tolerance for the pass verdict; <= 0 -> default */
} attnlab_analyze_params;

void attnlab_analyze_params_init(attnlab_analyze_params* p);

/* kind is one of lemma1, lemma2, snr, gamma, mha. Writes the kind's CSVs and
 * a manifest under out_dir. pass_out gets 1 when every tolerance check of the
 * kind holds, 0 otherwise; summary_out (optional) gets a one-line report. */
attnlab_status attnlab_analyze(const char* kind, const attnlab_analyze_params* p,
                               const char* out_dir, int32_t overwrite, int32_t* pass_out,
                               const char** summary_out);

/* ---- synthetic datasets ------------------------------------------------ */

/* task is sorting or retrieval. Writes train.txt, test.txt and manifest.txt. */
attnlab_status attnlab_generate(const char* task, int32_t n_train, int32_t n_test, uint64_t seed,
                                const char* out_dir, int32_t overwrite);

/* ---- training ---------------------------------------------------------- */

typedef struct attnlab_train_params {
  const char* variant; /* indirect, naive_misaligned, cross */
  const char* task;    /* sorting, retrieval */
  int32_t fast_profile; /* 1: 2 layers, d = 64; 0: 6 layers, d = 128 */
  int32_t n_layers, n_heads, d_model, f_hidden; /* 0 keeps the profile value */
  double lr;
  int32_t epochs, batch_size;
  double weight_decay;
  uint64_t seed;      /* model init and batch order */
  uint64_t data_seed; /* dataset generation when no data_dir is given */
  int32_t n_train, n_test;
} attnlab_train_params;

void attnlab_train_params_init(attnlab_train_params* p);

/* Trains one model. data_dir may be NULL (the dataset is generated from
 * data_seed) or a directory produced by attnlab_generate for the same task.
 * Writes metrics.csv, model.ckpt and manifest.txt under out_dir. */
attnlab_status attnlab_train_run(const attnlab_train_params* p, const char* data_dir,
                                 const char* out_dir, int32_t overwrite,
                                 double* final_test_accuracy_out);

/* ---- models ------------------------------------------------------------ */

typedef struct attnlab_model attnlab_model;

attnlab_status attnlab_model_load(const char* checkpoint_path, attnlab_model** out);
void attnlab_model_free(attnlab_model* m);
attnlab_status attnlab_model_variant(const attnlab_model* m, const char** name_out);
attnlab_status attnlab_model_task(const attnlab_model* m, const char** name_out);
attnlab_status attnlab_model_param_count(const attnlab_model* m, int64_t* out);
/* data_path holds serialized instances of the model's task. */
attnlab_status attnlab_model_eval_file(attnlab_model* m, const char* data_path,
                                       double* accuracy_out);

/* ---- figure reproduction ----------------------------------------------- */

/* Emits snr_vs_sigma.csv, snr_vs_d_misaligned.csv, gamma_vs_d.csv and
 * manifest.txt. Byte-identical across reruns with the same arguments. */
attnlab_status attnlab_repro_fig1(uint64_t seed, int64_t trials, const char* out_dir,
                                  int32_t overwrite);

typedef struct attnlab_fig2_params {
  uint64_t seed;    /* root seed: dataset generation plus run seed base */
  int32_t n_seeds;  /* training runs per variant, seeds 1..n_seeds */
  double lr;
  int32_t epochs, batch_size;
  int32_t n_train, n_test;
  int32_t fast_profile;
  int32_t run_sorting, run_retrieval;
} attnlab_fig2_params;

void attnlab_fig2_params_init(attnlab_fig2_params* p);

/* Trains every variant on the selected tasks and writes one accuracy-curve
 * CSV per task plus manifest.txt under out_dir. */
attnlab_status attnlab_repro_fig2(const attnlab_fig2_params* p, const char* out_dir,
                                  int32_t overwrite);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ATTNLAB_H */
