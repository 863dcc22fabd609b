#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace attnlab {

// Monte-Carlo estimators for attention over corrupted values. The clean
// output is o* = sum_i a_i y_i with convex weights a; the corrupted output
// replaces y_i by y_i + eps_i (additive noise) or by a draw from a different
// distribution entirely (misaligned values). Everything here works on raw
// buffers, no autodiff.

enum class WeightsMode { uniform, peaked, random_softmax };
enum class InputDist { gaussian, uniform };

struct NoiseSpec {
  double sigma = 1.0;  // component-wise std dev of the additive noise
};

// Component means and std devs for the aligned (x) and misaligned (y) value
// distributions. Empty mu_* means zeros, empty sigma_* means ones; otherwise
// the vector length must equal the working dimension d.
struct MisalignmentSpec {
  std::vector<double> mu_x, mu_y;
  std::vector<double> sigma_x, sigma_y;

  // mu_x = s * 1/sqrt(d) with ||mu_x||^2 = mu_x_norm_sq, and mu_y shifted
  // further along the same direction so ||mu_y - mu_x||^2 = shift_norm_sq.
  static MisalignmentSpec mean_shift(int d, double mu_x_norm_sq, double shift_norm_sq);

  double mean_shift_sq(int d) const;
};

struct TrialConfig {
  int d = 64;
  int n = 16;  // number of value vectors per trial
  long n_trials = 10000;
  uint64_t seed = 0;
  // Distinguishes cells of a sweep sharing one seed. Trial t draws from
  // stream (seed, stream_base | (t+1)); static draws such as projection
  // matrices come from stream (seed, stream_base).
  uint64_t stream_base = 0;
  WeightsMode weights_mode = WeightsMode::uniform;
  int heads = 1;  // > 1 routes through per-head value/output projections
  InputDist input_dist = InputDist::gaussian;

  void validate() const;
};

struct ErrorEstimate {
  double empirical = 0.0;
  double theoretical = 0.0;
  double rel_error = 0.0;  // |empirical - theoretical| / max(theoretical, 1e-12)
  long n_trials = 0;
};

struct SnrEstimate {
  double empirical = 0.0;
  double theoretical = 0.0;
  double rel_error = 0.0;
  long n_trials = 0;
};

struct GammaEstimate {
  double empirical = 0.0;
  // 2d + ||mu_y - mu_x||^2 (unit variances, peaked weights; for several
  // heads the per-head shifts are averaged).
  double theoretical = 0.0;
  // Exact second moment for the actual weights, variances and projections.
  double theoretical_general = 0.0;
  double rel_error = 0.0;  // empirical vs theoretical
  long n_trials = 0;
};

// Fraction of trials where ||o_hat - o*|| exceeds sum_i a_i ||eps_i|| by more
// than 1e-9. Both sides are computed from an explicit noisy forward pass.
double lemma1_check(const TrialConfig& cfg, const NoiseSpec& noise);

// Mean squared output error against sigma^2 * (d/H) * sum_h sum_i (a_i^h)^2.
// For random weights the target is averaged over the same draws.
ErrorEstimate lemma2_error(const TrialConfig& cfg, const NoiseSpec& noise);

// E||o*||^2 / E||o_hat - o*||^2 for unit-variance zero-mean values under
// additive noise; the target is 1/sigma^2. sigma = 0 reports +inf.
SnrEstimate snr_point(const TrialConfig& cfg, const NoiseSpec& noise);

struct SnrRow {
  int d = 0;
  double sigma = 0.0;
  double snr_empirical = 0.0;
  double snr_theoretical = 0.0;
  long n_trials = 0;
};

// Cells are laid out row-major over (d, sigma); cell k uses
// stream_base = k << 32 on top of base.seed.
std::vector<SnrRow> snr_sweep(const std::vector<int>& d_list,
                              const std::vector<double>& sigma_list,
                              const TrialConfig& base);

// Linear interpolation of the first sigma where the empirical curve crosses
// 1 for the given d. NaN when the curve never crosses.
double snr_crossing(const std::vector<SnrRow>& rows, int d);

// SNR when the corruption is misalignment: o* from the x distribution,
// o_hat from the y distribution.
SnrEstimate snr_misaligned(const TrialConfig& cfg, const MisalignmentSpec& mis);

// E||o_hat - o*||^2 under misalignment.
GammaEstimate gamma_estimate(const TrialConfig& cfg, const MisalignmentSpec& mis);

struct MhaReport {
  int d = 0;
  int heads = 0;
  long n_trials = 0;
  ErrorEstimate error;            // additive-noise output error, H heads
  ErrorEstimate error_single;     // same noise level, single head
  SnrEstimate snr;                // H heads
  GammaEstimate gamma;            // misalignment, H heads
  GammaEstimate gamma_single;     // single head
  std::vector<double> per_head_error_empirical;
  std::vector<double> per_head_error_theoretical;  // sigma^2 d_h sum_i (a_i^h)^2
};

// Multi-head variants of the estimators above plus single-head baselines.
// Always routes through the projection path, including heads = 1.
MhaReport mha_variants(const TrialConfig& cfg, const NoiseSpec& noise,
                       const MisalignmentSpec& mis);

struct Figure1Options {
  std::string out_dir;
  uint64_t seed = 7;
  long trials = 20000;
  bool overwrite = false;

  // snr_vs_sigma.csv
  std::vector<int> snr_d = {32, 64, 128};
  double sigma_start = 0.1;
  double sigma_stop = 2.0;
  double sigma_step = 0.1;
  int snr_n = 8;

  // snr_vs_d_misaligned.csv: ||mu_x||^2 = 8, mu_y = 2 mu_x
  std::vector<int> mis_d = {8, 16, 32, 64, 128, 256};

  // gamma_vs_d.csv
  std::vector<int> gamma_d = {16, 32, 64, 128, 256};
  std::vector<double> gamma_shift_sq = {0.0, 32.0};
};

std::vector<double> sigma_grid(double start, double stop, double step);

// Writes snr_vs_sigma.csv, snr_vs_d_misaligned.csv, gamma_vs_d.csv and
// manifest.txt under out_dir; returns the written paths. Output is a pure
// function of the options, so a rerun reproduces the bytes exactly.
std::vector<std::string> figure1_emit(const Figure1Options& opt);

}  // namespace attnlab
