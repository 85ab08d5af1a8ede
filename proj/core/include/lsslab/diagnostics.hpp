#pragma once

// Kolmogorov-Smirnov distance, rate fitting, Stein-equation machinery, the
// quadratic-form moment probe and the nested Monte-Carlo variance estimate.

#include <cstdint>
#include <span>
#include <vector>

#include "lsslab/contour.hpp"
#include "lsslab/spectral_model.hpp"

namespace lsslab {

// ---------------------------------------------------------------- KS

/// sup_x |F_m(x) - Phi(x)| by the exact order-statistic formula.
double ks_to_normal(std::span<const double> samples);

// ---------------------------------------------------------------- rate fit

struct RatePoint {
  double n = 0.0;
  double ks = 0.0;
};

struct RateFit {
  double exponent = 0.0;
  double intercept = 0.0;
  double ci_lo = 0.0;  // pairs bootstrap over points, small-sample corrected
  double ci_hi = 0.0;
  std::vector<RatePoint> points;
};

struct RateFitOptions {
  int resamples = 1000;
  double level = 0.90;
  std::uint64_t seed = 0x5eedULL;
};

/// Least squares of log ks on log n.
RateFit fit_rate(std::span<const RatePoint> points, const RateFitOptions& options = {});

// ---------------------------------------------------------------- Stein

/// Ramp h(w) = 1 for w <= w0, 1 + (w0 - w) / theta on (w0, w0 + theta], 0 beyond.
struct SteinContext {
  double w0 = 0.0;
  double theta = 1.0;
  double Nh = 0.0;  // E h(Z), Z standard normal
};

SteinContext make_stein_context(double w0, double theta);
double stein_h(const SteinContext& ctx, double w);
double stein_Nh(const SteinContext& ctx);
double stein_Nh(double w0, double theta);
/// Bounded solution of g' - w g = h - Nh, for |w| <= 30.
double stein_solution(const SteinContext& ctx, double w);

struct SteinBoundReport {
  std::size_t points = 0;
  std::size_t derivative_points = 0;  // grid points away from the kinks
  double min_g = 0.0;
  double max_g = 0.0;
  double max_abs_gprime = 0.0;
  double gprime_range = 0.0;  // max g' - min g'
  double max_residual = 0.0;  // |g' - w g - (h - Nh)|
  std::size_t violations = 0;
};

/// Checks 0 <= g <= 1, |g'| <= 1 and |g'(u) - g'(v)| <= 1 on an even grid of
/// [lo, hi]. g' is a central difference with step `fd_step`; grid points
/// within two spacings of w0 or w0 + theta are left out of the g' checks.
SteinBoundReport stein_bound_check(const SteinContext& ctx, double lo, double hi,
                                   std::size_t points, double fd_step = 1e-6);

// ---------------------------------------------------------------- quadratic forms

enum class QformMatrix { kZero, kFixedIdentity, kResolvent };

struct QformOptions {
  QformMatrix matrix = QformMatrix::kFixedIdentity;
  cplx z{0.0, 1.0};           // resolvent point
  std::size_t draws_per_matrix = 1000;  // r draws sharing one resolvent
  int threads = 1;
};

struct QformPoint {
  std::size_t n = 0;
  std::size_t p = 0;
  double moment = 0.0;
  double std_error = 0.0;
};

struct QformProbe {
  std::vector<QformPoint> points;
  double slope = 0.0;
};

/// Monte-Carlo E|r* A r - n^{-1} tr T A|^k with r = T^{1/2} x / sqrt n and
/// real Gaussian x, p = round(y n), and the log-log slope over `n_grid`.
QformProbe qform_probe(const PopulationSpectrum& spectrum, double y,
                       const std::vector<std::size_t>& n_grid, int k, std::size_t replicates,
                       std::uint64_t seed, const QformOptions& options = {});

// ---------------------------------------------------------------- nested MC

struct Sigma0Options {
  std::size_t n_small = 32;
  std::size_t inner_reps = 32;  // split into two independent halves
  std::size_t outer_reps = 400;
  std::uint64_t seed = 0;
  int nodes = 32;
  double max_work = 1e12;  // cap on projected floating-point work
  int threads = 1;
};

struct Sigma0Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t p = 0;
  std::size_t n = 0;
  double projected_work = 0.0;
};

double sigma0_projected_work(std::size_t p, const Sigma0Options& options);

/// sum_j E Y_j^2 with Y_j = -(1/2 pi i) closed-integral f'(z) (-z s(z)) E_j eps_j(z) dz,
/// s the companion transform standing in for b_j. Real Gaussian entries.
Sigma0Estimate sigma0_nested_mc(const TestFunction& f, const PopulationSpectrum& spectrum,
                                double y, const Sigma0Options& options = {});

}  // namespace lsslab
