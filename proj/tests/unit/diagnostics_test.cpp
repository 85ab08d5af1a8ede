#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "lsslab/clt_moments.hpp"
#include "lsslab/diagnostics.hpp"
#include "lsslab/errors.hpp"
#include "lsslab/normal.hpp"

using namespace lsslab;

namespace {

template <class Fn>
ErrorKind kind_of(Fn fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::kInvalidArgument;
}

}  // namespace

TEST(KsToNormal, Examples) {
  const std::vector<double> zero{0.0};
  EXPECT_DOUBLE_EQ(ks_to_normal(zero), 0.5);
  const std::vector<double> quartiles{normal_quantile(0.25), normal_quantile(0.75)};
  EXPECT_NEAR(ks_to_normal(quartiles), 0.25, 1e-15);
  for (int m : {1, 7, 100}) {
    std::vector<double> x;
    for (int i = 1; i <= m; ++i) x.push_back(normal_quantile((i - 0.5) / m));
    EXPECT_NEAR(ks_to_normal(x), 0.5 / m, 1e-14);
  }
  EXPECT_EQ(kind_of([] { ks_to_normal(std::vector<double>{}); }), ErrorKind::kEmptySample);
}

TEST(KsToNormal, PermutationAndDuplicatedMedian) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  std::vector<double> x(301);
  for (auto& v : x) v = normal(rng);
  const double base = ks_to_normal(x);
  std::shuffle(x.begin(), x.end(), rng);
  EXPECT_EQ(ks_to_normal(x), base);
  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  x.push_back(sorted[150]);
  EXPECT_LE(ks_to_normal(x), base + 1.0 / 301.0);
}

TEST(Erfcx, MatchesDirectFormula) {
  for (double x : {-3.0, -0.5, 0.0, 0.7, 4.0, 12.0}) {
    EXPECT_NEAR(erfcx(x), std::exp(x * x) * std::erfc(x), 1e-13 * erfcx(x));
  }
  // Continuity across the switch to the continued fraction.
  EXPECT_NEAR(erfcx(20.0 - 1e-12), erfcx(20.0), 1e-13 * erfcx(20.0));
  EXPECT_NEAR(erfcx(25.0) * 25.0 * std::sqrt(std::numbers::pi), 1.0 - 1.0 / 1250.0, 2e-6);
}

TEST(FitRate, ExactLine) {
  std::vector<RatePoint> pts;
  for (double n : {128.0, 256.0, 512.0, 1024.0}) pts.push_back({n, 2.0 / std::sqrt(n)});
  const auto fit = fit_rate(pts);
  EXPECT_NEAR(fit.exponent, -0.5, 1e-12);
  EXPECT_NEAR(fit.intercept, std::log(2.0), 1e-12);
  EXPECT_LE(fit.ci_lo, fit.exponent);
  EXPECT_GE(fit.ci_hi, fit.exponent);
}

TEST(FitRate, Errors) {
  const std::vector<RatePoint> two{{128.0, 0.1}, {256.0, 0.07}};
  EXPECT_EQ(kind_of([&] { fit_rate(two); }), ErrorKind::kTooFewPoints);
  const std::vector<RatePoint> zero{{128.0, 0.1}, {256.0, 0.0}, {512.0, 0.05}};
  EXPECT_EQ(kind_of([&] { fit_rate(zero); }), ErrorKind::kNonPositiveKs);
}

TEST(FitRate, BootstrapCoverage) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> noise(0.0, 0.05);
  int covered = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<RatePoint> pts;
    for (double n = 64.0; n <= 8192.0; n *= 2.0)
      pts.push_back({n, std::pow(n, -0.5) * std::exp(noise(rng))});
    RateFitOptions opt;
    opt.seed = 1000 + trial;
    const auto fit = fit_rate(pts, opt);
    covered += (fit.ci_lo <= -0.5 && -0.5 <= fit.ci_hi) ? 1 : 0;
  }
  EXPECT_GE(covered, 85);
}

TEST(Stein, RampExamples) {
  const auto ctx = make_stein_context(0.3, 0.8);
  EXPECT_EQ(stein_h(ctx, 0.3), 1.0);
  EXPECT_DOUBLE_EQ(stein_h(ctx, 0.7), 0.5);
  EXPECT_EQ(stein_h(ctx, 1.9), 0.0);
  double prev = 2.0;
  for (double w = -3.0; w < 3.0; w += 0.01) {
    EXPECT_LE(stein_h(ctx, w), prev);
    prev = stein_h(ctx, w);
  }
}

TEST(Stein, NhClosedForm) {
  EXPECT_NEAR(stein_Nh(0.4, 1e-7), normal_cdf(0.4), 1e-7);
  EXPECT_NEAR(stein_Nh(40.0, 1.0), 1.0, 1e-15);
  const auto ctx = make_stein_context(0.0, 1.0);
  const double oracle = 0.5 + boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                                  [&](double x) { return stein_h(ctx, x) * normal_pdf(x); }, 0.0,
                                  1.0, 30, 1e-14);
  EXPECT_NEAR(ctx.Nh, oracle, 1e-12);
  double prev = 0.0;
  for (double w0 = -5.0; w0 < 5.0; w0 += 0.1) {
    EXPECT_GE(stein_Nh(w0, 0.5), prev);
    prev = stein_Nh(w0, 0.5);
  }
}

TEST(Stein, ConstantRampGivesZeroSolution) {
  // h = 1 on [-30, 30]; the ramp past 40 leaves a remainder of order exp(-800).
  const auto ctx = make_stein_context(40.0, 1.0);
  for (double w = -30.0; w <= 30.0; w += 0.5) EXPECT_LE(std::abs(stein_solution(ctx, w)), 1e-150);
  EXPECT_EQ(kind_of([&] { stein_solution(ctx, 30.5); }), ErrorKind::kOutOfRange);
}

TEST(Stein, BoundBatteryAndResidual) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> w0(-3.0, 3.0);
  std::uniform_real_distribution<double> log_theta(std::log(0.01), std::log(2.0));
  for (int k = 0; k < 20; ++k) {
    const auto ctx = make_stein_context(w0(rng), std::exp(log_theta(rng)));
    const auto rep = stein_bound_check(ctx, -6.0, 6.0, 10000);
    EXPECT_EQ(rep.violations, 0u);
    EXPECT_GE(rep.min_g, 0.0);
    EXPECT_LE(rep.max_g, 1.0);
    EXPECT_LE(rep.max_abs_gprime, 1.0);
    EXPECT_LE(rep.gprime_range, 1.0);
    EXPECT_LE(rep.max_residual, 1e-6);
  }
}

TEST(Stein, SolutionStableInTails) {
  const auto ctx = make_stein_context(0.5, 0.3);
  for (double w : {-30.0, -25.0, 25.0, 30.0}) {
    const double g = stein_solution(ctx, w);
    EXPECT_TRUE(std::isfinite(g));
    EXPECT_GE(g, 0.0);
    EXPECT_LE(g, 1.0);
  }
}

TEST(QformProbe, ZeroMatrix) {
  QformOptions opt;
  opt.matrix = QformMatrix::kZero;
  const auto probe = qform_probe(PopulationSpectrum::identity(), 0.5, {16, 32}, 2, 100, 1, opt);
  for (const auto& pt : probe.points) EXPECT_EQ(pt.moment, 0.0);
  const auto zero_t = qform_probe(PopulationSpectrum({{0.0, 1.0}}), 0.5, {16, 32}, 4, 100, 1);
  for (const auto& pt : zero_t.points) EXPECT_EQ(pt.moment, 0.0);
}

TEST(QformProbe, SecondMomentOfIdentityForm) {
  const auto probe = qform_probe(PopulationSpectrum::identity(), 0.5, {64, 128, 256}, 2, 40000, 3);
  for (const auto& pt : probe.points) {
    const double exact = 2.0 * pt.p / (static_cast<double>(pt.n) * pt.n);
    EXPECT_NEAR(pt.moment, exact, 4.0 * pt.std_error);
  }
  EXPECT_NEAR(probe.slope, -1.0, 0.1);
}

TEST(QformProbe, ResolventSlopes) {
  QformOptions opt;
  opt.matrix = QformMatrix::kResolvent;
  opt.draws_per_matrix = 500;
  const auto probe = qform_probe(PopulationSpectrum::identity(), 0.5, {32, 64, 128}, 2, 20000, 5, opt);
  EXPECT_NEAR(probe.slope, -1.0, 0.15);
}

TEST(Sigma0, ZeroSpectrumAndGuards) {
  Sigma0Options opt;
  opt.n_small = 8;
  opt.inner_reps = 4;
  opt.outer_reps = 3;
  const auto est = sigma0_nested_mc(TestFunction::parse("x"), PopulationSpectrum({{0.0, 1.0}}), 0.5, opt);
  EXPECT_EQ(est.value, 0.0);
  opt.max_work = 10.0;
  EXPECT_EQ(kind_of([&] {
              sigma0_nested_mc(TestFunction::parse("x"), PopulationSpectrum::identity(), 0.5, opt);
            }),
            ErrorKind::kCostBudgetExceeded);
  opt.max_work = 1e12;
  opt.n_small = 65;
  EXPECT_EQ(kind_of([&] {
              sigma0_nested_mc(TestFunction::parse("x"), PopulationSpectrum::identity(), 0.5, opt);
            }),
            ErrorKind::kInvalidArgument);
}

TEST(Sigma0, MinimalDimensionSelfConsistent) {
  Sigma0Options opt;
  opt.n_small = 2;
  opt.inner_reps = 1000;
  opt.outer_reps = 100;
  opt.seed = 1;
  const auto f = TestFunction::parse("x");
  const auto t = PopulationSpectrum::identity();
  const auto a = sigma0_nested_mc(f, t, 1.0, opt);
  opt.seed = 2;
  const auto b = sigma0_nested_mc(f, t, 1.0, opt);
  EXPECT_EQ(a.p, 2u);
  EXPECT_GT(a.value, 0.0);
  EXPECT_LT(std::abs(a.value - b.value),
            3.0 * std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error));
}
