#include <gtest/gtest.h>

#include <cmath>

#include "lsslab/clt_moments.hpp"
#include "lsslab/errors.hpp"

using namespace lsslab;

namespace {

const ContourParams kDefault{};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(KernelA, ZeroSpectrumAndSymmetry) {
  const auto zero = PopulationSpectrum({{0.0, 1.0}});
  EXPECT_EQ(kernel_a({0.3, 1.0}, {2.0, -0.5}, zero, 0.5), cplx(0.0));
  const auto t = PopulationSpectrum({{0.2, 0.3}, {1.0, 0.7}});
  const cplx z1(0.4, 0.9);
  const cplx z2(2.2, -1.3);
  EXPECT_LT(std::abs(kernel_a(z1, z2, t, 0.8) - kernel_a(z2, z1, t, 0.8)), 1e-15);
}

TEST(KernelA, InsideUnitDiskOnContourGrid) {
  const auto t = PopulationSpectrum::identity();
  const auto f = TestFunction::parse("x");
  for (double y : {0.25, 1.0, 2.0}) {
    const auto pair = build_contour_pair(t, y, kDefault, f);
    const auto r1 = pair.inner.rule(16);
    const auto r2 = pair.outer.rule(16);
    double worst = 0.0;
    for (const auto& z1 : r1.nodes)
      for (const auto& z2 : r2.nodes) worst = std::max(worst, std::abs(kernel_a(z1, z2, t, y)));
    EXPECT_LT(worst, 1.0) << "y=" << y;
  }
}

TEST(MeanCorrection, ConstantAndLinearVanish) {
  for (const auto& t : {PopulationSpectrum::identity(), PopulationSpectrum({{0.2, 0.3}, {1.0, 0.7}})}) {
    for (double y : {0.3, 0.5, 2.0}) {
      const auto c = build_contour(t, y, kDefault, TestFunction::parse("x"));
      EXPECT_LE(std::abs(mean_correction(TestFunction::parse("1"), t, y, c)), 1e-8);
      EXPECT_LE(std::abs(mean_correction(TestFunction::parse("x"), t, y, c)), 1e-8);
    }
  }
}

TEST(MeanCorrection, SecondMomentOracle) {
  // Real Gaussian entries: E tr (X X^T)^2 = p n (p + n + 1).
  const double p = 100.0;
  const double n = 200.0;
  const double y = p / n;
  const double oracle = p * n * (p + n + 1.0) / (n * n) - p * (1.0 + y);
  const auto t = PopulationSpectrum::identity();
  const auto f = TestFunction::parse("x^2");
  const double mu = mean_correction(f, t, y, build_contour(t, y, kDefault, f));
  EXPECT_LT(rel(mu, oracle), 1e-6);
}

TEST(Variance, LinearStatisticOracle) {
  const auto t = PopulationSpectrum::identity();
  const auto f = TestFunction::parse("x");
  for (double y : {0.25, 0.5, 1.5}) {
    const auto m = compute_moments(f, t, y, CltCase::kRealGaussian);
    EXPECT_LT(rel(m.sigma, 2.0 * y), 1e-6);
    EXPECT_LT(m.kernel_max_abs, 1.0);
    EXPECT_LE(std::abs(m.sigma_imag), 1e-8 * (1.0 + m.sigma));
  }
}

TEST(Variance, ConstantIsZeroAndPositiveOtherwise) {
  const auto t = PopulationSpectrum({{0.2, 0.3}, {1.0, 0.7}});
  const auto m = compute_moments(TestFunction::parse("3"), t, 0.5, CltCase::kRealGaussian);
  EXPECT_EQ(m.sigma, 0.0);
  EXPECT_EQ(m.mu, 0.0);
  for (const char* f : {"x", "x^2", "x^3+x"})
    for (const auto& tt : {PopulationSpectrum::identity(), t})
      for (double y : {0.3, 2.0})
        EXPECT_GT(compute_moments(TestFunction::parse(f), tt, y, CltCase::kRealGaussian).sigma, 0.0);
}

TEST(Moments, ScalingInF) {
  const auto t = PopulationSpectrum({{0.2, 0.3}, {1.0, 0.7}});
  const auto f = TestFunction::parse("x^3+x");
  const auto base = compute_moments(f, t, 0.5, CltCase::kRealGaussian);
  const auto scaled = compute_moments(f.scaled(-2.5), t, 0.5, CltCase::kRealGaussian);
  EXPECT_LT(rel(scaled.mu, -2.5 * base.mu), 1e-9);
  EXPECT_LT(rel(scaled.sigma, 6.25 * base.sigma), 1e-9);
}

TEST(Moments, ContourInvariance) {
  const auto t = PopulationSpectrum::identity();
  const auto f = TestFunction::parse("x^2");
  const auto ref = compute_moments(f, t, 0.5, CltCase::kRealGaussian, {0.05, 1.0, 64, 1e-9});
  for (const auto& [eps, v0] : {std::pair{0.1, 0.5}, std::pair{0.2, 1.5}}) {
    const auto m = compute_moments(f, t, 0.5, CltCase::kRealGaussian, {eps, v0, 64, 1e-9});
    EXPECT_LT(rel(m.mu, ref.mu), 1e-7);
    EXPECT_LT(rel(m.sigma, ref.sigma), 1e-7);
  }
}

TEST(Moments, ComplexCaseHasZeroMean) {
  const auto m = compute_moments(TestFunction::parse("x^2"), PopulationSpectrum::identity(), 0.5,
                                 CltCase::kComplexGaussian);
  EXPECT_EQ(m.mu, 0.0);
  EXPECT_GT(m.sigma, 0.0);
}

TEST(Moments, LogTestFunction) {
  const auto t = PopulationSpectrum::identity();
  const double y = 0.25;
  const ContourParams params{0.05, 1.0, 64, 1e-9};
  const auto m = compute_moments(TestFunction::log(), t, y, CltCase::kRealGaussian, params);
  // Known limits for log det of a real Wishart matrix: mean log(1 - y) / 2, variance -2 log(1 - y).
  EXPECT_NEAR(m.mu, 0.5 * std::log(1.0 - y), 1e-7);
  EXPECT_NEAR(m.sigma, -2.0 * std::log(1.0 - y), 1e-7);
}

TEST(Normalize, Examples) {
  CltMoments m;
  m.mu = 0.0;
  m.sigma = 1.0;
  EXPECT_EQ(normalize(0.0, m), 0.0);
  m.mu = 1.0;
  m.sigma = 4.0;
  EXPECT_EQ(normalize(3.0, m), 1.0);
  m.mu = 0.0;
  m.sigma = 2.0;
  m.clt_case = CltCase::kComplexGaussian;
  EXPECT_EQ(normalize(1.0, m), 1.0);
  m.sigma = 0.0;
  try {
    normalize(1.0, m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kZeroVariance);
  }
}
