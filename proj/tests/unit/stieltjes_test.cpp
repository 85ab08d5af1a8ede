#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lsslab/errors.hpp"
#include "lsslab/stieltjes.hpp"

using namespace lsslab;

namespace {

// Root of z s^2 + (z + 1 - y) s + 1 = 0 in the upper half plane.
cplx mp_root(cplx z, double y) {
  const cplx b = z + 1.0 - y;
  const cplx disc = std::sqrt(b * b - 4.0 * z);
  const cplx r1 = (-b + disc) / (2.0 * z);
  const cplx r2 = (-b - disc) / (2.0 * z);
  return r1.imag() > 0.0 ? r1 : r2;
}

double residual(const StieltjesSolution& sol, const PopulationSpectrum& t, double y) {
  cplx acc = 0.0;
  for (const auto& a : t.atoms()) acc += a.weight * a.value / (1.0 + a.value * sol.s_under);
  return std::abs(sol.s_under + 1.0 / (sol.z - y * acc));
}

std::vector<PopulationSpectrum> battery() {
  return {PopulationSpectrum::identity(),
          PopulationSpectrum({{0.5, 1.0}}),
          PopulationSpectrum({{0.2, 0.3}, {1.0, 0.7}}),
          PopulationSpectrum({{0.05, 0.1}, {0.2, 0.2}, {0.4, 0.3}, {0.7, 0.25}, {1.0, 0.15}}),
          PopulationSpectrum::uniform(0.1, 1.0, 40)};
}

}  // namespace

TEST(SolveSUnder, ZeroSpectrum) {
  const auto sol = solve_s_under({0.0, 1.0}, PopulationSpectrum({{0.0, 1.0}}), 0.5);
  EXPECT_NEAR(std::abs(sol.s_under - cplx(0.0, 1.0)), 0.0, 1e-14);
}

TEST(SolveSUnder, MatchesMarchenkoPasturRoot) {
  const auto t = PopulationSpectrum::identity();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> re(-1.0, 8.0);
  std::uniform_real_distribution<double> im(0.01, 3.0);
  for (double y : {0.1, 0.5, 1.0, 2.0}) {
    for (int k = 0; k < 100; ++k) {
      const cplx z(re(rng), im(rng));
      const auto sol = solve_s_under(z, t, y);
      EXPECT_LT(std::abs(sol.s_under - mp_root(z, y)), 1e-10) << z << " y=" << y;
    }
  }
  const auto sol = solve_s_under({0.0, 1.0}, t, 1.0);
  EXPECT_LT(std::abs(sol.s_under - mp_root({0.0, 1.0}, 1.0)), 1e-10);
}

TEST(SolveSUnder, ResidualHerglotzAndCompanion) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> re(-2.0, 6.0);
  std::uniform_real_distribution<double> im(0.05, 2.0);
  for (const auto& t : battery()) {
    for (double y : {0.3, 1.7}) {
      for (int k = 0; k < 200; ++k) {
        const cplx z(re(rng), (k % 2 ? 1.0 : -1.0) * im(rng));
        const auto sol = solve_s_under(z, t, y);
        EXPECT_LE(sol.residual, 1e-12);
        EXPECT_LE(residual(sol, t, y), 1e-12);
        EXPECT_GT(sol.s_under.imag() * z.imag(), 0.0);
        EXPECT_GT(sol.s.imag() * z.imag(), 0.0);
        EXPECT_LT(std::abs(sol.s_under - (-(1.0 - y) / z + y * sol.s)), 1e-12);
      }
    }
  }
}

TEST(SolveSUnder, RealAxisOffSupport) {
  const auto t = PopulationSpectrum::identity();
  const double y = 0.25;
  for (double x : {-1.0, 0.1, 3.0, 10.0}) {
    const auto sol = solve_s_under({x, 0.0}, t, y);
    EXPECT_EQ(sol.s_under.imag(), 0.0);
    EXPECT_LT(std::abs(sol.s_under - mp_root({x, 1e-12}, y)), 1e-8);
    EXPECT_LE(sol.residual, 1e-12);
  }
  EXPECT_THROW(solve_s_under({1.0, 0.0}, t, y), Error);
}

TEST(SolveSUnder, WarmStartFromWrongBranchRecovers) {
  const auto t = PopulationSpectrum::identity();
  const cplx z(1.0, 0.3);
  const auto sol = solve_s_under(z, t, 0.5, std::conj(mp_root(z, 0.5)));
  EXPECT_GT(sol.s_under.imag(), 0.0);
}

TEST(InverseMap, Examples) {
  EXPECT_NEAR(std::abs(inverse_map({0.0, 1.0}, PopulationSpectrum({{0.0, 1.0}}), 0.7) -
                       cplx(0.0, 1.0)),
              0.0, 1e-15);
  EXPECT_NEAR(std::abs(inverse_map(-2.0, PopulationSpectrum::identity(), 0.5)), 0.0, 1e-15);
  try {
    inverse_map(-1.0, PopulationSpectrum::identity(), 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kPoleAtAtom);
  }
}

TEST(InverseMap, RoundTrip) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> re(-1.0, 5.0);
  std::uniform_real_distribution<double> im(0.05, 2.0);
  for (const auto& t : battery()) {
    for (int k = 0; k < 50; ++k) {
      const cplx z(re(rng), im(rng));
      const auto sol = solve_s_under(z, t, 0.6);
      EXPECT_LT(std::abs(inverse_map(sol.s_under, t, 0.6) - z), 1e-10);
    }
  }
}

TEST(LsdDensity, MarchenkoPastur) {
  const auto t = PopulationSpectrum::identity();
  const double y = 0.25;
  const double lo = 0.25;
  const double hi = 2.25;
  for (double x : {0.5, 1.0, 1.7}) {
    const double exact = std::sqrt((hi - x) * (x - lo)) / (2.0 * std::numbers::pi * y * x);
    EXPECT_NEAR(lsd_density(x, t, y), exact, 1e-6) << x;
  }
  try {
    lsd_density(2.3, t, y);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kOutsideSupport);
  }
}

TEST(LsdDensity, IntegratesToOne) {
  const auto t = PopulationSpectrum::identity();
  const double y = 0.25;
  const double lo = 0.25;
  const double hi = 2.25;
  std::vector<double> x;
  std::vector<double> w;
  gauss_legendre(2000, x, w);
  double total = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double u = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x[k];
    total += 0.5 * (hi - lo) * w[k] * lsd_density(u, t, y);
  }
  EXPECT_NEAR(total, 1.0, 1e-4);
}

TEST(LssCentering, Oracles) {
  const auto t = PopulationSpectrum({{0.2, 0.3}, {1.0, 0.7}});
  EXPECT_NEAR(lss_centering(TestFunction::parse("x"), t, 0.5, 200), 200.0 * t.moment(1), 1e-8);
  EXPECT_NEAR(lss_centering(TestFunction::parse("1"), t, 0.5, 200), 200.0, 1e-8);
  EXPECT_NEAR(lss_centering(TestFunction::parse("x^2"), PopulationSpectrum::identity(), 0.5, 200),
              200.0 * 1.5, 1e-8);
  EXPECT_NEAR(lss_centering(TestFunction::parse("x^2"), PopulationSpectrum::identity(), 2.0, 200),
              200.0 * 3.0, 1e-8);
}
