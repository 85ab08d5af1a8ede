#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lsslab/errors.hpp"
#include "lsslab/spectral_model.hpp"

using namespace lsslab;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::kInvalidArgument;
}

}  // namespace

TEST(SupportInterval, IdentityBelowOne) {
  const auto s = support_interval(PopulationSpectrum::identity(), 0.25);
  EXPECT_DOUBLE_EQ(s.lo, 0.25);
  EXPECT_DOUBLE_EQ(s.hi, 2.25);
}

TEST(SupportInterval, IdentityAboveOneHasZeroLeftEnd) {
  const auto s = support_interval(PopulationSpectrum::identity(), 1.5);
  EXPECT_EQ(s.lo, 0.0);
  EXPECT_NEAR(s.hi, std::pow(1.0 + std::sqrt(1.5), 2), 1e-14);
  EXPECT_NEAR(s.hi, 4.9494897, 1e-6);
}

TEST(SupportInterval, TwoAtoms) {
  const PopulationSpectrum t({{1.0, 0.5}, {2.0, 0.5}}, true);
  const auto s = support_interval(t, 0.25);
  EXPECT_DOUBLE_EQ(s.lo, 0.25);
  EXPECT_DOUBLE_EQ(s.hi, 4.5);
}

TEST(SupportInterval, UpperEndMonotoneAndLowerZeroAboveOne) {
  const auto t = PopulationSpectrum({{0.3, 0.4}, {0.9, 0.6}});
  double prev = 0.0;
  for (double y = 1.0; y < 10.0; y += 0.25) {
    const auto s = support_interval(t, y);
    EXPECT_EQ(s.lo, 0.0);
    EXPECT_GT(s.hi, prev);
    prev = s.hi;
  }
}

TEST(PopulationSpectrum, RejectsBadAtoms) {
  EXPECT_EQ(kind_of([] { PopulationSpectrum({{-0.1, 1.0}}); }), ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of([] { PopulationSpectrum({{0.5, 0.0}, {0.2, 1.0}}); }),
            ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of([] { PopulationSpectrum({{0.5, 0.4}, {0.2, 0.4}}); }),
            ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of([] { PopulationSpectrum({{2.0, 1.0}}); }), ErrorKind::kConstraintViolation);
  EXPECT_NO_THROW(PopulationSpectrum({{2.0, 1.0}}, true));
}

TEST(PopulationSpectrum, RenormalizationIsIdempotent) {
  const auto t = PopulationSpectrum::normalized({{0.1, 3.0}, {0.5, 1.0}, {1.0, 2.0}});
  const auto once = t.renormalized();
  EXPECT_EQ(once, once.renormalized());
  double total = 0.0;
  for (const auto& a : once.atoms()) total += a.weight;
  EXPECT_NEAR(total, 1.0, 1e-15);
}

TEST(PopulationSpectrum, UniformGridMoments) {
  const auto t = PopulationSpectrum::uniform(0.2, 1.0, 200);
  EXPECT_EQ(t.atoms().size(), 200u);
  EXPECT_NEAR(t.moment(1), 0.6, 1e-12);
}

TEST(PopulationSpectrum, DiagonalApportionment) {
  const PopulationSpectrum t({{0.25, 0.5}, {1.0, 0.5}});
  const auto d = t.diagonal(5);
  ASSERT_EQ(d.size(), 5u);
  // 2.5 / 2.5 split: the tie goes to the larger atom.
  EXPECT_EQ(std::count(d.begin(), d.end(), 1.0), 3);
  EXPECT_TRUE(std::is_sorted(d.begin(), d.end()));

  const auto u = PopulationSpectrum::uniform(0.1, 0.9, 7);
  const auto du = u.diagonal(100);
  EXPECT_EQ(du.size(), 100u);
}

TEST(EntryEnsemble, Moments) {
  EXPECT_EQ(EntryEnsemble::real_gaussian().beta(), 0.0);
  EXPECT_EQ(EntryEnsemble::complex_gaussian().beta(), 0.0);
  EXPECT_EQ(EntryEnsemble::complex_gaussian().alpha(), 0.0);
  EXPECT_FALSE(EntryEnsemble::real_gaussian().fourth_moment_warning());
  EXPECT_TRUE(EntryEnsemble::custom_real(CustomDensity::kRademacher).fourth_moment_warning());
  EXPECT_NEAR(EntryEnsemble::custom_real(CustomDensity::kStudentT, 8.0).fourth_moment(), 4.5, 1e-15);
  EXPECT_EQ(kind_of([] { EntryEnsemble::custom_real(CustomDensity::kStudentT, 2.0); }),
            ErrorKind::kInvalidArgument);
}

TEST(EntryEnsemble, TruncatedMomentsMatchClosedForms) {
  const double c = 2.0;
  const auto rg = EntryEnsemble::real_gaussian().truncated_moments(c);
  const double phi = std::exp(-0.5 * c * c) / std::sqrt(2.0 * std::numbers::pi);
  const double big_phi = 0.5 * std::erfc(-c / std::numbers::sqrt2);
  EXPECT_NEAR(rg.mean, 0.0, 1e-15);
  EXPECT_NEAR(rg.variance, (2.0 * big_phi - 1.0) - 2.0 * c * phi, 1e-10);

  const auto cg = EntryEnsemble::complex_gaussian().truncated_moments(1.3);
  EXPECT_NEAR(cg.variance, 1.0 - (1.0 + 1.69) * std::exp(-1.69), 1e-10);

  const auto inf = EntryEnsemble::real_gaussian().truncated_moments(INFINITY);
  EXPECT_EQ(inf.mean, 0.0);
  EXPECT_EQ(inf.variance, 1.0);

  const auto unif = EntryEnsemble::custom_real(CustomDensity::kUniform).truncated_moments(1.0);
  EXPECT_NEAR(unif.variance, 1.0 / (3.0 * std::sqrt(3.0)), 1e-12);
}

TEST(TestFunction, EvaluationExamples) {
  const auto sq = TestFunction::parse("x^2");
  EXPECT_EQ(sq.value(cplx(1.0, 1.0)), cplx(0.0, 2.0));
  EXPECT_EQ(sq.derivative(cplx(3.0, 0.0)), cplx(6.0, 0.0));
  EXPECT_NEAR(std::abs(TestFunction::log().value(cplx(std::numbers::e, 0.0)) - 1.0), 0.0, 1e-15);
  EXPECT_EQ(kind_of([] { TestFunction::log().value(cplx(-1.0, 0.5)); }), ErrorKind::kLogDomain);
  EXPECT_EQ(kind_of([] { TestFunction::log().value(cplx(0.0, 0.5)); }), ErrorKind::kLogDomain);
}

TEST(TestFunction, ParsesAndRoundTrips) {
  const auto f = TestFunction::parse("2*x^2 - 0.5x + 3");
  ASSERT_EQ(f.coefficients().size(), 3u);
  EXPECT_EQ(f.coefficients()[0], 3.0);
  EXPECT_EQ(f.coefficients()[1], -0.5);
  EXPECT_EQ(f.coefficients()[2], 2.0);
  for (const char* text : {"x", "x^2", "x^3+x", "1", "-x^4 + 1e-3*x", "log", "0", "0.1*x^7"}) {
    const auto g = TestFunction::parse(text);
    EXPECT_EQ(TestFunction::parse(g.to_string()), g) << text << " -> " << g.to_string();
  }
  EXPECT_TRUE(TestFunction::parse("1").is_constant());
  EXPECT_THROW(TestFunction::parse("x^"), Error);
  EXPECT_THROW(TestFunction::parse("y^2"), Error);
  EXPECT_THROW(TestFunction::parse(""), Error);
}

TEST(TestFunction, DerivativeMatchesFiniteDifference) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> re(0.2, 3.0);
  std::uniform_real_distribution<double> im(-2.0, 2.0);
  const double h = 1e-5;
  for (const auto& f : {TestFunction::parse("x^3+x"), TestFunction::parse("x^2"), TestFunction::log()}) {
    for (int k = 0; k < 100; ++k) {
      const cplx z(re(rng), im(rng));
      const cplx fd = (f.value(z + h) - f.value(z - h)) / (2.0 * h);
      const cplx d = f.derivative(z);
      EXPECT_LT(std::abs(fd - d) / std::abs(d), 1e-6);
    }
  }
}
