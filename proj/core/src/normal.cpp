#include "lsslab/normal.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numbers>

#include "lsslab/errors.hpp"

namespace lsslab {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) raise(ErrorKind::kDomainError, "normal quantile needs 0 < p < 1");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double erfcx(double x) {
  if (x < 0.0) return 2.0 * std::exp(x * x) - erfcx(-x);
  if (x < 20.0) return std::exp(x * x) * std::erfc(x);
  // Laplace continued fraction 1/sqrt(pi) / (x + (1/2) / (x + 1 / (x + (3/2) / (x + ...)))),
  // evaluated bottom-up; 40 levels are ample past x = 20.
  double tail = 0.0;
  for (int k = 40; k >= 1; --k) tail = (0.5 * k) / (x + tail);
  return 1.0 / (std::sqrt(std::numbers::pi) * (x + tail));
}

}  // namespace lsslab
