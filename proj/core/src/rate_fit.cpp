#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "lsslab/diagnostics.hpp"
#include "lsslab/errors.hpp"

namespace lsslab {
namespace {

struct Line {
  double slope;
  double intercept;
  double std_error;  // classical OLS standard error of the slope
};

Line least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double m = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - intercept - slope * x[i];
    rss += r * r;
  }
  const double se = x.size() > 2 ? std::sqrt(rss / (m - 2.0) / sxx) : 0.0;
  return {slope, intercept, se};
}

double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

RateFit fit_rate(std::span<const RatePoint> points, const RateFitOptions& options) {
  if (points.size() < 3) raise(ErrorKind::kTooFewPoints, "rate fit needs at least 3 points");
  std::set<double> distinct;
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& pt : points) {
    if (!(pt.ks > 0.0)) raise(ErrorKind::kNonPositiveKs, "rate fit needs ks > 0");
    if (!(pt.n > 0.0)) raise(ErrorKind::kInvalidArgument, "rate fit needs n > 0");
    if (!distinct.insert(pt.n).second)
      raise(ErrorKind::kInvalidArgument, "rate fit needs distinct n values");
    x.push_back(std::log(pt.n));
    y.push_back(std::log(pt.ks));
  }
  if (options.resamples < 1 || !(options.level > 0.0 && options.level < 1.0))
    raise(ErrorKind::kInvalidArgument, "bad bootstrap options");

  RateFit fit;
  const auto line = least_squares(x, y);
  fit.exponent = line.slope;
  fit.intercept = line.intercept;
  fit.points.assign(points.begin(), points.end());

  const double tail = 0.5 * (1.0 - options.level);
  // Percentile interval of the pairs bootstrap (resampling (n, ks) points),
  // with deviations from the fitted slope scaled by sqrt(m / (m - 2)), the
  // HC1 degrees-of-freedom correction for a two-parameter fit.
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
  std::vector<double> slopes;
  slopes.reserve(options.resamples);
  std::vector<double> bx(x.size());
  std::vector<double> by(x.size());
  while (slopes.size() < static_cast<std::size_t>(options.resamples)) {
    std::set<std::size_t> used;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const std::size_t k = pick(rng);
      used.insert(k);
      bx[i] = x[k];
      by[i] = y[k];
    }
    // A resample with a single distinct n has no slope.
    if (used.size() < 2) continue;
    slopes.push_back(least_squares(bx, by).slope);
  }
  std::sort(slopes.begin(), slopes.end());
  const double m = static_cast<double>(x.size());
  const double inflate = std::sqrt(m / (m - 2.0));
  const double lo = fit.exponent + inflate * (quantile_sorted(slopes, tail) - fit.exponent);
  const double hi = fit.exponent + inflate * (quantile_sorted(slopes, 1.0 - tail) - fit.exponent);
  fit.ci_lo = std::min(lo, fit.exponent);
  fit.ci_hi = std::max(hi, fit.exponent);
  return fit;
}

}  // namespace lsslab
