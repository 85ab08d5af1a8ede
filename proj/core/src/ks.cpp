#include <algorithm>
#include <cmath>

#include "lsslab/diagnostics.hpp"
#include "lsslab/errors.hpp"
#include "lsslab/normal.hpp"

namespace lsslab {

double ks_to_normal(std::span<const double> samples) {
  if (samples.empty()) raise(ErrorKind::kEmptySample, "KS distance of an empty sample");
  std::vector<double> x(samples.begin(), samples.end());
  for (double v : x)
    if (!std::isfinite(v)) raise(ErrorKind::kInvalidArgument, "KS sample contains a non-finite value");
  std::sort(x.begin(), x.end());
  const double m = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cdf = normal_cdf(x[i]);
    d = std::max({d, (i + 1) / m - cdf, cdf - i / m});
  }
  return std::clamp(d, 0.0, 1.0);
}

}  // namespace lsslab
