#pragma once

// Standard normal helpers.

namespace lsslab {

double normal_cdf(double x);
double normal_pdf(double x);
double normal_quantile(double p);

/// Scaled complementary error function exp(x^2) erfc(x). Finite for all
/// x > -26; positive arguments never overflow.
double erfcx(double x);

}  // namespace lsslab
