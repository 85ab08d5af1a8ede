#pragma once

// Asymptotic mean mu_n(f), covariance kernel a_n(z1, z2) and variance
// sigma_n(f) of a centered linear spectral statistic.

#include <string>

#include "lsslab/contour.hpp"
#include "lsslab/spectral_model.hpp"

namespace lsslab {

enum class CltCase { kRealGaussian, kComplexGaussian };

std::string to_string(CltCase c);
CltCase parse_clt_case(std::string_view text);
/// CG for the complex Gaussian ensemble, RG for every real one.
CltCase clt_case_for(const EntryEnsemble& ensemble);

struct CltMoments {
  double mu = 0.0;     // identically 0 in the CG case
  double sigma = 0.0;  // variance in the RG normalisation
  CltCase clt_case = CltCase::kRealGaussian;
  double kernel_max_abs = 0.0;
  double mu_imag = 0.0;  // discarded imaginary parts, kept for reporting
  double sigma_imag = 0.0;
  double mu_error = 0.0;  // quadrature error estimates
  double sigma_error = 0.0;
};

/// y s(z1) s(z2) int t^2 / ((1 + t s(z1)) (1 + t s(z2))) dH, s the companion transform.
cplx kernel_a(cplx z1, cplx z2, const PopulationSpectrum& spectrum, double y);

double mean_correction(const TestFunction& f, const PopulationSpectrum& spectrum, double y,
                       const Contour& contour, double rtol = 1e-9);

/// Uses int_0^1 dt / (1 - t a) = -log(1 - a) / a. `kernel_max_abs`, when
/// given, receives max |a_n| over the final node grid.
double variance(const TestFunction& f, const PopulationSpectrum& spectrum, double y,
                const ContourPair& pair, double rtol = 1e-9, double* kernel_max_abs = nullptr);

CltMoments compute_moments(const TestFunction& f, const PopulationSpectrum& spectrum, double y,
                           CltCase clt_case, const ContourParams& params = {});

/// RG: (x - mu) / sqrt(sigma); CG: x / sqrt(sigma / 2).
double normalize(double lss_centered, const CltMoments& m);

}  // namespace lsslab
