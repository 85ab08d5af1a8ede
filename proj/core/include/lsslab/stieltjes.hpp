#pragma once

// Companion Stieltjes transform of F^{y,H}: the fixed point
//   s = -1 / (z - y * int t / (1 + t s) dH(t)),
// its inverse map, density recovery and the LSS centering term.

#include <optional>
#include <vector>

#include "lsslab/contour.hpp"
#include "lsslab/spectral_model.hpp"

namespace lsslab {

struct StieltjesSolution {
  cplx z;
  cplx s_under;  // companion transform
  cplx s;        // transform of F^{y,H} itself
  double residual = 0.0;
  int iterations = 0;
};

struct SolverOptions {
  double tolerance = 1e-12;
  int max_iter = 10000;
};

/// Plain iteration from -1/z (or `warm_start`), damped when the residual
/// stops decreasing for 20 steps, finished with guarded Newton steps.
/// Real z must lie outside the support interval.
StieltjesSolution solve_s_under(cplx z, const PopulationSpectrum& spectrum, double y,
                                std::optional<cplx> warm_start = std::nullopt,
                                const SolverOptions& options = {});

/// Solves at every node in order, warm-starting each from its predecessor.
std::vector<StieltjesSolution> solve_along(const std::vector<cplx>& nodes,
                                           const PopulationSpectrum& spectrum, double y,
                                           const SolverOptions& options = {});

/// z(s) = -1/s + y int t / (1 + t s) dH(t).
cplx inverse_map(cplx s_under, const PopulationSpectrum& spectrum, double y);

/// Density of F^{y,H} at x inside the support interval.
double lsd_density(double x, const PopulationSpectrum& spectrum, double y);

/// p int f dF^{y,H} = -(p / 2 pi i) closed-integral f(z) s(z) dz.
double lss_centering(const TestFunction& f, const PopulationSpectrum& spectrum, double y,
                     std::size_t p, const ContourParams& params = {});

}  // namespace lsslab
