#pragma once

// Rectangular contours around the spectral support and composite
// Gauss-Legendre integration over them.

#include <array>
#include <functional>
#include <vector>

#include "lsslab/spectral_model.hpp"

namespace lsslab {

struct ContourParams {
  double epsilon = 0.0;  // <= 0 selects 0.05 (hi - lo + 1)
  double v0 = 1.0;
  int nodes = 64;        // Gauss-Legendre nodes per panel, >= 16
  double rtol = 1e-9;

  friend bool operator==(const ContourParams&, const ContourParams&) = default;
};

double default_epsilon(const SupportInterval& support);

/// Nodes z_k and complex weights w_k with sum_k w_k g(z_k) ~ integral of g dz.
/// Nodes run along the path in order, starting at x_r and moving
/// counterclockwise.
struct ContourRule {
  std::vector<cplx> nodes;
  std::vector<cplx> weights;
};

/// Counterclockwise rectangle [x_l, x_r] x [-v0, v0].
///
/// Vertical edges are split into two panels at the real axis so no node sits
/// on it; horizontal edges get ceil((x_r - x_l) / v0) panels.
class Contour {
 public:
  Contour(double x_l, double x_r, double v0, int nodes = 64);

  double x_l() const noexcept { return x_l_; }
  double x_r() const noexcept { return x_r_; }
  double v0() const noexcept { return v0_; }
  int nodes() const noexcept { return m_; }

  /// Corners in path order: x_r - i v0, x_r + i v0, x_l + i v0, x_l - i v0.
  std::array<cplx, 4> corners() const noexcept;
  bool encloses(cplx z) const noexcept;
  /// Rule with `m` nodes per panel.
  ContourRule rule(int m) const;

 private:
  double x_l_;
  double x_r_;
  double v0_;
  int m_;
};

/// Inner path C1 and the enclosing C2 used by the double integral.
struct ContourPair {
  Contour inner;
  Contour outer;
};

/// x_r = hi + epsilon; x_l = lo - epsilon when lo > 0, otherwise -epsilon.
Contour build_contour(const PopulationSpectrum& spectrum, double y, double epsilon, double v0,
                      int nodes = 64);
/// As above, rejecting a logarithmic f whose contour reaches Re z <= 0.
Contour build_contour(const PopulationSpectrum& spectrum, double y, const ContourParams& params,
                      const TestFunction& f);
/// Outer path widened by epsilon on both sides and of height 2 v0.
ContourPair build_contour_pair(const PopulationSpectrum& spectrum, double y,
                               const ContourParams& params, const TestFunction& f);

struct QuadratureResult {
  cplx value;
  double error_estimate = 0.0;
  int nodes_per_panel = 0;  // m of the returned level
};

/// Values of the integrand at a batch of nodes, in the order given.
using NodeEvaluator = std::function<std::vector<cplx>(const std::vector<cplx>&)>;
/// Values g(z1_i, z2_j) on the product grid, row-major in j (outer) then i.
using GridEvaluator =
    std::function<std::vector<cplx>(const std::vector<cplx>&, const std::vector<cplx>&)>;

/// Integrates at m and 2m nodes per panel and returns the 2m value with
/// error |I(m) - I(2m)|; doubles once more before raising QuadratureStall.
QuadratureResult integrate_nodes(const Contour& c, const NodeEvaluator& g, double rtol = 1e-9);
QuadratureResult integrate_grid(const ContourPair& pair, const GridEvaluator& g2,
                                double rtol = 1e-9);

cplx integrate(const std::function<cplx(cplx)>& g, const Contour& c, double rtol = 1e-9);
/// Iterated integral, z1 over the inner and z2 over the outer path.
cplx integrate_double(const std::function<cplx(cplx, cplx)>& g2, const ContourPair& pair,
                      double rtol = 1e-9);

/// Gauss-Legendre nodes and weights on [-1, 1], ascending.
void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w);

}  // namespace lsslab
