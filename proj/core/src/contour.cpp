#include "lsslab/contour.hpp"

#include <cmath>
#include <numbers>

#include "lsslab/errors.hpp"

namespace lsslab {
namespace {

struct Panel {
  cplx a;
  cplx b;
};

std::vector<Panel> panels(const Contour& c) {
  const double xl = c.x_l();
  const double xr = c.x_r();
  const double v = c.v0();
  const int horizontal = std::max(1, static_cast<int>(std::ceil((xr - xl) / v - 1e-12)));
  std::vector<Panel> out;
  out.push_back({{xr, -v}, {xr, 0.0}});
  out.push_back({{xr, 0.0}, {xr, v}});
  for (int k = 0; k < horizontal; ++k) {
    const double a = xr - (xr - xl) * k / horizontal;
    const double b = xr - (xr - xl) * (k + 1) / horizontal;
    out.push_back({{a, v}, {b, v}});
  }
  out.push_back({{xl, v}, {xl, 0.0}});
  out.push_back({{xl, 0.0}, {xl, -v}});
  for (int k = 0; k < horizontal; ++k) {
    const double a = xl + (xr - xl) * k / horizontal;
    const double b = xl + (xr - xl) * (k + 1) / horizontal;
    out.push_back({{a, -v}, {b, -v}});
  }
  return out;
}

void check_finite(const std::vector<cplx>& values) {
  for (const auto& v : values)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      raise(ErrorKind::kNodeSingularity, "integrand is not finite at a quadrature node");
}

template <class Level>
QuadratureResult refine(int m, double rtol, Level level) {
  cplx coarse = level(m);
  for (int doubling = 1; doubling <= 2; ++doubling) {
    const int fine_m = m << doubling;
    const cplx fine = level(fine_m);
    const double err = std::abs(fine - coarse);
    if (err <= rtol * (1.0 + std::abs(fine))) return {fine, err, fine_m};
    coarse = fine;
  }
  raise(ErrorKind::kQuadratureStall,
        "contour quadrature did not reach the requested tolerance after two doublings");
}

}  // namespace

void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w) {
  x.assign(m, 0.0);
  w.assign(m, 0.0);
  const int half = (m + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int k = 1; k <= m; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = m * (z * p0 - p1) / (z * z - 1.0);
      const double step = p0 / dp;
      z -= step;
      if (std::abs(step) < 1e-16) break;
    }
    x[i] = -z;
    x[m - 1 - i] = z;
    w[i] = w[m - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

double default_epsilon(const SupportInterval& support) {
  return 0.05 * (support.hi - support.lo + 1.0);
}

Contour::Contour(double x_l, double x_r, double v0, int nodes)
    : x_l_(x_l), x_r_(x_r), v0_(v0), m_(nodes) {
  if (!(x_l < x_r)) raise(ErrorKind::kInvalidArgument, "contour needs x_l < x_r");
  if (!(v0 > 0.0)) raise(ErrorKind::kInvalidArgument, "contour needs v0 > 0");
  if (nodes < 16) raise(ErrorKind::kInvalidArgument, "contour needs at least 16 nodes per panel");
}

std::array<cplx, 4> Contour::corners() const noexcept {
  return {cplx(x_r_, -v0_), cplx(x_r_, v0_), cplx(x_l_, v0_), cplx(x_l_, -v0_)};
}

bool Contour::encloses(cplx z) const noexcept {
  return z.real() > x_l_ && z.real() < x_r_ && std::abs(z.imag()) < v0_;
}

ContourRule Contour::rule(int m) const {
  std::vector<double> x;
  std::vector<double> w;
  gauss_legendre(m, x, w);
  ContourRule r;
  for (const auto& panel : panels(*this)) {
    const cplx mid = 0.5 * (panel.a + panel.b);
    const cplx half = 0.5 * (panel.b - panel.a);
    for (int k = 0; k < m; ++k) {
      r.nodes.push_back(mid + half * x[k]);
      r.weights.push_back(half * w[k]);
    }
  }
  return r;
}

Contour build_contour(const PopulationSpectrum& spectrum, double y, double epsilon, double v0,
                      int nodes) {
  if (!(epsilon > 0.0)) raise(ErrorKind::kInvalidArgument, "contour needs epsilon > 0");
  const auto support = support_interval(spectrum, y);
  const double x_r = support.hi + epsilon;
  const double x_l = support.lo > 0.0 ? support.lo - epsilon : -epsilon;
  return Contour(x_l, x_r, v0, nodes);
}

Contour build_contour(const PopulationSpectrum& spectrum, double y, const ContourParams& params,
                      const TestFunction& f) {
  const double eps =
      params.epsilon > 0.0 ? params.epsilon : default_epsilon(support_interval(spectrum, y));
  Contour c = build_contour(spectrum, y, eps, params.v0, params.nodes);
  if (f.is_log() && !(c.x_l() > 0.0))
    raise(ErrorKind::kLogDomain, "log test function needs a contour in Re z > 0; reduce epsilon");
  return c;
}

ContourPair build_contour_pair(const PopulationSpectrum& spectrum, double y,
                               const ContourParams& params, const TestFunction& f) {
  const double eps =
      params.epsilon > 0.0 ? params.epsilon : default_epsilon(support_interval(spectrum, y));
  Contour inner = build_contour(spectrum, y, params, f);
  Contour outer(inner.x_l() - eps, inner.x_r() + eps, 2.0 * inner.v0(), params.nodes);
  if (f.is_log() && !(outer.x_l() > 0.0))
    raise(ErrorKind::kLogDomain,
          "log test function needs the outer contour in Re z > 0; reduce epsilon");
  return {inner, outer};
}

QuadratureResult integrate_nodes(const Contour& c, const NodeEvaluator& g, double rtol) {
  return refine(c.nodes(), rtol, [&](int m) {
    const auto r = c.rule(m);
    const auto values = g(r.nodes);
    if (values.size() != r.nodes.size())
      raise(ErrorKind::kDimensionMismatch, "integrand returned the wrong number of values");
    check_finite(values);
    cplx acc = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) acc += r.weights[k] * values[k];
    return acc;
  });
}

QuadratureResult integrate_grid(const ContourPair& pair, const GridEvaluator& g2, double rtol) {
  return refine(pair.inner.nodes(), rtol, [&](int m) {
    const auto r1 = pair.inner.rule(m);
    const auto r2 = pair.outer.rule(m);
    const auto values = g2(r1.nodes, r2.nodes);
    if (values.size() != r1.nodes.size() * r2.nodes.size())
      raise(ErrorKind::kDimensionMismatch, "integrand returned the wrong number of values");
    check_finite(values);
    cplx acc = 0.0;
    const std::size_t n1 = r1.nodes.size();
    for (std::size_t j = 0; j < r2.nodes.size(); ++j) {
      cplx row = 0.0;
      for (std::size_t i = 0; i < n1; ++i) row += r1.weights[i] * values[j * n1 + i];
      acc += r2.weights[j] * row;
    }
    return acc;
  });
}

cplx integrate(const std::function<cplx(cplx)>& g, const Contour& c, double rtol) {
  return integrate_nodes(
             c,
             [&](const std::vector<cplx>& nodes) {
               std::vector<cplx> v(nodes.size());
               for (std::size_t k = 0; k < nodes.size(); ++k) v[k] = g(nodes[k]);
               return v;
             },
             rtol)
      .value;
}

cplx integrate_double(const std::function<cplx(cplx, cplx)>& g2, const ContourPair& pair,
                      double rtol) {
  return integrate_grid(
             pair,
             [&](const std::vector<cplx>& z1, const std::vector<cplx>& z2) {
               std::vector<cplx> v(z1.size() * z2.size());
               for (std::size_t j = 0; j < z2.size(); ++j)
                 for (std::size_t i = 0; i < z1.size(); ++i) v[j * z1.size() + i] = g2(z1[i], z2[j]);
               return v;
             },
             rtol)
      .value;
}

}  // namespace lsslab
