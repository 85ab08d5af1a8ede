#include "lsslab/stieltjes.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "lsslab/errors.hpp"

namespace lsslab {
namespace {

constexpr double kRealOffset = 1e-9;

// F(s) and F'(s) = y F(s)^2 int t^2 / (1 + t s)^2 dH.
struct MapValue {
  cplx value;
  cplx derivative;
};

MapValue fixed_point_map(cplx z, cplx s, const PopulationSpectrum& spectrum, double y) {
  cplx first = 0.0;
  cplx second = 0.0;
  for (const auto& a : spectrum.atoms()) {
    const cplx q = 1.0 / (1.0 + a.value * s);
    first += a.weight * a.value * q;
    second += a.weight * a.value * a.value * q * q;
  }
  const cplx value = -1.0 / (z - y * first);
  return {value, y * value * value * second};
}

bool usable(cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

StieltjesSolution iterate(cplx z, cplx start, const PopulationSpectrum& spectrum, double y,
                          const SolverOptions& options) {
  cplx s = start;
  double omega = 1.0;
  double previous = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int k = 0; k < options.max_iter; ++k) {
    const auto m = fixed_point_map(z, s, spectrum, y);
    const double res = std::abs(s - m.value);
    if (!usable(m.value)) break;
    if (res <= options.tolerance) return {z, s, 0.0, res, k};

    if (res < 1e-3) {
      const cplx newton = s - (s - m.value) / (1.0 - m.derivative);
      if (usable(newton)) {
        const auto mn = fixed_point_map(z, newton, spectrum, y);
        const double res_newton = std::abs(newton - mn.value);
        if (usable(mn.value) && res_newton < res) {
          s = newton;
          previous = res_newton;
          stalled = 0;
          continue;
        }
      }
    }

    stalled = res >= previous ? stalled + 1 : 0;
    previous = res;
    if (stalled >= 20) {
      omega *= 0.5;
      stalled = 0;
    }
    s = (1.0 - omega) * s + omega * m.value;
  }
  raise(ErrorKind::kNonConvergence, "Stieltjes fixed point did not converge");
}

StieltjesSolution finish(StieltjesSolution sol, double y) {
  const cplx z = sol.z;
  if (z.imag() != 0.0 && !(sol.s_under.imag() * z.imag() > 0.0))
    raise(ErrorKind::kBranchViolation, "fixed point lies in the wrong half-plane");
  sol.s = (sol.s_under + (1.0 - y) / z) / y;
  return sol;
}

StieltjesSolution solve_complex(cplx z, const PopulationSpectrum& spectrum, double y,
                                std::optional<cplx> warm_start, const SolverOptions& options) {
  if (warm_start && usable(*warm_start)) {
    try {
      return finish(iterate(z, *warm_start, spectrum, y, options), y);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kBranchViolation && e.kind() != ErrorKind::kNonConvergence) throw;
    }
  }
  return finish(iterate(z, -1.0 / z, spectrum, y, options), y);
}

}  // namespace

StieltjesSolution solve_s_under(cplx z, const PopulationSpectrum& spectrum, double y,
                                std::optional<cplx> warm_start, const SolverOptions& options) {
  if (!(y > 0.0)) raise(ErrorKind::kInvalidArgument, "ratio y must be > 0");
  if (!usable(z)) raise(ErrorKind::kInvalidArgument, "z must be finite");
  if (z.imag() != 0.0) return solve_complex(z, spectrum, y, warm_start, options);

  const auto support = support_interval(spectrum, y);
  if (z.real() >= support.lo && z.real() <= support.hi)
    raise(ErrorKind::kDomainError, "real z lies inside the support interval");
  const auto lifted = solve_complex({z.real(), kRealOffset}, spectrum, y, warm_start, options);
  auto sol = iterate(z, {lifted.s_under.real(), 0.0}, spectrum, y, options);
  return finish(sol, y);
}

std::vector<StieltjesSolution> solve_along(const std::vector<cplx>& nodes,
                                           const PopulationSpectrum& spectrum, double y,
                                           const SolverOptions& options) {
  std::vector<StieltjesSolution> out;
  out.reserve(nodes.size());
  std::optional<cplx> warm;
  for (const auto& z : nodes) {
    // Crossing the real axis flips the half-plane of the transform, so the
    // previous value is no use as a start there.
    if (!out.empty() && out.back().z.imag() * z.imag() <= 0.0) warm.reset();
    out.push_back(solve_s_under(z, spectrum, y, warm, options));
    warm = out.back().s_under;
  }
  return out;
}

cplx inverse_map(cplx s_under, const PopulationSpectrum& spectrum, double y) {
  if (s_under == cplx(0.0)) raise(ErrorKind::kDomainError, "inverse map undefined at s = 0");
  cplx acc = 0.0;
  for (const auto& a : spectrum.atoms()) {
    const cplx d = 1.0 + a.value * s_under;
    if (std::abs(d) < 1e-14) raise(ErrorKind::kPoleAtAtom, "1 + t s vanishes at a population atom");
    acc += a.weight * a.value / d;
  }
  return -1.0 / s_under + y * acc;
}

double lsd_density(double x, const PopulationSpectrum& spectrum, double y) {
  const auto support = support_interval(spectrum, y);
  if (!(x > support.lo && x < support.hi))
    raise(ErrorKind::kOutsideSupport, "x is outside the support interval");

  constexpr double kEps[3] = {1e-3, 5e-4, 2.5e-4};
  double d[3];
  std::optional<cplx> warm;
  for (double v : {1.0, 0.1, 0.01}) warm = solve_s_under({x, v}, spectrum, y, warm).s_under;
  for (int k = 0; k < 3; ++k) {
    const auto sol = solve_s_under({x, kEps[k]}, spectrum, y, warm);
    warm = sol.s_under;
    d[k] = sol.s.imag() / std::numbers::pi;
  }
  const double value = 2.0 * d[2] - d[1];
  if (value < -1e-6) raise(ErrorKind::kOutsideSupport, "negative density: x is off the bulk");
  return std::max(value, 0.0);
}

double lss_centering(const TestFunction& f, const PopulationSpectrum& spectrum, double y,
                     std::size_t p, const ContourParams& params) {
  const Contour c = build_contour(spectrum, y, params, f);
  const auto result = integrate_nodes(
      c,
      [&](const std::vector<cplx>& nodes) {
        const auto sols = solve_along(nodes, spectrum, y);
        std::vector<cplx> v(nodes.size());
        for (std::size_t k = 0; k < nodes.size(); ++k) v[k] = f.value(nodes[k]) * sols[k].s;
        return v;
      },
      params.rtol);
  const cplx value =
      -static_cast<double>(p) * result.value / (2.0 * std::numbers::pi * cplx(0.0, 1.0));
  if (std::abs(value.imag()) > 1e-8 * (1.0 + std::abs(value.real())))
    raise(ErrorKind::kImaginaryResidue, "centering integral has a non-negligible imaginary part");
  return value.real();
}

}  // namespace lsslab
