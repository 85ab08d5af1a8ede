#include "lsslab/clt_moments.hpp"

#include <cmath>
#include <numbers>

#include "lsslab/errors.hpp"
#include "lsslab/stieltjes.hpp"

namespace lsslab {
namespace {

constexpr cplx kI(0.0, 1.0);

void check_residue(cplx value, const char* what) {
  if (std::abs(value.imag()) > 1e-8 * (1.0 + std::abs(value.real())))
    raise(ErrorKind::kImaginaryResidue, std::string(what) + " has a non-negligible imaginary part");
}

// t_k / (1 + t_k s) for every atom.
std::vector<cplx> atom_factors(cplx s, const PopulationSpectrum& spectrum) {
  std::vector<cplx> q;
  q.reserve(spectrum.atoms().size());
  for (const auto& a : spectrum.atoms()) {
    const cplx d = 1.0 + a.value * s;
    if (std::abs(d) < 1e-14) raise(ErrorKind::kPoleAtAtom, "1 + t s vanishes at a population atom");
    q.push_back(a.value / d);
  }
  return q;
}

cplx minus_log_one_minus(cplx a) {
  if (std::abs(a) < 1e-8) return a * (1.0 + a / 2.0 + a * a / 3.0);
  return -std::log(1.0 - a);
}

cplx mean_integrand(const TestFunction& f, cplx z, cplx s, const PopulationSpectrum& spectrum,
                    double y) {
  cplx num = 0.0;
  cplx den = 0.0;
  for (const auto& a : spectrum.atoms()) {
    const cplx d = 1.0 + a.value * s;
    if (std::abs(d) < 1e-14) raise(ErrorKind::kPoleAtAtom, "1 + t s vanishes at a population atom");
    const cplx u = s / d;
    const double t2 = a.value * a.value;
    num += a.weight * t2 * u * u * u;
    den += a.weight * t2 * u * u;
  }
  num *= y;
  const cplx denom = 1.0 - y * den;
  if (std::abs(denom) < 1e-10)
    raise(ErrorKind::kDenominatorNearZero, "mean correction denominator vanishes on the contour");
  return f.value(z) * num / (denom * denom);
}

}  // namespace

std::string to_string(CltCase c) { return c == CltCase::kRealGaussian ? "RG" : "CG"; }

CltCase parse_clt_case(std::string_view text) {
  if (text == "RG") return CltCase::kRealGaussian;
  if (text == "CG") return CltCase::kComplexGaussian;
  raise(ErrorKind::kInvalidArgument, "CLT case must be RG or CG, got '" + std::string(text) + "'");
}

CltCase clt_case_for(const EntryEnsemble& ensemble) {
  return ensemble.is_complex() ? CltCase::kComplexGaussian : CltCase::kRealGaussian;
}

cplx kernel_a(cplx z1, cplx z2, const PopulationSpectrum& spectrum, double y) {
  const cplx s1 = solve_s_under(z1, spectrum, y).s_under;
  const cplx s2 = solve_s_under(z2, spectrum, y).s_under;
  const auto q1 = atom_factors(s1, spectrum);
  const auto q2 = atom_factors(s2, spectrum);
  const auto atoms = spectrum.atoms();
  cplx acc = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) acc += atoms[k].weight * q1[k] * q2[k];
  return y * s1 * s2 * acc;
}

namespace {

struct Integral {
  cplx value;
  double error = 0.0;
};

Integral mean_integral(const TestFunction& f, const PopulationSpectrum& spectrum, double y,
                       const Contour& contour, double rtol) {
  const auto result = integrate_nodes(
      contour,
      [&](const std::vector<cplx>& nodes) {
        const auto sols = solve_along(nodes, spectrum, y);
        std::vector<cplx> v(nodes.size());
        for (std::size_t k = 0; k < nodes.size(); ++k)
          v[k] = mean_integrand(f, nodes[k], sols[k].s_under, spectrum, y);
        return v;
      },
      rtol);
  const double scale = 1.0 / (2.0 * std::numbers::pi);
  return {-result.value / (2.0 * std::numbers::pi * kI), scale * result.error_estimate};
}

Integral variance_integral(const TestFunction& f, const PopulationSpectrum& spectrum, double y,
                           const ContourPair& pair, double rtol, double* kernel_max_abs) {
  double max_abs = 0.0;
  const auto atoms = spectrum.atoms();
  const std::size_t k_atoms = atoms.size();
  const auto result = integrate_grid(
      pair,
      [&](const std::vector<cplx>& z1, const std::vector<cplx>& z2) {
        const auto sol1 = solve_along(z1, spectrum, y);
        const auto sol2 = solve_along(z2, spectrum, y);
        // Per node: s * sqrt(w_k) t_k / (1 + t_k s), so a = y * <row1, row2>.
        auto rows = [&](const std::vector<StieltjesSolution>& sols) {
          std::vector<cplx> r(sols.size() * k_atoms);
          for (std::size_t i = 0; i < sols.size(); ++i) {
            const auto q = atom_factors(sols[i].s_under, spectrum);
            for (std::size_t k = 0; k < k_atoms; ++k)
              r[i * k_atoms + k] = sols[i].s_under * std::sqrt(atoms[k].weight) * q[k];
          }
          return r;
        };
        const auto r1 = rows(sol1);
        const auto r2 = rows(sol2);
        std::vector<cplx> d1(z1.size());
        std::vector<cplx> d2(z2.size());
        for (std::size_t i = 0; i < z1.size(); ++i) d1[i] = f.derivative(z1[i]);
        for (std::size_t j = 0; j < z2.size(); ++j) d2[j] = f.derivative(z2[j]);

        max_abs = 0.0;
        std::vector<cplx> v(z1.size() * z2.size());
        for (std::size_t j = 0; j < z2.size(); ++j) {
          for (std::size_t i = 0; i < z1.size(); ++i) {
            cplx dot = 0.0;
            for (std::size_t k = 0; k < k_atoms; ++k) dot += r1[i * k_atoms + k] * r2[j * k_atoms + k];
            const cplx a = y * dot;
            const double abs_a = std::abs(a);
            max_abs = std::max(max_abs, abs_a);
            if (!(abs_a < 1.0))
              raise(ErrorKind::kKernelOutOfDisk, "covariance kernel reached the unit circle");
            v[j * z1.size() + i] = d1[i] * d2[j] * minus_log_one_minus(a);
          }
        }
        return v;
      },
      rtol);
  const double scale = 1.0 / (2.0 * std::numbers::pi * std::numbers::pi);
  if (kernel_max_abs) *kernel_max_abs = max_abs;
  return {-scale * result.value, scale * result.error_estimate};
}

}  // namespace

double mean_correction(const TestFunction& f, const PopulationSpectrum& spectrum, double y,
                       const Contour& contour, double rtol) {
  const auto r = mean_integral(f, spectrum, y, contour, rtol);
  check_residue(r.value, "mean correction");
  return r.value.real();
}

double variance(const TestFunction& f, const PopulationSpectrum& spectrum, double y,
                const ContourPair& pair, double rtol, double* kernel_max_abs) {
  const auto r = variance_integral(f, spectrum, y, pair, rtol, kernel_max_abs);
  check_residue(r.value, "variance");
  return r.value.real();
}

CltMoments compute_moments(const TestFunction& f, const PopulationSpectrum& spectrum, double y,
                           CltCase clt_case, const ContourParams& params) {
  CltMoments m;
  m.clt_case = clt_case;
  const ContourPair pair = build_contour_pair(spectrum, y, params, f);
  if (clt_case == CltCase::kRealGaussian) {
    const auto r = mean_integral(f, spectrum, y, pair.inner, params.rtol);
    check_residue(r.value, "mean correction");
    m.mu = r.value.real();
    m.mu_imag = r.value.imag();
    m.mu_error = r.error;
  }
  const auto r = variance_integral(f, spectrum, y, pair, params.rtol, &m.kernel_max_abs);
  check_residue(r.value, "variance");
  m.sigma = r.value.real();
  m.sigma_imag = r.value.imag();
  m.sigma_error = r.error;
  if (f.is_constant()) {
    m.mu = 0.0;
    m.sigma = 0.0;
  } else if (!(m.sigma > 0.0)) {
    raise(ErrorKind::kZeroVariance, "variance of a nonconstant test function is not positive");
  }
  return m;
}

double normalize(double lss_centered, const CltMoments& m) {
  if (!(m.sigma > 0.0)) raise(ErrorKind::kZeroVariance, "cannot normalise with zero variance");
  if (m.clt_case == CltCase::kComplexGaussian) return lss_centered / std::sqrt(m.sigma / 2.0);
  return (lss_centered - m.mu) / std::sqrt(m.sigma);
}

}  // namespace lsslab
