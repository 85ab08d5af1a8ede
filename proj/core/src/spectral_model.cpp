#include "lsslab/spectral_model.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "lsslab/errors.hpp"

namespace lsslab {
namespace {

constexpr double kWeightTolerance = 1e-12;

void validate_atoms(const std::vector<Atom>& atoms, bool allow_unbounded) {
  if (atoms.empty()) raise(ErrorKind::kInvalidArgument, "population spectrum has no atoms");
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!std::isfinite(a.value) || a.value < 0.0)
      raise(ErrorKind::kInvalidArgument, "population atom must be finite and >= 0");
    if (!std::isfinite(a.weight) || a.weight <= 0.0)
      raise(ErrorKind::kInvalidArgument, "population weight must be finite and > 0");
    if (!allow_unbounded && a.value > 1.0)
      raise(ErrorKind::kConstraintViolation,
            "population atom exceeds 1; set allow_unbounded to lift the norm cap");
    total += a.weight;
  }
  if (std::abs(total - 1.0) > kWeightTolerance)
    raise(ErrorKind::kInvalidArgument, "population weights must sum to 1");
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, std::string_view context) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    raise(ErrorKind::kInvalidArgument, "cannot parse number '" + std::string(s) + "' in '" +
                                           std::string(context) + "'");
  return v;
}

}  // namespace

// ---------------------------------------------------------------- spectrum

PopulationSpectrum::PopulationSpectrum(std::vector<Atom> atoms, bool allow_unbounded)
    : atoms_(std::move(atoms)), allow_unbounded_(allow_unbounded) {
  validate_atoms(atoms_, allow_unbounded_);
}

PopulationSpectrum PopulationSpectrum::normalized(std::vector<Atom> atoms, bool allow_unbounded) {
  double total = 0.0;
  for (const auto& a : atoms) total += a.weight;
  if (!(total > 0.0) || !std::isfinite(total))
    raise(ErrorKind::kInvalidArgument, "population weights must have a positive finite sum");
  for (auto& a : atoms) a.weight /= total;
  // Division can leave the sum a few ulps away from one; fold that into the
  // largest weight so the strict constructor check passes.
  double sum = 0.0;
  for (const auto& a : atoms) sum += a.weight;
  auto largest = std::max_element(atoms.begin(), atoms.end(),
                                  [](const Atom& l, const Atom& r) { return l.weight < r.weight; });
  largest->weight += 1.0 - sum;
  return PopulationSpectrum(std::move(atoms), allow_unbounded);
}

PopulationSpectrum PopulationSpectrum::identity() { return PopulationSpectrum({{1.0, 1.0}}); }

PopulationSpectrum PopulationSpectrum::uniform(double a, double b, std::size_t nodes,
                                               bool allow_unbounded) {
  if (!(a >= 0.0) || !(b > a) || nodes == 0)
    raise(ErrorKind::kInvalidArgument, "uniform spectrum needs 0 <= a < b and nodes >= 1");
  std::vector<Atom> atoms;
  atoms.reserve(nodes);
  const double h = (b - a) / static_cast<double>(nodes);
  for (std::size_t k = 0; k < nodes; ++k)
    atoms.push_back({a + (static_cast<double>(k) + 0.5) * h, 1.0 / static_cast<double>(nodes)});
  return normalized(std::move(atoms), allow_unbounded);
}

double PopulationSpectrum::min_atom() const noexcept {
  double m = atoms_.front().value;
  for (const auto& a : atoms_) m = std::min(m, a.value);
  return m;
}

double PopulationSpectrum::max_atom() const noexcept {
  double m = atoms_.front().value;
  for (const auto& a : atoms_) m = std::max(m, a.value);
  return m;
}

double PopulationSpectrum::moment(int k) const noexcept {
  double acc = 0.0;
  for (const auto& a : atoms_) acc += a.weight * std::pow(a.value, k);
  return acc;
}

PopulationSpectrum PopulationSpectrum::renormalized() const {
  return normalized(atoms_, allow_unbounded_);
}

std::vector<double> PopulationSpectrum::diagonal(std::size_t p) const {
  if (p == 0) raise(ErrorKind::kInvalidArgument, "dimension p must be positive");
  const std::size_t k = atoms_.size();
  std::vector<std::size_t> counts(k);
  std::vector<double> remainder(k);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double exact = atoms_[i].weight * static_cast<double>(p);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    remainder[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    if (remainder[l] != remainder[r]) return remainder[l] > remainder[r];
    return atoms_[l].value > atoms_[r].value;
  });
  for (std::size_t i = 0; assigned < p; ++i, ++assigned) ++counts[order[i % k]];

  std::vector<double> diag;
  diag.reserve(p);
  for (std::size_t i = 0; i < k; ++i) diag.insert(diag.end(), counts[i], atoms_[i].value);
  std::sort(diag.begin(), diag.end());
  return diag;
}

AspectRatio::AspectRatio(std::size_t p_dim, std::size_t n_dim) : p(p_dim), n(n_dim) {
  if (p == 0 || n == 0) raise(ErrorKind::kInvalidArgument, "p and n must be positive");
}

// ---------------------------------------------------------------- ensemble

EntryEnsemble EntryEnsemble::real_gaussian() { return {}; }

EntryEnsemble EntryEnsemble::complex_gaussian() {
  EntryEnsemble e;
  e.kind_ = EnsembleKind::kComplexGaussian;
  return e;
}

EntryEnsemble EntryEnsemble::custom_real(CustomDensity density, double dof) {
  if (density == CustomDensity::kStudentT && !(dof > 2.0))
    raise(ErrorKind::kInvalidArgument, "standardised Student t needs dof > 2");
  EntryEnsemble e;
  e.kind_ = EnsembleKind::kCustomReal;
  e.density_ = density;
  e.dof_ = density == CustomDensity::kStudentT ? dof : 0.0;
  return e;
}

double EntryEnsemble::fourth_moment() const noexcept {
  switch (kind_) {
    case EnsembleKind::kRealGaussian: return 3.0;
    case EnsembleKind::kComplexGaussian: return 2.0;
    case EnsembleKind::kCustomReal:
      switch (density_) {
        case CustomDensity::kRademacher: return 1.0;
        case CustomDensity::kUniform: return 1.8;
        case CustomDensity::kStudentT:
          return dof_ > 4.0 ? 3.0 * (dof_ - 2.0) / (dof_ - 4.0)
                            : std::numeric_limits<double>::infinity();
      }
  }
  return 3.0;
}

double EntryEnsemble::alpha() const noexcept { return is_complex() ? 0.0 : 1.0; }

double EntryEnsemble::beta() const noexcept { return fourth_moment() - alpha() - 2.0; }

bool EntryEnsemble::fourth_moment_warning() const noexcept { return beta() != 0.0; }

double EntryEnsemble::real_density(double x) const {
  switch (kind_) {
    case EnsembleKind::kRealGaussian:
      return boost::math::pdf(boost::math::normal_distribution<double>(), x);
    case EnsembleKind::kComplexGaussian:
      raise(ErrorKind::kInvalidArgument, "complex ensemble has no real density");
    case EnsembleKind::kCustomReal:
      switch (density_) {
        case CustomDensity::kRademacher: return 0.0;
        case CustomDensity::kUniform: {
          const double half = std::sqrt(3.0);
          return std::abs(x) <= half ? 0.5 / half : 0.0;
        }
        case CustomDensity::kStudentT: {
          const double scale = std::sqrt((dof_ - 2.0) / dof_);
          return boost::math::pdf(boost::math::students_t_distribution<double>(dof_), x / scale) /
                 scale;
        }
      }
  }
  return 0.0;
}

TruncatedMoments EntryEnsemble::truncated_moments(double threshold) const {
  if (!(threshold > 0.0)) raise(ErrorKind::kInvalidArgument, "truncation threshold must be > 0");
  if (std::isinf(threshold)) return {0.0, 1.0};

  using boost::math::quadrature::gauss_kronrod;
  constexpr unsigned kDepth = 15;
  constexpr double kTol = 1e-14;

  if (kind_ == EnsembleKind::kComplexGaussian) {
    // |x| has density 2 r exp(-r^2); the law is rotation invariant so the
    // truncated mean vanishes.
    auto second = gauss_kronrod<double, 61>::integrate(
        [](double r) { return 2.0 * r * r * r * std::exp(-r * r); }, 0.0, threshold, kDepth, kTol);
    return {0.0, second};
  }
  if (kind_ == EnsembleKind::kCustomReal && density_ == CustomDensity::kRademacher) {
    if (threshold > 1.0) return {0.0, 1.0};
    return {0.0, 0.0};
  }

  // Every supported real law is symmetric, so the truncated mean is zero.
  double hi = threshold;
  if (kind_ == EnsembleKind::kCustomReal && density_ == CustomDensity::kUniform)
    hi = std::min(hi, std::sqrt(3.0));
  const double second = 2.0 * gauss_kronrod<double, 61>::integrate(
                                   [this](double x) { return x * x * real_density(x); }, 0.0, hi,
                                   kDepth, kTol);
  return {0.0, second};
}

std::string EntryEnsemble::name() const {
  switch (kind_) {
    case EnsembleKind::kRealGaussian: return "RG";
    case EnsembleKind::kComplexGaussian: return "CG";
    case EnsembleKind::kCustomReal:
      switch (density_) {
        case CustomDensity::kRademacher: return "rademacher";
        case CustomDensity::kUniform: return "uniform";
        case CustomDensity::kStudentT: return "student_t";
      }
  }
  return "RG";
}

// ---------------------------------------------------------------- test function

TestFunction TestFunction::polynomial(std::vector<double> coefficients) {
  for (double c : coefficients)
    if (!std::isfinite(c)) raise(ErrorKind::kInvalidArgument, "non-finite polynomial coefficient");
  while (coefficients.size() > 1 && coefficients.back() == 0.0) coefficients.pop_back();
  if (coefficients.empty()) coefficients.push_back(0.0);
  TestFunction f;
  f.coeffs_ = std::move(coefficients);
  return f;
}

TestFunction TestFunction::log() {
  TestFunction f;
  f.is_log_ = true;
  return f;
}

TestFunction TestFunction::parse(std::string_view text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) raise(ErrorKind::kInvalidArgument, "empty test function");
  if (s == "log" || s == "ln" || s == "log(x)") return log();

  // Split into signed terms; a sign directly after an exponent marker belongs
  // to the number.
  std::vector<std::string> terms;
  std::string current;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    const bool exponent_sign = i > 0 && (s[i - 1] == 'e' || s[i - 1] == 'E');
    if ((c == '+' || c == '-') && i > 0 && !exponent_sign) {
      terms.push_back(current);
      current.clear();
    }
    current.push_back(c);
  }
  terms.push_back(current);

  std::vector<double> coeffs;
  for (std::string term : terms) {
    double sign = 1.0;
    if (!term.empty() && (term[0] == '+' || term[0] == '-')) {
      if (term[0] == '-') sign = -1.0;
      term.erase(0, 1);
    }
    if (term.empty()) raise(ErrorKind::kInvalidArgument, "dangling sign in '" + s + "'");
    const auto xpos = term.find('x');
    double coef = 1.0;
    std::size_t degree = 0;
    if (xpos == std::string::npos) {
      coef = parse_double(term, s);
    } else {
      std::string head = term.substr(0, xpos);
      if (!head.empty() && head.back() == '*') head.pop_back();
      if (!head.empty()) coef = parse_double(head, s);
      std::string tail = term.substr(xpos + 1);
      if (tail.empty()) {
        degree = 1;
      } else if (tail[0] == '^') {
        const double d = parse_double(tail.substr(1), s);
        if (d < 0 || d != std::floor(d) || d > 64)
          raise(ErrorKind::kInvalidArgument, "bad exponent in '" + s + "'");
        degree = static_cast<std::size_t>(d);
      } else {
        raise(ErrorKind::kInvalidArgument, "cannot parse term '" + term + "'");
      }
    }
    if (coeffs.size() <= degree) coeffs.resize(degree + 1, 0.0);
    coeffs[degree] += sign * coef;
  }
  return polynomial(std::move(coeffs));
}

bool TestFunction::is_constant() const noexcept { return !is_log_ && coeffs_.size() == 1; }

cplx TestFunction::value(cplx z) const {
  if (is_log_) {
    if (!(z.real() > 0.0))
      raise(ErrorKind::kLogDomain, "log test function needs Re z > 0");
    return std::log(z);
  }
  cplx acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
  return acc;
}

cplx TestFunction::derivative(cplx z) const {
  if (is_log_) {
    if (!(z.real() > 0.0))
      raise(ErrorKind::kLogDomain, "log test function needs Re z > 0");
    return 1.0 / z;
  }
  cplx acc = 0.0;
  for (std::size_t k = coeffs_.size(); k-- > 1;) acc = acc * z + static_cast<double>(k) * coeffs_[k];
  return acc;
}

double TestFunction::value(double x) const {
  if (is_log_) {
    if (!(x > 0.0)) raise(ErrorKind::kLogDomain, "log test function needs x > 0");
    return std::log(x);
  }
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

TestFunction TestFunction::scaled(double c) const {
  if (is_log_) raise(ErrorKind::kInvalidArgument, "scaling is only defined for polynomials");
  std::vector<double> coeffs = coeffs_;
  for (auto& v : coeffs) v *= c;
  return polynomial(std::move(coeffs));
}

std::string TestFunction::to_string() const {
  if (is_log_) return "log";
  std::string out;
  for (std::size_t k = coeffs_.size(); k-- > 0;) {
    const double c = coeffs_[k];
    if (c == 0.0 && !(k == 0 && out.empty())) continue;
    if (!out.empty()) out += c < 0 ? " - " : " + ";
    const double mag = out.empty() ? c : std::abs(c);
    if (k >= 1 && std::abs(mag) == 1.0) {
      out += mag < 0 ? "-x" : "x";
    } else {
      out += format_double(mag);
      if (k >= 1) out += "*x";
    }
    if (k >= 2) out += "^" + std::to_string(k);
  }
  return out;
}

cplx eval_f(const TestFunction& f, cplx z) { return f.value(z); }
cplx eval_f_prime(const TestFunction& f, cplx z) { return f.derivative(z); }

SupportInterval support_interval(const PopulationSpectrum& spectrum, double y) {
  if (!(y > 0.0) || !std::isfinite(y)) raise(ErrorKind::kInvalidArgument, "ratio y must be > 0");
  const double root = std::sqrt(y);
  const double indicator = (y > 0.0 && y < 1.0) ? 1.0 : 0.0;
  return {spectrum.min_atom() * indicator * (1.0 - root) * (1.0 - root),
          spectrum.max_atom() * (1.0 + root) * (1.0 + root)};
}

}  // namespace lsslab
