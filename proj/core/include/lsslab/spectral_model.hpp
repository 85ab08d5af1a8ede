#pragma once

// Domain types shared by every module: the population spectrum H_p, the
// dimension ratio, the entry ensemble and the analytic test function.

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lsslab {

using cplx = std::complex<double>;

struct Atom {
  double value = 0.0;   // population eigenvalue t_k >= 0
  double weight = 0.0;  // mass w_k > 0

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Population eigenvalue distribution as a finite list of weighted atoms.
///
/// Weights must sum to one within 1e-12. By default every atom must lie in
/// [0, 1] (spectral norm at most one); `allow_unbounded` lifts the upper cap.
class PopulationSpectrum {
 public:
  PopulationSpectrum(std::vector<Atom> atoms, bool allow_unbounded = false);

  /// Validates as above after dividing the weights by their sum.
  static PopulationSpectrum normalized(std::vector<Atom> atoms, bool allow_unbounded = false);
  /// delta_1, the "identity" shorthand of the config files.
  static PopulationSpectrum identity();
  /// Midpoint discretisation of the uniform law on [a, b] with `nodes` atoms.
  /// Continuous population laws are only ever handled through such atom grids.
  static PopulationSpectrum uniform(double a, double b, std::size_t nodes,
                                    bool allow_unbounded = false);

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  bool allow_unbounded() const noexcept { return allow_unbounded_; }
  double min_atom() const noexcept;
  double max_atom() const noexcept;
  /// Integral of t^k dH.
  double moment(int k) const noexcept;

  PopulationSpectrum renormalized() const;

  /// Diagonal of a p x p population matrix with H_p as its spectral law.
  /// Multiplicities use largest-remainder apportionment, ties going to the
  /// larger atom; entries are returned in ascending order.
  std::vector<double> diagonal(std::size_t p) const;

  friend bool operator==(const PopulationSpectrum&, const PopulationSpectrum&) = default;

 private:
  std::vector<Atom> atoms_;
  bool allow_unbounded_ = false;
};

struct AspectRatio {
  std::size_t p = 1;
  std::size_t n = 1;

  AspectRatio(std::size_t p_dim, std::size_t n_dim);
  double y() const noexcept { return static_cast<double>(p) / static_cast<double>(n); }

  friend bool operator==(const AspectRatio&, const AspectRatio&) = default;
};

enum class EnsembleKind { kRealGaussian, kComplexGaussian, kCustomReal };
enum class CustomDensity { kRademacher, kStudentT, kUniform };

struct TruncatedMoments {
  double mean = 0.0;      // E x 1{|x| < c}
  double variance = 1.0;  // E |x 1{|x| < c} - mean|^2
};

/// Law of the i.i.d. entries x_ij, standardised to E x = 0, E|x|^2 = 1.
class EntryEnsemble {
 public:
  static EntryEnsemble real_gaussian();
  static EntryEnsemble complex_gaussian();
  /// Student t needs dof > 2 so that the standardisation exists.
  static EntryEnsemble custom_real(CustomDensity density, double dof = 0.0);

  EnsembleKind kind() const noexcept { return kind_; }
  CustomDensity custom_density() const noexcept { return density_; }
  double dof() const noexcept { return dof_; }
  bool is_complex() const noexcept { return kind_ == EnsembleKind::kComplexGaussian; }

  double fourth_moment() const noexcept;  // E|x|^4, +inf when it does not exist
  double alpha() const noexcept;          // |E x^2|^2
  double beta() const noexcept;           // E|x|^4 - |E x^2|^2 - 2
  /// Set when beta != 0, i.e. the fourth moment does not match the Gaussian case.
  bool fourth_moment_warning() const noexcept;

  /// Density of a real entry; zero everywhere for the discrete Rademacher law.
  double real_density(double x) const;
  /// Distributional moments of x 1{|x| < threshold}. An infinite threshold
  /// returns {0, 1} exactly.
  TruncatedMoments truncated_moments(double threshold) const;

  std::string name() const;

  friend bool operator==(const EntryEnsemble&, const EntryEnsemble&) = default;

 private:
  EnsembleKind kind_ = EnsembleKind::kRealGaussian;
  CustomDensity density_ = CustomDensity::kRademacher;
  double dof_ = 0.0;
};

/// Analytic test function: a real polynomial or the principal logarithm.
class TestFunction {
 public:
  /// Coefficients c_0..c_d of c_0 + c_1 x + ... + c_d x^d.
  static TestFunction polynomial(std::vector<double> coefficients);
  static TestFunction log();
  /// Accepts "log", "x", "x^2", "x^3+x", "2*x^2 - 0.5x + 3", "1".
  static TestFunction parse(std::string_view text);

  bool is_log() const noexcept { return is_log_; }
  bool is_constant() const noexcept;
  std::span<const double> coefficients() const noexcept { return coeffs_; }

  cplx value(cplx z) const;
  cplx derivative(cplx z) const;
  double value(double x) const;

  /// c * f; only defined for polynomials.
  TestFunction scaled(double c) const;

  /// Canonical text form; parse(to_string()) reproduces the function.
  std::string to_string() const;

  friend bool operator==(const TestFunction&, const TestFunction&) = default;

 private:
  std::vector<double> coeffs_;
  bool is_log_ = false;
};

cplx eval_f(const TestFunction& f, cplx z);
cplx eval_f_prime(const TestFunction& f, cplx z);

struct SupportInterval {
  double lo = 0.0;
  double hi = 0.0;
};

/// [lambda_min 1_{(0,1)}(y) (1 - sqrt y)^2, lambda_max (1 + sqrt y)^2].
SupportInterval support_interval(const PopulationSpectrum& spectrum, double y);

}  // namespace lsslab
