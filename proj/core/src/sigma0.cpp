#include <Eigen/Dense>
#include <atomic>
#include <exception>
#include <mutex>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "lsslab/diagnostics.hpp"
#include "lsslab/errors.hpp"
#include "lsslab/simulator.hpp"
#include "lsslab/stieltjes.hpp"

namespace lsslab {
namespace {

constexpr int kChebDegree = 64;

// Re K on [a, b] as a Chebyshev series, where
//   K(lambda) = -(1/2 pi i) closed-integral f'(z) (-z s(z)) / (lambda - z) dz,
// so that Y_j = sum_i c_i K(lambda_i) for eps_j(z) = sum_i c_i / (lambda_i - z).
// Beyond [a, b] the contour is taken to enclose lambda as well:
//   K(lambda) = G(lambda) - (1/2 pi i) closed-integral_tight G(z) / (lambda - z) dz,
// with G(z) = f'(z) (-z s(z)) and a tight contour around the support.
class KernelSeries {
 public:
  KernelSeries(const TestFunction& f, const PopulationSpectrum& spectrum, double y,
               const Contour& contour, const Contour& tight, double a, double b)
      : f_(f), spectrum_(spectrum), y_(y), a_(a), b_(b) {
    std::vector<double> x(kChebDegree);
    for (int k = 0; k < kChebDegree; ++k)
      x[k] = std::cos(std::numbers::pi * (k + 0.5) / kChebDegree);
    const auto coarse = values(f, spectrum, y, contour, contour.nodes(), x);
    const auto fine = values(f, spectrum, y, contour, 2 * contour.nodes(), x);
    std::vector<double> re(kChebDegree);
    for (int k = 0; k < kChebDegree; ++k) {
      if (std::abs(fine[k] - coarse[k]) > 1e-9 * (1.0 + std::abs(fine[k])))
        raise(ErrorKind::kQuadratureStall, "martingale kernel quadrature is not converged");
      if (std::abs(fine[k].imag()) > 1e-8 * (1.0 + std::abs(fine[k].real())))
        raise(ErrorKind::kImaginaryResidue, "martingale kernel is not real on the real axis");
      re[k] = fine[k].real();
    }
    coeffs_.assign(kChebDegree, 0.0);
    for (int j = 0; j < kChebDegree; ++j) {
      double acc = 0.0;
      for (int k = 0; k < kChebDegree; ++k)
        acc += re[k] * std::cos(std::numbers::pi * j * (k + 0.5) / kChebDegree);
      coeffs_[j] = 2.0 * acc / kChebDegree;
    }
    coeffs_[0] *= 0.5;
    // Interpolation check between the nodes.
    std::vector<double> mid(kChebDegree - 1);
    for (int k = 0; k + 1 < kChebDegree; ++k)
      mid[k] = std::cos(std::numbers::pi * (k + 1.0) / kChebDegree);
    const auto direct = values(f, spectrum, y, contour, 2 * contour.nodes(), mid);
    for (int k = 0; k + 1 < kChebDegree; ++k) {
      const double lambda = 0.5 * (a_ + b_) + 0.5 * (b_ - a_) * mid[k];
      if (std::abs((*this)(lambda) - direct[k].real()) > 1e-9 * (1.0 + std::abs(direct[k])))
        raise(ErrorKind::kQuadratureStall, "martingale kernel interpolation is not converged");
    }

    const auto rule = tight.rule(2 * tight.nodes());
    const auto sols = solve_along(rule.nodes, spectrum, y);
    tight_nodes_ = rule.nodes;
    tight_g_.resize(rule.nodes.size());
    const cplx scale = -1.0 / (2.0 * std::numbers::pi * cplx(0.0, 1.0));
    for (std::size_t k = 0; k < rule.nodes.size(); ++k)
      tight_g_[k] = scale * rule.weights[k] * G(rule.nodes[k], sols[k].s_under);
    for (double lambda : {b_ - 0.05 * (b_ - a_), b_})
      if (std::abs(extended(lambda) - series(lambda)) > 1e-8 * (1.0 + std::abs(series(lambda))))
        raise(ErrorKind::kQuadratureStall, "martingale kernel continuation does not match the series");
  }

  double operator()(double lambda) const {
    return lambda >= a_ && lambda <= b_ ? series(lambda) : extended(lambda);
  }

 private:
  cplx G(cplx z, cplx s_under) const { return f_.derivative(z) * (-z * s_under); }

  double extended(double lambda) const {
    const cplx z(lambda, 0.0);
    cplx acc = G(z, solve_s_under(z, spectrum_, y_).s_under);
    for (std::size_t k = 0; k < tight_nodes_.size(); ++k) acc += tight_g_[k] / (lambda - tight_nodes_[k]);
    return acc.real();
  }

  double series(double lambda) const {
    const double t = (2.0 * lambda - a_ - b_) / (b_ - a_);
    double b1 = 0.0;
    double b2 = 0.0;
    for (int j = kChebDegree - 1; j >= 1; --j) {
      const double b0 = coeffs_[j] + 2.0 * t * b1 - b2;
      b2 = b1;
      b1 = b0;
    }
    return coeffs_[0] + t * b1 - b2;
  }

  std::vector<cplx> values(const TestFunction& f, const PopulationSpectrum& spectrum, double y,
                           const Contour& contour, int m, const std::vector<double>& x) const {
    const auto rule = contour.rule(m);
    const auto sols = solve_along(rule.nodes, spectrum, y);
    std::vector<cplx> g(rule.nodes.size());
    const cplx scale = -1.0 / (2.0 * std::numbers::pi * cplx(0.0, 1.0));
    for (std::size_t k = 0; k < g.size(); ++k) {
      const cplx z = rule.nodes[k];
      g[k] = scale * rule.weights[k] * G(z, sols[k].s_under);
    }
    std::vector<cplx> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double lambda = 0.5 * (a_ + b_) + 0.5 * (b_ - a_) * x[i];
      cplx acc = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k) acc += g[k] / (lambda - rule.nodes[k]);
      out[i] = acc;
    }
    return out;
  }

  TestFunction f_;
  PopulationSpectrum spectrum_;
  double y_;
  double a_;
  double b_;
  std::vector<double> coeffs_;
  std::vector<cplx> tight_nodes_;
  std::vector<cplx> tight_g_;
};

double outer_replicate(const KernelSeries& kernel, const std::vector<double>& root_t,
                       std::size_t n, std::size_t inner, std::uint64_t seed) {
  const std::size_t p = root_t.size();
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto draw_column = [&](Eigen::Ref<Eigen::VectorXd> col) {
    for (std::size_t i = 0; i < p; ++i) col(i) = root_t[i] * normal(rng) * inv_sqrt_n;
  };

  Eigen::MatrixXd revealed(p, n);
  for (std::size_t j = 0; j < n; ++j) draw_column(revealed.col(j));
  Eigen::VectorXd t_diag(p);
  for (std::size_t i = 0; i < p; ++i) t_diag(i) = root_t[i] * root_t[i];

  Eigen::MatrixXd prefix = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd fresh(p, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(static_cast<Eigen::Index>(p));
  const std::size_t half = inner / 2;
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const Eigen::VectorXd rj = revealed.col(j);
    const std::size_t unrevealed = n - 1 - j;
    double y_half[2] = {0.0, 0.0};
    for (std::size_t rep = 0; rep < inner; ++rep) {
      Eigen::MatrixXd A = prefix;
      if (unrevealed > 0) {
        for (std::size_t k = 0; k < unrevealed; ++k) draw_column(fresh.col(k));
        A.noalias() += fresh.leftCols(unrevealed) * fresh.leftCols(unrevealed).transpose();
      }
      solver.compute(A);
      if (solver.info() != Eigen::Success)
        raise(ErrorKind::kNonConvergence, "eigensolver did not converge");
      const auto& U = solver.eigenvectors();
      const auto& lambda = solver.eigenvalues();
      const Eigen::VectorXd proj = U.transpose() * rj;
      double yj = 0.0;
      for (std::size_t i = 0; i < p; ++i) {
        const double c = proj(i) * proj(i) -
                         U.col(i).cwiseAbs2().dot(t_diag) / static_cast<double>(n);
        yj += c * kernel(lambda(i));
      }
      y_half[rep < half ? 0 : 1] += yj;
    }
    // Independent halves make the product unbiased for E (E_j eps-term)^2.
    total += (y_half[0] / static_cast<double>(half)) *
             (y_half[1] / static_cast<double>(inner - half));
    prefix.noalias() += rj * rj.transpose();
  }
  return total;
}

}  // namespace

double sigma0_projected_work(std::size_t p, const Sigma0Options& options) {
  const double pp = static_cast<double>(p);
  const double nn = static_cast<double>(options.n_small);
  const double per_draw = 10.0 * pp * pp * pp + 2.0 * pp * pp * nn + 2.0 * pp * nn + 2.0 * pp * kChebDegree;
  return static_cast<double>(options.outer_reps) * nn * static_cast<double>(options.inner_reps) *
         per_draw;
}

Sigma0Estimate sigma0_nested_mc(const TestFunction& f, const PopulationSpectrum& spectrum,
                                double y, const Sigma0Options& options) {
  const std::size_t n = options.n_small;
  if (n < 2 || n > 64) raise(ErrorKind::kInvalidArgument, "nested MC needs 2 <= n_small <= 64");
  if (options.inner_reps < 2) raise(ErrorKind::kInvalidArgument, "nested MC needs inner_reps >= 2");
  if (options.outer_reps < 2) raise(ErrorKind::kInvalidArgument, "nested MC needs outer_reps >= 2");
  const auto p = static_cast<std::size_t>(std::max<long long>(1, std::llround(y * static_cast<double>(n))));

  Sigma0Estimate est;
  est.p = p;
  est.n = n;
  est.projected_work = sigma0_projected_work(p, options);
  if (est.projected_work > options.max_work)
    raise(ErrorKind::kCostBudgetExceeded, "nested MC projected work exceeds the configured cap");

  const double yn = static_cast<double>(p) / static_cast<double>(n);
  const auto support = support_interval(spectrum, yn);
  // Wide enough to hold nearly every eigenvalue at this size; the rest go
  // through the kernel's continuation.
  const double x_r = 2.0 * support.hi + 1.0;
  const double x_l = -0.5 * (1.0 + support.hi);
  const int nodes = std::max(16, options.nodes);
  const Contour contour(x_l, x_r, 1.0, nodes);
  const Contour tight = build_contour(spectrum, yn, default_epsilon(support), 1.0, nodes);
  const KernelSeries kernel(f, spectrum, yn, contour, tight, 0.5 * x_l, 0.5 * (support.hi + x_r));

  const auto diag = spectrum.diagonal(p);
  std::vector<double> root_t(p);
  for (std::size_t i = 0; i < p; ++i) root_t[i] = std::sqrt(diag[i]);

  std::vector<double> per_outer(options.outer_reps);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t o = next.fetch_add(1);
      if (o >= options.outer_reps) return;
      try {
        per_outer[o] =
            outer_replicate(kernel, root_t, n, options.inner_reps, replicate_seed(options.seed, o));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = options.outer_reps;
      }
    }
  };
  const int threads = std::max(1, options.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  const double m = static_cast<double>(per_outer.size());
  double mean = 0.0;
  for (double v : per_outer) mean += v;
  mean /= m;
  double var = 0.0;
  for (double v : per_outer) var += (v - mean) * (v - mean);
  var /= (m - 1.0);
  est.value = mean;
  est.std_error = std::sqrt(var / m);
  return est;
}

}  // namespace lsslab
