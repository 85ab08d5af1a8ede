#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "lsslab/diagnostics.hpp"
#include "lsslab/errors.hpp"
#include "lsslab/simulator.hpp"

namespace lsslab {
namespace {

struct Accumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
};

// One block of draws sharing a matrix A, seeded independently.
Accumulator run_block(const std::vector<double>& root_t, std::size_t n, int k, std::size_t draws,
                      std::uint64_t seed, const QformOptions& options) {
  const std::size_t p = root_t.size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));

  Eigen::MatrixXcd A;
  cplx centre = 0.0;
  if (options.matrix == QformMatrix::kResolvent) {
    // A = (sum_{k >= 2} r_k r_k^* - z I)^{-1}, independent of r_1.
    Eigen::MatrixXd rest(p, n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j)
      for (std::size_t i = 0; i < p; ++i) rest(i, j) = root_t[i] * normal(rng) * inv_sqrt_n;
    Eigen::MatrixXcd D = (rest * rest.transpose()).cast<cplx>();
    D.diagonal().array() -= options.z;
    A = D.partialPivLu().inverse();
    for (std::size_t i = 0; i < p; ++i) centre += root_t[i] * root_t[i] * A(i, i);
    centre /= static_cast<double>(n);
  } else if (options.matrix == QformMatrix::kFixedIdentity) {
    for (std::size_t i = 0; i < p; ++i) centre += root_t[i] * root_t[i];
    centre /= static_cast<double>(n);
  }

  Accumulator acc;
  Eigen::VectorXcd r(p);
  for (std::size_t d = 0; d < draws; ++d) {
    for (std::size_t i = 0; i < p; ++i) r(i) = root_t[i] * normal(rng) * inv_sqrt_n;
    cplx form = 0.0;
    if (options.matrix == QformMatrix::kResolvent) form = r.dot(A * r);
    if (options.matrix == QformMatrix::kFixedIdentity) form = r.squaredNorm();
    const double v = std::pow(std::abs(form - centre), k);
    acc.sum += v;
    acc.sum_sq += v * v;
  }
  return acc;
}

}  // namespace

QformProbe qform_probe(const PopulationSpectrum& spectrum, double y,
                       const std::vector<std::size_t>& n_grid, int k, std::size_t replicates,
                       std::uint64_t seed, const QformOptions& options) {
  if (k != 2 && k != 4) raise(ErrorKind::kInvalidArgument, "moment order must be 2 or 4");
  if (n_grid.size() < 2) raise(ErrorKind::kTooFewPoints, "probe needs at least two n values");
  if (replicates < 2) raise(ErrorKind::kInvalidArgument, "probe needs at least two replicates");
  if (!(y > 0.0)) raise(ErrorKind::kInvalidArgument, "ratio y must be > 0");

  QformProbe probe;
  for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
    const std::size_t n = n_grid[gi];
    const auto p = static_cast<std::size_t>(std::llround(y * static_cast<double>(n)));
    if (n < 2 || p == 0) raise(ErrorKind::kInvalidArgument, "probe grid gives an empty dimension");
    const auto diag = spectrum.diagonal(p);
    std::vector<double> root_t(p);
    for (std::size_t i = 0; i < p; ++i) root_t[i] = std::sqrt(diag[i]);

    const std::size_t per_block =
        options.matrix == QformMatrix::kResolvent ? std::max<std::size_t>(1, options.draws_per_matrix)
                                                  : replicates;
    const std::size_t blocks = (replicates + per_block - 1) / per_block;
    std::vector<Accumulator> results(blocks);
    std::atomic<std::size_t> next{0};
    const std::uint64_t point_seed = replicate_seed(seed, gi);
    auto worker = [&] {
      for (;;) {
        const std::size_t b = next.fetch_add(1);
        if (b >= blocks) return;
        const std::size_t draws = std::min(per_block, replicates - b * per_block);
        results[b] = run_block(root_t, n, k, draws, replicate_seed(point_seed, b), options);
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
    Accumulator total;
    for (const auto& r : results) {
      total.sum += r.sum;
      total.sum_sq += r.sum_sq;
    }
    const double m = static_cast<double>(replicates);
    const double mean = total.sum / m;
    const double var = std::max(0.0, (total.sum_sq / m - mean * mean) * m / (m - 1.0));
    probe.points.push_back({n, p, mean, std::sqrt(var / m)});
  }

  // Least-squares slope of log moment on log n; zero moments give no slope.
  bool all_positive = true;
  for (const auto& pt : probe.points) all_positive = all_positive && pt.moment > 0.0;
  if (all_positive) {
    double mx = 0.0;
    double my = 0.0;
    for (const auto& pt : probe.points) {
      mx += std::log(static_cast<double>(pt.n));
      my += std::log(pt.moment);
    }
    mx /= static_cast<double>(probe.points.size());
    my /= static_cast<double>(probe.points.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (const auto& pt : probe.points) {
      const double dx = std::log(static_cast<double>(pt.n)) - mx;
      sxy += dx * (std::log(pt.moment) - my);
      sxx += dx * dx;
    }
    probe.slope = sxy / sxx;
  } else {
    probe.slope = std::numeric_limits<double>::quiet_NaN();
  }
  return probe;
}

}  // namespace lsslab
