#include "lsslab/simulator.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "lsslab/diagnostics.hpp"
#include "lsslab/errors.hpp"
#include "lsslab/stieltjes.hpp"

namespace lsslab {
namespace {

template <class Draw>
Eigen::MatrixXd fill_real(std::size_t p, std::size_t n, Draw draw) {
  Eigen::MatrixXd x(p, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < p; ++i) x(i, j) = draw();
  return x;
}

template <class M>
void check_identities(const M& B, const Eigen::VectorXd& lambda) {
  const double trace = std::real(B.trace());
  const double frob = B.squaredNorm();
  const double scale = std::max(1.0, frob);
  if (std::abs(lambda.sum() - trace) > 1e-9 * std::max(1.0, std::abs(trace)) ||
      std::abs(lambda.squaredNorm() - frob) > 1e-9 * scale)
    raise(ErrorKind::kNonConvergence, "eigenvalues fail the trace identities");
}

template <class M>
std::vector<double> eigen_impl(const M& B, bool verify) {
  if (B.rows() != B.cols()) raise(ErrorKind::kDimensionMismatch, "matrix is not square");
  if (B.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<M> solver(B, verify ? Eigen::ComputeEigenvectors
                                                    : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    raise(ErrorKind::kNonConvergence, "eigensolver did not converge");
  const Eigen::VectorXd& lambda = solver.eigenvalues();
  check_identities(B, lambda);
  if (verify) {
    const double norm = std::max(std::abs(lambda(0)), std::abs(lambda(lambda.size() - 1)));
    const Eigen::Index last = lambda.size() - 1;
    for (Eigen::Index idx : {Eigen::Index{0}, last / 4, last / 2, 3 * last / 4, last}) {
      const auto v = solver.eigenvectors().col(idx);
      const double res = (B * v - lambda(idx) * v).norm();
      if (res > 1e-10 * std::max(norm, 1e-300))
        raise(ErrorKind::kNonConvergence, "eigenpair residual check failed");
    }
  }
  return {lambda.data(), lambda.data() + lambda.size()};
}

// A constant f needs no contour; its centering is exactly c p.
double centering_for(const TestFunction& f, const PopulationSpectrum& spectrum, double y,
                     std::size_t p, const ContourParams& params) {
  if (f.is_constant()) return f.value(0.0) * static_cast<double>(p);
  return lss_centering(f, spectrum, y, p, params);
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

double Truncation::eta_for(std::size_t n) const {
  if (eta > 0.0) return eta;
  if (n < 3) raise(ErrorKind::kInvalidArgument, "default eta = 1/log n needs n >= 3");
  return 1.0 / std::log(static_cast<double>(n));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t replicate_seed(std::uint64_t root_seed, std::size_t index) {
  return splitmix64(root_seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(index));
}

EntryMatrix sample_entries(const EntryEnsemble& ensemble, std::size_t p, std::size_t n,
                           std::uint64_t seed) {
  if (p == 0 || n == 0) raise(ErrorKind::kInvalidArgument, "entry matrix needs p, n > 0");
  std::mt19937_64 rng(seed);
  switch (ensemble.kind()) {
    case EnsembleKind::kRealGaussian: {
      std::normal_distribution<double> normal;
      return fill_real(p, n, [&] { return normal(rng); });
    }
    case EnsembleKind::kComplexGaussian: {
      std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
      Eigen::MatrixXcd x(p, n);
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < p; ++i) {
          const double re = normal(rng);
          const double im = normal(rng);
          x(i, j) = {re, im};
        }
      return x;
    }
    case EnsembleKind::kCustomReal:
      switch (ensemble.custom_density()) {
        case CustomDensity::kRademacher:
          return fill_real(p, n, [&] { return (rng() >> 63) ? 1.0 : -1.0; });
        case CustomDensity::kUniform: {
          std::uniform_real_distribution<double> u(-std::sqrt(3.0), std::sqrt(3.0));
          return fill_real(p, n, [&] { return u(rng); });
        }
        case CustomDensity::kStudentT: {
          const double nu = ensemble.dof();
          const double scale = std::sqrt((nu - 2.0) / nu);
          std::student_t_distribution<double> t(nu);
          return fill_real(p, n, [&] { return scale * t(rng); });
        }
      }
  }
  raise(ErrorKind::kInvalidArgument, "unknown ensemble");
}

std::size_t truncate_normalize(EntryMatrix& entries, const EntryEnsemble& ensemble, std::size_t n,
                               double eta) {
  const double threshold = eta * std::pow(static_cast<double>(n), 0.25);
  if (!(threshold > 0.0)) raise(ErrorKind::kInvalidArgument, "truncation threshold must be > 0");
  const auto moments = ensemble.truncated_moments(threshold);
  if (moments.variance < 1e-6)
    raise(ErrorKind::kDegenerateTruncation, "truncated variance below 1e-6");
  const double sd = std::sqrt(moments.variance);
  std::size_t removed = 0;
  std::visit(
      [&](auto& x) {
        for (Eigen::Index j = 0; j < x.cols(); ++j)
          for (Eigen::Index i = 0; i < x.rows(); ++i) {
            auto& v = x(i, j);
            if (!(std::abs(v) < threshold)) {
              v = 0.0;
              ++removed;
            }
            v = (v - moments.mean) / sd;
          }
      },
      entries);
  return removed;
}

HermitianMatrix assemble_B(const PopulationSpectrum& spectrum, const EntryMatrix& entries,
                           std::size_t n) {
  return std::visit(
      [&](const auto& x) -> HermitianMatrix {
        using M = std::decay_t<decltype(x)>;
        if (static_cast<std::size_t>(x.cols()) != n)
          raise(ErrorKind::kDimensionMismatch, "entry matrix must have n columns");
        const std::size_t p = static_cast<std::size_t>(x.rows());
        const auto diag = spectrum.diagonal(p);
        Eigen::VectorXd root(p);
        for (std::size_t i = 0; i < p; ++i) root(i) = std::sqrt(diag[i]);
        const M y = root.asDiagonal() * x;
        M B = M::Zero(p, p);
        B.template selfadjointView<Eigen::Lower>().rankUpdate(y, 1.0 / static_cast<double>(n));
        // Mirror the computed triangle so B is Hermitian bit for bit.
        M full = B.template selfadjointView<Eigen::Lower>();
        if constexpr (std::is_same_v<M, Eigen::MatrixXcd>)
          for (std::size_t i = 0; i < p; ++i) full(i, i) = full(i, i).real();
        return full;
      },
      entries);
}

std::vector<double> eigenvalues(const HermitianMatrix& B, bool verify) {
  return std::visit([&](const auto& m) { return eigen_impl(m, verify); }, B);
}

double lss_centered(const TestFunction& f, const std::vector<double>& eigs, double centering) {
  double acc = 0.0;
  for (double lambda : eigs) {
    if (f.is_log() && !(lambda > 0.0))
      raise(ErrorKind::kLogDomain, "log test function with a nonpositive eigenvalue");
    acc += f.value(lambda);
  }
  return acc - centering;
}

double lss_centered(const TestFunction& f, const std::vector<double>& eigs,
                    const PopulationSpectrum& spectrum, double y, std::size_t p,
                    const ContourParams& params) {
  return lss_centered(f, eigs, centering_for(f, spectrum, y, p, params));
}

ExperimentRecord run_experiment(const SimConfig& cfg, const CltMoments& moments) {
  const std::size_t p = cfg.ratio.p;
  const std::size_t n = cfg.ratio.n;
  const double y = cfg.ratio.y();
  if (cfg.replicates == 0) raise(ErrorKind::kInvalidArgument, "replicates must be >= 1");
  if (p * n > cfg.max_entries)
    raise(ErrorKind::kConstraintViolation, "p * n exceeds the configured memory budget");

  ExperimentRecord record;
  record.config = cfg;
  record.moments = moments;
  record.started_at = utc_now();
  record.centering = centering_for(cfg.f, cfg.spectrum, y, p, cfg.contour);
  record.rows.resize(cfg.replicates);

  const auto support = support_interval(cfg.spectrum, y);
  const double eps = cfg.contour.epsilon > 0.0 ? cfg.contour.epsilon : default_epsilon(support);
  const double region_lo = support.lo - eps / 2.0;
  const double region_hi = support.hi + eps / 2.0;
  const double eta = cfg.truncation.enabled ? cfg.truncation.eta_for(n) : 0.0;

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> events{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::size_t first_error_index = cfg.replicates;

  auto worker = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= cfg.replicates) return;
      try {
        ReplicateRow row;
        row.index = r;
        row.seed = replicate_seed(cfg.root_seed, r);
        EntryMatrix x = sample_entries(cfg.ensemble, p, n, row.seed);
        if (cfg.truncation.enabled) row.truncated = truncate_normalize(x, cfg.ensemble, n, eta);
        const auto eigs = eigenvalues(assemble_B(cfg.spectrum, x, n), r == 0);
        row.lambda_min = eigs.front();
        row.lambda_max = eigs.back();
        std::size_t outside = 0;
        for (double l : eigs) outside += (l < region_lo || l > region_hi) ? 1 : 0;
        events += outside;
        row.lss = lss_centered(cfg.f, eigs, record.centering);
        row.statistic = normalize(row.lss, moments);
        record.rows[r] = row;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (r < first_error_index) {
          first_error_index = r;
          first_error = std::current_exception();
        }
        next = cfg.replicates;
      }
    }
  };

  const int threads = std::max(1, cfg.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) {
    try {
      std::rethrow_exception(first_error);
    } catch (const Error& e) {
      raise(e.kind(), "replicate " + std::to_string(first_error_index) + ": " + e.what());
    }
  }

  std::vector<double> stats;
  stats.reserve(cfg.replicates);
  for (const auto& row : record.rows) stats.push_back(row.statistic);
  double mean = 0.0;
  for (double s : stats) mean += s;
  mean /= static_cast<double>(stats.size());
  double var = 0.0;
  for (double s : stats) var += (s - mean) * (s - mean);
  var = stats.size() > 1 ? var / static_cast<double>(stats.size() - 1) : 0.0;
  record.summary = {ks_to_normal(stats), mean, var};
  record.support_events = events;
  record.finished_at = utc_now();
  return record;
}

double estimate_replicate_seconds(std::size_t p, std::size_t n, bool complex_entries) {
  constexpr std::size_t kP = 96;
  constexpr std::size_t kN = 192;
  const auto ensemble =
      complex_entries ? EntryEnsemble::complex_gaussian() : EntryEnsemble::real_gaussian();
  const auto spectrum = PopulationSpectrum::identity();
  double best = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < 3; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto x = sample_entries(ensemble, kP, kN, 1234 + rep);
    const auto eigs = eigenvalues(assemble_B(spectrum, x, kN));
    const auto t1 = std::chrono::steady_clock::now();
    if (eigs.empty()) break;
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  const auto work = [](double pp, double nn) { return pp * pp * nn + pp * pp * pp + pp * nn * 20; };
  return best * work(static_cast<double>(p), static_cast<double>(n)) / work(kP, kN);
}

}  // namespace lsslab
