#pragma once

// Sample covariance matrices B = (1/n) T^{1/2} X X* T^{1/2}, their spectra and
// replicated experiments on the normalised linear spectral statistic.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "lsslab/clt_moments.hpp"
#include "lsslab/contour.hpp"
#include "lsslab/spectral_model.hpp"

namespace lsslab {

/// p x n entry matrix; complex only for the CG ensemble.
using EntryMatrix = std::variant<Eigen::MatrixXd, Eigen::MatrixXcd>;
using HermitianMatrix = std::variant<Eigen::MatrixXd, Eigen::MatrixXcd>;

struct Truncation {
  bool enabled = false;
  double eta = 0.0;  // <= 0 selects 1 / log n

  double eta_for(std::size_t n) const;
  friend bool operator==(const Truncation&, const Truncation&) = default;
};

struct SimConfig {
  AspectRatio ratio{1, 1};
  PopulationSpectrum spectrum = PopulationSpectrum::identity();
  EntryEnsemble ensemble = EntryEnsemble::real_gaussian();
  TestFunction f = TestFunction::parse("x");
  std::size_t replicates = 1;
  std::uint64_t root_seed = 0;
  Truncation truncation;
  ContourParams contour;
  int threads = 1;
  std::size_t max_entries = std::size_t{1} << 24;  // cap on p * n
};

struct ReplicateRow {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  double statistic = 0.0;  // normalised
  double lss = 0.0;        // centered, before normalisation
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  std::size_t truncated = 0;  // entries removed by truncation
};

struct ExperimentSummary {
  double ks = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

struct ExperimentRecord {
  SimConfig config;
  CltMoments moments;
  double centering = 0.0;
  std::vector<ReplicateRow> rows;
  ExperimentSummary summary;
  std::size_t support_events = 0;  // eigenvalues outside [lo - eps/2, hi + eps/2]
  std::string started_at;
  std::string finished_at;
};

/// Seed of replicate `index`: the (index + 1)-th output of a splitmix64
/// generator started at `root_seed`.
std::uint64_t replicate_seed(std::uint64_t root_seed, std::size_t index);
std::uint64_t splitmix64(std::uint64_t x);

/// Entries drawn column by column from std::mt19937_64 seeded with `seed`.
EntryMatrix sample_entries(const EntryEnsemble& ensemble, std::size_t p, std::size_t n,
                           std::uint64_t seed);

/// x -> (x 1{|x| < eta n^{1/4}} - E) / sigma with the ensemble's
/// distributional truncated moments. Returns the number of entries removed.
std::size_t truncate_normalize(EntryMatrix& entries, const EntryEnsemble& ensemble, std::size_t n,
                               double eta);

HermitianMatrix assemble_B(const PopulationSpectrum& spectrum, const EntryMatrix& entries,
                           std::size_t n);

/// Ascending eigenvalues. Always checks the trace and Frobenius identities;
/// with `verify` also the residuals of five eigenpairs.
std::vector<double> eigenvalues(const HermitianMatrix& B, bool verify = false);

/// sum_i f(lambda_i) - centering.
double lss_centered(const TestFunction& f, const std::vector<double>& eigs, double centering);
double lss_centered(const TestFunction& f, const std::vector<double>& eigs,
                    const PopulationSpectrum& spectrum, double y, std::size_t p,
                    const ContourParams& params = {});

ExperimentRecord run_experiment(const SimConfig& cfg, const CltMoments& moments);

/// Wall-clock seconds of one replicate at (p, n), measured on a small
/// instance and scaled by p^2 n + p^3.
double estimate_replicate_seconds(std::size_t p, std::size_t n, bool complex_entries);

}  // namespace lsslab
