#pragma once

// Run configuration of the lsslab tool: JSON text in, fully defaulted and
// validated RunConfig out, and back.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lsslab/clt_moments.hpp"
#include "lsslab/contour.hpp"
#include "lsslab/diagnostics.hpp"
#include "lsslab/simulator.hpp"
#include "lsslab/spectral_model.hpp"

namespace lsslab::cli {

enum class ExperimentKind { kLsd, kMoments, kSimulate, kKsRate, kSteinCheck, kProbeQform };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(std::string_view text);

struct OutputConfig {
  std::string dir;  // empty: $LSSLAB_OUT_DIR, else ./lsslab-out
  std::string prefix;  // empty: the experiment kind
  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct CostCaps {
  double max_replicate_seconds = 7200.0;
  double max_nested_work = 1e12;
  std::size_t max_entries = std::size_t{1} << 24;
  friend bool operator==(const CostCaps&, const CostCaps&) = default;
};

struct LsdConfig {
  std::size_t points = 200;
  friend bool operator==(const LsdConfig&, const LsdConfig&) = default;
};

struct Sigma0Config {
  bool enabled = false;
  std::size_t n_small = 32;
  std::size_t inner_reps = 32;
  std::size_t outer_reps = 400;
  int nodes = 32;
  friend bool operator==(const Sigma0Config&, const Sigma0Config&) = default;
};

struct SteinConfig {
  std::size_t contexts = 20;
  std::size_t grid_points = 10000;
  double grid_lo = -6.0;
  double grid_hi = 6.0;
  double w0_lo = -3.0;
  double w0_hi = 3.0;
  double theta_lo = 0.01;
  double theta_hi = 2.0;
  double fd_step = 1e-6;
  friend bool operator==(const SteinConfig&, const SteinConfig&) = default;
};

struct QformConfig {
  int k = 2;
  QformMatrix matrix = QformMatrix::kFixedIdentity;
  double z_re = 0.0;
  double z_im = 1.0;
  std::size_t replicates = 100000;
  std::size_t draws_per_matrix = 1000;
  friend bool operator==(const QformConfig&, const QformConfig&) = default;
};

struct BootstrapConfig {
  int resamples = 1000;
  double level = 0.90;
  friend bool operator==(const BootstrapConfig&, const BootstrapConfig&) = default;
};

struct RunConfig {
  ExperimentKind kind = ExperimentKind::kMoments;
  PopulationSpectrum spectrum = PopulationSpectrum::identity();
  double y = 0.5;
  std::size_t n = 256;  // p = round(y n) for simulate
  std::vector<std::size_t> n_grid{128, 256, 512, 1024};
  EntryEnsemble ensemble = EntryEnsemble::real_gaussian();
  TestFunction f = TestFunction::parse("x");
  std::optional<CltCase> clt_case;  // empty: follow the ensemble
  ContourParams contour;
  std::size_t replicates = 2000;
  std::uint64_t seed = 0;
  Truncation truncation;
  int threads = 1;
  OutputConfig output;
  CostCaps caps;
  LsdConfig lsd;
  Sigma0Config sigma0;
  SteinConfig stein;
  QformConfig qform;
  BootstrapConfig bootstrap;

  CltCase resolved_case() const;
  std::size_t p_for(std::size_t n_value) const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses JSON text. Unknown keys, wrong types, a missing `kind` and
/// violated constraints raise with the dotted path of the offending field.
RunConfig parse_config(std::string_view text);

/// parse_config for a subcommand: a missing `kind` is taken from `kind`, a
/// different one is a ConstraintViolation.
RunConfig parse_config_for(ExperimentKind kind, std::string_view text);

/// Every field in a fixed key order.
nlohmann::ordered_json config_json(const RunConfig& cfg);
/// config_json as text with a two-space indent.
std::string serialize_config(const RunConfig& cfg);

/// Output directory after applying the environment default.
std::string resolve_output_dir(const RunConfig& cfg);

inline constexpr const char* kOutDirEnv = "LSSLAB_OUT_DIR";

}  // namespace lsslab::cli
