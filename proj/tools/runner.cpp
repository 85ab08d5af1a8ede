#include "runner.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lsslab/errors.hpp"
#include "lsslab/normal.hpp"
#include "lsslab/stieltjes.hpp"

namespace lsslab::cli {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class CsvTable {
 public:
  CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  CsvTable& row() {
    rows_.emplace_back();
    return *this;
  }
  CsvTable& operator<<(double x) { return cell(format_number(x)); }
  CsvTable& operator<<(std::size_t x) { return cell(std::to_string(x)); }
  CsvTable& operator<<(int x) { return cell(std::to_string(x)); }
  CsvTable& operator<<(const std::string& s) { return cell(quote(s)); }
  CsvTable& operator<<(const char* s) { return cell(quote(s)); }

  void write(const fs::path& path, const Json& config) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorKind::kIoError, "cannot write " + path.string());
    out << "# lsslab " << version() << '\n' << "# config: " << config.dump() << '\n';
    line(out, header_);
    for (const auto& r : rows_) line(out, r);
    if (!out) raise(ErrorKind::kIoError, "write failed for " + path.string());
  }

 private:
  CsvTable& cell(std::string s) {
    rows_.back().push_back(std::move(s));
    return *this;
  }

  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  }

  static void line(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct Context {
  const RunConfig& cfg;
  Json config;
  fs::path dir;
  std::string prefix;
  RunOutput out;
  std::string stage;

  fs::path path(const std::string& suffix) const { return dir / (prefix + suffix); }

  void write_csv(const std::string& suffix, const CsvTable& t) {
    const auto p = path(suffix);
    t.write(p, config);
    out.files.push_back(p.string());
  }

  void write_json(Json result, const std::string& started) {
    Json j;
    j["lsslab_version"] = version();
    j["kind"] = to_string(cfg.kind);
    j["config"] = config;
    j["result"] = std::move(result);
    Json files = Json::array();
    for (const auto& f : out.files) files.push_back(fs::path(f).filename().string());
    j["files"] = files;
    j["started_at"] = started;
    j["finished_at"] = utc_now();
    const auto p = path(".json");
    std::ofstream o(p, std::ios::binary);
    if (!o) raise(ErrorKind::kIoError, "cannot write " + p.string());
    o << j.dump(2) << '\n';
    out.files.insert(out.files.begin(), p.string());
  }
};

std::string fixed(double x, int digits) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << x;
  return s.str();
}

Json moments_json(const CltMoments& m) {
  return Json{{"mu", m.mu},
              {"sigma", m.sigma},
              {"case", to_string(m.clt_case)},
              {"kernel_max_abs", m.kernel_max_abs},
              {"mu_imag", m.mu_imag},
              {"sigma_imag", m.sigma_imag},
              {"mu_error", m.mu_error},
              {"sigma_error", m.sigma_error}};
}

Json contour_json(const RunConfig& cfg, double y) {
  const auto support = support_interval(cfg.spectrum, y);
  const double eps = cfg.contour.epsilon > 0 ? cfg.contour.epsilon : default_epsilon(support);
  return Json{{"epsilon", eps},
              {"v0", cfg.contour.v0},
              {"nodes", cfg.contour.nodes},
              {"x_left", support.lo - eps},
              {"x_right", support.hi + eps}};
}

void check_cost(const RunConfig& cfg, const std::vector<std::size_t>& ns) {
  double seconds = 0.0;
  for (std::size_t n : ns) {
    const std::size_t p = cfg.p_for(n);
    if (p * n > cfg.caps.max_entries)
      raise(ErrorKind::kCostBudgetExceeded, "p * n = " + std::to_string(p * n) + " exceeds caps.max_entries");
    seconds += static_cast<double>(cfg.replicates) *
               estimate_replicate_seconds(p, n, cfg.ensemble.is_complex());
  }
  if (seconds > cfg.caps.max_replicate_seconds)
    raise(ErrorKind::kCostBudgetExceeded, "projected " + fixed(seconds, 0) +
                                              " replicate-seconds exceed caps.max_replicate_seconds = " +
                                              fixed(cfg.caps.max_replicate_seconds, 0));
}

SimConfig sim_config(const RunConfig& cfg, std::size_t n, std::uint64_t seed) {
  SimConfig s;
  s.ratio = AspectRatio(cfg.p_for(n), n);
  s.spectrum = cfg.spectrum;
  s.ensemble = cfg.ensemble;
  s.f = cfg.f;
  s.replicates = cfg.replicates;
  s.root_seed = seed;
  s.truncation = cfg.truncation;
  s.contour = cfg.contour;
  s.threads = cfg.threads;
  s.max_entries = cfg.caps.max_entries;
  return s;
}

Json summary_json(const ExperimentRecord& r) {
  return Json{{"ks", r.summary.ks}, {"mean", r.summary.mean}, {"variance", r.summary.variance}};
}

void run_lsd(Context& c) {
  const auto& cfg = c.cfg;
  const std::string started = utc_now();
  c.stage = "stieltjes";
  const auto support = support_interval(cfg.spectrum, cfg.y);
  CsvTable t({"x", "density"});
  double mass = 0.0;
  const double h = (support.hi - support.lo) / static_cast<double>(cfg.lsd.points);
  for (std::size_t i = 0; i < cfg.lsd.points; ++i) {
    const double x = support.lo + h * (static_cast<double>(i) + 0.5);
    double d = 0.0;
    try {
      d = lsd_density(x, cfg.spectrum, cfg.y);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kOutsideSupport) throw;
    }
    mass += d * h;
    t.row() << x << d;
  }
  c.write_csv(".csv", t);
  c.write_json(Json{{"support_lo", support.lo},
                    {"support_hi", support.hi},
                    {"points", cfg.lsd.points},
                    {"midpoint_mass", mass}},
               started);
  c.out.summary = "lsd: support [" + fixed(support.lo, 4) + ", " + fixed(support.hi, 4) + "], " +
                  std::to_string(cfg.lsd.points) + " points, continuous mass " + fixed(mass, 4);
}

void run_moments(Context& c) {
  const auto& cfg = c.cfg;
  const std::string started = utc_now();
  c.stage = "clt_moments";
  const auto m = compute_moments(cfg.f, cfg.spectrum, cfg.y, cfg.resolved_case(), cfg.contour);
  Json result = moments_json(m);
  result["contour"] = contour_json(cfg, cfg.y);
  CsvTable t({"quantity", "value"});
  t.row() << "mu" << m.mu;
  t.row() << "sigma" << m.sigma;
  t.row() << "kernel_max_abs" << m.kernel_max_abs;
  std::string extra;
  if (cfg.sigma0.enabled) {
    c.stage = "diagnostics";
    Sigma0Options o;
    o.n_small = cfg.sigma0.n_small;
    o.inner_reps = cfg.sigma0.inner_reps;
    o.outer_reps = cfg.sigma0.outer_reps;
    o.seed = cfg.seed;
    o.nodes = cfg.sigma0.nodes;
    o.max_work = cfg.caps.max_nested_work;
    o.threads = cfg.threads;
    const double y_small =
        static_cast<double>(cfg.p_for(o.n_small)) / static_cast<double>(o.n_small);
    const auto est = sigma0_nested_mc(cfg.f, cfg.spectrum, y_small, o);
    c.stage = "clt_moments";
    const auto m_small = compute_moments(cfg.f, cfg.spectrum, y_small, cfg.resolved_case(), cfg.contour);
    result["sigma0"] = Json{{"value", est.value},
                            {"std_error", est.std_error},
                            {"p", est.p},
                            {"n", est.n},
                            {"sigma_at_n", m_small.sigma},
                            {"relative_gap", std::abs(est.value - m_small.sigma) / m_small.sigma},
                            {"projected_work", est.projected_work},
                            {"b_j", "deterministic equivalent -z s(z)"}};
    t.row() << "sigma0" << est.value;
    t.row() << "sigma0_std_error" << est.std_error;
    extra = ", sigma0(n=" + std::to_string(est.n) + ") " + fixed(est.value, 4) + " +- " +
            fixed(est.std_error, 4);
  }
  c.write_csv(".csv", t);
  c.write_json(result, started);
  c.out.summary = "moments: f = " + cfg.f.to_string() + ", mu " + format_number(m.mu) + ", sigma " +
                  format_number(m.sigma) + ", max|a| " + fixed(m.kernel_max_abs, 4) + extra;
}

void add_rows(CsvTable& t, const ExperimentRecord& r, std::size_t n) {
  for (const auto& row : r.rows)
    t.row() << n << row.index << row.seed << row.statistic << row.lss << row.lambda_min
            << row.lambda_max << row.truncated;
}

const std::vector<std::string> kReplicateHeader{
    "n", "index", "seed", "statistic", "lss", "lambda_min", "lambda_max", "truncated"};

void run_simulate(Context& c) {
  const auto& cfg = c.cfg;
  check_cost(cfg, {cfg.n});
  const std::string started = utc_now();
  const auto sc = sim_config(cfg, cfg.n, cfg.seed);
  c.stage = "clt_moments";
  const auto m = compute_moments(cfg.f, cfg.spectrum, sc.ratio.y(), cfg.resolved_case(), cfg.contour);
  c.stage = "simulator";
  const auto r = run_experiment(sc, m);
  CsvTable t(kReplicateHeader);
  add_rows(t, r, cfg.n);
  c.write_csv(".csv", t);
  Json result{{"p", sc.ratio.p},
              {"n", sc.ratio.n},
              {"y_n", sc.ratio.y()},
              {"moments", moments_json(m)},
              {"centering", r.centering},
              {"summary", summary_json(r)},
              {"support_events", r.support_events},
              {"sim_started_at", r.started_at},
              {"sim_finished_at", r.finished_at}};
  c.write_json(result, started);
  c.out.summary = "simulate: n " + std::to_string(cfg.n) + ", " + std::to_string(cfg.replicates) +
                  " replicates, mean " + fixed(r.summary.mean, 4) + ", variance " +
                  fixed(r.summary.variance, 4) + ", KS " + fixed(r.summary.ks, 4);
}

void run_ks_rate(Context& c) {
  const auto& cfg = c.cfg;
  check_cost(cfg, cfg.n_grid);
  const std::string started = utc_now();
  CsvTable rates({"n", "p", "ks", "mean", "variance", "replicates", "seed"});
  CsvTable detail(kReplicateHeader);
  std::vector<RatePoint> points;
  Json per_n = Json::array();
  for (std::size_t k = 0; k < cfg.n_grid.size(); ++k) {
    const std::size_t n = cfg.n_grid[k];
    const std::uint64_t seed = replicate_seed(cfg.seed, k);
    const auto sc = sim_config(cfg, n, seed);
    c.stage = "clt_moments";
    const auto m = compute_moments(cfg.f, cfg.spectrum, sc.ratio.y(), cfg.resolved_case(), cfg.contour);
    c.stage = "simulator (n = " + std::to_string(n) + ")";
    const auto r = run_experiment(sc, m);
    rates.row() << n << sc.ratio.p << r.summary.ks << r.summary.mean << r.summary.variance
                << cfg.replicates << seed;
    add_rows(detail, r, n);
    points.push_back({static_cast<double>(n), r.summary.ks});
    per_n.push_back(Json{{"n", n},
                         {"p", sc.ratio.p},
                         {"seed", seed},
                         {"moments", moments_json(m)},
                         {"summary", summary_json(r)},
                         {"support_events", r.support_events}});
  }
  c.stage = "diagnostics";
  RateFitOptions fo;
  fo.resamples = cfg.bootstrap.resamples;
  fo.level = cfg.bootstrap.level;
  fo.seed = cfg.seed;
  const auto fit = fit_rate(points, fo);
  c.write_csv(".csv", rates);
  c.write_csv("_replicates.csv", detail);
  c.write_json(Json{{"rate_fit",
                     Json{{"exponent", fit.exponent},
                          {"intercept", fit.intercept},
                          {"ci_lo", fit.ci_lo},
                          {"ci_hi", fit.ci_hi},
                          {"level", cfg.bootstrap.level}}},
                    {"per_n", per_n}},
               started);
  c.out.summary = "ks-rate: exponent " + fixed(fit.exponent, 3) + ", " +
                  fixed(100 * cfg.bootstrap.level, 0) + "% CI [" + fixed(fit.ci_lo, 3) + ", " +
                  fixed(fit.ci_hi, 3) + "] over " + std::to_string(points.size()) + " sizes";
}

double nh_by_quadrature(const SteinContext& ctx) {
  const auto ramp = [&](double x) { return stein_h(ctx, x) * normal_pdf(x); };
  const double tail =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(ramp, ctx.w0, ctx.w0 + ctx.theta, 15, 1e-14);
  return normal_cdf(ctx.w0) + tail;
}

void run_stein(Context& c) {
  const auto& cfg = c.cfg;
  const auto& s = cfg.stein;
  const std::string started = utc_now();
  c.stage = "diagnostics";
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> w0_dist(s.w0_lo, s.w0_hi);
  std::uniform_real_distribution<double> theta_dist(s.theta_lo, s.theta_hi);
  CsvTable t({"context", "w0", "theta", "Nh", "Nh_quadrature_gap", "min_g", "max_g",
              "max_abs_gprime", "gprime_range", "max_residual", "violations", "pass"});
  std::size_t failed = 0;
  std::size_t total_violations = 0;
  double worst_residual = 0.0;
  double worst_nh = 0.0;
  for (std::size_t k = 0; k < s.contexts; ++k) {
    const double w0 = w0_dist(rng);
    const double theta = theta_dist(rng);
    const auto ctx = make_stein_context(w0, theta);
    const auto rep = stein_bound_check(ctx, s.grid_lo, s.grid_hi, s.grid_points, s.fd_step);
    const double nh_gap = std::abs(ctx.Nh - nh_by_quadrature(ctx));
    const bool pass = rep.violations == 0 && rep.max_residual <= 1e-6 && nh_gap <= 1e-10;
    failed += pass ? 0 : 1;
    total_violations += rep.violations;
    worst_residual = std::max(worst_residual, rep.max_residual);
    worst_nh = std::max(worst_nh, nh_gap);
    t.row() << k << w0 << theta << ctx.Nh << nh_gap << rep.min_g << rep.max_g << rep.max_abs_gprime
            << rep.gprime_range << rep.max_residual << rep.violations << (pass ? "pass" : "fail");
  }
  c.write_csv(".csv", t);
  c.write_json(Json{{"contexts", s.contexts},
                    {"failed_contexts", failed},
                    {"violations", total_violations},
                    {"max_residual", worst_residual},
                    {"max_Nh_quadrature_gap", worst_nh}},
               started);
  c.out.summary = "stein-check: " + std::to_string(s.contexts - failed) + "/" +
                  std::to_string(s.contexts) + " contexts pass, " + std::to_string(total_violations) +
                  " bound violations, max residual " + format_number(worst_residual);
}

void run_qform(Context& c) {
  const auto& cfg = c.cfg;
  const auto& q = cfg.qform;
  const std::string started = utc_now();
  c.stage = "diagnostics";
  QformOptions o;
  o.matrix = q.matrix;
  o.z = cplx(q.z_re, q.z_im);
  o.draws_per_matrix = q.draws_per_matrix;
  o.threads = cfg.threads;
  const auto probe = qform_probe(cfg.spectrum, cfg.y, cfg.n_grid, q.k, q.replicates, cfg.seed, o);
  CsvTable t({"n", "p", "moment", "std_error"});
  for (const auto& pt : probe.points) t.row() << pt.n << pt.p << pt.moment << pt.std_error;
  c.write_csv(".csv", t);
  c.write_json(Json{{"k", q.k}, {"slope", probe.slope}, {"expected_slope", -0.5 * q.k}}, started);
  c.out.summary = "probe-qform: k " + std::to_string(q.k) + ", slope " + fixed(probe.slope, 3) +
                  " (expected " + fixed(-0.5 * q.k, 1) + ")";
}

}  // namespace

std::string version() { return LSSLAB_VERSION; }

std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

RunOutput run(const RunConfig& cfg) {
  Context c{cfg, config_json(cfg), resolve_output_dir(cfg),
            cfg.output.prefix.empty() ? to_string(cfg.kind) : cfg.output.prefix, {}, "cli"};
  std::error_code ec;
  fs::create_directories(c.dir, ec);
  if (ec || !fs::is_directory(c.dir))
    raise(ErrorKind::kIoError, "cli: cannot create output directory " + c.dir.string());
  try {
    switch (cfg.kind) {
      case ExperimentKind::kLsd: run_lsd(c); break;
      case ExperimentKind::kMoments: run_moments(c); break;
      case ExperimentKind::kSimulate: run_simulate(c); break;
      case ExperimentKind::kKsRate: run_ks_rate(c); break;
      case ExperimentKind::kSteinCheck: run_stein(c); break;
      case ExperimentKind::kProbeQform: run_qform(c); break;
    }
  } catch (const Error& e) {
    throw Error(e.kind(), c.stage + ": " + e.what());
  }
  return c.out;
}

}  // namespace lsslab::cli
