#include "config.hpp"

#include <cmath>
#include <cstdlib>
#include <set>

#include "lsslab/errors.hpp"

namespace lsslab::cli {
namespace {

using Json = nlohmann::ordered_json;

// Walks one JSON object, remembering which keys were read so that the rest
// can be reported as unknown.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) raise(ErrorKind::kTypeMismatch, where("") + "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const Json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  std::string where(const std::string& key) const {
    const std::string p = key.empty() ? path_ : child(key);
    return (p.empty() ? std::string("<root>") : p) + ": ";
  }

  double number(const std::string& key, double fallback) {
    const Json* v = get(key);
    if (!v) return fallback;
    if (!v->is_number()) raise(ErrorKind::kTypeMismatch, where(key) + "expected a number");
    return v->get<double>();
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    const Json* v = get(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) raise(ErrorKind::kTypeMismatch, where(key) + "expected an integer");
    return v->get<std::int64_t>();
  }

  std::size_t count(const std::string& key, std::size_t fallback, std::size_t min_value) {
    const std::int64_t v = integer(key, static_cast<std::int64_t>(fallback));
    if (v < static_cast<std::int64_t>(min_value))
      raise(ErrorKind::kConstraintViolation, where(key) + "must be >= " + std::to_string(min_value));
    return static_cast<std::size_t>(v);
  }

  bool boolean(const std::string& key, bool fallback) {
    const Json* v = get(key);
    if (!v) return fallback;
    if (!v->is_boolean()) raise(ErrorKind::kTypeMismatch, where(key) + "expected true or false");
    return v->get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const Json* v = get(key);
    if (!v) return fallback;
    if (!v->is_string()) raise(ErrorKind::kTypeMismatch, where(key) + "expected a string");
    return v->get<std::string>();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) raise(ErrorKind::kUnknownKey, where(it.key()) + "unknown key");
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const Section& s, const std::string& key, const std::string& what) {
  if (!ok) raise(ErrorKind::kConstraintViolation, s.where(key) + what);
}

// Runs `fn`, turning library errors into constraint violations at `path`.
template <class Fn>
auto at_path(const std::string& path, Fn fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kUnknownKey || e.kind() == ErrorKind::kTypeMismatch) throw;
    raise(ErrorKind::kConstraintViolation, path + ": " + e.what());
  }
}

PopulationSpectrum parse_spectrum(const Json* v, bool allow_unbounded) {
  if (!v) return PopulationSpectrum::identity();
  if (v->is_string()) {
    if (v->get<std::string>() == "identity") return PopulationSpectrum::identity();
    raise(ErrorKind::kConstraintViolation, "spectrum: the only named spectrum is \"identity\"");
  }
  if (v->is_array()) {
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < v->size(); ++i) {
      Section s((*v)[i], "spectrum[" + std::to_string(i) + "]");
      const Json* atom = s.get("atom");
      const Json* weight = s.get("weight");
      if (!atom || !weight)
        raise(ErrorKind::kMissingRequired, s.where("") + "needs both atom and weight");
      if (!atom->is_number() || !weight->is_number())
        raise(ErrorKind::kTypeMismatch, s.where("") + "atom and weight must be numbers");
      s.finish();
      atoms.push_back({atom->get<double>(), weight->get<double>()});
    }
    return at_path("spectrum", [&] { return PopulationSpectrum(atoms, allow_unbounded); });
  }
  if (v->is_object()) {
    Section s(*v, "spectrum");
    const Json* range = s.get("uniform");
    if (!range) raise(ErrorKind::kMissingRequired, "spectrum.uniform: required for an object spectrum");
    if (!range->is_array() || range->size() != 2 || !(*range)[0].is_number() ||
        !(*range)[1].is_number())
      raise(ErrorKind::kTypeMismatch, "spectrum.uniform: expected [a, b]");
    const std::size_t nodes = s.count("nodes", 64, 1);
    s.finish();
    return at_path("spectrum", [&] {
      return PopulationSpectrum::uniform((*range)[0].get<double>(), (*range)[1].get<double>(), nodes,
                                         allow_unbounded);
    });
  }
  raise(ErrorKind::kTypeMismatch, "spectrum: expected \"identity\", a list of atoms or {uniform}");
}

EntryEnsemble parse_ensemble(const std::string& name, double dof) {
  if (name == "RG") return EntryEnsemble::real_gaussian();
  if (name == "CG") return EntryEnsemble::complex_gaussian();
  if (name == "rademacher") return EntryEnsemble::custom_real(CustomDensity::kRademacher);
  if (name == "uniform") return EntryEnsemble::custom_real(CustomDensity::kUniform);
  if (name == "student_t")
    return at_path("ensemble_dof", [&] { return EntryEnsemble::custom_real(CustomDensity::kStudentT, dof); });
  raise(ErrorKind::kConstraintViolation,
        "ensemble: expected RG, CG, rademacher, uniform or student_t, got '" + name + "'");
}

std::string matrix_name(QformMatrix m) {
  switch (m) {
    case QformMatrix::kZero: return "zero";
    case QformMatrix::kFixedIdentity: return "identity";
    case QformMatrix::kResolvent: return "resolvent";
  }
  return "identity";
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kLsd: return "lsd";
    case ExperimentKind::kMoments: return "moments";
    case ExperimentKind::kSimulate: return "simulate";
    case ExperimentKind::kKsRate: return "ks-rate";
    case ExperimentKind::kSteinCheck: return "stein-check";
    case ExperimentKind::kProbeQform: return "probe-qform";
  }
  return "moments";
}

ExperimentKind parse_kind(std::string_view text) {
  for (auto k : {ExperimentKind::kLsd, ExperimentKind::kMoments, ExperimentKind::kSimulate,
                 ExperimentKind::kKsRate, ExperimentKind::kSteinCheck, ExperimentKind::kProbeQform})
    if (text == to_string(k)) return k;
  raise(ErrorKind::kConstraintViolation, "kind: unknown experiment '" + std::string(text) + "'");
}

CltCase RunConfig::resolved_case() const { return clt_case ? *clt_case : clt_case_for(ensemble); }

std::size_t RunConfig::p_for(std::size_t n_value) const {
  return static_cast<std::size_t>(
      std::max<long long>(1, std::llround(y * static_cast<double>(n_value))));
}

RunConfig parse_config(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    raise(ErrorKind::kTypeMismatch, std::string("<root>: invalid JSON: ") + e.what());
  }
  Section s(root, "");
  RunConfig cfg;

  const Json* kind = s.get("kind");
  if (!kind) raise(ErrorKind::kMissingRequired, "kind: the experiment kind is required");
  if (!kind->is_string()) raise(ErrorKind::kTypeMismatch, "kind: expected a string");
  cfg.kind = parse_kind(kind->get<std::string>());

  const bool unbounded = s.boolean("allow_unbounded_spectrum", false);
  cfg.spectrum = parse_spectrum(s.get("spectrum"), unbounded);
  if (unbounded && !cfg.spectrum.allow_unbounded())
    cfg.spectrum = PopulationSpectrum(
        std::vector<Atom>(cfg.spectrum.atoms().begin(), cfg.spectrum.atoms().end()), true);

  cfg.y = s.number("y", cfg.y);
  require(cfg.y > 0.0 && std::isfinite(cfg.y), s, "y", "must be a positive number");
  cfg.n = s.count("n", cfg.n, 1);

  if (const Json* grid = s.get("n_grid")) {
    if (!grid->is_array()) raise(ErrorKind::kTypeMismatch, "n_grid: expected a list of integers");
    cfg.n_grid.clear();
    for (std::size_t i = 0; i < grid->size(); ++i) {
      const auto& v = (*grid)[i];
      if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
        raise(ErrorKind::kTypeMismatch, "n_grid[" + std::to_string(i) + "]: expected a positive integer");
      cfg.n_grid.push_back(v.get<std::size_t>());
    }
  }
  for (std::size_t i = 1; i < cfg.n_grid.size(); ++i)
    require(cfg.n_grid[i] > cfg.n_grid[i - 1], s, "n_grid", "must be strictly increasing");
  if (cfg.kind == ExperimentKind::kKsRate)
    require(cfg.n_grid.size() >= 3, s, "n_grid", "ks-rate needs at least 3 sizes");
  if (cfg.kind == ExperimentKind::kProbeQform)
    require(cfg.n_grid.size() >= 2, s, "n_grid", "probe-qform needs at least 2 sizes");

  const std::string ensemble = s.text("ensemble", "RG");
  const double dof = s.number("ensemble_dof", 8.0);
  cfg.ensemble = parse_ensemble(ensemble, dof);

  const std::string f = s.text("f", "x");
  cfg.f = at_path("f", [&] { return TestFunction::parse(f); });

  const std::string clt_case = s.text("case", "auto");
  if (clt_case != "auto") cfg.clt_case = at_path("case", [&] { return parse_clt_case(clt_case); });

  if (const Json* c = s.get("contour")) {
    Section cs(*c, "contour");
    cfg.contour.epsilon = cs.number("epsilon", cfg.contour.epsilon);
    cfg.contour.v0 = cs.number("v0", cfg.contour.v0);
    cfg.contour.nodes = static_cast<int>(cs.count("nodes", 64, 16));
    cfg.contour.rtol = cs.number("rtol", cfg.contour.rtol);
    require(cfg.contour.epsilon >= 0.0, cs, "epsilon", "must be >= 0 (0 selects the default)");
    require(cfg.contour.v0 > 0.0, cs, "v0", "must be > 0");
    require(cfg.contour.rtol > 0.0, cs, "rtol", "must be > 0");
    cs.finish();
  }

  cfg.replicates = s.count("replicates", cfg.replicates, 1);
  if (const Json* seed = s.get("seed")) {
    if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<std::int64_t>() >= 0))
      raise(ErrorKind::kTypeMismatch, "seed: expected an unsigned 64-bit integer");
    cfg.seed = seed->get<std::uint64_t>();
  }

  if (const Json* t = s.get("truncation")) {
    Section ts(*t, "truncation");
    cfg.truncation.enabled = ts.boolean("enabled", false);
    cfg.truncation.eta = ts.number("eta", 0.0);
    require(cfg.truncation.eta >= 0.0, ts, "eta", "must be >= 0 (0 selects 1/log n)");
    ts.finish();
  }

  cfg.threads = static_cast<int>(s.count("threads", 1, 1));

  if (const Json* o = s.get("output")) {
    Section os(*o, "output");
    cfg.output.dir = os.text("dir", "");
    cfg.output.prefix = os.text("prefix", "");
    os.finish();
  }

  if (const Json* c = s.get("caps")) {
    Section cs(*c, "caps");
    cfg.caps.max_replicate_seconds = cs.number("max_replicate_seconds", cfg.caps.max_replicate_seconds);
    cfg.caps.max_nested_work = cs.number("max_nested_work", cfg.caps.max_nested_work);
    cfg.caps.max_entries = cs.count("max_entries", cfg.caps.max_entries, 1);
    require(cfg.caps.max_replicate_seconds > 0.0, cs, "max_replicate_seconds", "must be > 0");
    require(cfg.caps.max_nested_work > 0.0, cs, "max_nested_work", "must be > 0");
    cs.finish();
  }

  if (const Json* l = s.get("lsd")) {
    Section ls(*l, "lsd");
    cfg.lsd.points = ls.count("points", cfg.lsd.points, 1);
    ls.finish();
  }

  if (const Json* g = s.get("sigma0")) {
    Section gs(*g, "sigma0");
    cfg.sigma0.enabled = gs.boolean("enabled", false);
    cfg.sigma0.n_small = gs.count("n_small", cfg.sigma0.n_small, 2);
    cfg.sigma0.inner_reps = gs.count("inner_reps", cfg.sigma0.inner_reps, 2);
    cfg.sigma0.outer_reps = gs.count("outer_reps", cfg.sigma0.outer_reps, 2);
    cfg.sigma0.nodes = static_cast<int>(gs.count("nodes", 32, 16));
    require(cfg.sigma0.n_small <= 64, gs, "n_small", "must be <= 64");
    gs.finish();
  }

  if (const Json* st = s.get("stein")) {
    Section ss(*st, "stein");
    auto& c = cfg.stein;
    c.contexts = ss.count("contexts", c.contexts, 1);
    c.grid_points = ss.count("grid_points", c.grid_points, 2);
    c.grid_lo = ss.number("grid_lo", c.grid_lo);
    c.grid_hi = ss.number("grid_hi", c.grid_hi);
    c.w0_lo = ss.number("w0_lo", c.w0_lo);
    c.w0_hi = ss.number("w0_hi", c.w0_hi);
    c.theta_lo = ss.number("theta_lo", c.theta_lo);
    c.theta_hi = ss.number("theta_hi", c.theta_hi);
    c.fd_step = ss.number("fd_step", c.fd_step);
    require(c.grid_lo < c.grid_hi && c.grid_lo >= -29.0 && c.grid_hi <= 29.0, ss, "grid_lo",
            "grid must satisfy -29 <= grid_lo < grid_hi <= 29");
    require(c.w0_lo <= c.w0_hi, ss, "w0_lo", "must be <= w0_hi");
    require(c.theta_lo > 0.0 && c.theta_lo <= c.theta_hi, ss, "theta_lo",
            "must satisfy 0 < theta_lo <= theta_hi");
    require(c.fd_step > 0.0, ss, "fd_step", "must be > 0");
    ss.finish();
  }

  if (const Json* q = s.get("qform")) {
    Section qs(*q, "qform");
    auto& c = cfg.qform;
    c.k = static_cast<int>(qs.integer("k", c.k));
    require(c.k == 2 || c.k == 4, qs, "k", "must be 2 or 4");
    const std::string m = qs.text("matrix", "identity");
    if (m == "identity") c.matrix = QformMatrix::kFixedIdentity;
    else if (m == "resolvent") c.matrix = QformMatrix::kResolvent;
    else if (m == "zero") c.matrix = QformMatrix::kZero;
    else raise(ErrorKind::kConstraintViolation, "qform.matrix: expected identity, resolvent or zero");
    c.z_re = qs.number("z_re", c.z_re);
    c.z_im = qs.number("z_im", c.z_im);
    require(c.z_im != 0.0 || c.matrix != QformMatrix::kResolvent, qs, "z_im",
            "resolvent point must be off the real axis");
    c.replicates = qs.count("replicates", c.replicates, 2);
    c.draws_per_matrix = qs.count("draws_per_matrix", c.draws_per_matrix, 1);
    qs.finish();
  }

  if (const Json* b = s.get("bootstrap")) {
    Section bs(*b, "bootstrap");
    cfg.bootstrap.resamples = static_cast<int>(bs.count("resamples", 1000, 1));
    cfg.bootstrap.level = bs.number("level", 0.90);
    require(cfg.bootstrap.level > 0.0 && cfg.bootstrap.level < 1.0, bs, "level", "must lie in (0, 1)");
    bs.finish();
  }

  s.finish();
  return cfg;
}

RunConfig parse_config_for(ExperimentKind kind, std::string_view text) {
  Json root;
  try {
    root = Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    raise(ErrorKind::kTypeMismatch, std::string("<root>: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) raise(ErrorKind::kTypeMismatch, "<root>: expected an object");
  if (!root.contains("kind")) root["kind"] = to_string(kind);
  RunConfig cfg = parse_config(root.dump());
  if (cfg.kind != kind)
    raise(ErrorKind::kConstraintViolation,
          "kind: config is for '" + to_string(cfg.kind) + "' but the subcommand is '" + to_string(kind) + "'");
  return cfg;
}

nlohmann::ordered_json config_json(const RunConfig& cfg) {
  Json j;
  j["kind"] = to_string(cfg.kind);
  Json atoms = Json::array();
  for (const auto& a : cfg.spectrum.atoms()) atoms.push_back(Json{{"atom", a.value}, {"weight", a.weight}});
  j["spectrum"] = atoms;
  j["allow_unbounded_spectrum"] = cfg.spectrum.allow_unbounded();
  j["y"] = cfg.y;
  j["n"] = cfg.n;
  j["n_grid"] = cfg.n_grid;
  j["ensemble"] = cfg.ensemble.name();
  j["ensemble_dof"] = cfg.ensemble.kind() == EnsembleKind::kCustomReal &&
                              cfg.ensemble.custom_density() == CustomDensity::kStudentT
                          ? cfg.ensemble.dof()
                          : 8.0;
  j["f"] = cfg.f.to_string();
  j["case"] = cfg.clt_case ? to_string(*cfg.clt_case) : std::string("auto");
  j["contour"] = Json{{"epsilon", cfg.contour.epsilon},
                      {"v0", cfg.contour.v0},
                      {"nodes", cfg.contour.nodes},
                      {"rtol", cfg.contour.rtol}};
  j["replicates"] = cfg.replicates;
  j["seed"] = cfg.seed;
  j["truncation"] = Json{{"enabled", cfg.truncation.enabled}, {"eta", cfg.truncation.eta}};
  j["threads"] = cfg.threads;
  j["output"] = Json{{"dir", cfg.output.dir}, {"prefix", cfg.output.prefix}};
  j["caps"] = Json{{"max_replicate_seconds", cfg.caps.max_replicate_seconds},
                   {"max_nested_work", cfg.caps.max_nested_work},
                   {"max_entries", cfg.caps.max_entries}};
  j["lsd"] = Json{{"points", cfg.lsd.points}};
  j["sigma0"] = Json{{"enabled", cfg.sigma0.enabled},
                     {"n_small", cfg.sigma0.n_small},
                     {"inner_reps", cfg.sigma0.inner_reps},
                     {"outer_reps", cfg.sigma0.outer_reps},
                     {"nodes", cfg.sigma0.nodes}};
  const auto& st = cfg.stein;
  j["stein"] = Json{{"contexts", st.contexts},   {"grid_points", st.grid_points},
                    {"grid_lo", st.grid_lo},     {"grid_hi", st.grid_hi},
                    {"w0_lo", st.w0_lo},         {"w0_hi", st.w0_hi},
                    {"theta_lo", st.theta_lo},   {"theta_hi", st.theta_hi},
                    {"fd_step", st.fd_step}};
  const auto& q = cfg.qform;
  j["qform"] = Json{{"k", q.k},
                    {"matrix", matrix_name(q.matrix)},
                    {"z_re", q.z_re},
                    {"z_im", q.z_im},
                    {"replicates", q.replicates},
                    {"draws_per_matrix", q.draws_per_matrix}};
  j["bootstrap"] = Json{{"resamples", cfg.bootstrap.resamples}, {"level", cfg.bootstrap.level}};
  return j;
}

std::string serialize_config(const RunConfig& cfg) { return config_json(cfg).dump(2); }

std::string resolve_output_dir(const RunConfig& cfg) {
  if (!cfg.output.dir.empty()) return cfg.output.dir;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return "lsslab-out";
}

}  // namespace lsslab::cli
