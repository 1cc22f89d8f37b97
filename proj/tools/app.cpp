#include "app.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "heatmoment/bel.hpp"
#include "heatmoment/errors.hpp"
#include "heatmoment/parallel.hpp"

#ifndef HEATMOMENT_VERSION
#define HEATMOMENT_VERSION "0.0.0"
#endif

namespace heatmoment::app {

namespace {

namespace fs = std::filesystem;

Error config_error(const std::string& field, const std::string& what) {
  return Error(ErrorKind::ConfigError, field + ": " + what).with_field(field);
}

Json read_json_file(const fs::path& path, const std::string& field) {
  std::ifstream in(path);
  if (!in) throw config_error(field, "cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    // nlohmann reports "line L, column C" in what().
    throw config_error(field, "'" + path.string() + "': " + e.what());
  }
}

// Typed access to the params map with ConfigError diagnostics.
class Params {
 public:
  explicit Params(const Json& j) : j_(j) {}

  bool has(const char* key) const { return j_.contains(key) && !j_[key].is_null(); }

  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    return number(key);
  }
  double number(const char* key) const {
    const Json& v = at(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      char* end = nullptr;
      const double d = std::strtod(s.c_str(), &end);
      if (end != s.c_str() && *end == '\0') return d;
    }
    throw config_error(key, "expected a number");
  }
  std::size_t count(const char* key, std::size_t fallback) const {
    if (!has(key)) return fallback;
    const double d = number(key);
    if (!(d >= 0.0) || d != std::floor(d) || d > 1e15) throw config_error(key, "expected a non-negative integer");
    return static_cast<std::size_t>(d);
  }
  std::string text(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const Json& v = at(key);
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  }
  const Json& at(const char* key) const {
    if (!has(key)) throw config_error(key, "missing parameter");
    return j_[key];
  }

 private:
  const Json& j_;
};

// "inf" or a positive number.
Horizon parse_horizon(const Params& p, const char* key, double fallback) {
  if (!p.has(key)) return Horizon::finite(fallback);
  const Json& v = p.at(key);
  try {
    if (v.is_string()) return Horizon::parse(v.get<std::string>());
    return Horizon::finite(v.get<double>());
  } catch (const Error& e) {
    throw config_error(key, e.what());
  }
}

double finite_horizon(const Params& p, const char* key, double fallback) {
  const Horizon h = parse_horizon(p, key, fallback);
  if (h.is_infinite()) throw config_error(key, "this command needs a finite horizon");
  return h.value();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// A state as a JSON array, "0.3,0,1", a sum of unit vectors "e1+e3", or
// "parabola" (x(1-x) projected onto the first N modes). An optional
// "unit:" prefix normalizes.
StateVector parse_state(const Json& v, std::size_t N, const char* field) {
  if (v.is_array()) {
    try {
      return state_from_json(v);
    } catch (const Error&) {
      throw config_error(field, "expected an array of numbers");
    }
  }
  if (v.is_number()) return StateVector({v.get<double>()});
  if (!v.is_string()) throw config_error(field, "expected an array or a preset name");
  std::string s = v.get<std::string>();
  bool unit = false;
  if (s.rfind("unit:", 0) == 0) {
    unit = true;
    s = s.substr(5);
  }
  StateVector out;
  if (s == "zero") {
    out = StateVector::zeros(N);
  } else if (s == "parabola") {
    out = project(ParabolaBump{}, N).state;
  } else if (!s.empty() && s[0] == 'e') {
    out = StateVector::zeros(N);
    for (const std::string& term : split(s, '+')) {
      char* end = nullptr;
      const long n = term.size() > 1 && term[0] == 'e' ? std::strtol(term.c_str() + 1, &end, 10) : 0;
      if (n < 1 || end == nullptr || *end != '\0') throw config_error(field, "bad unit-vector term '" + term + "'");
      if (static_cast<std::size_t>(n) > out.size()) out = out.resized(static_cast<std::size_t>(n));
      out[static_cast<std::size_t>(n - 1)] += 1.0;
    }
  } else {
    std::vector<double> coeffs;
    for (const std::string& item : split(s, ',')) {
      char* end = nullptr;
      const double d = std::strtod(item.c_str(), &end);
      if (end == item.c_str() || *end != '\0') throw config_error(field, "cannot parse '" + s + "'");
      coeffs.push_back(d);
    }
    if (coeffs.empty()) throw config_error(field, "empty state");
    out = StateVector(std::move(coeffs));
  }
  return unit ? out.normalized() : out;
}

StateVector state_param(const Params& p, const char* key, const std::string& fallback, std::size_t N) {
  return parse_state(p.has(key) ? p.at(key) : Json(fallback), N, key);
}

std::vector<std::string> selectors(const Params& p, const char* key, const std::string& fallback) {
  if (!p.has(key)) return {fallback};
  const Json& v = p.at(key);
  if (v.is_array()) return v.get<std::vector<std::string>>();
  return split(v.get<std::string>(), ';');
}

// Regenerates closed-form profiles at a larger size; explicit ones cannot grow.
NoiseProfile cover(const NoiseProfile& profile, std::size_t M) {
  if (profile.size() >= M) return profile;
  if (const auto* d = std::get_if<DiracDelta>(&profile.kind())) return delta_profile(d->p, M, profile.s());
  if (const auto* g = std::get_if<GaussianDecay>(&profile.kind())) {
    return gaussian_decay_profile(g->alpha, g->C, M, profile.s());
  }
  throw Error(ErrorKind::OutOfDomain, "explicit profile stores " + std::to_string(profile.size()) +
                                          " modes but " + std::to_string(M) + " are needed")
      .with_field("profile");
}

struct Context {
  const RunConfig& config;
  Params params;
  fs::path dir;
  Json profile_doc;  // resolved profile document, echoed in the manifest
  Json resolved_params;
  std::vector<std::string> artifacts;
  long precision_used = 0;

  PrecisionPolicy policy() const {
    PrecisionPolicy p;
    p.initial_bits = config.precision_bits;
    return p;
  }

  NoiseProfile profile(std::size_t M) {
    if (profile_doc.is_null()) {
      if (!params.has("alpha")) throw config_error("profile", "no profile given (use --profile or alpha)");
      profile_doc = {{"kind", "gaussian_decay"},
                     {"alpha", params.number("alpha")},
                     {"C", params.number("C", 1.0)},
                     {"s", params.number("s", 0.0)},
                     {"N", M}};
    }
    try {
      return cover(profile_from_json(profile_doc), M);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ConfigError) throw;
      if (e.kind() == ErrorKind::InvalidArgument) throw config_error("profile", e.what());
      throw;
    }
  }

  SamplerConfig sampler(std::size_t N, double T, std::size_t samples, std::uint64_t seed) const {
    SamplerConfig c;
    c.N = N;
    c.T = T;
    c.samples = samples;
    c.seed = seed;
    c.threads = config.threads;
    c.block_size = params.count("block_size", kDefaultBlockSize);
    return c;
  }

  Json stamp(Json report, const char* kind) const {
    report["report_kind"] = kind;
    report["seed"] = config.seed;
    return report;
  }

  void write_json(const std::string& name, const Json& j) {
    std::ofstream out(dir / name);
    if (!out) throw config_error("output_dir", "cannot write " + (dir / name).string());
    out << j.dump(2) << '\n';
    artifacts.push_back(name);
  }

  void write_plot(const std::string& name, const Json& report, PlotKind kind, std::size_t points = 0) {
    emit_plot_data(report, kind, dir / name, PlotOptions{points});
    artifacts.push_back(name);
  }

  template <class Rows>
  void write_csv(const std::string& name, const std::string& header, const Rows& rows) {
    std::ofstream out(dir / name);
    if (!out) throw config_error("output_dir", "cannot write " + (dir / name).string());
    out << header << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
      out << '\n';
    }
    artifacts.push_back(name);
  }
};

using Row = std::vector<std::string>;

std::string fmt(double v) { return format_double(v); }

// ---------------------------------------------------------------------------

Json cmd_basis(Context& ctx) {
  const Params& p = ctx.params;
  const std::size_t N = p.count("N", 10);
  const std::size_t points = p.count("points", 11);
  if (N < 1) throw config_error("N", "must be >= 1");
  if (points < 2) throw config_error("points", "must be >= 2");

  Json eig = Json::array(), grid = Json::array(), values = Json::array();
  for (std::size_t k = 0; k < points; ++k) grid.push_back(static_cast<double>(k) / static_cast<double>(points - 1));
  for (std::size_t n = 1; n <= N; ++n) {
    eig.push_back(eigenvalue(static_cast<long>(n)));
    Json row = Json::array();
    for (const Json& x : grid) row.push_back(eigenfunction_eval(ModeIndex(static_cast<long>(n)), x.get<double>()));
    values.push_back(std::move(row));
  }
  Json report = {{"N", N}, {"eigenvalues", eig}, {"grid", grid}, {"values", values}};

  if (!ctx.profile_doc.is_null() || p.has("alpha")) {
    const NoiseProfile profile = ctx.profile(N);
    const double s = p.number("s", profile.s());
    const SobolevNorm sob = sobolev_norm(profile, s);
    report["sobolev"] = {{"s", s}, {"value", sob.value}, {"tail_bound_sq", Json(fmt(sob.tail_bound_sq))},
                         {"truncated", sob.truncated}};
    if (p.has("C") && p.has("alpha")) {
      report["lower_bound"] = to_json(verify_lower_bound(profile, p.number("C"), p.number("alpha"), N));
    }
    if (p.has("beta")) {
      const HsIntegral hs = hs_integral(profile, s, p.number("beta"), finite_horizon(p, "T", 1.0));
      report["hs_integral"] = {{"value", hs.value}, {"error_estimate", hs.error_estimate},
                               {"finite_regime", hs.finite_regime}};
    }
  }
  report = ctx.stamp(std::move(report), "basis");
  ctx.write_json("basis.json", report);
  return report;
}

Json cmd_delta_scan(Context& ctx) {
  const Params& p = ctx.params;
  const double pos = p.number("p");
  const double alpha = p.number("alpha");
  const std::size_t N = p.count("N", 1000);
  if (!(alpha > 0.0)) throw config_error("alpha", "must be positive");
  if (N < 1) throw config_error("N", "must be >= 1");
  const NoiseProfile profile = delta_profile(pos, N, p.number("s", 0.75));
  ctx.profile_doc = to_json(profile);

  // Outside the Borel-Cantelli exceptional set, dist(np, Z) >= exp(-alpha pi^2 n^2)
  // for large n, hence |f_n| >= 2 sqrt(2) exp(-alpha pi^2 n^2).
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double log_prefactor = std::log(2.0 * std::numbers::sqrt2);
  std::vector<Row> rows;
  bool sandwich = true;
  Json sandwich_failures = Json::array();
  for (std::size_t i = 0; i < N; ++i) {
    const long n = static_cast<long>(i + 1);
    const double abs_f = std::fabs(profile.coeffs()[i]);
    const double log_bound = log_prefactor - alpha * pi2 * static_cast<double>(n) * static_cast<double>(n);
    const double margin = abs_f > 0.0 ? std::log(abs_f) - log_bound : -std::numeric_limits<double>::infinity();
    rows.push_back({std::to_string(n), fmt(abs_f), fmt(std::exp(log_bound)), fmt(margin)});
    if (!sine_sandwich(pos, n).holds) {
      sandwich = false;
      sandwich_failures.push_back(n);
    }
  }
  ctx.write_csv("delta_scan.csv", "n,abs_f,bound,margin", rows);

  const LowerBoundReport lb = verify_lower_bound(profile, 1.0, alpha, N);
  const BorelCantelliSum bc = borel_cantelli_partial(alpha, static_cast<long>(N));
  Json report = {{"p", pos},
                 {"alpha", alpha},
                 {"N", N},
                 {"all_nonzero", lb.degenerate_modes.empty()},
                 {"degenerate_modes", lb.degenerate_modes},
                 {"sandwich_holds", sandwich},
                 {"sandwich_failures", sandwich_failures},
                 {"best_C", lb.best_C},
                 {"log_best_C", lb.log_best_C},
                 {"worst_n", lb.worst_n},
                 {"borel_cantelli", {{"partial_sum", bc.partial_sum}, {"tail_bound", bc.tail_bound}}}};
  report = ctx.stamp(std::move(report), "delta_scan");
  ctx.write_json("delta_scan.json", report);
  return report;
}

struct BiorthoOut {
  BiorthogonalFamily family;
  Json report;
};

BiorthoOut biortho_step(Context& ctx, std::size_t N, const Horizon& horizon) {
  const Params& p = ctx.params;
  const long K = static_cast<long>(p.count("K", 1000000));
  BiorthogonalFamily family = build_family(HeatRates{N}, horizon, ctx.policy());
  ctx.precision_used = std::max(ctx.precision_used, family.precision_bits);

  std::vector<Row> rows;
  Json theta = Json::array(), dinf = Json::array();
  for (std::size_t i = 1; i <= N; ++i) {
    const long n = static_cast<long>(i);
    const ThetaNormReport t = theta_norm_bound_check(family, n);
    const DInfinite d = d_infinite(n, std::max(K, static_cast<long>(N)));
    rows.push_back({std::to_string(n), fmt(d_finite(family, n)), fmt(d.limit), fmt(t.norm), fmt(t.bound), fmt(t.ratio)});
    Json tj = to_json(t);
    tj["n"] = n;
    theta.push_back(std::move(tj));
    Json dj = to_json(d);
    dj["n"] = n;
    dinf.push_back(std::move(dj));
  }
  ctx.write_csv("biortho.csv", "n,d_finite,d_infinite_limit,theta_norm,bound,ratio", rows);

  Json family_doc = ctx.stamp(to_json(family), "family");
  ctx.write_json("family.json", family_doc);
  if (!horizon.is_infinite()) ctx.write_plot("theta_profiles.csv", family_doc, PlotKind::ThetaProfiles);

  Json report = {{"N", N},
                 {"T", horizon.str()},
                 {"precision_bits", family.precision_bits},
                 {"attempts", family.attempts},
                 {"residual", family.residual.str()},
                 {"K", K},
                 {"theta", theta},
                 {"d_infinite", dinf}};
  report = ctx.stamp(std::move(report), "biortho");
  ctx.write_json("biortho.json", report);
  return {std::move(family), std::move(report)};
}

Json cmd_biortho(Context& ctx) {
  const std::size_t N = ctx.params.count("N", 10);
  if (N < 1) throw config_error("N", "must be >= 1");
  return biortho_step(ctx, N, parse_horizon(ctx.params, "T", 1.0)).report;
}

struct SynthOut {
  ControlSignal control;
  Json control_doc;
  Json residual_doc;
};

SynthOut synth_step(Context& ctx, const NoiseProfile& profile, const StateVector& z0, double T,
                    std::size_t N, std::size_t N_check, const BiorthogonalFamily& family) {
  ControlSignal h = synthesize(z0.resized(N), profile, T, N, family);
  const NullReport null = verify_null(z0, profile, h, T, N_check);
  Json control = to_json(h);
  control["z0"] = to_json(z0);
  control["residuals"] = to_json(null).at("residuals");
  control["controlled_l2"] = null.controlled_l2;
  control["tail_l2"] = null.tail_l2;
  control = ctx.stamp(std::move(control), "control");
  ctx.write_json("control.json", control);
  ctx.write_plot("control_timeseries.csv", control, PlotKind::ControlTimeseries, ctx.params.count("points", 0));

  Json residual = to_json(null);
  residual["T"] = T;
  residual["N_check"] = N_check;
  residual = ctx.stamp(std::move(residual), "residual_report");
  return {std::move(h), std::move(control), std::move(residual)};
}

Json cmd_synth(Context& ctx) {
  const Params& p = ctx.params;
  const double T = finite_horizon(p, "T", 1.0);
  const std::size_t N = p.count("N", 12);
  if (N < 1) throw config_error("N", "must be >= 1");
  const StateVector z0 = state_param(p, "z0", "e1", N);
  const std::size_t N_check = std::max({p.count("N_check", N), N, z0.size()});
  const NoiseProfile profile = ctx.profile(N_check);
  const BiorthogonalFamily family = build_family(HeatRates{N}, Horizon::finite(T), ctx.policy());
  ctx.precision_used = family.precision_bits;
  return synth_step(ctx, profile, z0, T, N, N_check, family).control_doc;
}

Json cmd_verify(Context& ctx) {
  Params& p = ctx.params;
  Json control_doc = p.at("control");
  if (control_doc.is_string()) control_doc = read_json_file(control_doc.get<std::string>(), "control");
  ctx.resolved_params["control"] = control_doc;
  ControlSignal h;
  try {
    h = control_from_json(control_doc);
  } catch (const Error& e) {
    throw config_error("control", e.what());
  }
  ctx.precision_used = h.precision_bits;
  const double T = p.has("T") ? finite_horizon(p, "T", h.T) : h.T;
  const StateVector z0 = p.has("z0") ? state_param(p, "z0", "", h.size())
                                     : parse_state(control_doc.contains("z0") ? control_doc["z0"] : Json("e1"),
                                                   h.size(), "z0");
  const std::size_t N_check = std::max({p.count("N_check", h.size()), h.size(), z0.size()});
  const NoiseProfile profile = ctx.profile(N_check);
  const NullReport null = verify_null(z0, profile, h, T, N_check);

  Json report = to_json(null);
  report["T"] = T;
  report["N_check"] = N_check;
  if (p.has("tol")) {
    const double tol = p.number("tol");
    report["tol"] = tol;
    report["passed"] = null.controlled_l2 <= tol;
  }
  report = ctx.stamp(std::move(report), "residual_report");
  ctx.write_json("residual_report.json", report);
  ctx.write_plot("residual_spectrum.csv", report, PlotKind::ResidualSpectrum);
  return report;
}

Json cmd_simulate(Context& ctx) {
  const Params& p = ctx.params;
  const double T = finite_horizon(p, "T", 1.0);
  const std::size_t N = p.count("N", 4);
  const std::size_t samples = p.count("samples", 10000);
  if (N < 1) throw config_error("N", "must be >= 1");
  if (samples < 2) throw config_error("samples", "must be >= 2");
  const StateVector x = state_param(p, "x", "zero", N).resized(N);
  const NoiseProfile profile = ctx.profile(N);

  SamplerConfig cfg = ctx.sampler(N, T, samples, ctx.config.seed);
  const std::string method = p.text("method", "exact");
  const GaussianLaw law = transition_law(x, profile, T, N);
  Eigen::MatrixXd draws;
  if (method == "exact") {
    draws = sample(law, cfg);
  } else if (method == "euler") {
    const std::size_t steps = p.count("steps", 1024);
    if (steps < 1) throw config_error("steps", "must be >= 1");
    cfg.method = ExponentialEuler{steps};
    draws = euler_oracle(x, profile, T, steps, samples, cfg.seed, cfg.threads, cfg.block_size);
  } else {
    throw config_error("method", "expected 'exact' or 'euler'");
  }
  ctx.precision_used = PrecisionPolicy{}.start_bits(N);

  Json observables = Json::array();
  for (const std::string& sel : selectors(p, "phi", "tanh:mode=1")) {
    Observable phi;
    try {
      phi = parse_observable(sel);
    } catch (const Error& e) {
      throw config_error("phi", e.what());
    }
    const McEstimate est = semigroup_expectation(phi, x, profile, T, cfg);
    Json o = to_json(est);
    o["name"] = phi.name;
    o["selector"] = sel;
    observables.push_back(std::move(o));
  }

  Json report = {{"T", T},
                 {"N", N},
                 {"samples", samples},
                 {"method", method},
                 {"law", {{"mean", to_json(law.mean)}, {"cov", to_json(law.cov)}}},
                 {"empirical", to_json(sample_moments(draws))},
                 {"observables", observables}};
  if (method == "euler") report["steps"] = std::get<ExponentialEuler>(cfg.method).steps;
  report = ctx.stamp(std::move(report), "simulate");
  ctx.write_json("simulate.json", report);

  if (const std::size_t cap = p.count("dump_samples", 0); cap > 0) {
    std::vector<Row> rows;
    const Eigen::Index keep = std::min<Eigen::Index>(draws.rows(), static_cast<Eigen::Index>(cap));
    for (Eigen::Index r = 0; r < keep; ++r) {
      Row row;
      for (Eigen::Index c = 0; c < draws.cols(); ++c) row.push_back(fmt(draws(r, c)));
      rows.push_back(std::move(row));
    }
    std::string header;
    for (std::size_t n = 1; n <= N; ++n) header += (n > 1 ? ",X_" : "X_") + std::to_string(n);
    ctx.write_csv("samples.csv", header, rows);
  }
  return report;
}

Json gradient_case(const std::string& id, const Observable& phi, const GradientEstimate& bel,
                   const std::optional<GradientEstimate>& fd) {
  const double h_norm = bel.control_norm.value_or(0.0);
  const double bound = phi.sup_norm * h_norm;
  Json c = {{"case_id", id},
            {"phi", phi.name},
            {"bel", to_json(bel)},
            {"fd", fd ? to_json(*fd) : Json()},
            {"control_norm", h_norm},
            {"bound", std::isfinite(bound) ? Json(bound) : Json("inf")},
            {"bound_ok", std::fabs(bel.value) <= bound + 3.0 * bel.std_error}};
  if (fd) {
    c["difference"] = bel.value - fd->value;
    c["combined_stderr"] = std::hypot(bel.std_error, fd->std_error);
  }
  return c;
}

Json cmd_gradient(Context& ctx) {
  const Params& p = ctx.params;
  const double T = finite_horizon(p, "T", 0.1);
  const std::size_t N = p.count("N", 4);
  const std::size_t samples = p.count("samples", 100000);
  if (N < 1) throw config_error("N", "must be >= 1");
  const StateVector x = state_param(p, "x", "zero", N).resized(N);
  const StateVector y = state_param(p, "y", "e1", N);
  if (y.size() > N) throw config_error("y", "direction must live in the first N modes");
  const NoiseProfile profile = ctx.profile(N);
  Observable phi;
  try {
    phi = parse_observable(p.text("phi", "tanh:mode=1"));
  } catch (const Error& e) {
    throw config_error("phi", e.what());
  }

  const BiorthogonalFamily family = build_family(HeatRates{N}, Horizon::finite(T), ctx.policy());
  ctx.precision_used = family.precision_bits;
  const GradientEstimate bel =
      bel_gradient(phi, x, y, profile, ctx.sampler(N, T, samples, ctx.config.seed), family);
  std::optional<GradientEstimate> fd;
  if (p.has("fd_eps")) {
    // Independent draws so the two standard errors combine in quadrature.
    fd = finite_difference_oracle(phi, x, y, profile, p.number("fd_eps"),
                                  ctx.sampler(N, T, samples, ctx.config.seed + 1));
  }
  Json c = gradient_case("0", phi, bel, fd);
  Json report = {{"T", T},
                 {"N", N},
                 {"x", to_json(x)},
                 {"y", to_json(y)},
                 {"phi", phi.name},
                 {"bel", {{"value", c["bel"]["value"]}, {"stderr", c["bel"]["stderr"]}}},
                 {"fd", fd ? Json{{"value", fd->value}, {"stderr", fd->std_error}} : Json()},
                 {"control_norm", c["control_norm"]},
                 {"bound", c["bound"]},
                 {"bound_ok", c["bound_ok"]},
                 {"samples", samples},
                 {"fd_seed", ctx.config.seed + 1},
                 {"cases", Json::array({c})}};
  if (fd) report["fd_eps"] = p.number("fd_eps");
  report = ctx.stamp(std::move(report), "gradient");
  ctx.write_json("gradient.json", report);
  ctx.write_plot("gradient_comparison.csv", report, PlotKind::GradientComparison);
  return report;
}

Json cmd_full_pipeline(Context& ctx) {
  const Params& p = ctx.params;
  const double T = finite_horizon(p, "T", 1.0);
  const std::size_t N = p.count("N", 12);
  if (N < 1) throw config_error("N", "must be >= 1");
  const StateVector z0 = state_param(p, "z0", "e1+e2+e3", N);
  const std::size_t N_check = std::max({p.count("N_check", 100), N, z0.size()});
  const NoiseProfile profile = ctx.profile(N_check);
  const double alpha = p.number("alpha", std::holds_alternative<GaussianDecay>(profile.kind())
                                             ? std::get<GaussianDecay>(profile.kind()).alpha
                                             : 0.0);

  const BiorthoOut bi = biortho_step(ctx, N, Horizon::finite(T));
  const SynthOut synth = synth_step(ctx, profile, z0, T, N, N_check, bi.family);
  ctx.write_json("residual_report.json", synth.residual_doc);
  ctx.write_plot("residual_spectrum.csv", synth.residual_doc, PlotKind::ResidualSpectrum);

  // Gradient stage: the smooth suite at x = 0 in direction y, each against
  // the finite-difference oracle, plus the empirical Feller constant.
  const std::size_t samples = p.count("samples", 100000);
  const double eps = p.number("fd_eps", 1e-2);
  const StateVector y = state_param(p, "y", "e1", N);
  const StateVector x = state_param(p, "x", "zero", N).resized(N);
  Json cases = Json::array();
  bool bound_ok = true;
  double empirical = 0.0;
  const std::vector<Observable> suite = smooth_suite();
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const GradientEstimate bel =
        bel_gradient(suite[i], x, y, profile, ctx.sampler(N, T, samples, ctx.config.seed), bi.family);
    const GradientEstimate fd = finite_difference_oracle(suite[i], x, y, profile, eps,
                                                         ctx.sampler(N, T, samples, ctx.config.seed + 1));
    Json c = gradient_case(std::to_string(i), suite[i], bel, fd);
    bound_ok = bound_ok && c["bound_ok"].get<bool>();
    empirical = std::max(empirical, std::fabs(bel.value) / (suite[i].sup_norm * y.norm()));
    cases.push_back(std::move(c));
  }
  const SweepReport sweep =
      norm_bound_sweep(profile, alpha, T, N, p.count("trials", 100), ctx.config.seed, bi.family, ctx.config.threads);
  Json gradient = {{"T", T},
                   {"N", N},
                   {"x", to_json(x)},
                   {"y", to_json(y)},
                   {"samples", samples},
                   {"fd_eps", eps},
                   {"fd_seed", ctx.config.seed + 1},
                   {"bound_ok", bound_ok},
                   {"empirical_constant", empirical},
                   {"sweep", to_json(sweep)},
                   {"cases", cases}};
  gradient = ctx.stamp(std::move(gradient), "gradient");
  ctx.write_json("gradient.json", gradient);
  ctx.write_plot("gradient_comparison.csv", gradient, PlotKind::GradientComparison);

  const double residual = bi.family.residual.to_double();
  const double controlled_max = [&] {
    double m = 0.0;
    for (std::size_t i = 0; i < N; ++i) m = std::max(m, std::fabs(synth.control_doc["residuals"][i].get<double>()));
    return m;
  }();
  Json checks = {{"biorthogonality", residual < PrecisionPolicy{}.tolerance},
                 {"controlled_residuals", controlled_max < 1e-15},
                 {"gradient_bound", bound_ok}};
  Json report = {{"T", T},
                 {"N", N},
                 {"N_check", N_check},
                 {"alpha", alpha},
                 {"outside_regime", !(T > alpha)},
                 {"family_residual", bi.family.residual.str()},
                 {"precision_bits", bi.family.precision_bits},
                 {"control_norm", synth.control.norm()},
                 {"max_controlled_residual", controlled_max},
                 {"tail_l2", synth.control_doc["tail_l2"]},
                 {"empirical_constant", empirical},
                 {"max_ratio", sweep.max_ratio},
                 {"checks", checks}};
  report = ctx.stamp(std::move(report), "pipeline");
  ctx.write_json("pipeline.json", report);
  return report;
}

Json cmd_plot(Context& ctx) {
  Params& p = ctx.params;
  Json report = p.at("report");
  if (report.is_string()) report = read_json_file(report.get<std::string>(), "report");
  ctx.resolved_params["report"] = report;
  const PlotKind kind = parse_plot_kind(p.text("kind", ""));
  const std::string name = p.text("output", to_string(kind) + ".csv");
  ctx.write_plot(name, report, kind, p.count("points", 0));
  return ctx.stamp({{"kind", to_string(kind)}, {"output", name}}, "plot");
}

bool validation_failed(const std::string& command, const Json& report) {
  if (command == "gradient") return !report.value("bound_ok", true);
  if (command == "verify") return !report.value("passed", true);
  if (command == "full-pipeline") {
    for (const auto& [name, ok] : report["checks"].items()) {
      if (!ok.get<bool>()) return true;
    }
  }
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DegenerateMode:
    case ErrorKind::DegenerateProfile:
      return kDegenerate;
    case ErrorKind::PrecisionExhausted:
      return kPrecisionExhausted;
    case ErrorKind::QuadratureFailure:
    case ErrorKind::SingularGram:
    case ErrorKind::IndefiniteCovariance:
    case ErrorKind::ValidationFailure:
      return kValidationFailure;
    default:
      return kConfigError;
  }
}

Json error_json(const Error& e) {
  Json err = {{"kind", to_string(e.kind())}, {"message", e.what()}};
  if (e.mode()) err["mode"] = *e.mode();
  if (e.achieved()) err["achieved"] = *e.achieved();
  if (e.field()) err["field"] = *e.field();
  return {{"error", err}, {"exit_code", exit_code_for(e.kind())}};
}

RunConfig config_from_json(const Json& j) {
  if (!j.is_object() || j.empty()) throw config_error("config", "empty configuration");
  RunConfig c;
  if (!j.contains("command") || !j["command"].is_string()) throw config_error("command", "missing command");
  c.command = j["command"].get<std::string>();
  if (std::find(kCommands.begin(), kCommands.end(), c.command) == kCommands.end()) {
    throw config_error("command", "unknown command '" + c.command + "'");
  }
  if (j.contains("profile") && !j["profile"].is_null()) {
    if (j["profile"].is_string()) {
      c.profile_path = j["profile"].get<std::string>();
    } else {
      c.profile = j["profile"];
    }
  }
  if (j.contains("profile_path") && j["profile_path"].is_string()) c.profile_path = j["profile_path"].get<std::string>();
  if (j.contains("params")) {
    if (!j["params"].is_object()) throw config_error("params", "expected an object");
    c.params = j["params"];
  }
  try {
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("precision_bits")) c.precision_bits = j["precision_bits"].get<long>();
    if (j.contains("threads")) c.threads = j["threads"].get<unsigned>();
  } catch (const Json::exception& e) {
    throw config_error("config", e.what());
  }
  if (j.contains("output_dir") && j["output_dir"].is_string()) c.output_dir = j["output_dir"].get<std::string>();
  return c;
}

RunConfig load_config(const fs::path& path) { return config_from_json(read_json_file(path, "config")); }

Json to_json(const RunConfig& c) {
  Json j = {{"command", c.command},
            {"params", c.params},
            {"seed", c.seed},
            {"precision_bits", c.precision_bits},
            {"threads", c.threads},
            {"output_dir", c.output_dir.string()}};
  if (!c.profile.is_null()) j["profile"] = c.profile;
  if (c.profile_path) j["profile_path"] = *c.profile_path;
  return j;
}

RunResult run(const RunConfig& config) {
  RunResult result;
  Context ctx{config, Params(config.params), config.output_dir, config.profile, config.params, {}, 0};
  Json manifest = {{"tool", "heatmoment"},
                   {"version", HEATMOMENT_VERSION},
                   {"command", config.command},
                   {"seed", config.seed},
                   {"precision_bits", config.precision_bits},
                   {"threads", config.threads}};
  try {
    fs::create_directories(ctx.dir);
    if (ctx.profile_doc.is_null() && config.profile_path) {
      ctx.profile_doc = read_json_file(*config.profile_path, "profile");
    }
    const std::string& cmd = config.command;
    if (cmd == "basis") result.report = cmd_basis(ctx);
    else if (cmd == "delta-scan") result.report = cmd_delta_scan(ctx);
    else if (cmd == "biortho") result.report = cmd_biortho(ctx);
    else if (cmd == "synth") result.report = cmd_synth(ctx);
    else if (cmd == "verify") result.report = cmd_verify(ctx);
    else if (cmd == "simulate") result.report = cmd_simulate(ctx);
    else if (cmd == "gradient") result.report = cmd_gradient(ctx);
    else if (cmd == "full-pipeline") result.report = cmd_full_pipeline(ctx);
    else if (cmd == "plot") result.report = cmd_plot(ctx);
    else throw config_error("command", "unknown command '" + cmd + "'");
    if (validation_failed(cmd, result.report)) result.exit_code = kValidationFailure;
  } catch (const Error& e) {
    result.exit_code = exit_code_for(e.kind());
    result.report = error_json(e);
  } catch (const Json::exception& e) {
    result.exit_code = kConfigError;
    result.report = error_json(config_error("params", e.what()));
  } catch (const fs::filesystem_error& e) {
    result.exit_code = kConfigError;
    result.report = error_json(config_error("output_dir", e.what()));
  }

  if (result.exit_code != kOk && result.report.contains("error")) {
    try {
      ctx.write_json("error.json", result.report);
    } catch (...) {
    }
  }
  manifest["profile"] = ctx.profile_doc;
  manifest["params"] = ctx.resolved_params;
  manifest["precision_used"] = ctx.precision_used;
  manifest["artifacts"] = ctx.artifacts;
  manifest["exit_code"] = result.exit_code;
  try {
    std::ofstream out(ctx.dir / "manifest.json");
    if (out) out << manifest.dump(2) << '\n';
  } catch (...) {
  }
  result.artifacts = std::move(ctx.artifacts);
  return result;
}

}  // namespace heatmoment::app
