#include "heatmoment/serialize.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "heatmoment/errors.hpp"

namespace heatmoment {

namespace {

Error bad(const std::string& field, const std::string& what) {
  return Error(ErrorKind::ConfigError, field + ": " + what).with_field(field);
}

const Json& need(const Json& j, const char* key) {
  if (!j.is_object()) throw bad(key, "expected a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) throw bad(key, "missing field");
  return *it;
}

double get_double(const Json& j, const char* key) {
  const Json& v = need(j, key);
  if (v.is_number()) return v.get<double>();
  // Non-finite values travel as strings.
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw bad(key, "expected a number");
}

long get_long(const Json& j, const char* key) {
  const Json& v = need(j, key);
  if (!v.is_number_integer()) throw bad(key, "expected an integer");
  return v.get<long>();
}

Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

std::vector<double> get_doubles(const Json& j, const char* key) {
  const Json& v = need(j, key);
  if (!v.is_array()) throw bad(key, "expected an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const Json& x : v) {
    if (!x.is_number()) throw bad(key, "expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Json real_strings(const RealVector& v) {
  Json out = Json::array();
  for (const Real& r : v) out.push_back(r.str());
  return out;
}

RealVector reals_from(const Json& j, const char* key, long bits) {
  const Json& v = need(j, key);
  if (!v.is_array()) throw bad(key, "expected an array of decimal strings");
  RealVector out;
  out.reserve(v.size());
  for (const Json& x : v) {
    if (!x.is_string()) throw bad(key, "expected decimal strings");
    out.push_back(Real::from_string(x.get<std::string>(), bits));
  }
  return out;
}

Json number_array(std::span<const double> v) {
  Json out = Json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// ---------------------------------------------------------------------------

Json to_json(const StateVector& v) { return number_array(v.coeffs()); }

StateVector state_from_json(const Json& j) {
  if (!j.is_array()) throw bad("state", "expected an array of coefficients");
  std::vector<double> out;
  for (const Json& x : j) {
    if (!x.is_number()) throw bad("state", "expected numbers");
    out.push_back(x.get<double>());
  }
  return StateVector(std::move(out));
}

Json to_json(const Eigen::VectorXd& v) {
  return number_array(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

Json to_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(number(m(i, k)));
    out.push_back(std::move(row));
  }
  return out;
}

Eigen::VectorXd vector_from_json(const Json& j) {
  const StateVector v = state_from_json(j);
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  if (!j.is_array()) throw bad("matrix", "expected an array of rows");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Eigen::VectorXd row = vector_from_json(j[static_cast<std::size_t>(i)]);
    if (row.size() != cols) throw bad("matrix", "ragged rows");
    out.row(i) = row.transpose();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Profiles

Json to_json(const NoiseProfile& profile) {
  Json j;
  j["s"] = profile.s();
  j["N"] = profile.size();
  if (const auto* d = std::get_if<DiracDelta>(&profile.kind())) {
    j["kind"] = "dirac";
    j["p"] = d->p;
  } else if (const auto* g = std::get_if<GaussianDecay>(&profile.kind())) {
    j["kind"] = "gaussian_decay";
    j["alpha"] = g->alpha;
    j["C"] = g->C;
  } else {
    j["kind"] = "explicit";
    j["coeffs"] = number_array(profile.coeffs());
    if (const auto& b = profile.lower_bound()) {
      j["lower_bound"] = {{"C", b->C}, {"alpha", b->alpha}};
    }
  }
  return j;
}

NoiseProfile profile_from_json(const Json& j) {
  if (!j.is_object() || j.empty()) throw bad("profile", "empty or non-object profile document");
  const Json& kind_field = need(j, "kind");
  if (!kind_field.is_string()) throw bad("kind", "expected a string");
  const std::string kind = kind_field.get<std::string>();
  const double s = j.contains("s") ? get_double(j, "s") : (kind == "dirac" ? 0.75 : 0.0);

  if (kind == "explicit") {
    std::vector<double> coeffs = get_doubles(j, "coeffs");
    if (j.contains("N")) {
      const long N = get_long(j, "N");
      if (N < 1 || static_cast<std::size_t>(N) > coeffs.size()) {
        throw bad("N", "must lie in [1, len(coeffs)]");
      }
      coeffs.resize(static_cast<std::size_t>(N));
    }
    std::optional<LowerBound> bound;
    if (j.contains("lower_bound")) {
      const Json& b = j["lower_bound"];
      bound = LowerBound{get_double(b, "C"), get_double(b, "alpha")};
    }
    return NoiseProfile(std::move(coeffs), s, bound);
  }
  if (kind != "dirac" && kind != "gaussian_decay") throw bad("kind", "unknown profile kind '" + kind + "'");
  const long N = get_long(j, "N");
  if (N < 1) throw bad("N", "must be >= 1");
  if (kind == "dirac") return delta_profile(get_double(j, "p"), static_cast<std::size_t>(N), s);
  const double C = j.contains("C") ? get_double(j, "C") : 1.0;
  return gaussian_decay_profile(get_double(j, "alpha"), C, static_cast<std::size_t>(N), s);
}

// ---------------------------------------------------------------------------
// Families and controls

Json to_json(const BiorthogonalFamily& family) {
  Json j;
  if (const auto* heat = std::get_if<HeatRates>(&family.gram.spec)) {
    j["rate_kind"] = "heat";
    j["N"] = heat->N;
  } else {
    j["rate_kind"] = "explicit";
    j["N"] = family.size();
  }
  j["rates"] = real_strings(family.gram.rates);
  j["T"] = family.horizon().str();
  j["precision_bits"] = family.precision_bits;
  j["residual"] = family.residual.str();
  j["attempts"] = family.attempts;
  Json rows = Json::array();
  for (std::size_t r = 0; r < family.coeff.rows(); ++r) {
    Json row = Json::array();
    for (std::size_t c = 0; c < family.coeff.cols(); ++c) row.push_back(family.coeff(r, c).str());
    rows.push_back(std::move(row));
  }
  j["coeff_matrix"] = std::move(rows);
  return j;
}

BiorthogonalFamily family_from_json(const Json& j) {
  const long bits = get_long(j, "precision_bits");
  if (bits < 53) throw bad("precision_bits", "must be >= 53");
  const Json& T = need(j, "T");
  const Horizon horizon = T.is_string() ? Horizon::parse(T.get<std::string>()) : Horizon::finite(T.get<double>());

  const RealVector rates = reals_from(j, "rates", bits);
  RateSpec spec = HeatRates{rates.size()};
  if (j.value("rate_kind", std::string("heat")) != "heat") {
    std::vector<double> values;
    for (const Real& r : rates) values.push_back(r.to_double());
    spec = ExplicitRates{std::move(values)};
  }

  BiorthogonalFamily family;
  family.gram = gram_matrix(spec, horizon, bits);
  family.precision_bits = bits;
  family.residual = Real::from_string(need(j, "residual").get<std::string>(), bits);
  if (j.contains("attempts")) family.attempts = j["attempts"].get<std::vector<long>>();

  const Json& rows = need(j, "coeff_matrix");
  const std::size_t N = rates.size();
  if (!rows.is_array() || rows.size() != N) throw bad("coeff_matrix", "expected N rows");
  family.coeff = RealMatrix(N, N, bits);
  for (std::size_t r = 0; r < N; ++r) {
    if (!rows[r].is_array() || rows[r].size() != N) throw bad("coeff_matrix", "expected N columns");
    for (std::size_t c = 0; c < N; ++c) {
      family.coeff(r, c) = Real::from_string(rows[r][c].get<std::string>(), bits);
    }
  }
  if (!cholesky(family.gram.entries, family.gram_factor)) {
    throw bad("precision_bits", "Gram matrix is not positive definite at this precision");
  }
  return family;
}

Json to_json(const ControlSignal& h) {
  Json j;
  j["T"] = h.T;
  j["N"] = h.size();
  j["precision_bits"] = h.precision_bits;
  j["weights"] = real_strings(h.weights);
  j["norm"] = h.norm();
  j["norm_sq"] = h.norm_sq.str();
  j["moment_defect"] = h.moment_defect;
  return j;
}

ControlSignal control_from_json(const Json& j) {
  ControlSignal h;
  h.T = get_double(j, "T");
  if (!(h.T > 0.0) || !std::isfinite(h.T)) throw bad("T", "must be positive and finite");
  h.precision_bits = get_long(j, "precision_bits");
  if (h.precision_bits < 53) throw bad("precision_bits", "must be >= 53");
  h.weights = reals_from(j, "weights", h.precision_bits);
  h.rates = rate_values(HeatRates{h.weights.size()}, h.precision_bits);
  h.norm_sq = Real::from_string(need(j, "norm_sq").get<std::string>(), h.precision_bits);
  h.moment_defect = j.contains("moment_defect") ? get_double(j, "moment_defect") : 0.0;
  return h;
}

// ---------------------------------------------------------------------------
// Reports

Json to_json(const NullReport& r) {
  return {{"residuals", number_array(r.residuals)},
          {"tail_bounds", number_array(r.tail_bounds)},
          {"l2_residual", number(r.l2_residual)},
          {"controlled_l2", number(r.controlled_l2)},
          {"tail_l2", number(r.tail_l2)},
          {"controlled_modes", r.controlled_modes}};
}

NullReport null_report_from_json(const Json& j) {
  NullReport r;
  r.residuals = get_doubles(j, "residuals");
  r.tail_bounds = get_doubles(j, "tail_bounds");
  r.l2_residual = get_double(j, "l2_residual");
  r.controlled_l2 = get_double(j, "controlled_l2");
  r.tail_l2 = get_double(j, "tail_l2");
  r.controlled_modes = static_cast<std::size_t>(get_long(j, "controlled_modes"));
  return r;
}

Json to_json(const SweepReport& r) {
  return {{"max_ratio", number(r.max_ratio)},     {"probe_ratio", number(r.probe_ratio)},
          {"trial_max", number(r.trial_max)},     {"trials", r.trials},
          {"seed", r.seed},                       {"outside_regime", r.outside_regime}};
}

SweepReport sweep_report_from_json(const Json& j) {
  SweepReport r;
  r.max_ratio = get_double(j, "max_ratio");
  r.probe_ratio = get_double(j, "probe_ratio");
  r.trial_max = get_double(j, "trial_max");
  r.trials = static_cast<std::size_t>(get_long(j, "trials"));
  r.seed = need(j, "seed").get<std::uint64_t>();
  r.outside_regime = need(j, "outside_regime").get<bool>();
  return r;
}

Json to_json(const ThetaNormReport& r) {
  return {{"norm", number(r.norm)},
          {"bound", number(r.bound)},
          {"ratio", number(r.ratio)},
          {"finite_bound", number(r.finite_bound)},
          {"finite_ratio", number(r.finite_ratio)}};
}

Json to_json(const DInfinite& d) {
  return {{"partial", number(d.partial)},
          {"limit", number(d.limit)},
          {"gap", number(d.gap)},
          {"relative_gap", number(d.relative_gap)}};
}

Json to_json(const LowerBoundReport& r) {
  Json j = {{"holds", r.holds},
            {"worst_n", r.worst_n},
            {"best_C", number(r.best_C)},
            {"log_best_C", number(r.log_best_C)},
            {"degenerate_modes", r.degenerate_modes}};
  return j;
}

Json to_json(const McEstimate& e) {
  return {{"value", number(e.value)}, {"stderr", number(e.std_error)}, {"samples", e.samples}};
}

McEstimate mc_estimate_from_json(const Json& j) {
  return {get_double(j, "value"), get_double(j, "stderr"),
          static_cast<std::size_t>(get_long(j, "samples"))};
}

Json to_json(const SampleMoments& m) {
  return {{"mean", to_json(m.mean)},
          {"mean_stderr", to_json(m.mean_stderr)},
          {"cov", to_json(m.cov)},
          {"cov_stderr", to_json(m.cov_stderr)}};
}

Json to_json(const GradientEstimate& g) {
  Json j = {{"value", number(g.value)}, {"stderr", number(g.std_error)}, {"samples", g.samples}};
  if (g.control_norm) j["control_norm"] = number(*g.control_norm);
  return j;
}

GradientEstimate gradient_from_json(const Json& j) {
  GradientEstimate g;
  g.value = get_double(j, "value");
  g.std_error = get_double(j, "stderr");
  g.samples = static_cast<std::size_t>(get_long(j, "samples"));
  if (j.contains("control_norm")) g.control_norm = get_double(j, "control_norm");
  return g;
}

Json to_json(const FellerReport& r) {
  Json entries = Json::array();
  for (const FellerEntry& e : r.entries) {
    entries.push_back({{"observable", e.observable},
                       {"x_index", e.x_index},
                       {"y_index", e.y_index},
                       {"value", number(e.value)},
                       {"stderr", number(e.std_error)},
                       {"sup_norm", number(e.sup_norm)},
                       {"control_norm", number(e.control_norm)},
                       {"y_norm", number(e.y_norm)},
                       {"bound", number(e.bound)},
                       {"ok", e.ok}});
  }
  return {{"entries", std::move(entries)},
          {"all_ok", r.all_ok},
          {"empirical_constant", number(r.empirical_constant)}};
}

FellerReport feller_report_from_json(const Json& j) {
  FellerReport r;
  r.all_ok = need(j, "all_ok").get<bool>();
  r.empirical_constant = get_double(j, "empirical_constant");
  for (const Json& e : need(j, "entries")) {
    FellerEntry out;
    out.observable = need(e, "observable").get<std::string>();
    out.x_index = static_cast<std::size_t>(get_long(e, "x_index"));
    out.y_index = static_cast<std::size_t>(get_long(e, "y_index"));
    out.value = get_double(e, "value");
    out.std_error = get_double(e, "stderr");
    out.sup_norm = get_double(e, "sup_norm");
    out.control_norm = get_double(e, "control_norm");
    out.y_norm = get_double(e, "y_norm");
    out.bound = get_double(e, "bound");
    out.ok = need(e, "ok").get<bool>();
    r.entries.push_back(std::move(out));
  }
  return r;
}

}  // namespace heatmoment
