#include <fstream>

#include "app.hpp"
#include "heatmoment/errors.hpp"

namespace heatmoment::app {

namespace {

std::string kind_of(const Json& report) {
  if (report.is_object() && report.contains("report_kind") && report["report_kind"].is_string()) {
    return report["report_kind"].get<std::string>();
  }
  return "";
}

void expect_kind(const Json& report, const char* wanted, PlotKind kind) {
  const std::string got = kind_of(report);
  if (got != wanted) {
    throw Error(ErrorKind::ReportKindMismatch, to_string(kind) + " needs a '" + wanted +
                                                   "' report, got '" + (got.empty() ? "unknown" : got) +
                                                   "'");
  }
}

std::ofstream open_csv(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::ConfigError, "cannot write " + path.string()).with_field("output");
  return out;
}

std::string num(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  return format_double(v.get<double>());
}

}  // namespace

PlotKind parse_plot_kind(const std::string& name) {
  if (name == "control_timeseries") return PlotKind::ControlTimeseries;
  if (name == "residual_spectrum") return PlotKind::ResidualSpectrum;
  if (name == "theta_profiles") return PlotKind::ThetaProfiles;
  if (name == "gradient_comparison") return PlotKind::GradientComparison;
  throw Error(ErrorKind::ConfigError, "unknown plot kind '" + name + "'").with_field("kind");
}

std::string to_string(PlotKind kind) {
  switch (kind) {
    case PlotKind::ControlTimeseries: return "control_timeseries";
    case PlotKind::ResidualSpectrum: return "residual_spectrum";
    case PlotKind::ThetaProfiles: return "theta_profiles";
    case PlotKind::GradientComparison: return "gradient_comparison";
  }
  return "?";
}

void emit_plot_data(const Json& report, PlotKind kind, const std::filesystem::path& csv_path,
                    const PlotOptions& options) {
  switch (kind) {
    case PlotKind::ControlTimeseries: {
      expect_kind(report, "control", kind);
      const ControlSignal h = control_from_json(report);
      const std::size_t points = options.points ? options.points : 1001;
      if (points < 2) throw Error(ErrorKind::ConfigError, "need at least 2 grid points").with_field("points");
      auto out = open_csv(csv_path);
      out << "t,h_t\n";
      for (std::size_t k = 0; k < points; ++k) {
        // Last point pinned to T so the grid closes exactly.
        const double t = k + 1 == points ? h.T : h.T * static_cast<double>(k) / static_cast<double>(points - 1);
        out << format_double(t) << ',' << format_double(h.evaluate(t)) << '\n';
      }
      break;
    }
    case PlotKind::ResidualSpectrum: {
      expect_kind(report, "residual_report", kind);
      const NullReport r = null_report_from_json(report);
      auto out = open_csv(csv_path);
      out << "n,residual,tail_bound\n";
      for (std::size_t i = 0; i < r.residuals.size(); ++i) {
        out << i + 1 << ',' << format_double(r.residuals[i]) << ',' << format_double(r.tail_bounds[i]) << '\n';
      }
      break;
    }
    case PlotKind::ThetaProfiles: {
      expect_kind(report, "family", kind);
      const BiorthogonalFamily family = family_from_json(report);
      if (family.horizon().is_infinite()) {
        throw Error(ErrorKind::ReportKindMismatch, "theta_profiles needs a finite-horizon family");
      }
      const double T = family.horizon().value();
      const std::size_t points = options.points ? options.points : 201;
      if (points < 2) throw Error(ErrorKind::ConfigError, "need at least 2 grid points").with_field("points");
      auto out = open_csv(csv_path);
      out << 't';
      for (std::size_t m = 1; m <= family.size(); ++m) out << ",theta_" << m;
      out << '\n';
      for (std::size_t k = 0; k < points; ++k) {
        const double t = k + 1 == points ? T : T * static_cast<double>(k) / static_cast<double>(points - 1);
        out << format_double(t);
        for (std::size_t m = 1; m <= family.size(); ++m) {
          out << ',' << format_double(evaluate_theta(family, static_cast<long>(m), t));
        }
        out << '\n';
      }
      break;
    }
    case PlotKind::GradientComparison: {
      expect_kind(report, "gradient", kind);
      if (!report.contains("cases") || !report["cases"].is_array()) {
        throw Error(ErrorKind::ReportKindMismatch, "gradient report carries no cases");
      }
      auto out = open_csv(csv_path);
      out << "case_id,bel_value,bel_stderr,fd_value,fd_stderr,bound\n";
      for (const Json& c : report["cases"]) {
        const Json& bel = c.at("bel");
        const Json fd = c.contains("fd") ? c["fd"] : Json();
        out << c.at("case_id").get<std::string>() << ',' << num(bel.at("value")) << ','
            << num(bel.at("stderr")) << ',' << (fd.is_object() ? num(fd.at("value")) : "") << ','
            << (fd.is_object() ? num(fd.at("stderr")) : "") << ',' << num(c.at("bound")) << '\n';
      }
      break;
    }
  }
}

}  // namespace heatmoment::app
