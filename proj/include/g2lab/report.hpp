#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "g2lab/types.hpp"

namespace g2lab {

inline const char* version_string() { return "1.0.0"; }

/// One verification record. `anchor` states the identity being checked;
/// `inverted` marks confirmed-control semantics (the value must *exceed*
/// the threshold, e.g. the non-Einstein co-calibration control).
struct CheckRecord {
  std::string id;
  std::string anchor;
  int points = 0;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  bool inverted = false;
};

struct TorsionRow {
  int index = 0;
  Vec4 x = Vec4::Zero();
  Vec4 u = Vec4::Zero();
  double tau0 = 0.0;
  double tau1_norm = 0.0;
  double tau2_norm = 0.0;
  double tau3_norm = 0.0;
  double einstein_residual = 0.0;
  double tau0_expected = 0.0;  // (2 r(u,u) + 6) / 7
  double tau0_delta = 0.0;
  std::optional<double> tau3_delta;  // constant-curvature bases only
};

struct Report {
  int schema = 1;
  std::string version = version_string();
  std::string command;
  std::string metric;
  std::uint64_t seed = 0;
  int samples = 0;
  double fd_step = 0.0;
  std::vector<CheckRecord> checks;
  std::vector<TorsionRow> torsion;
  std::vector<std::pair<std::string, double>> stats;
  bool all_pass = false;
};

enum class ReportFormat { Json, Csv, Text };

inline ReportFormat parse_format(const std::string& s) {
  if (s == "json") return ReportFormat::Json;
  if (s == "csv") return ReportFormat::Csv;
  if (s == "text") return ReportFormat::Text;
  throw std::invalid_argument("unknown report format '" + s + "' (expected json|csv|text)");
}

namespace detail {

inline std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string fmt_vec4(const Vec4& v) {
  return fmt_g(v[0]) + " " + fmt_g(v[1]) + " " + fmt_g(v[2]) + " " + fmt_g(v[3]);
}

}  // namespace detail

inline std::string emit(const Report& r, ReportFormat format) {
  if (format == ReportFormat::Json) {
    nlohmann::ordered_json j;
    j["schema"] = r.schema;
    j["version"] = r.version;
    j["command"] = r.command;
    j["metric"] = r.metric;
    j["seed"] = r.seed;
    j["samples"] = r.samples;
    j["fd_step"] = r.fd_step;
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : r.checks) {
      nlohmann::ordered_json jc;
      jc["id"] = c.id;
      jc["anchor"] = c.anchor;
      jc["points"] = c.points;
      jc["max_residual"] = c.max_residual;
      jc["tolerance"] = c.tolerance;
      jc["pass"] = c.pass;
      jc["inverted"] = c.inverted;
      j["checks"].push_back(jc);
    }
    j["torsion"] = nlohmann::ordered_json::array();
    for (const auto& t : r.torsion) {
      nlohmann::ordered_json jt;
      jt["point"] = t.index;
      jt["x"] = {t.x[0], t.x[1], t.x[2], t.x[3]};
      jt["u"] = {t.u[0], t.u[1], t.u[2], t.u[3]};
      jt["tau0"] = t.tau0;
      jt["tau1_norm"] = t.tau1_norm;
      jt["tau2_norm"] = t.tau2_norm;
      jt["tau3_norm"] = t.tau3_norm;
      jt["einstein_residual"] = t.einstein_residual;
      jt["tau0_expected"] = t.tau0_expected;
      jt["tau0_delta"] = t.tau0_delta;
      if (t.tau3_delta) jt["tau3_delta"] = *t.tau3_delta;
      j["torsion"].push_back(jt);
    }
    j["stats"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.stats) j["stats"][k] = v;
    j["all_pass"] = r.all_pass;
    return j.dump(2) + "\n";
  }

  if (format == ReportFormat::Csv) {
    std::string out = "point,x,u,tau0,tau1_norm,tau2_norm,tau3_norm,einstein_residual\n";
    for (const auto& t : r.torsion) {
      out += std::to_string(t.index) + ",\"" + detail::fmt_vec4(t.x) + "\",\"" +
             detail::fmt_vec4(t.u) + "\"," + detail::fmt_g(t.tau0) + "," +
             detail::fmt_g(t.tau1_norm) + "," + detail::fmt_g(t.tau2_norm) + "," +
             detail::fmt_g(t.tau3_norm) + "," + detail::fmt_g(t.einstein_residual) + "\n";
    }
    return out;
  }

  std::string out;
  out += "g2lab report (schema " + std::to_string(r.schema) + ", version " + r.version + ")\n";
  out += "command: " + r.command + "   metric: " + r.metric + "   samples: " +
         std::to_string(r.samples) + "   seed: " + std::to_string(r.seed) +
         "   fd_step: " + detail::fmt_g(r.fd_step) + "\n\nchecks:\n";
  for (const auto& c : r.checks) {
    out += std::string("  [") + (c.pass ? "PASS" : "FAIL") + "] " + c.id;
    out += "  points=" + std::to_string(c.points);
    out += std::string("  value=") + detail::fmt_g(c.max_residual);
    out += std::string(c.inverted ? "  must_exceed=" : "  tol=") + detail::fmt_g(c.tolerance);
    out += "\n         " + c.anchor + "\n";
  }
  if (!r.torsion.empty()) {
    out += "\ntorsion table:\n";
    out += "  point  tau0            tau1            tau2            tau3            "
           "einstein_res    tau0_delta\n";
    for (const auto& t : r.torsion) {
      char line[256];
      std::snprintf(line, sizeof(line), "  %-5d  %-14.8g  %-14.8g  %-14.8g  %-14.8g  %-14.8g  %-14.8g\n",
                    t.index, t.tau0, t.tau1_norm, t.tau2_norm, t.tau3_norm, t.einstein_residual,
                    t.tau0_delta);
      out += line;
    }
  }
  if (!r.stats.empty()) {
    out += "\nstats:\n";
    for (const auto& [k, v] : r.stats) out += "  " + k + " = " + detail::fmt_g(v) + "\n";
  }
  out += std::string("\noverall: ") + (r.all_pass ? "PASS" : "FAIL") + "\n";
  return out;
}

}  // namespace g2lab
