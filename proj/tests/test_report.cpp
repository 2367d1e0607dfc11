#include <sstream>

#include <catch2/catch_amalgamated.hpp>
#include <json.hpp>

#include "g2lab/report.hpp"
#include "g2lab/verify.hpp"

using namespace g2lab;

namespace {

RunConfig small_config(const std::string& metric, int samples = 3, std::uint64_t seed = 7) {
  RunConfig cfg;
  cfg.metric = metric;
  cfg.samples = samples;
  cfg.seed = seed;
  return cfg;
}

const CheckRecord* find_check(const Report& r, const std::string& id) {
  for (const auto& c : r.checks)
    if (c.id == id) return &c;
  return nullptr;
}

}  // namespace

TEST_CASE("config validation", "[report]") {
  RunConfig cfg;
  cfg.samples = 0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = RunConfig{};
  cfg.fd_step = 1e-2;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = RunConfig{};
  cfg.format = "xml";
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = RunConfig{};
  cfg.tol["no_such_key"] = 1.0;
  CHECK_THROWS_AS(run_verify(cfg), std::invalid_argument);
}

TEST_CASE("verify on the flat model", "[report]") {
  const Report rep = run_verify(small_config("flat"));
  // every check passes except the documented dphi-oracle defect
  for (const auto& c : rep.checks) {
    if (c.id == "sb.dphi_oracle") {
      CHECK_FALSE(c.pass);
      CHECK(c.max_residual > 1.9);  // the constant gap |2 mu^alpha1| componentwise
      CHECK(c.max_residual < 2.1);
    } else {
      INFO(c.id << " value " << c.max_residual);
      CHECK(c.pass);
    }
  }
  CHECK_FALSE(rep.all_pass);
  // flat torsion column: tau0 = 6/7 everywhere
  REQUIRE(rep.torsion.size() == 3);
  for (const auto& t : rep.torsion) {
    CHECK(t.tau0 == Catch::Approx(6.0 / 7.0).margin(1e-10));
    CHECK(t.tau1_norm < 1e-10);
    CHECK(t.tau2_norm < 1e-10);
  }
  // the gap companion check passes and is tight
  const CheckRecord* gap = find_check(rep, "sb.dphi_oracle_gap");
  REQUIRE(gap != nullptr);
  CHECK(gap->pass);
  CHECK(gap->max_residual < 1e-6);
  // check ids unique
  std::set<std::string> ids;
  for (const auto& c : rep.checks) CHECK(ids.insert(c.id).second);
}

TEST_CASE("verify treats the product metric as a confirmed control", "[report]") {
  RunConfig cfg = small_config("s2xs2", 3, 11);
  cfg.metric = "s2xs2";
  cfg.r1 = 1.0;
  cfg.r2 = 2.0;
  const Report rep = run_verify(cfg);
  const CheckRecord* cocal = find_check(rep, "sb.cocalibrated");
  REQUIRE(cocal != nullptr);
  CHECK(cocal->inverted);
  CHECK(cocal->pass);  // the control confirms: |d*phi| large
  CHECK(cocal->max_residual > 0.01);
  const CheckRecord* einstein = find_check(rep, "geom.einstein");
  REQUIRE(einstein != nullptr);
  CHECK(einstein->inverted);
  CHECK(einstein->pass);
}

TEST_CASE("single point smoke run", "[report]") {
  const Report rep = run_verify(small_config("sphere4", 1, 3));
  CHECK(rep.torsion.size() == 1);
  const CheckRecord* s4 = find_check(rep, "sb.s4_identity");
  REQUIRE(s4 != nullptr);
  CHECK(s4->pass);
}

TEST_CASE("torsion command emits expectation columns", "[report]") {
  RunConfig cfg = small_config("hyperbolic4", 4, 13);
  const Report rep = run_torsion(cfg);
  REQUIRE(rep.torsion.size() == 4);
  for (const auto& t : rep.torsion) {
    CHECK(t.tau0 == Catch::Approx(0.0).margin(1e-10));  // tau0 vanishes at C = -1
    CHECK(t.tau0_delta < 1e-8);
    REQUIRE(t.tau3_delta.has_value());
    CHECK(*t.tau3_delta < 1e-8);
  }
  const CheckRecord* cc = find_check(rep, "sb.torsion_constant_curvature");
  REQUIRE(cc != nullptr);
  CHECK(cc->pass);
  CHECK(rep.all_pass);  // the torsion subset has no expected failure
}

TEST_CASE("torsion columns on the einstein non-constant base", "[report]") {
  const Report rep = run_torsion(small_config("cp2", 3, 17));
  REQUIRE(rep.torsion.size() == 3);
  for (const auto& t : rep.torsion) {
    CHECK(t.tau1_norm < 1e-8);  // einstein => co-calibrated => tau1 = tau2 = 0
    CHECK(t.tau2_norm < 1e-8);
    CHECK(t.tau0 == Catch::Approx(t.tau0_expected).margin(1e-8));
    CHECK_FALSE(t.tau3_delta.has_value());  // no constant-curvature expectation
  }
  CHECK(rep.all_pass);
}

TEST_CASE("emitted reports are byte-identical for identical config and seed", "[report]") {
  const RunConfig cfg = small_config("sphere4", 2, 21);
  const Report a = run_verify(cfg);
  const Report b = run_verify(cfg);
  for (auto format : {ReportFormat::Json, ReportFormat::Csv, ReportFormat::Text})
    CHECK(emit(a, format) == emit(b, format));
  RunConfig other = cfg;
  other.seed = 22;
  const Report c = run_verify(other);
  CHECK(emit(a, ReportFormat::Json) != emit(c, ReportFormat::Json));
}

TEST_CASE("json report round trips through a schema check", "[report]") {
  const Report rep = run_torsion(small_config("flat", 2, 5));
  const std::string body = emit(rep, ReportFormat::Json);
  const nlohmann::json j = nlohmann::json::parse(body);
  CHECK(j.at("schema").get<int>() == 1);
  CHECK(j.at("version").get<std::string>() == version_string());
  CHECK(j.at("metric").get<std::string>() == "flat");
  CHECK(j.at("seed").get<std::uint64_t>() == 5);
  REQUIRE(j.at("checks").is_array());
  for (const auto& c : j.at("checks")) {
    CHECK(c.contains("id"));
    CHECK(c.contains("anchor"));
    CHECK(c.contains("points"));
    CHECK(c.contains("max_residual"));
    CHECK(c.contains("tolerance"));
    CHECK(c.contains("pass"));
  }
  REQUIRE(j.at("torsion").is_array());
  CHECK(j.at("torsion").size() == 2);
  CHECK(j.at("torsion")[0].at("x").size() == 4);
}

TEST_CASE("csv torsion table has the declared columns", "[report]") {
  const Report rep = run_torsion(small_config("flat", 2, 5));
  const std::string body = emit(rep, ReportFormat::Csv);
  std::istringstream in(body);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "point,x,u,tau0,tau1_norm,tau2_norm,tau3_norm,einstein_residual");
  int commas = 0;
  for (char ch : header)
    if (ch == ',') ++commas;
  CHECK(commas == 7);  // 8 declared columns
  std::string row;
  int rows = 0;
  while (std::getline(in, row))
    if (!row.empty()) ++rows;
  CHECK(rows == 2);
}

TEST_CASE("text report carries the anchors", "[report]") {
  const Report rep = run_torsion(small_config("flat", 1, 5));
  const std::string body = emit(rep, ReportFormat::Text);
  CHECK(body.find("tau0 = (2 r(u,u) + 6) / 7") != std::string::npos);
  CHECK(body.find("overall:") != std::string::npos);
}

TEST_CASE("tolerance overrides are honored", "[report]") {
  RunConfig cfg = small_config("sphere4", 1, 5);
  cfg.command = "torsion";
  cfg.tol["tau0"] = 1e-30;  // impossible tolerance flips the check
  const Report rep = run_torsion(cfg);
  const CheckRecord* c = find_check(rep, "sb.tau0_general");
  REQUIRE(c != nullptr);
  CHECK_FALSE(c->pass);
  CHECK_FALSE(rep.all_pass);
}

TEST_CASE("custom metric configs drive the suite", "[report]") {
  // a conformally flat metric entered as text: curvature +1 sphere
  const std::string path = "test_sphere4.cfg";
  {
    std::ofstream out(path);
    out << "[metric]\n";
    for (const char* k : {"g11", "g22", "g33", "g44"})
      out << k << " = 4/(1 + x1^2 + x2^2 + x3^2 + x4^2)^2\n";
    out << "[domain]\n";
    for (int i = 1; i <= 4; ++i) out << "x" << i << " = -2 2\n";
  }
  RunConfig cfg;
  cfg.command = "torsion";
  cfg.config_path = path;
  cfg.samples = 2;
  cfg.seed = 9;
  const Report rep = run_torsion(cfg);
  CHECK(rep.metric == "custom");
  for (const auto& t : rep.torsion) {
    CHECK(t.tau0 == Catch::Approx(12.0 / 7.0).margin(1e-5));
    CHECK(t.einstein_residual < 1e-5);
  }
  std::remove(path.c_str());
}
