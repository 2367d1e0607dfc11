#pragma once

#include <array>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "g2lab/expr.hpp"
#include "g2lab/metric.hpp"

namespace g2lab {

// Custom-metric configuration. Format:
//
//   # comment
//   [metric]
//   g11 = 4 / (1 + x1^2 + x2^2 + x3^2 + x4^2)^2
//   g22 = ...                 # entries g11..g44; missing entries are 0;
//                             # gIJ and gJI may both be given (averaged)
//   [domain]
//   x1 = -1 1                 # box bounds per coordinate (default -10 10)
//   [options]
//   fd_step  = 1e-5           # first-derivative step
//   fd_step2 = 1e-4           # second-derivative step
//
// Whitespace is insignificant; '#' starts a comment anywhere on a line.

struct MetricConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string strip(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

/// Builds a MetricModel from 16 expression strings (missing entries zero).
/// The evaluated matrix is symmetrised; asymmetry beyond 1e-9 produces a
/// warning on `warn`. Positive-definiteness is probed on a grid of sample
/// points and violations are rejected with the offending point in the message.
inline MetricModel make_custom_metric(const std::map<std::string, std::string>& entries,
                                      Domain domain, double fd_step = 1e-5,
                                      double fd_step2 = 1e-4, std::ostream* warn = &std::cerr) {
  std::array<std::array<Expr, 4>, 4> ast;
  std::array<std::array<bool, 4>, 4> given{};
  for (const auto& [key, text] : entries) {
    if (key.size() != 3 || key[0] != 'g' || key[1] < '1' || key[1] > '4' || key[2] < '1' ||
        key[2] > '4')
      throw MetricConfigError("bad metric entry name '" + key + "' (expected g11..g44)");
    const int i = key[1] - '1', j = key[2] - '1';
    try {
      ast[size_t(i)][size_t(j)] = Expr::parse(text);
    } catch (const ParseError& e) {
      throw MetricConfigError(key + ": " + e.what());
    }
    given[size_t(i)][size_t(j)] = true;
  }

  auto eval = [ast, given, warn, warned = std::make_shared<bool>(false)](const Vec4& x) {
    Mat4 g = Mat4::Zero();
    const std::array<double, 4> xa{x[0], x[1], x[2], x[3]};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (given[size_t(i)][size_t(j)]) g(i, j) = ast[size_t(i)][size_t(j)].eval(xa);
    const Mat4 sym = 0.5 * (g + g.transpose());
    if (warn && !*warned && (g - g.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
      *warned = true;
      (*warn) << "warning: metric entries asymmetric beyond 1e-9; using (g + g^T)/2\n";
    }
    return sym;
  };

  MetricModel m;
  m.id = "custom";
  m.g = eval;
  m.domain = domain;
  m.fd_step = fd_step;
  m.fd_step2 = fd_step2;
  m.analytic = false;

  // positive-definiteness probe on a 3^4 grid of interior points
  for (int a = 0; a < 81; ++a) {
    Vec4 x;
    int t = a;
    for (int i = 0; i < 4; ++i, t /= 3) {
      const double f = 0.25 + 0.25 * (t % 3);  // 1/4, 1/2, 3/4 across the box
      x[i] = domain.lo[i] + f * (domain.hi[i] - domain.lo[i]);
    }
    const Mat4 g = m.g(x);
    if (!g.allFinite()) {
      std::ostringstream os;
      os << "metric not finite at sample point (" << x.transpose() << ")";
      throw MetricConfigError(os.str());
    }
    Eigen::SelfAdjointEigenSolver<Mat4> es(g);
    if (es.eigenvalues().minCoeff() <= 0.0) {
      std::ostringstream os;
      os << "metric not positive-definite at sample point (" << x.transpose() << ")";
      throw MetricConfigError(os.str());
    }
  }
  return m;
}

/// Parses the [metric]/[domain]/[options] config text.
inline MetricModel parse_metric_config(std::istream& in, std::ostream* warn = &std::cerr) {
  std::map<std::string, std::string> entries;
  Domain domain;
  domain.lo = Vec4::Constant(-10.0);
  domain.hi = Vec4::Constant(10.0);
  double fd_step = 1e-5, fd_step2 = 1e-4;

  std::string line, section;
  int lineno = 0;
  bool domain_given[4] = {false, false, false, false};
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::strip(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw MetricConfigError("line " + std::to_string(lineno) + ": unterminated section");
      section = detail::strip(line.substr(1, line.size() - 2));
      if (section != "metric" && section != "domain" && section != "options")
        throw MetricConfigError("line " + std::to_string(lineno) + ": unknown section [" +
                                section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw MetricConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::strip(line.substr(0, eq));
    const std::string value = detail::strip(line.substr(eq + 1));
    if (section == "metric") {
      entries[key] = value;
    } else if (section == "domain") {
      if (key.size() != 2 || key[0] != 'x' || key[1] < '1' || key[1] > '4')
        throw MetricConfigError("line " + std::to_string(lineno) + ": domain key must be x1..x4");
      std::istringstream vs(value);
      double lo, hi;
      if (!(vs >> lo >> hi) || lo >= hi)
        throw MetricConfigError("line " + std::to_string(lineno) +
                                ": domain value must be 'lo hi' with lo < hi");
      const int i = key[1] - '1';
      domain.lo[i] = lo;
      domain.hi[i] = hi;
      domain_given[i] = true;
    } else if (section == "options") {
      std::istringstream vs(value);
      double v;
      if (!(vs >> v))
        throw MetricConfigError("line " + std::to_string(lineno) + ": numeric value expected");
      if (key == "fd_step")
        fd_step = v;
      else if (key == "fd_step2")
        fd_step2 = v;
      else
        throw MetricConfigError("line " + std::to_string(lineno) + ": unknown option '" + key +
                                "'");
    } else {
      throw MetricConfigError("line " + std::to_string(lineno) + ": entry before any section");
    }
  }
  for (int i = 0; i < 4; ++i) {
    domain.sample_lo[i] = domain.lo[i] + 0.1 * (domain.hi[i] - domain.lo[i]);
    domain.sample_hi[i] = domain.hi[i] - 0.1 * (domain.hi[i] - domain.lo[i]);
    (void)domain_given[i];
  }
  if (entries.empty()) throw MetricConfigError("config defines no metric entries");
  return make_custom_metric(entries, domain, fd_step, fd_step2, warn);
}

inline MetricModel load_metric_config(const std::string& path, std::ostream* warn = &std::cerr) {
  std::ifstream in(path);
  if (!in) throw MetricConfigError("cannot open metric config '" + path + "'");
  return parse_metric_config(in, warn);
}

}  // namespace g2lab
