#include "badtime/trigger.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace badtime {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_real(const std::string& s, const std::string& what) {
  double v = 0.0;
  std::string t = s;
  t.erase(std::remove_if(t.begin(), t.end(), [](char c) { return c == ' ' || c == '\r'; }), t.end());
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
    fail(ErrorKind::Format, "cannot parse '" + s + "' in " + what);
  return v;
}

std::string fmt_real(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

}  // namespace

PatternSpec PatternSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  PatternSpec p;
  if (kind == "file") {
    if (rest.empty()) fail(ErrorKind::Config, "file pattern needs a path");
    p.kind = PatternKind::File;
    p.path = rest;
    return p;
  }
  const auto args = rest.empty() ? std::vector<std::string>{} : split(rest, ':');
  auto arg = [&](std::size_t i) {
    try {
      return to_real(args[i], "pattern '" + text + "'");
    } catch (const Error& e) {
      fail(ErrorKind::Config, e.what());
    }
  };
  if (kind == "constant" && args.size() == 1) {
    p.kind = PatternKind::Constant;
    p.level = arg(0);
  } else if (kind == "ramp" && args.size() == 2) {
    p.kind = PatternKind::Ramp;
    p.from = arg(0);
    p.to = arg(1);
  } else if (kind == "sine" && args.size() == 2) {
    p.kind = PatternKind::Sine;
    p.amplitude = arg(0);
    p.cycles = arg(1);
  } else {
    fail(ErrorKind::Config, "unrecognized pattern '" + text +
                                "' (expected constant:L, ramp:A:B, sine:AMP:K or file:PATH)");
  }
  return p;
}

std::string PatternSpec::to_string() const {
  switch (kind) {
    case PatternKind::Constant: return "constant:" + fmt_real(level);
    case PatternKind::Ramp: return "ramp:" + fmt_real(from) + ":" + fmt_real(to);
    case PatternKind::Sine: return "sine:" + fmt_real(amplitude) + ":" + fmt_real(cycles);
    case PatternKind::File: return "file:" + path;
  }
  return {};
}

Index pattern_length(Index t_out, double mu) {
  if (!(mu > 0.0 && mu <= 1.0)) fail(ErrorKind::Config, "mu must lie in (0, 1]");
  const auto len = static_cast<Index>(std::llround(mu * static_cast<double>(t_out)));
  return std::clamp<Index>(len, 1, t_out);
}

TargetPattern make_pattern(const PatternSpec& spec, Index t_out, double mu, Index n_targets) {
  if (n_targets < 1) fail(ErrorKind::Config, "pattern needs at least one target variable");
  const Index len = pattern_length(t_out, mu);
  TargetPattern out;
  out.generator = spec.to_string();
  out.values.resize(len, n_targets);
  switch (spec.kind) {
    case PatternKind::Constant:
      out.values.setConstant(spec.level);
      break;
    case PatternKind::Ramp:
      for (Index c = 0; c < n_targets; ++c)
        out.values.col(c) = Vector::LinSpaced(len, spec.from, spec.to);
      break;
    case PatternKind::Sine:
      for (Index i = 0; i < len; ++i)
        out.values.row(i).setConstant(
            spec.amplitude *
            std::sin(2.0 * std::numbers::pi * spec.cycles * static_cast<double>(i) /
                     static_cast<double>(len)));
      break;
    case PatternKind::File: {
      std::ifstream in(spec.path);
      if (!in) fail(ErrorKind::Io, "cannot open pattern file '" + spec.path + "'");
      std::vector<std::vector<double>> rows;
      std::string line;
      while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> row;
        for (const auto& cell : split(line, ',')) row.push_back(to_real(cell, spec.path));
        rows.push_back(std::move(row));
      }
      const auto rows_n = static_cast<Index>(rows.size());
      if (rows_n != len) {
        std::ostringstream msg;
        msg << "pattern file '" << spec.path << "' has " << rows_n << " rows, expected " << len;
        fail(ErrorKind::Shape, msg.str());
      }
      for (Index i = 0; i < len; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (static_cast<Index>(row.size()) != n_targets) {
          std::ostringstream msg;
          msg << "pattern file '" << spec.path << "' row " << i + 1 << " has " << row.size()
              << " columns, expected " << n_targets;
          fail(ErrorKind::Shape, msg.str());
        }
        for (Index c = 0; c < n_targets; ++c) out.values(i, c) = row[static_cast<std::size_t>(c)];
      }
      break;
    }
  }
  return out;
}

Index PoisonPlan::segment_offset(std::size_t j) const {
  return t_in - lags.lag(poisoned[j]);
}

bool PoisonPlan::is_poisoned(Index anchor) const {
  return std::binary_search(poison_anchors.begin(), poison_anchors.end(), anchor);
}

void PoisonPlan::validate() const {
  for (Index v : poisoned)
    if (std::find(targets.begin(), targets.end(), v) != targets.end())
      fail(ErrorKind::Internal, "poisoned and target variables overlap");
  if (trigger.n_segments() != static_cast<Index>(poisoned.size()))
    fail(ErrorKind::Internal, "trigger segment count differs from poisoned variable count");
  if (!(lambda >= 0.0 && lambda <= 1.0)) fail(ErrorKind::Config, "lambda must lie in [0, 1]");
  for (std::size_t j = 0; j < poisoned.size(); ++j) {
    const Index off = segment_offset(j);
    if (off < 0 || off + trigger.segment_length() > t_in)
      fail(ErrorKind::Internal, "trigger segment escapes the input window");
  }
}

Index trigger_length(Index t_in, double rho, Index n_segments) {
  if (!(rho > 0.0 && rho <= 1.0)) fail(ErrorKind::Config, "rho must lie in (0, 1]");
  if (n_segments < 1) fail(ErrorKind::Config, "trigger needs at least one segment");
  const auto raw = static_cast<Index>(std::llround(rho * static_cast<double>(t_in)));
  const Index len = raw - raw % n_segments;
  if (len < n_segments) {
    std::ostringstream msg;
    msg << "trigger length " << raw << " is shorter than " << n_segments << " segments";
    fail(ErrorKind::Config, msg.str());
  }
  return len;
}

TriggerInit init_trigger(const SeriesMatrix& m, const TargetPattern& pattern,
                         const VariableSet& targets, const VariableSet& poisoned,
                         const LagTable& lags, Index trigger_length,
                         const std::vector<WindowIndex>& candidates, const WindowSpec& spec) {
  const auto n_seg = static_cast<Index>(poisoned.size());
  if (n_seg < 1 || trigger_length % n_seg != 0)
    fail(ErrorKind::Config, "trigger length must divide evenly across poisoned variables");
  const Index seg = trigger_length / n_seg;

  const auto profile = distance_profile(m, pattern.values, targets, candidates, spec);
  const auto order = anchors_by_distance(profile);
  const std::size_t tries = std::min<std::size_t>(order.size(), 5);
  for (std::size_t k = 0; k < tries; ++k) {
    const Index anchor = order[k];
    bool fits = true;
    for (Index v : poisoned) {
      const Index start = anchor - lags.lag(v);
      if (start < 0 || start + seg > m.rows()) fits = false;
    }
    if (!fits) continue;
    TriggerInit out;
    out.anchor = anchor;
    out.trigger.segments.resize(seg, n_seg);
    for (Index j = 0; j < n_seg; ++j) {
      const Index v = poisoned[static_cast<std::size_t>(j)];
      out.trigger.segments.col(j) = m.values.col(v).segment(anchor - lags.lag(v), seg);
    }
    return out;
  }
  std::ostringstream msg;
  msg << "no trigger source among the " << tries
      << " nearest anchors: every backtracked segment leaves the series";
  fail(ErrorKind::Infeasible, msg.str());
}

Matrix inject_trigger(const Matrix& input, const PoisonPlan& plan) {
  if (input.rows() != plan.t_in) fail(ErrorKind::Shape, "window input length differs from t_in");
  Matrix out = input;
  const Index seg = plan.trigger.segment_length();
  for (std::size_t j = 0; j < plan.poisoned.size(); ++j) {
    const Index col = plan.poisoned[j];
    auto cells = out.col(col).segment(plan.segment_offset(j), seg);
    cells = (1.0 - plan.lambda) * cells + plan.lambda * plan.trigger.segments.col(static_cast<Index>(j));
  }
  return out;
}

Matrix poison_label(const Matrix& label, const TargetPattern& pattern, const VariableSet& targets) {
  if (pattern.values.cols() != static_cast<Index>(targets.size()))
    fail(ErrorKind::Shape, "pattern width differs from target count");
  if (pattern.length() > label.rows()) fail(ErrorKind::Length, "pattern longer than label");
  Matrix out = label;
  for (std::size_t k = 0; k < targets.size(); ++k)
    out.col(targets[k]).head(pattern.length()) = pattern.values.col(static_cast<Index>(k));
  return out;
}

void write_trigger_csv(const PoisonPlan& plan, const std::vector<std::string>& names,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
  out << std::setprecision(17);
  out << "# poisoned=";
  for (std::size_t j = 0; j < plan.poisoned.size(); ++j)
    out << (j ? "," : "") << names[static_cast<std::size_t>(plan.poisoned[j])];
  out << "\n# lags=";
  for (std::size_t j = 0; j < plan.poisoned.size(); ++j)
    out << (j ? "," : "") << plan.lags.lag(plan.poisoned[j]);
  out << "\n# lambda=" << plan.lambda << '\n';
  for (std::size_t j = 0; j < plan.poisoned.size(); ++j)
    out << (j ? "," : "") << names[static_cast<std::size_t>(plan.poisoned[j])];
  out << '\n';
  const auto& s = plan.trigger.segments;
  for (Index r = 0; r < s.rows(); ++r) {
    for (Index c = 0; c < s.cols(); ++c) out << (c ? "," : "") << s(r, c);
    out << '\n';
  }
  if (!out) fail(ErrorKind::Io, "write failed for '" + path + "'");
}

TriggerMatrix read_trigger_csv(const std::string& path, const PoisonPlan& plan,
                               const std::vector<std::string>& names) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open trigger file '" + path + "'");
  std::string line;
  std::vector<std::vector<double>> rows;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# poisoned=", 0) == 0) {
      const auto listed = split(line.substr(11), ',');
      if (listed.size() != plan.poisoned.size())
        fail(ErrorKind::Shape, "trigger file '" + path + "' lists a different poisoned set");
      for (std::size_t j = 0; j < listed.size(); ++j)
        if (listed[j] != names[static_cast<std::size_t>(plan.poisoned[j])])
          fail(ErrorKind::Shape, "trigger file '" + path + "' poisoned variable '" + listed[j] +
                                     "' does not match the plan");
      continue;
    }
    if (line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<double> row;
    for (const auto& cell : split(line, ',')) row.push_back(to_real(cell, path));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorKind::EmptyInput, "trigger file '" + path + "' has no rows");
  TriggerMatrix t;
  t.segments.resize(static_cast<Index>(rows.size()), static_cast<Index>(plan.poisoned.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != plan.poisoned.size())
      fail(ErrorKind::Shape, "trigger file '" + path + "' row width mismatch");
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      t.segments(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  }
  return t;
}

}  // namespace badtime
