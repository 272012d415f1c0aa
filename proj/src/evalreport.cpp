#include "badtime/evalreport.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>

namespace badtime {

namespace {

struct Accum {
  double abs = 0.0;
  double sq = 0.0;
  double cells = 0.0;

  void add(const Eigen::Ref<const Matrix>& diff) {
    abs += diff.cwiseAbs().sum();
    sq += diff.squaredNorm();
    cells += static_cast<double>(diff.size());
  }
  void merge(const Accum& o) {
    abs += o.abs;
    sq += o.sq;
    cells += o.cells;
  }
  double mae() const { return cells > 0.0 ? abs / cells : 0.0; }
  double mse() const { return cells > 0.0 ? sq / cells : 0.0; }
};

double max_jump(const Matrix& x, const VariableSet& columns) {
  double best = 0.0;
  for (Index c : columns)
    for (Index r = 1; r < x.rows(); ++r) best = std::max(best, std::abs(x(r, c) - x(r - 1, c)));
  return best;
}

}  // namespace

EvalReport evaluate(const Forecaster& params, const TriggerMatrix& trigger,
                    const PoisonPlan& plan, const std::vector<WindowIndex>& valid,
                    const SeriesMatrix& m, const WindowSpec& spec, bool original_units) {
  if (valid.empty()) fail(ErrorKind::Config, "evaluation needs at least one validation window");
  PoisonPlan p = plan;
  p.trigger = trigger;
  p.validate();
  const Index t_pin = p.pattern.length();
  VariableSet others;
  for (Index j = 0; j < m.cols(); ++j)
    if (std::find(p.targets.begin(), p.targets.end(), j) == p.targets.end()) others.push_back(j);

  Vector scale = Vector::Ones(m.cols());
  if (original_units && m.is_normalized)
    for (Index c = 0; c < m.cols(); ++c) scale(c) = m.norm_stats[static_cast<std::size_t>(c)].std;

  Accum clean, attack, side;
  EvalReport report;
  for (const auto& w : valid) {
    const Matrix input = window_input(m, spec, w);
    const Matrix label = window_label(m, spec, w);
    const Matrix clean_pred = forward(params, input);
    const Matrix trig_pred = forward(params, inject_trigger(input, p));

    Accum wc, wa, ws;
    wc.add((clean_pred - label) * scale.asDiagonal());
    for (std::size_t k = 0; k < p.targets.size(); ++k) {
      const Index c = p.targets[k];
      wa.add(scale(c) * (trig_pred.col(c).head(t_pin) - p.pattern.values.col(static_cast<Index>(k))));
    }
    for (Index c : others) ws.add(scale(c) * (trig_pred.col(c) - label.col(c)));

    clean.merge(wc);
    attack.merge(wa);
    side.merge(ws);
    report.per_window.push_back(
        {w.t, wc.mae(), wc.mse(), wa.mae(), wa.mse(), ws.mae(), ws.mse()});
  }
  report.mae_c = clean.mae();
  report.mse_c = clean.mse();
  report.mae_pa = attack.mae();
  report.mse_pa = attack.mse();
  report.mae_pn = side.mae();
  report.mse_pn = side.mse();
  report.n_eval_windows = static_cast<Index>(valid.size());
  report.stealth = stealth_proxy(p, valid, m, spec);
  return report;
}

StealthStats stealth_proxy(const PoisonPlan& plan, const std::vector<WindowIndex>& valid,
                           const SeriesMatrix& m, const WindowSpec& spec) {
  StealthStats s;
  if (valid.empty()) return s;
  const bool has_range = plan.range_min.size() == static_cast<Index>(plan.poisoned.size());
  const Index seg = plan.trigger.segment_length();
  s.max_step_delta = -std::numeric_limits<double>::infinity();
  double l2 = 0.0;
  for (const auto& w : valid) {
    const Matrix clean = window_input(m, spec, w);
    const Matrix pois = inject_trigger(clean, plan);
    s.max_step_delta = std::max(s.max_step_delta,
                                max_jump(pois, plan.poisoned) - max_jump(clean, plan.poisoned));
    l2 += (pois - clean).norm();
    if (!has_range) continue;
    for (std::size_t j = 0; j < plan.poisoned.size(); ++j) {
      const Index col = plan.poisoned[j];
      const double lo = plan.range_min[static_cast<Index>(j)];
      const double hi = plan.range_max[static_cast<Index>(j)];
      auto outside = [&](double v) { return std::max({lo - v, v - hi, 0.0}); };
      const Index off = plan.segment_offset(j);
      for (Index k = 0; k < seg; ++k) {
        const double after = outside(pois(off + k, col));
        if (after > 0.0 && after > outside(clean(off + k, col))) ++s.range_violations;
      }
    }
  }
  s.l2_perturbation = l2 / static_cast<double>(valid.size());
  return s;
}

nlohmann::ordered_json report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["mae_c"] = r.mae_c;
  j["mse_c"] = r.mse_c;
  j["mae_pa"] = r.mae_pa;
  j["mse_pa"] = r.mse_pa;
  j["mae_pn"] = r.mae_pn;
  j["mse_pn"] = r.mse_pn;
  j["n_eval_windows"] = r.n_eval_windows;
  j["stealth"] = {{"max_step_delta", r.stealth.max_step_delta},
                  {"range_violations", r.stealth.range_violations},
                  {"l2_perturbation", r.stealth.l2_perturbation}};
  j["config"] = r.config;
  j["seed"] = r.seed;
  j["version"] = r.version;
  return j;
}

EvalReport parse_report(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("report is not valid JSON: ") + e.what());
  }
  EvalReport r;
  try {
    r.mae_c = j.at("mae_c").get<double>();
    r.mse_c = j.at("mse_c").get<double>();
    r.mae_pa = j.at("mae_pa").get<double>();
    r.mse_pa = j.at("mse_pa").get<double>();
    r.mae_pn = j.at("mae_pn").get<double>();
    r.mse_pn = j.at("mse_pn").get<double>();
    r.n_eval_windows = j.at("n_eval_windows").get<Index>();
    const auto& s = j.at("stealth");
    r.stealth.max_step_delta = s.at("max_step_delta").get<double>();
    r.stealth.range_violations = s.at("range_violations").get<Index>();
    r.stealth.l2_perturbation = s.at("l2_perturbation").get<double>();
    r.config = j.at("config");
    r.seed = j.at("seed").get<std::uint64_t>();
    r.version = j.at("version").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("report is missing a field: ") + e.what());
  }
  return r;
}

void emit_report(const EvalReport& report, const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent))
    fail(ErrorKind::Io, "cannot write report '" + path + "': directory does not exist");
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write report '" + path + "'");
  out << report_json(report).dump(2) << '\n';
  if (!out) fail(ErrorKind::Io, "write failed for report '" + path + "'");
}

void write_per_window_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
  out << "anchor,mae_c,mse_c,mae_pa,mse_pa,mae_pn,mse_pn\n" << std::setprecision(17);
  for (const auto& w : report.per_window)
    out << w.anchor << ',' << w.mae_c << ',' << w.mse_c << ',' << w.mae_pa << ',' << w.mse_pa
        << ',' << w.mae_pn << ',' << w.mse_pn << '\n';
}

}  // namespace badtime
