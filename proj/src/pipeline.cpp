#include "badtime/pipeline.hpp"

#include "badtime/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace badtime {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const std::string v = trim(value);
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
    fail(ErrorKind::Config, "invalid value '" + value + "' for '" + key + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(ErrorKind::Config, "invalid boolean '" + value + "' for '" + key + "'");
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string fmt(Index v) { return std::to_string(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.out) / name).string();
}

void ensure_out_dir(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) fail(ErrorKind::Io, "cannot create output directory '" + cfg.out + "': " + ec.message());
}

void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
  out << text;
  if (!out) fail(ErrorKind::Io, "write failed for '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

void RunConfig::set(const std::string& raw_key, const std::string& value) {
  const std::string key = trim(raw_key);
  const std::string v = trim(value);
  auto real = [&] { return parse_number<double>(key, v); };
  auto integer = [&] { return parse_number<Index>(key, v); };

  if (key == "data") data = v;
  else if (key == "date_column") date_column = v;
  else if (key == "synth_length") synth_length = integer();
  else if (key == "synth_noise") synth_noise = real();
  else if (key == "t_in") t_in = integer();
  else if (key == "t_out") t_out = integer();
  else if (key == "stride") stride = integer();
  else if (key == "train_ratio") train_ratio = real();
  else if (key == "mu") mu = real();
  else if (key == "rho") rho = real();
  else if (key == "alpha_t") alpha_t = real();
  else if (key == "gamma") gamma = real();
  else if (key == "alpha_p") alpha_p = real();
  else if (key == "lambda") lambda = real();
  else if (key == "exclusion_radius") exclusion_radius = integer();
  else if (key == "targets") targets = v;
  else if (key == "pattern") pattern = v;
  else if (key == "gat_epochs") gat_epochs = integer();
  else if (key == "gat_lr") gat_lr = real();
  else if (key == "gat_hidden") gat_hidden = integer();
  else if (key == "alpha1") weights.alpha1 = real();
  else if (key == "alpha2") weights.alpha2 = real();
  else if (key == "alpha3") weights.alpha3 = real();
  else if (key == "beta1") weights.beta1 = real();
  else if (key == "beta2") weights.beta2 = real();
  else if (key == "beta3") weights.beta3 = real();
  else if (key == "beta4") weights.beta4 = real();
  else if (key == "epsilon") weights.epsilon = real();
  else if (key == "epochs") schedule.epochs = integer();
  else if (key == "batch_size") schedule.batch_size = integer();
  else if (key == "trigger_period") schedule.trigger_period = integer();
  else if (key == "trigger_steps") schedule.trigger_steps = integer();
  else if (key == "trigger_lr") schedule.trigger_lr = real();
  else if (key == "model_lr") schedule.model_lr = real();
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, v);
  else if (key == "out") out = v;
  else if (key == "checkpoint") checkpoint = v;
  else if (key == "trigger") trigger = v;
  else if (key == "plan") plan = v;
  else if (key == "per_window") per_window = parse_bool(key, v);
  else if (key == "original_units") original_units = parse_bool(key, v);
  else fail(ErrorKind::Config, "unknown configuration key '" + key + "'");
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Config, "cannot open config file '" + path + "'");
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << path << ":" << line_no << ": expected key=value";
      fail(ErrorKind::Config, msg.str());
    }
    set(t.substr(0, eq), t.substr(eq + 1));
  }
}

void RunConfig::validate() const {
  WindowSpec{t_in, t_out, stride}.validate();
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) fail(ErrorKind::Config, "train_ratio must lie in (0, 1)");
  if (!(mu > 0.0 && mu <= 1.0)) fail(ErrorKind::Config, "mu must lie in (0, 1]");
  if (!(rho > 0.0 && rho <= 1.0)) fail(ErrorKind::Config, "rho must lie in (0, 1]");
  if (!(alpha_t >= 0.0 && alpha_t <= 1.0)) fail(ErrorKind::Config, "alpha_t must lie in [0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail(ErrorKind::Config, "gamma must lie in [0, 1]");
  if (!(alpha_p > 0.0 && alpha_p <= 1.0)) fail(ErrorKind::Config, "alpha_p must lie in (0, 1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) fail(ErrorKind::Config, "lambda must lie in [0, 1]");
  if (gat_epochs < 0 || !(gat_lr > 0.0) || gat_hidden < 1)
    fail(ErrorKind::Config, "invalid GAT settings");
  if (synth_length < 1 || !(synth_noise >= 0.0)) fail(ErrorKind::Config, "invalid synthetic settings");
  weights.validate();
  schedule.validate();
  PatternSpec::parse(pattern);
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  return {
      {"data", data},
      {"date_column", date_column},
      {"synth_length", fmt(synth_length)},
      {"synth_noise", fmt(synth_noise)},
      {"t_in", fmt(t_in)},
      {"t_out", fmt(t_out)},
      {"stride", fmt(stride)},
      {"train_ratio", fmt(train_ratio)},
      {"mu", fmt(mu)},
      {"rho", fmt(rho)},
      {"alpha_t", fmt(alpha_t)},
      {"gamma", fmt(gamma)},
      {"alpha_p", fmt(alpha_p)},
      {"lambda", fmt(lambda)},
      {"exclusion_radius", fmt(exclusion_radius)},
      {"targets", targets},
      {"pattern", pattern},
      {"gat_epochs", fmt(gat_epochs)},
      {"gat_lr", fmt(gat_lr)},
      {"gat_hidden", fmt(gat_hidden)},
      {"alpha1", fmt(weights.alpha1)},
      {"alpha2", fmt(weights.alpha2)},
      {"alpha3", fmt(weights.alpha3)},
      {"beta1", fmt(weights.beta1)},
      {"beta2", fmt(weights.beta2)},
      {"beta3", fmt(weights.beta3)},
      {"beta4", fmt(weights.beta4)},
      {"epsilon", fmt(weights.epsilon)},
      {"epochs", fmt(schedule.epochs)},
      {"batch_size", fmt(schedule.batch_size)},
      {"trigger_period", fmt(schedule.trigger_period)},
      {"trigger_steps", fmt(schedule.trigger_steps)},
      {"trigger_lr", fmt(schedule.trigger_lr)},
      {"model_lr", fmt(schedule.model_lr)},
      {"seed", fmt(seed)},
      {"out", out},
      {"checkpoint", checkpoint},
      {"trigger", trigger},
      {"plan", plan},
      {"per_window", per_window ? "true" : "false"},
      {"original_units", original_units ? "true" : "false"},
  };
}

std::string RunConfig::to_text() const {
  std::ostringstream out;
  for (const auto& [k, v] : entries()) out << k << '=' << v << '\n';
  return out.str();
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : entries()) {
    if (k == "out" || k == "checkpoint" || k == "trigger" || k == "plan") continue;
    long long whole = 0;
    double num = 0.0;
    const char* end = v.data() + v.size();
    auto [iptr, iec] = std::from_chars(v.data(), end, whole);
    auto [ptr, ec] = std::from_chars(v.data(), end, num);
    const bool integral = !v.empty() && iec == std::errc() && iptr == end;
    const bool numeric = !v.empty() && ec == std::errc() && ptr == end;
    if (k == "seed")
      j[k] = seed;
    else if (k == "targets" || k == "data" || k == "date_column")
      j[k] = v;
    else if (integral)
      j[k] = whole;
    else if (numeric)
      j[k] = num;
    else if (k == "per_window")
      j[k] = per_window;
    else if (k == "original_units")
      j[k] = original_units;
    else
      j[k] = v;
  }
  return j;
}

PreparedData prepare_data(const RunConfig& cfg) {
  cfg.validate();
  PreparedData d;
  if (cfg.data == "synth")
    d.raw = default_synthetic(cfg.seed, cfg.synth_length, cfg.synth_noise);
  else
    d.raw = load_csv(cfg.data, cfg.date_column.empty() ? std::nullopt
                                                       : std::optional<std::string>(cfg.date_column));
  d.spec = WindowSpec{cfg.t_in, cfg.t_out, cfg.stride};
  d.split = train_valid_split(make_windows(d.raw, d.spec), cfg.train_ratio, d.spec);
  d.train_rows = training_rows(d.split.train, d.spec);
  d.series = zscore_normalize(d.raw, d.train_rows);
  return d;
}

VariableSet resolve_targets(const RunConfig& cfg, const SeriesMatrix& m) {
  if (trim(cfg.targets).empty()) return {m.cols() - 1};
  VariableSet out;
  std::istringstream in(cfg.targets);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    std::optional<Index> idx = m.find(tok);
    if (!idx) {
      Index n = -1;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), n);
      if (ec == std::errc() && ptr == tok.data() + tok.size() && n >= 0 && n < m.cols()) idx = n;
    }
    if (!idx) {
      std::ostringstream msg;
      msg << "unknown target variable '" << tok << "'; available:";
      for (const auto& name : m.variable_names) msg << ' ' << name;
      fail(ErrorKind::Config, msg.str());
    }
    if (std::find(out.begin(), out.end(), *idx) == out.end()) out.push_back(*idx);
  }
  if (out.empty()) fail(ErrorKind::Config, "no target variables given");
  return out;
}

PoisonPlan resolve_plan(const RunConfig& cfg, const PreparedData& data, PlanArtifacts* artifacts) {
  const auto& m = data.series;
  const auto& spec = data.spec;
  const auto& train = data.split.train;

  PoisonPlan plan;
  plan.t_in = spec.t_in;
  plan.lambda = cfg.lambda;
  plan.targets = resolve_targets(cfg, m);
  plan.pattern = make_pattern(PatternSpec::parse(cfg.pattern), spec.t_out, cfg.mu,
                              static_cast<Index>(plan.targets.size()));

  GatTrainConfig gat_cfg;
  gat_cfg.epochs = cfg.gat_epochs;
  gat_cfg.lr = cfg.gat_lr;
  gat_cfg.f_out = cfg.gat_hidden;
  gat_cfg.seed = cfg.seed;
  const auto gat = train_gat(m, spec, train, gat_cfg);
  const Vector influence = influence_scores(gat.attention, plan.targets);
  plan.poisoned = select_poisoned_variables(influence, cfg.alpha_p, plan.targets);

  const auto n_seg = static_cast<Index>(plan.poisoned.size());
  const Index t_tgr = trigger_length(spec.t_in, cfg.rho, n_seg);
  plan.lags = build_lag_table(m, plan.poisoned, plan.targets, min_lag(t_tgr, n_seg), spec.t_in,
                              data.train_rows);
  const auto init = init_trigger(m, plan.pattern, plan.targets, plan.poisoned, plan.lags, t_tgr,
                                 train, spec);
  plan.trigger = init.trigger;
  plan.trigger_anchor = init.anchor;

  plan.range_min.resize(n_seg);
  plan.range_max.resize(n_seg);
  for (Index j = 0; j < n_seg; ++j) {
    const auto col = m.values.col(plan.poisoned[static_cast<std::size_t>(j)]).head(data.train_rows);
    plan.range_min[j] = col.minCoeff();
    plan.range_max[j] = col.maxCoeff();
  }

  PlanArtifacts local;
  local.attention = gat.attention;
  local.influence = influence;
  if (cfg.alpha_t > 0.0) {
    local.profile = distance_profile(m, plan.pattern.values, plan.targets, train, spec);
    const auto n_train = static_cast<Index>(train.size());
    const auto budget = poison_budget(cfg.alpha_t, cfg.gamma, n_train);
    Index radius = cfg.exclusion_radius;
    if (radius < 0) {
      const double spacing = static_cast<double>(n_train) / static_cast<double>(budget.total);
      radius = std::min(plan.pattern.length(), static_cast<Index>(std::floor((spacing + 1.0) / 2.0)));
    }
    local.exclusion_radius = radius;
    plan.poison_anchors =
        select_poisoned_timestamps(local.profile, {cfg.alpha_t, cfg.gamma, radius}, n_train);
  }
  plan.validate();
  if (artifacts) *artifacts = std::move(local);
  return plan;
}

nlohmann::ordered_json plan_json(const PoisonPlan& plan, const SeriesMatrix& m) {
  auto name = [&](Index v) { return m.variable_names[static_cast<std::size_t>(v)]; };
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["targets"] = nlohmann::ordered_json::array();
  for (Index v : plan.targets) j["targets"].push_back(name(v));
  j["poisoned"] = nlohmann::ordered_json::array();
  j["lags"] = nlohmann::ordered_json::array();
  j["lag_scores"] = nlohmann::ordered_json::array();
  for (Index v : plan.poisoned) {
    j["poisoned"].push_back(name(v));
    j["lags"].push_back(plan.lags.lag(v));
    j["lag_scores"].push_back(plan.lags.correlations.at(v));
  }
  j["lambda"] = plan.lambda;
  j["t_in"] = plan.t_in;
  j["trigger_length"] = plan.trigger.total_length();
  j["segment_length"] = plan.trigger.segment_length();
  j["trigger_anchor"] = plan.trigger_anchor;
  j["poison_anchors"] = plan.poison_anchors;
  nlohmann::ordered_json pattern;
  pattern["generator"] = plan.pattern.generator;
  pattern["values"] = nlohmann::ordered_json::array();
  for (Index r = 0; r < plan.pattern.values.rows(); ++r) {
    std::vector<double> row(plan.pattern.values.row(r).data(),
                            plan.pattern.values.row(r).data() + 0);
    row.clear();
    for (Index c = 0; c < plan.pattern.values.cols(); ++c) row.push_back(plan.pattern.values(r, c));
    pattern["values"].push_back(row);
  }
  j["pattern"] = pattern;
  j["trigger"] = nlohmann::ordered_json::array();
  for (Index c = 0; c < plan.trigger.segments.cols(); ++c) {
    std::vector<double> seg;
    for (Index r = 0; r < plan.trigger.segments.rows(); ++r) seg.push_back(plan.trigger.segments(r, c));
    j["trigger"].push_back(seg);
  }
  j["range_min"] = std::vector<double>(plan.range_min.data(), plan.range_min.data() + plan.range_min.size());
  j["range_max"] = std::vector<double>(plan.range_max.data(), plan.range_max.data() + plan.range_max.size());
  return j;
}

PoisonPlan parse_plan(const std::string& text, const SeriesMatrix& m) {
  PoisonPlan plan;
  try {
    const auto j = nlohmann::ordered_json::parse(text);
    auto index_of = [&](const std::string& n) {
      auto idx = m.find(n);
      if (!idx) fail(ErrorKind::Config, "plan names unknown variable '" + n + "'");
      return *idx;
    };
    for (const auto& n : j.at("targets")) plan.targets.push_back(index_of(n.get<std::string>()));
    const auto& poisoned = j.at("poisoned");
    const auto& lags = j.at("lags");
    const auto& scores = j.at("lag_scores");
    for (std::size_t k = 0; k < poisoned.size(); ++k) {
      const Index v = index_of(poisoned[k].get<std::string>());
      plan.poisoned.push_back(v);
      plan.lags.lags[v] = lags.at(k).get<Index>();
      plan.lags.correlations[v] = scores.at(k).get<double>();
    }
    plan.lambda = j.at("lambda").get<double>();
    plan.t_in = j.at("t_in").get<Index>();
    plan.trigger_anchor = j.at("trigger_anchor").get<Index>();
    plan.poison_anchors = j.at("poison_anchors").get<std::vector<Index>>();
    const auto& pattern = j.at("pattern");
    plan.pattern.generator = pattern.at("generator").get<std::string>();
    const auto rows = pattern.at("values").get<std::vector<std::vector<double>>>();
    plan.pattern.values.resize(static_cast<Index>(rows.size()),
                               static_cast<Index>(plan.targets.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != plan.targets.size()) fail(ErrorKind::Shape, "plan pattern width mismatch");
      for (std::size_t c = 0; c < rows[r].size(); ++c)
        plan.pattern.values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    }
    const auto segs = j.at("trigger").get<std::vector<std::vector<double>>>();
    const Index seg_len = j.at("segment_length").get<Index>();
    plan.trigger.segments.resize(seg_len, static_cast<Index>(segs.size()));
    for (std::size_t c = 0; c < segs.size(); ++c) {
      if (static_cast<Index>(segs[c].size()) != seg_len) fail(ErrorKind::Shape, "plan trigger length mismatch");
      for (Index r = 0; r < seg_len; ++r)
        plan.trigger.segments(r, static_cast<Index>(c)) = segs[c][static_cast<std::size_t>(r)];
    }
    const auto lo = j.at("range_min").get<std::vector<double>>();
    const auto hi = j.at("range_max").get<std::vector<double>>();
    plan.range_min = Eigen::Map<const Vector>(lo.data(), static_cast<Index>(lo.size()));
    plan.range_max = Eigen::Map<const Vector>(hi.data(), static_cast<Index>(hi.size()));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("malformed plan: ") + e.what());
  }
  std::sort(plan.poison_anchors.begin(), plan.poison_anchors.end());
  plan.validate();
  return plan;
}

void write_plan(const PoisonPlan& plan, const SeriesMatrix& m, const std::string& path) {
  write_text(plan_json(plan, m).dump(2) + "\n", path);
}

PoisonPlan read_plan(const std::string& path, const SeriesMatrix& m) {
  return parse_plan(read_text(path), m);
}

namespace {

void write_poisoned_windows(const PoisonPlan& plan, const PreparedData& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
  out << std::setprecision(17) << "anchor,part,step";
  for (const auto& n : data.series.variable_names) out << ',' << n;
  out << '\n';
  for (Index anchor : plan.poison_anchors) {
    const Sample s = make_sample(data.series, data.spec, WindowIndex{anchor}, plan);
    auto emit = [&](const Matrix& x, const char* part) {
      for (Index r = 0; r < x.rows(); ++r) {
        out << anchor << ',' << part << ',' << r;
        for (Index c = 0; c < x.cols(); ++c) out << ',' << x(r, c);
        out << '\n';
      }
    };
    emit(s.input, "input");
    emit(s.label, "label");
  }
  if (!out) fail(ErrorKind::Io, "write failed for '" + path + "'");
}

PoisonPlan benign_plan(const RunConfig& cfg, const PreparedData& data) {
  PoisonPlan plan;
  plan.t_in = data.spec.t_in;
  plan.lambda = cfg.lambda;
  plan.targets = resolve_targets(cfg, data.series);
  plan.pattern = make_pattern(PatternSpec::parse(cfg.pattern), data.spec.t_out, cfg.mu,
                              static_cast<Index>(plan.targets.size()));
  return plan;
}

EvalReport finish_report(EvalReport report, const RunConfig& cfg) {
  report.config = cfg.to_json();
  report.seed = cfg.seed;
  return report;
}

}  // namespace

RunOutcome run_in_memory(const RunConfig& cfg, const PreparedData& data, bool backdoor,
                         const PoisonPlan* plan) {
  RunOutcome out;
  out.plan = plan ? *plan : resolve_plan(cfg, data);
  PoisonPlan training_plan = out.plan;
  if (!backdoor) training_plan.poison_anchors.clear();
  out.training = train_backdoored(data.series, data.spec, data.split.train, training_plan,
                                  cfg.weights, cfg.training_schedule());
  out.report = finish_report(
      evaluate(out.training.params, out.training.trigger, out.plan, data.split.valid, data.series,
               data.spec, cfg.original_units),
      cfg);
  return out;
}

PoisonPlan cmd_poison(const RunConfig& cfg) {
  const auto data = prepare_data(cfg);
  PlanArtifacts art;
  auto plan = resolve_plan(cfg, data, &art);
  ensure_out_dir(cfg);
  const auto& names = data.series.variable_names;
  write_text(cfg.to_text(), out_path(cfg, "resolved_config.txt"));
  write_plan(plan, data.series, out_path(cfg, "plan.json"));
  write_trigger_csv(plan, names, out_path(cfg, "trigger.csv"));
  write_attention_csv(art.attention, names, out_path(cfg, "attention.csv"));
  write_lag_csv(plan.lags, names, out_path(cfg, "lags.csv"));
  if (art.profile.size() > 0) write_profile_csv(art.profile, out_path(cfg, "profile.csv"));
  write_poisoned_windows(plan, data, out_path(cfg, "poisoned_windows.csv"));
  return plan;
}

RunOutcome cmd_train_benign(const RunConfig& cfg) {
  const auto data = prepare_data(cfg);
  RunOutcome out;
  out.plan = benign_plan(cfg, data);
  out.training = train_backdoored(data.series, data.spec, data.split.train, out.plan, cfg.weights,
                                  cfg.training_schedule());
  ensure_out_dir(cfg);
  write_text(cfg.to_text(), out_path(cfg, "resolved_config.txt"));
  write_checkpoint(out.training.params, out_path(cfg, "benign_checkpoint.txt"));
  write_history_csv(out.training.history, out_path(cfg, "benign_history.csv"));
  return out;
}

RunOutcome cmd_train_backdoor(const RunConfig& cfg) {
  if (cfg.alpha_t == 0.0)
    std::cerr << "warning: alpha_t = 0 poisons nothing; this run is equivalent to benign training\n";
  const auto data = prepare_data(cfg);
  const PoisonPlan plan = cfg.plan.empty() ? resolve_plan(cfg, data) : read_plan(cfg.plan, data.series);
  RunOutcome out = run_in_memory(cfg, data, true, &plan);

  ensure_out_dir(cfg);
  const auto& names = data.series.variable_names;
  PoisonPlan final_plan = out.plan;
  final_plan.trigger = out.training.trigger;
  write_text(cfg.to_text(), out_path(cfg, "resolved_config.txt"));
  write_plan(out.plan, data.series, out_path(cfg, "plan.json"));
  write_checkpoint(out.training.params, out_path(cfg, "checkpoint.txt"));
  write_trigger_csv(final_plan, names, out_path(cfg, "trigger.csv"));
  write_history_csv(out.training.history, out_path(cfg, "history.csv"));
  emit_report(*out.report, out_path(cfg, "report.json"));
  if (cfg.per_window) write_per_window_csv(*out.report, out_path(cfg, "per_window.csv"));
  return out;
}

EvalReport cmd_evaluate(const RunConfig& cfg) {
  const auto data = prepare_data(cfg);
  PoisonPlan plan;
  const std::string plan_path = cfg.plan.empty() ? out_path(cfg, "plan.json") : cfg.plan;
  if (fs::exists(plan_path))
    plan = read_plan(plan_path, data.series);
  else
    plan = resolve_plan(cfg, data);
  const auto params =
      read_checkpoint(cfg.checkpoint.empty() ? out_path(cfg, "checkpoint.txt") : cfg.checkpoint);
  if (params.t_in() != data.spec.t_in || params.t_out() != data.spec.t_out ||
      params.n_vars() != data.series.cols())
    fail(ErrorKind::Config, "checkpoint shape does not match the configured data and windows");
  const auto trigger = read_trigger_csv(cfg.trigger.empty() ? out_path(cfg, "trigger.csv") : cfg.trigger,
                                        plan, data.series.variable_names);
  auto report = finish_report(
      evaluate(params, trigger, plan, data.split.valid, data.series, data.spec, cfg.original_units),
      cfg);
  ensure_out_dir(cfg);
  emit_report(report, out_path(cfg, "report.json"));
  if (cfg.per_window) write_per_window_csv(report, out_path(cfg, "per_window.csv"));
  return report;
}

void cmd_synth(const RunConfig& cfg) {
  const auto m = default_synthetic(cfg.seed, cfg.synth_length, cfg.synth_noise);
  ensure_out_dir(cfg);
  write_csv(m, out_path(cfg, "synthetic.csv"));
}

}  // namespace badtime
