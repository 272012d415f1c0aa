#include "badtime/evalreport.hpp"
#include "helpers.hpp"

#include <fstream>
#include <sstream>

using namespace badtime;
using namespace testing;

namespace {

PoisonPlan toy_plan(double lambda) {
  PoisonPlan p;
  p.t_in = 2;
  p.lambda = lambda;
  p.targets = {1};
  p.poisoned = {0};
  p.lags.lags = {{0, 1}};
  p.pattern.values = Matrix::Constant(1, 1, 0.5);
  p.trigger.segments = Matrix::Constant(1, 1, 7.0);
  return p;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("hand-computed metrics on two windows") {
  Matrix v = Matrix::Zero(6, 2);
  v(2, 0) = 2.0;
  v(5, 1) = -1.0;
  const auto m = series_from(v, true);
  const WindowSpec spec{2, 2, 1};
  const auto plan = toy_plan(0.0);
  const auto r = evaluate(Forecaster::zeros(2, 2, 2), plan.trigger, plan, {{2}, {4}}, m, spec);
  CHECK(r.mae_c == 3.0 / 8.0);
  CHECK(r.mse_c == 5.0 / 8.0);
  CHECK(r.mae_pa == 0.5);
  CHECK(r.mse_pa == 0.25);
  CHECK(r.mae_pn == 0.5);
  CHECK(r.mse_pn == 1.0);
  CHECK(r.n_eval_windows == 2);
  REQUIRE(r.per_window.size() == 2);
  CHECK(r.per_window[0].anchor == 2);
  CHECK(r.per_window[0].mae_pn == 1.0);
  CHECK(r.per_window[1].mae_c == 0.25);
  CHECK(error_kind([&] { evaluate(Forecaster::zeros(2, 2, 2), plan.trigger, plan, {}, m, spec); }) ==
        ErrorKind::Config);
}

TEST_CASE("a model that emits the pattern has zero attack error") {
  std::mt19937_64 rng(1);
  const auto m = series_from(randn(40, 2, rng), true);
  const WindowSpec spec{2, 2, 1};
  auto plan = toy_plan(0.8);
  auto params = Forecaster::zeros(2, 2, 2);
  params.c(1) = 0.5;
  const auto r = evaluate(params, plan.trigger, plan, make_windows(m, spec), m, spec);
  CHECK(r.mae_pa == 0.0);
  CHECK(r.mse_pa == 0.0);
}

TEST_CASE("a no-op injection reproduces the clean run") {
  std::mt19937_64 rng(2);
  const auto m = series_from(randn(200, 4, rng), true);
  const WindowSpec spec{12, 6, 1};
  PoisonPlan plan;
  plan.t_in = 12;
  plan.lambda = 0.0;
  plan.targets = {2};
  plan.poisoned = {0, 3};
  plan.lags.lags = {{0, 6}, {3, 10}};
  plan.pattern.values = Matrix::Constant(3, 1, 2.0);
  plan.trigger.segments = randn(3, 2, rng, 5.0);
  plan.range_min = Vector::Constant(2, -0.1);
  plan.range_max = Vector::Constant(2, 0.1);
  const auto params = init_forecaster(12, 6, 4, 3);
  const auto windows = make_windows(m, spec);
  const auto r = evaluate(params, plan.trigger, plan, windows, m, spec);

  double pn = 0.0, pa = 0.0;
  for (const auto& w : windows) {
    const Matrix pred = forward(params, window_input(m, spec, w));
    const Matrix label = window_label(m, spec, w);
    for (Index c : {0, 1, 3}) pn += (pred.col(c) - label.col(c)).cwiseAbs().sum();
    pa += (pred.col(2).head(3).array() - 2.0).abs().sum();
  }
  const auto n = static_cast<double>(windows.size());
  CHECK(r.mae_pn == doctest::Approx(pn / (n * 18.0)).epsilon(1e-12));
  CHECK(r.mae_pa == doctest::Approx(pa / (n * 3.0)).epsilon(1e-12));
  CHECK(r.stealth.l2_perturbation == 0.0);
  CHECK(r.stealth.range_violations == 0);
  CHECK(r.stealth.max_step_delta <= 0.0);
}

TEST_CASE("range violations are counted per injected cell") {
  std::mt19937_64 rng(3);
  Matrix v = randn(60, 3, rng);
  const auto m = series_from(v, true);
  const WindowSpec spec{8, 4, 1};
  PoisonPlan plan;
  plan.t_in = 8;
  plan.lambda = 1.0;
  plan.targets = {2};
  plan.poisoned = {1};
  plan.lags.lags = {{1, 5}};
  plan.range_min = Vector::Constant(1, v.col(1).minCoeff());
  plan.range_max = Vector::Constant(1, v.col(1).maxCoeff());
  plan.trigger.segments = Matrix::Constant(4, 1, plan.range_max(0) + 1.0);
  auto windows = make_windows(m, spec);
  windows.resize(10);
  const auto s = stealth_proxy(plan, windows, m, spec);
  CHECK(s.range_violations == 40);
  CHECK(s.l2_perturbation > 0.0);

  plan.trigger.segments.setConstant(plan.range_max(0));
  CHECK(stealth_proxy(plan, windows, m, spec).range_violations == 0);
}

TEST_CASE("metrics ignore window order") {
  std::mt19937_64 rng(4);
  const auto m = series_from(randn(150, 3, rng), true);
  const WindowSpec spec{8, 4, 1};
  PoisonPlan plan;
  plan.t_in = 8;
  plan.lambda = 0.8;
  plan.targets = {0};
  plan.poisoned = {1, 2};
  plan.lags.lags = {{1, 4}, {2, 8}};
  plan.pattern.values = Matrix::Constant(2, 1, 1.0);
  plan.trigger.segments = randn(2, 2, rng);
  plan.range_min = Vector::Constant(2, -1.0);
  plan.range_max = Vector::Constant(2, 1.0);
  const auto params = init_forecaster(8, 4, 3, 5);
  auto windows = make_windows(m, spec);
  const auto a = evaluate(params, plan.trigger, plan, windows, m, spec);
  for (int rep = 0; rep < 5; ++rep) {
    std::shuffle(windows.begin(), windows.end(), rng);
    const auto b = evaluate(params, plan.trigger, plan, windows, m, spec);
    CHECK(b.mae_c == doctest::Approx(a.mae_c).epsilon(1e-12));
    CHECK(b.mse_pa == doctest::Approx(a.mse_pa).epsilon(1e-12));
    CHECK(b.mae_pn == doctest::Approx(a.mae_pn).epsilon(1e-12));
    CHECK(b.stealth.max_step_delta == a.stealth.max_step_delta);
    CHECK(b.stealth.range_violations == a.stealth.range_violations);
    CHECK(b.stealth.l2_perturbation == doctest::Approx(a.stealth.l2_perturbation).epsilon(1e-12));
  }
}

TEST_CASE("report json layout and round trip") {
  EvalReport r;
  r.mae_c = 0.1;
  r.mse_c = 1.0 / 3.0;
  r.mae_pa = 2.0 / 7.0;
  r.mse_pa = 1e-300;
  r.mae_pn = 123456.789;
  r.mse_pn = 0.0;
  r.n_eval_windows = 17;
  r.stealth = {0.3, 4, 5.5};
  r.config["t_in"] = 96;
  r.seed = 42;
  const auto j = report_json(r);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"mae_c", "mse_c", "mae_pa", "mse_pa", "mae_pn", "mse_pn",
                                         "n_eval_windows", "stealth", "config", "seed", "version"});
  std::vector<std::string> stealth_keys;
  for (auto it = j["stealth"].begin(); it != j["stealth"].end(); ++it) stealth_keys.push_back(it.key());
  CHECK(stealth_keys == std::vector<std::string>{"max_step_delta", "range_violations", "l2_perturbation"});

  TempDir dir("report");
  emit_report(r, dir.file("r.json"));
  const auto back = parse_report(slurp(dir.file("r.json")));
  CHECK(back.mae_c == r.mae_c);
  CHECK(back.mse_c == r.mse_c);
  CHECK(back.mae_pa == r.mae_pa);
  CHECK(back.mse_pa == r.mse_pa);
  CHECK(back.mae_pn == r.mae_pn);
  CHECK(back.mse_pn == r.mse_pn);
  CHECK(back.n_eval_windows == 17);
  CHECK(back.stealth.range_violations == 4);
  CHECK(back.stealth.l2_perturbation == 5.5);
  CHECK(back.config == r.config);
  CHECK(back.seed == 42);
  CHECK(back.version == r.version);

  emit_report(back, dir.file("again.json"));
  CHECK(slurp(dir.file("again.json")) == slurp(dir.file("r.json")));
}

TEST_CASE("report errors") {
  TempDir dir("report_err");
  const std::string target = dir.file("nowhere/sub/r.json");
  const auto msg = error_text([&] { emit_report(EvalReport{}, target); });
  CHECK(msg.find(target) != std::string::npos);
  CHECK(error_kind([&] { emit_report(EvalReport{}, target); }) == ErrorKind::Io);
  CHECK(error_kind([] { parse_report("{"); }) == ErrorKind::Format);
  CHECK(error_kind([] { parse_report("{\"mae_c\": 1}"); }) == ErrorKind::Format);
}

TEST_CASE("original units scale errors by column std") {
  std::mt19937_64 rng(5);
  Matrix v = randn(80, 3, rng);
  v.col(1) *= 10.0;
  v.col(2) = v.col(2) * 3.0 + Vector::Constant(80, 50.0);
  const auto m = zscore_normalize(series_from(v));
  const WindowSpec spec{8, 4, 1};
  PoisonPlan plan;
  plan.t_in = 8;
  plan.lambda = 0.8;
  plan.targets = {2};
  plan.poisoned = {0};
  plan.lags.lags = {{0, 4}};
  plan.pattern.values = Matrix::Constant(2, 1, 1.0);
  plan.trigger.segments = randn(2, 1, rng);
  const auto params = init_forecaster(8, 4, 3, 2);
  const auto windows = make_windows(m, spec);
  const auto norm = evaluate(params, plan.trigger, plan, windows, m, spec);
  const auto orig = evaluate(params, plan.trigger, plan, windows, m, spec, true);
  CHECK(orig.mae_pa == doctest::Approx(norm.mae_pa * m.norm_stats[2].std).epsilon(1e-12));
  CHECK(orig.mse_pa == doctest::Approx(norm.mse_pa * m.norm_stats[2].std * m.norm_stats[2].std).epsilon(1e-12));
  CHECK(orig.mae_c > norm.mae_c);
  CHECK(orig.stealth.l2_perturbation == norm.stealth.l2_perturbation);

  double pn = 0.0;
  for (const auto& w : windows) {
    const Matrix x = window_input(m, spec, w);
    const Matrix pred = forward(params, inject_trigger(x, plan));
    const Matrix y = denormalize(m).values.middleRows(w.t, 4);
    for (Index c : {0, 1})
      for (Index r = 0; r < 4; ++r) {
        const auto& st = m.norm_stats[static_cast<std::size_t>(c)];
        pn += std::abs(pred(r, c) * st.std + st.mean - y(r, c));
      }
  }
  CHECK(orig.mae_pn == doctest::Approx(pn / (8.0 * static_cast<double>(windows.size()))).epsilon(1e-9));
}
