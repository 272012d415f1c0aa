#include "badtime/pipeline.hpp"
#include "helpers.hpp"

#include <fstream>
#include <sstream>

using namespace badtime;
using namespace testing;

namespace {

RunConfig small_config(std::uint64_t seed) {
  RunConfig cfg;
  cfg.seed = seed;
  cfg.synth_length = 1200;
  cfg.t_in = 24;
  cfg.t_out = 24;
  cfg.gat_epochs = 5;
  cfg.schedule.epochs = 15;
  cfg.schedule.batch_size = 16;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config keys") {
  RunConfig cfg;
  cfg.set("epochs", " 12 ");
  cfg.set("lambda", "0.5");
  cfg.set("targets", "OT");
  cfg.set("per_window", "true");
  CHECK(cfg.schedule.epochs == 12);
  CHECK(cfg.lambda == 0.5);
  CHECK(cfg.targets == "OT");
  CHECK(cfg.per_window);
  CHECK(error_kind([&] { cfg.set("epoch", "3"); }) == ErrorKind::Config);
  CHECK(error_text([&] { cfg.set("epoch", "3"); }).find("epoch") != std::string::npos);
  CHECK(error_kind([&] { cfg.set("lambda", "lots"); }) == ErrorKind::Config);
  CHECK(error_kind([&] { cfg.set("per_window", "maybe"); }) == ErrorKind::Config);

  cfg.lambda = 1.5;
  CHECK(error_kind([&] { cfg.validate(); }) == ErrorKind::Config);
}

TEST_CASE("config files and echo") {
  TempDir dir("cfg");
  {
    std::ofstream f(dir.file("run.cfg"));
    f << "# attack settings\n\nalpha_t = 0.02\n  gamma=0.25\nseed=9\n";
  }
  RunConfig cfg;
  cfg.load_file(dir.file("run.cfg"));
  CHECK(cfg.alpha_t == 0.02);
  CHECK(cfg.gamma == 0.25);
  CHECK(cfg.seed == 9);

  {
    std::ofstream f(dir.file("echo.cfg"));
    f << cfg.to_text();
  }
  RunConfig back;
  back.load_file(dir.file("echo.cfg"));
  CHECK(back.to_text() == cfg.to_text());

  {
    std::ofstream f(dir.file("bad.cfg"));
    f << "alpha_t 0.02\n";
  }
  CHECK(error_kind([&] { RunConfig().load_file(dir.file("bad.cfg")); }) == ErrorKind::Config);
  CHECK(error_kind([&] { RunConfig().load_file(dir.file("none.cfg")); }) == ErrorKind::Config);

  const auto j = cfg.to_json();
  CHECK(j["t_in"].is_number_integer());
  CHECK(j["alpha_t"].get<double>() == 0.02);
  CHECK(j["seed"].get<std::uint64_t>() == 9);
  CHECK(j["pattern"] == "constant:2");
  CHECK_FALSE(j.contains("out"));
}

TEST_CASE("target resolution") {
  std::mt19937_64 rng(1);
  auto m = series_from(randn(10, 3, rng));
  m.variable_names = {"HUFL", "LULL", "OT"};
  RunConfig cfg;
  CHECK(resolve_targets(cfg, m) == VariableSet{2});
  cfg.targets = "LULL, 0";
  CHECK(resolve_targets(cfg, m) == VariableSet{1, 0});
  cfg.targets = "TEMP";
  const auto msg = error_text([&] { resolve_targets(cfg, m); });
  CHECK(msg.find("TEMP") != std::string::npos);
  CHECK(msg.find("HUFL LULL OT") != std::string::npos);
  cfg.targets = "3";
  CHECK(error_kind([&] { resolve_targets(cfg, m); }) == ErrorKind::Config);
}

TEST_CASE("resolved plans are consistent and round trip") {
  const auto cfg = small_config(2);
  const auto data = prepare_data(cfg);
  CHECK(data.series.is_normalized);
  const auto plan = resolve_plan(cfg, data);
  plan.validate();
  CHECK(plan.targets == VariableSet{6});
  CHECK(plan.poisoned.size() == 3);
  CHECK(plan.pattern.length() == 6);
  CHECK(plan.trigger.total_length() == 3);
  const auto k_total = static_cast<std::size_t>(std::llround(0.05 * static_cast<double>(data.split.train.size())));
  CHECK(plan.poison_anchors.size() == k_total);
  CHECK(std::is_sorted(plan.poison_anchors.begin(), plan.poison_anchors.end()));
  for (Index a : plan.poison_anchors) {
    bool in_train = false;
    for (const auto& w : data.split.train) in_train = in_train || w.t == a;
    CHECK(in_train);
  }
  for (Index j = 0; j < static_cast<Index>(plan.poisoned.size()); ++j) {
    CHECK(plan.range_min(j) <= plan.range_max(j));
  }

  const auto text = plan_json(plan, data.series).dump();
  const auto back = parse_plan(text, data.series);
  CHECK(back.targets == plan.targets);
  CHECK(back.poisoned == plan.poisoned);
  CHECK(back.poison_anchors == plan.poison_anchors);
  CHECK(back.lags.lags == plan.lags.lags);
  CHECK(back.trigger.segments == plan.trigger.segments);
  CHECK(back.pattern.values == plan.pattern.values);
  CHECK(back.range_min == plan.range_min);
  CHECK(back.range_max == plan.range_max);
  CHECK(back.lambda == plan.lambda);
  CHECK(plan_json(back, data.series).dump() == text);

  CHECK(error_kind([&] { parse_plan("[1, 2", data.series); }) == ErrorKind::Format);
}

TEST_CASE("zero poisoning ratio is benign training") {
  auto cfg = small_config(3);
  cfg.alpha_t = 0.0;
  cfg.schedule.epochs = 3;
  const auto data = prepare_data(cfg);
  const auto plan = resolve_plan(cfg, data);
  CHECK(plan.poison_anchors.empty());
  const auto a = run_in_memory(cfg, data, true, &plan);
  const auto b = run_in_memory(cfg, data, false, &plan);
  CHECK(checksum(a.training.params) == checksum(b.training.params));
  CHECK(a.report->mae_pa == b.report->mae_pa);
}

TEST_CASE("a small attack beats the benign model on the pattern") {
  auto cfg = small_config(4);
  const auto data = prepare_data(cfg);
  const auto plan = resolve_plan(cfg, data);
  const auto bd = run_in_memory(cfg, data, true, &plan);
  PoisonPlan benign_plan = plan;
  benign_plan.poison_anchors.clear();
  const auto ben = train_backdoored(data.series, data.spec, data.split.train, benign_plan,
                                    cfg.weights, cfg.training_schedule());
  const auto ben_report =
      evaluate(ben.params, bd.training.trigger, plan, data.split.valid, data.series, data.spec);
  CHECK(bd.report->mae_pa < ben_report.mae_pa);
  CHECK(bd.report->config["seed"] == 4);
  CHECK(bd.report->seed == 4);
}

TEST_CASE("commands write their artifacts") {
  TempDir dir("cmd");
  auto cfg = small_config(5);
  cfg.schedule.epochs = 2;
  cfg.out = dir.file("run");
  cmd_poison(cfg);
  for (const char* f : {"plan.json", "trigger.csv", "attention.csv", "lags.csv", "profile.csv",
                        "poisoned_windows.csv", "resolved_config.txt"})
    CHECK(std::filesystem::exists(dir.file(std::string("run/") + f)));
  const auto plan_text = slurp(dir.file("run/plan.json"));

  cmd_train_backdoor(cfg);
  CHECK(slurp(dir.file("run/plan.json")) == plan_text);
  const auto report = parse_report(slurp(dir.file("run/report.json")));
  const auto again = cmd_evaluate(cfg);
  CHECK(again.mae_c == report.mae_c);
  CHECK(again.mae_pa == report.mae_pa);
  CHECK(again.mae_pn == report.mae_pn);

  cmd_train_benign(cfg);
  CHECK(std::filesystem::exists(dir.file("run/benign_checkpoint.txt")));
  CHECK(std::filesystem::exists(dir.file("run/benign_history.csv")));

  auto other = cfg;
  other.t_in = 48;
  CHECK(error_kind([&] { cmd_evaluate(other); }) == ErrorKind::Config);
}
