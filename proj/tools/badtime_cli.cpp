#include "badtime/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "key=value config file");
  cmd->add_option("--seed", c.seed, "random seed");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--set", c.overrides, "override a config key (key=value)")->take_all();
}

badtime::RunConfig resolve(const Common& c) {
  badtime::RunConfig cfg;
  if (!c.config.empty()) cfg.load_file(c.config);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      badtime::fail(badtime::ErrorKind::Config, "--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.out = c.out;
  cfg.validate();
  return cfg;
}

void print_report(const badtime::EvalReport& r) {
  std::cout << "MAE_c " << r.mae_c << "  MAE_pa " << r.mae_pa << "  MAE_pn " << r.mae_pn
            << "  windows " << r.n_eval_windows << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Backdoor poisoning and evaluation for multivariate forecasters"};
  app.require_subcommand(1);

  Common common;
  auto* poison = app.add_subcommand("poison", "resolve a poison plan and write its artifacts");
  auto* benign = app.add_subcommand("train-benign", "train the forecaster on clean data");
  auto* backdoor = app.add_subcommand("train-backdoor", "alternating backdoor training and evaluation");
  auto* evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint and trigger");
  auto* synth = app.add_subcommand("synth", "write the built-in synthetic dataset as CSV");
  for (auto* cmd : {poison, benign, backdoor, evaluate, synth}) add_common(cmd, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const auto cfg = resolve(common);
    if (poison->parsed()) {
      const auto plan = badtime::cmd_poison(cfg);
      std::cout << "poisoned windows " << plan.poison_anchors.size() << ", poisoned variables "
                << plan.poisoned.size() << " -> " << cfg.out << '\n';
    } else if (benign->parsed()) {
      const auto out = badtime::cmd_train_benign(cfg);
      std::cout << "benign training done, " << out.training.history.size() << " epochs -> " << cfg.out
                << '\n';
    } else if (backdoor->parsed()) {
      const auto out = badtime::cmd_train_backdoor(cfg);
      print_report(*out.report);
    } else if (evaluate->parsed()) {
      print_report(badtime::cmd_evaluate(cfg));
    } else if (synth->parsed()) {
      badtime::cmd_synth(cfg);
      std::cout << "wrote " << cfg.out << "/synthetic.csv\n";
    }
  } catch (const badtime::Error& e) {
    std::cerr << "error (" << badtime::to_string(e.kind()) << "): " << e.what() << '\n';
    return badtime::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
