#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "cilfair/error.hpp"
#include "cilfair/experiments.hpp"

namespace {

struct SubArgs {
  std::string config_path;
  std::string kind;  // probe kind or sweep parameter
  cilfair::CliOptions opts;
  std::string out;
};

void add_common(CLI::App* sub, SubArgs& args) {
  sub->add_option("config", args.config_path, "experiment config (JSON)")
      ->required();
  sub->add_option("--out", args.out, "output directory (overrides the config)");
  sub->add_flag("--force", args.opts.force, "write into a nonempty directory");
  sub->add_option("--jobs", args.opts.jobs, "parallel (method, seed) workers")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"class-incremental learning fairness debugger"};
  app.set_version_flag("--version", cilfair::version_string());
  app.require_subcommand(0, 1);

  SubArgs run_args, probe_args, sweep_args;
  CLI::App* run = app.add_subcommand("run", "train and evaluate the configured methods");
  add_common(run, run_args);

  CLI::App* probe = app.add_subcommand("probe", "run a root-cause experiment");
  probe
      ->add_option("kind", probe_args.kind,
                   "imbalance | memory | mask | coverage-bias | distill | hard-sample")
      ->required();
  add_common(probe, probe_args);

  CLI::App* sweep = app.add_subcommand("sweep", "run a hyperparameter sweep");
  sweep
      ->add_option("param", sweep_args.kind,
                   "eta | coverage-thresholds | divergence-metric | class-split")
      ->required();
  add_common(sweep, sweep_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  SubArgs* args = nullptr;
  if (run->parsed()) args = &run_args;
  if (probe->parsed()) args = &probe_args;
  if (sweep->parsed()) args = &sweep_args;
  if (!args) {
    std::fputs(app.help().c_str(), stderr);
    return 2;
  }
  if (!args->out.empty()) args->opts.out_dir = args->out;

  try {
    const cilfair::ExperimentConfig cfg =
        cilfair::load_config_file(args->config_path);
    if (run->parsed()) {
      cilfair::cmd_run(cfg, args->opts);
    } else if (probe->parsed()) {
      cilfair::cmd_probe(args->kind, cfg, args->opts);
    } else {
      cilfair::cmd_sweep(args->kind, cfg, args->opts);
    }
  } catch (const cilfair::ParamError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const cilfair::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
