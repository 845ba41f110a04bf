// graspq: train, evaluate, ablate and plot grasping agents.
#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "graspq/harness/commands.hpp"
#include "graspq/harness/config.hpp"

namespace {

using graspq::harness::RunConfig;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> episodes;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "key=value run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "master seed override");
  cmd->add_option("--out", f.out, "output directory override");
  cmd->add_option("--episodes", f.episodes, "episode budget override");
}

// For eval, --episodes sets the greedy episodes per object.
RunConfig resolve(const CommonFlags& f, bool evaluating = false) {
  RunConfig c = f.config_path.empty() ? RunConfig{} : graspq::harness::parse_config(f.config_path);
  if (f.seed) c.train.seed = *f.seed;
  if (f.out) c.output_dir = *f.out;
  if (f.episodes) (evaluating ? c.eval_episodes : c.train.episodes) = *f.episodes;
  c.train.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  graspq::harness::tune_allocator();
  CLI::App app{"Deep Q-learning for robotic grasping in a kinematic tabletop world"};
  app.require_subcommand(1);

  CommonFlags train_f, eval_f, ablate_f, plot_f;
  std::string checkpoint;
  std::size_t jobs = 1;
  std::vector<std::string> csvs;

  auto* train = app.add_subcommand("train", "train one agent and write its log and checkpoint");
  add_common(train, train_f);
  train->add_option("--checkpoint", checkpoint, "unused by train; accepted for symmetry");

  auto* eval = app.add_subcommand("eval", "greedy success rate per object for a checkpoint");
  add_common(eval, eval_f);
  eval->add_option("--checkpoint", checkpoint, "checkpoint written by train")->required();

  auto* ablate = app.add_subcommand("ablate", "single- vs multi-view grid over objects and seeds");
  add_common(ablate, ablate_f);
  ablate->add_option("--jobs", jobs, "parallel training runs")->check(CLI::PositiveNumber);

  auto* plot = app.add_subcommand("plot", "moving-average success curves of train logs as SVG");
  add_common(plot, plot_f);
  plot->add_option("csv", csvs, "train log CSV files")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return graspq::harness::cmd_train(resolve(train_f), std::cout, std::cerr);
    if (eval->parsed()) return graspq::harness::cmd_eval(checkpoint, resolve(eval_f, true), std::cout, std::cerr);
    if (ablate->parsed()) return graspq::harness::cmd_ablate(resolve(ablate_f), jobs, std::cout, std::cerr);
    const RunConfig c = resolve(plot_f);
    std::vector<std::filesystem::path> paths(csvs.begin(), csvs.end());
    return graspq::harness::cmd_plot(paths, c.output_dir, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
