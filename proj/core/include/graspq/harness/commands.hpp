#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "graspq/harness/config.hpp"

namespace graspq::harness {

/// Each command returns a process exit status and reports failures on `err`.

/// Trains and writes train_log.csv, checkpoint.gqck and config.txt into the output directory.
int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Greedy success rate per object kind for the policy stored in `checkpoint`.
int cmd_eval(const std::filesystem::path& checkpoint, const RunConfig& config, std::ostream& out,
             std::ostream& err);

/// Trains {single, multi} x {cube, sphere, cylinder} x ablate_seeds and writes
/// per-run logs plus ablation_summary.csv (final-10% success per seed and the mean).
int cmd_ablate(const RunConfig& config, std::size_t jobs, std::ostream& out, std::ostream& err);

/// Moving-average (window 50) success curves of the given logs as learning_curves.svg.
int cmd_plot(const std::vector<std::filesystem::path>& csvs, const std::filesystem::path& out_dir,
             std::ostream& out, std::ostream& err);

struct AblationCell {
  gqn::ViewMode view_mode;
  world::ObjectKind object;
  std::vector<std::uint64_t> seeds;
  std::vector<double> final_success;
  double mean = 0.0;
};

/// The ablation grid in summary-row order; runs are independent and may use `jobs` threads.
std::vector<AblationCell> run_ablation(const RunConfig& config, std::size_t jobs, std::ostream& progress);

/// Moving-average window used by cmd_plot.
inline constexpr std::size_t kPlotWindow = 50;

/// Raises glibc's mmap and trim thresholds so the per-update tensor buffers
/// are recycled instead of being mapped and unmapped every step.
void tune_allocator();

}  // namespace graspq::harness
