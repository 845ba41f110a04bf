#include "graspq/harness/commands.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "graspq/harness/checkpoint.hpp"
#include "graspq/harness/plot.hpp"
#include "graspq/harness/train_log.hpp"
#include "graspq/world/frame_dump.hpp"

namespace graspq::harness {

namespace {

std::string fixed(double v, int digits = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory " + dir.string());
  }
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

std::string series_label(const std::filesystem::path& csv) {
  const std::string stem = csv.stem().string();
  if (stem == "train_log" && csv.has_parent_path() && !csv.parent_path().filename().empty()) {
    return csv.parent_path().filename().string();
  }
  return stem;
}

void dump_greedy_episode(const RunConfig& config, const servo::TrainResult& result,
                         const std::filesystem::path& dir) {
  const auto& tc = config.train;
  const world::GraspWorld env(tc.world_config());
  const gqn::GraspQNetwork net(tc.network_config());
  const bool tabular = tc.algorithm == servo::Algorithm::kQLearning;
  const auto start = env.reset(servo::derive_seed(tc.seed, servo::SeedStream::kEval), tc.object.value_or(world::ObjectKind::kCube));
  world::dump_observation(dir, "step_000", start.observation);
  std::mt19937_64 rng(0);
  int step = 0;
  servo::run_episode(
      env, start,
      [&](const world::WorldState& s, const world::Observation& obs) {
        return tabular ? result.table.values(agent::discretize(s)) : gqn::q_values(net, result.params, obs);
      },
      0.0, rng, tc.max_steps,
      [&](const agent::Transition& t, const world::WorldState&, const world::WorldState&) {
        char stem[32];
        std::snprintf(stem, sizeof stem, "step_%03d", ++step);
        world::dump_observation(dir, stem, *t.next_obs);
      });
}

}  // namespace

int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    ensure_dir(config.output_dir);
    const auto& tc = config.train;
    out << "training " << servo::to_string(tc.algorithm) << ' ' << gqn::to_string(tc.view_mode) << " on "
        << (tc.object ? world::to_string(*tc.object) : "all objects") << ", " << tc.episodes
        << " episodes, seed " << tc.seed << '\n';
    std::size_t window_hits = 0;
    const std::size_t report = std::max<std::size_t>(1, tc.episodes / 20);
    auto result = servo::train(tc, [&](const servo::TrainLogRow& row) {
      window_hits += row.success;
      if ((row.episode + 1) % report == 0) {
        out << "  episode " << row.episode + 1 << "  epsilon " << fixed(row.epsilon, 2) << "  success "
            << fixed(static_cast<double>(window_hits) / static_cast<double>(report)) << '\n'
            << std::flush;
        window_hits = 0;
      }
    });
    write_csv(result.log, config.output_dir / "train_log.csv");
    write_text(config.output_dir / "config.txt", format_config(config));
    const CheckpointMeta meta{config_hash(config), tc.episodes, format_config(config, false)};
    const auto& params = tc.algorithm == servo::Algorithm::kQLearning ? qtable_to_params(result.table)
                                                                     : result.params;
    save_checkpoint(params, meta, config.output_dir / "checkpoint.gqck");
    if (config.dump_frames) {
      dump_greedy_episode(config, result, config.output_dir / "frames");
      out << "wrote greedy-episode frames to " << (config.output_dir / "frames").string() << '\n';
    }
    out << "final 10% success " << fixed(final_success_rate(result.log)) << ", first 10% "
        << fixed(initial_success_rate(result.log)) << '\n'
        << "wrote " << (config.output_dir / "train_log.csv").string() << " and "
        << (config.output_dir / "checkpoint.gqck").string() << '\n';
    return 0;
  });
}

int cmd_eval(const std::filesystem::path& checkpoint, const RunConfig& config, std::ostream& out,
             std::ostream& err) {
  return guarded(err, [&] {
    if (!std::filesystem::exists(checkpoint)) throw std::runtime_error("checkpoint not found: " + checkpoint.string());
    const Checkpoint ck = load_checkpoint(checkpoint);
    // The stored config fixes the architecture; the caller's config picks episodes and seed.
    const RunConfig trained = parse_config_text(ck.meta.config_text, checkpoint.string());
    if (config_hash(trained) != ck.meta.config_hash) {
      throw std::runtime_error("checkpoint config hash does not match its stored config");
    }
    const world::GraspWorld env(trained.train.world_config());
    const bool tabular = trained.train.algorithm == servo::Algorithm::kQLearning;
    const gqn::GraspQNetwork net(trained.train.network_config());
    const agent::QTable table = tabular ? qtable_from_params(ck.params) : agent::QTable{};
    out << "evaluating " << servo::to_string(trained.train.algorithm) << ' '
        << gqn::to_string(trained.train.view_mode) << " checkpoint, " << config.eval_episodes
        << " greedy episodes per object\n";
    for (world::ObjectKind kind : world::kAllObjectKinds) {
      const auto r = tabular ? servo::evaluate(table, env, kind, config.eval_episodes, config.train.seed)
                             : servo::evaluate(net, ck.params, env, kind, config.eval_episodes, config.train.seed);
      out << world::to_string(kind) << " success_rate=" << fixed(r.success_rate)
          << " mean_steps=" << fixed(r.mean_steps, 2) << " mean_return=" << fixed(r.mean_return) << '\n';
    }
    return 0;
  });
}

std::vector<AblationCell> run_ablation(const RunConfig& config, std::size_t jobs, std::ostream& progress) {
  struct Job {
    std::size_t cell;
    std::uint64_t seed;
  };
  std::vector<AblationCell> cells;
  std::vector<Job> queue;
  for (gqn::ViewMode mode : {gqn::ViewMode::kSingle, gqn::ViewMode::kMulti}) {
    for (world::ObjectKind kind : {world::ObjectKind::kCube, world::ObjectKind::kSphere, world::ObjectKind::kCylinder}) {
      AblationCell cell{mode, kind, {}, {}, 0.0};
      for (std::size_t s = 0; s < config.ablate_seeds; ++s) {
        cell.seeds.push_back(config.train.seed + s);
        queue.push_back({cells.size(), config.train.seed + s});
      }
      cell.final_success.assign(config.ablate_seeds, 0.0);
      cells.push_back(std::move(cell));
    }
  }
  const auto run_dir = config.output_dir / "ablate";
  ensure_dir(run_dir);

  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t j = next++; j < queue.size(); j = next++) {
      const AblationCell& cell = cells[queue[j].cell];
      servo::TrainConfig tc = config.train;
      tc.view_mode = cell.view_mode;
      tc.object = cell.object;
      tc.seed = queue[j].seed;
      const std::string name = std::string(gqn::to_string(cell.view_mode)) + "_" +
                               std::string(world::to_string(cell.object)) + "_seed" + std::to_string(tc.seed);
      try {
        const auto result = servo::train(tc);
        write_csv(result.log, run_dir / (name + ".csv"));
        const double rate = final_success_rate(result.log);
        std::lock_guard lock(mu);
        cells[queue[j].cell].final_success[j % config.ablate_seeds] = rate;
        progress << "  " << name << " final success " << fixed(rate) << '\n' << std::flush;
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, queue.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  for (auto& cell : cells) {
    double sum = 0.0;
    for (double v : cell.final_success) sum += v;
    cell.mean = sum / static_cast<double>(cell.final_success.size());
  }
  return cells;
}

int cmd_ablate(const RunConfig& config, std::size_t jobs, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    ensure_dir(config.output_dir);
    out << "ablation: 2 views x 3 objects x " << config.ablate_seeds << " seeds, " << config.train.episodes
        << " episodes each\n";
    const auto cells = run_ablation(config, jobs, out);
    std::ostringstream csv;
    csv << "view_mode,object";
    for (std::uint64_t s : cells.front().seeds) csv << ",seed_" << s;
    csv << ",mean\n";
    for (const auto& cell : cells) {
      csv << gqn::to_string(cell.view_mode) << ',' << world::to_string(cell.object);
      for (double v : cell.final_success) csv << ',' << fixed(v, 6);
      csv << ',' << fixed(cell.mean, 6) << '\n';
    }
    write_text(config.output_dir / "ablation_summary.csv", csv.str());
    out << csv.str() << "wrote " << (config.output_dir / "ablation_summary.csv").string() << '\n';
    return 0;
  });
}

int cmd_plot(const std::vector<std::filesystem::path>& csvs, const std::filesystem::path& out_dir,
             std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (csvs.empty()) throw std::invalid_argument("plot needs at least one train log CSV");
    std::vector<Series> series;
    for (const auto& path : csvs) {
      const auto log = read_csv(path);
      std::vector<double> success;
      success.reserve(log.size());
      for (const auto& row : log) success.push_back(row.success ? 1.0 : 0.0);
      series.push_back({series_label(path), moving_average(success, kPlotWindow)});
    }
    ensure_dir(out_dir);
    const auto svg_path = out_dir / "learning_curves.svg";
    write_text(svg_path, render_svg(series, "Grasp success (moving average, window 50)", "success rate"));
    out << "wrote " << svg_path.string() << " with " << series.size() << " series\n";
    return 0;
  });
}

void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

}  // namespace graspq::harness
