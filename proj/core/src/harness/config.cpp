#include "graspq/harness/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace graspq::harness {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw std::invalid_argument("expected a number");
  return out;
}

std::uint64_t parse_unsigned(std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw std::invalid_argument("expected a non-negative integer");
  return out;
}

bool parse_bool(std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("expected true or false");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Setter = std::function<void(RunConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"algorithm",
       [](RunConfig& c, std::string_view v) {
         const auto a = servo::parse_algorithm(v);
         if (!a) throw std::invalid_argument("expected qlearn, dqn or ddqn");
         c.train.algorithm = *a;
       }},
      {"view_mode",
       [](RunConfig& c, std::string_view v) {
         if (v == "single") {
           c.train.view_mode = gqn::ViewMode::kSingle;
         } else if (v == "multi") {
           c.train.view_mode = gqn::ViewMode::kMulti;
         } else {
           throw std::invalid_argument("expected single or multi");
         }
       }},
      {"object",
       [](RunConfig& c, std::string_view v) {
         if (v == "all") {
           c.train.object.reset();
           return;
         }
         const auto k = world::parse_object_kind(v);
         if (!k) throw std::invalid_argument("expected cube, sphere, cylinder or all");
         c.train.object = *k;
       }},
      {"episodes", [](RunConfig& c, std::string_view v) { c.train.episodes = parse_unsigned(v); }},
      {"max_steps",
       [](RunConfig& c, std::string_view v) {
         const auto n = parse_unsigned(v);
         if (n > 1000000) throw std::invalid_argument("must be at most 1000000");
         c.train.max_steps = static_cast<int>(n);
       }},
      {"gamma", [](RunConfig& c, std::string_view v) { c.train.gamma = parse_double(v); }},
      {"epsilon_start", [](RunConfig& c, std::string_view v) { c.train.epsilon.start = parse_double(v); }},
      {"epsilon_end", [](RunConfig& c, std::string_view v) { c.train.epsilon.end = parse_double(v); }},
      {"epsilon_decay_fraction",
       [](RunConfig& c, std::string_view v) { c.train.epsilon.decay_fraction = parse_double(v); }},
      {"replay_capacity", [](RunConfig& c, std::string_view v) { c.train.replay_capacity = parse_unsigned(v); }},
      {"batch_size", [](RunConfig& c, std::string_view v) { c.train.batch_size = parse_unsigned(v); }},
      {"target_sync", [](RunConfig& c, std::string_view v) { c.train.target_sync = parse_unsigned(v); }},
      {"learning_rate", [](RunConfig& c, std::string_view v) { c.train.learning_rate = parse_double(v); }},
      {"alpha", [](RunConfig& c, std::string_view v) { c.train.alpha = parse_double(v); }},
      {"warmup", [](RunConfig& c, std::string_view v) { c.train.warmup = parse_unsigned(v); }},
      {"update_every", [](RunConfig& c, std::string_view v) { c.train.update_every = parse_unsigned(v); }},
      {"image_size", [](RunConfig& c, std::string_view v) { c.train.image_size = parse_unsigned(v); }},
      {"learning", [](RunConfig& c, std::string_view v) { c.train.learning = parse_bool(v); }},
      {"seed", [](RunConfig& c, std::string_view v) { c.train.seed = parse_unsigned(v); }},
      {"output_dir",
       [](RunConfig& c, std::string_view v) {
         if (v.empty()) throw std::invalid_argument("must not be empty");
         c.output_dir = std::string(v);
       }},
      {"dump_frames", [](RunConfig& c, std::string_view v) { c.dump_frames = parse_bool(v); }},
      {"eval_episodes",
       [](RunConfig& c, std::string_view v) {
         c.eval_episodes = parse_unsigned(v);
         if (c.eval_episodes == 0) throw std::invalid_argument("must be at least 1");
       }},
      {"ablate_seeds",
       [](RunConfig& c, std::string_view v) {
         c.ablate_seeds = parse_unsigned(v);
         if (c.ablate_seeds == 0) throw std::invalid_argument("must be at least 1");
       }},
  };
  return table;
}

}  // namespace

RunConfig parse_config_text(std::string_view text, std::string_view source) {
  RunConfig config;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    const std::string where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument(where + "expected key=value, got '" + std::string(line) + "'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw std::invalid_argument(where + "unknown key '" + std::string(key) + "'");
    if (!seen.insert(std::string(key)).second) {
      throw std::invalid_argument(where + "key '" + std::string(key) + "' set twice");
    }
    try {
      it->second(config, value);
      // Every earlier field was in range, so a failure here is this key's.
      config.train.validate();
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(where + "key '" + std::string(key) + "' value '" + std::string(value) +
                                  "': " + e.what());
    }
  }
  return config;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), path.string());
}

std::string format_config(const RunConfig& c, bool include_output) {
  const servo::TrainConfig& t = c.train;
  std::ostringstream out;
  out << "algorithm=" << servo::to_string(t.algorithm) << '\n'
      << "view_mode=" << gqn::to_string(t.view_mode) << '\n'
      << "object=" << (t.object ? world::to_string(*t.object) : std::string_view("all")) << '\n'
      << "episodes=" << t.episodes << '\n'
      << "max_steps=" << t.max_steps << '\n'
      << "gamma=" << format_double(t.gamma) << '\n'
      << "epsilon_start=" << format_double(t.epsilon.start) << '\n'
      << "epsilon_end=" << format_double(t.epsilon.end) << '\n'
      << "epsilon_decay_fraction=" << format_double(t.epsilon.decay_fraction) << '\n'
      << "replay_capacity=" << t.replay_capacity << '\n'
      << "batch_size=" << t.batch_size << '\n'
      << "target_sync=" << t.target_sync << '\n'
      << "learning_rate=" << format_double(t.learning_rate) << '\n'
      << "alpha=" << format_double(t.alpha) << '\n'
      << "warmup=" << t.warmup << '\n'
      << "update_every=" << t.update_every << '\n'
      << "image_size=" << t.image_size << '\n'
      << "learning=" << (t.learning ? "true" : "false") << '\n'
      << "seed=" << t.seed << '\n'
      << "eval_episodes=" << c.eval_episodes << '\n'
      << "ablate_seeds=" << c.ablate_seeds << '\n';
  if (include_output) {
    out << "output_dir=" << c.output_dir.string() << '\n' << "dump_frames=" << (c.dump_frames ? "true" : "false") << '\n';
  }
  return out.str();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t config_hash(const RunConfig& config) { return fnv1a64(format_config(config, false)); }

}  // namespace graspq::harness
