#include "graspq/harness/train_log.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace graspq::harness {

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class T>
bool parse_field(std::string_view text, T& out) {
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

double window_mean(const servo::TrainLog& log, double fraction, bool tail) {
  if (log.empty()) throw std::invalid_argument("success rate of an empty log");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("window fraction must be in (0, 1]");
  const auto n = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(log.size())));
  const std::size_t begin = tail ? log.size() - n : 0;
  std::size_t hits = 0;
  for (std::size_t i = begin; i < begin + n; ++i) hits += log[i].success;
  return static_cast<double>(hits) / static_cast<double>(n);
}

}  // namespace

void write_csv(const servo::TrainLog& log, std::ostream& out) {
  out << kCsvHeader << '\n';
  char buf[160];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof buf, "%zu,%.6f,%d,%d,%.6f,%.9g\n", r.episode, r.total_return, r.steps,
                  r.success ? 1 : 0, r.epsilon, r.loss);
    out << buf;
  }
}

void write_csv(const servo::TrainLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv(log, out);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

servo::TrainLog read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::invalid_argument("train log must start with the header '" + std::string(kCsvHeader) + "'");
  }
  servo::TrainLog log;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    const auto f = split(line);
    servo::TrainLogRow r;
    int success = 0;
    const bool ok = f.size() == 6 && parse_field(f[0], r.episode) && parse_field(f[1], r.total_return) &&
                    parse_field(f[2], r.steps) && parse_field(f[3], success) && (success == 0 || success == 1) &&
                    parse_field(f[4], r.epsilon) && parse_field(f[5], r.loss);
    if (!ok) throw std::invalid_argument("malformed train log row " + std::to_string(row_no) + ": '" + line + "'");
    if (r.episode != log.size()) {
      throw std::invalid_argument("train log row " + std::to_string(row_no) + " has episode " +
                                  std::to_string(r.episode) + ", expected " + std::to_string(log.size()));
    }
    r.success = success == 1;
    log.push_back(r);
  }
  return log;
}

servo::TrainLog read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_csv(in);
}

double final_success_rate(const servo::TrainLog& log, double fraction) { return window_mean(log, fraction, true); }

double initial_success_rate(const servo::TrainLog& log, double fraction) {
  return window_mean(log, fraction, false);
}

}  // namespace graspq::harness
