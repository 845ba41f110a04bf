#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>

#include "graspq/servo/train.hpp"

namespace graspq::harness {

inline constexpr std::string_view kCsvHeader = "episode,return,steps,success,epsilon,loss";

/// One row per episode; return and epsilon with 6 decimals, loss with 9 significant digits.
void write_csv(const servo::TrainLog& log, std::ostream& out);
void write_csv(const servo::TrainLog& log, const std::filesystem::path& path);

/// Throws on a bad header, a malformed row (naming its row number), or
/// episode indices that are not 0, 1, 2, ...
servo::TrainLog read_csv(std::istream& in);
servo::TrainLog read_csv(const std::filesystem::path& path);

/// Mean success over the last ceil(fraction * rows) episodes.
double final_success_rate(const servo::TrainLog& log, double fraction = 0.1);
/// Mean success over the first ceil(fraction * rows) episodes.
double initial_success_rate(const servo::TrainLog& log, double fraction = 0.1);

}  // namespace graspq::harness
