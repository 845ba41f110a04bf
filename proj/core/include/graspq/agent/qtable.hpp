#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>

#include "graspq/world/types.hpp"

namespace graspq::agent {

using StateCode = std::uint64_t;
using QRow = std::array<double, world::kActionCount>;

/// Bin counts of the tabular state code.
inline constexpr int kPositionBins = 10;
inline constexpr int kYawBins = 8;
/// Object offsets are binned over [-kOffsetRange, kOffsetRange].
inline constexpr double kOffsetRange = 0.5;

/// Mixed-radix code of the gripper pose (x, y, z, yaw) and the object pose
/// relative to it (dx, dy, relative yaw). Gripper state is not part of the
/// code: every non-terminal state has the gripper open.
StateCode discretize(const world::WorldState& state);

/// Sparse Q-table; unseen states read as all zeros.
class QTable {
 public:
  QRow values(StateCode code) const;
  double value(StateCode code, std::size_t action) const { return values(code).at(action); }
  void set(StateCode code, std::size_t action, double v) { rows_[code].at(action) = v; }
  std::size_t size() const { return rows_.size(); }
  const std::unordered_map<StateCode, QRow>& rows() const { return rows_; }

 private:
  std::unordered_map<StateCode, QRow> rows_;
};

/// Q(s,a) += alpha * (r + gamma * max Q(s',.) - Q(s,a)); no bootstrap when terminal.
void qtable_update(QTable& table, StateCode code, std::size_t action, double reward, StateCode next_code,
                   bool terminal, double alpha, double gamma);

}  // namespace graspq::agent
