#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dstr/channel.hpp"
#include "dstr/params.hpp"

namespace dstr {

enum class StopKind { Resolution, Convergence, Slots };

struct StopCondition {
  StopKind kind = StopKind::Convergence;
  long slots = 0;  // for StopKind::Slots
};

// Everything one simulation run needs besides the formation geometry.
struct Scenario {
  ProtocolParams protocol;
  ChannelParams channel;
  std::uint64_t seed = 0;
  std::vector<long> join_superframe;  // per UAV; empty selects the default schedule
  std::map<int, long> leave_superframe;
  StopCondition stop;
  long max_slots = 10'000'000;
  MgmtModel mgmt_model = MgmtModel::Pessimistic;
  bool record_trace = false;
  // Superframes between an allocation attempt and its evaluation; the
  // report superframe must complete before the records can answer.
  int eval_delay = 1;

  // Default join schedule: UAV 0 opens the formation, everyone else joins
  // two superframes later.
  static std::vector<long> default_joins(std::size_t count) {
    std::vector<long> joins(count, 2);
    if (!joins.empty()) joins[0] = 0;
    return joins;
  }
};

struct Violation {
  enum class Kind { NeighborsShareSlot, BeaconNotDecoded, EmptySlot };
  Kind kind;
  std::size_t slot = 0;
  int uav = -1;
  int other = -1;

  std::string describe() const {
    switch (kind) {
      case Kind::NeighborsShareSlot:
        return "slot " + std::to_string(slot) + ": neighbors " + std::to_string(uav) +
               " and " + std::to_string(other) + " share it";
      case Kind::BeaconNotDecoded:
        return "slot " + std::to_string(slot) + ": uav " + std::to_string(uav) +
               " not decodable at neighbor " + std::to_string(other);
      case Kind::EmptySlot:
        return "slot " + std::to_string(slot) + ": globally unused";
    }
    return "?";
  }
};

// Metrics of one run. Slot counts are global slots elapsed since the start
// of the simulation; rounds normalize by the formation size.
struct RunResult {
  std::size_t uav_count = 0;
  bool resolved = false;
  bool converged = false;
  bool valid = false;
  long resolution_slot = -1;
  long convergence_slot = -1;
  double resolution_rounds = -1.0;
  double convergence_rounds = -1.0;
  std::size_t superframe_at_resolution = 0;
  std::size_t final_superframe = 0;
  long control_packets = 0;
  double overhead_normalized = -1.0;
  double reuse = -1.0;
  long removed_slots = 0;
  long total_slots = 0;
  long total_superframes = 0;
  bool left_convergence = false;  // converged state later broken (never expected)
  std::vector<Violation> violations;
  std::vector<std::string> trace;

  friend bool operator==(const RunResult& a, const RunResult& b) {
    return a.uav_count == b.uav_count && a.resolved == b.resolved &&
           a.converged == b.converged && a.valid == b.valid &&
           a.resolution_slot == b.resolution_slot &&
           a.convergence_slot == b.convergence_slot &&
           a.superframe_at_resolution == b.superframe_at_resolution &&
           a.final_superframe == b.final_superframe &&
           a.control_packets == b.control_packets && a.removed_slots == b.removed_slots &&
           a.total_slots == b.total_slots && a.trace == b.trace;
  }
};

}  // namespace dstr
