#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "dstr/channel.hpp"
#include "dstr/scenario.hpp"
#include "dstr/topology.hpp"
#include "dstr/uav.hpp"

namespace dstr {

// Beacon power follows from the safety radius, adapt power from the
// formation diameter; formations smaller than the safety radius fall back
// to the beacon power so the adapt setting never drops below it.
inline void derive_tx_powers(ProtocolParams& p, const Formation& f, const ChannelParams& ch,
                             double beacon_margin_db = 6.0) {
  p.beacon_tx_power = beacon_tx_power_dbm(f.safety_radius(), ch, beacon_margin_db);
  const double diameter = f.max_diameter();
  p.adapt_tx_power = diameter > 0.0
                         ? std::max(adapt_tx_power_dbm(diameter, ch), p.beacon_tx_power)
                         : p.beacon_tx_power;
}

// Omniscient schedule check: every resolved UAV's beacon must decode at
// every one of its neighbors against the full co-slot interference, no two
// neighbors may share a slot, and (at convergence) no slot may be globally
// unused.
inline std::vector<Violation> validate_allocation(
    const std::vector<std::optional<std::size_t>>& claims, const Formation& formation,
    const ChannelParams& channel, double beacon_power_dbm, std::size_t superframe_size,
    bool check_empty) {
  std::vector<Violation> out;
  std::vector<std::vector<int>> by_slot(superframe_size + 1);
  for (std::size_t u = 0; u < claims.size(); ++u)
    if (claims[u] && *claims[u] >= 1 && *claims[u] <= superframe_size)
      by_slot[*claims[u]].push_back(static_cast<int>(u));

  for (std::size_t slot = 1; slot <= superframe_size; ++slot) {
    const auto& claimants = by_slot[slot];
    if (claimants.empty()) {
      if (check_empty) out.push_back({Violation::Kind::EmptySlot, slot, -1, -1});
      continue;
    }
    for (std::size_t i = 0; i < claimants.size(); ++i)
      for (std::size_t j = i + 1; j < claimants.size(); ++j)
        if (formation.are_neighbors(claimants[i], claimants[j]))
          out.push_back(
              {Violation::Kind::NeighborsShareSlot, slot, claimants[i], claimants[j]});

    std::vector<Transmission> txs;
    txs.reserve(claimants.size());
    for (int c : claimants)
      txs.push_back({c, formation.position(c), beacon_power_dbm, nullptr});
    for (int c : claimants)
      for (int nb : formation.neighbors(c)) {
        if (claims[nb] && *claims[nb] == slot) continue;  // covered above
        const auto outcome =
            resolve_slot(formation.position(nb), txs, channel, MgmtModel::Sinr);
        if (!outcome.is_decoded() || outcome.sender != c)
          out.push_back({Violation::Kind::BeaconNotDecoded, slot, c, nb});
      }
  }
  return out;
}

// Slot-synchronous simulation of one scenario over one formation. Each
// superframe runs G, GN, S, SO, SN and then the transmission slots; growth
// applies right after GN, removals at the superframe boundary.
class SimEngine {
 public:
  SimEngine(const Formation& formation, const Scenario& scenario)
      : formation_(formation), sc_(scenario) {
    sc_.protocol.validate();
    sc_.channel.validate();
    if (sc_.max_slots < 1) throw std::invalid_argument("max_slots must be >= 1");
    if (sc_.join_superframe.empty())
      sc_.join_superframe = Scenario::default_joins(formation_.size());
    if (sc_.join_superframe.size() != formation_.size())
      throw std::invalid_argument("join schedule size does not match formation");
    long min_join = sc_.join_superframe[0];
    first_uav_ = 0;
    for (std::size_t u = 1; u < sc_.join_superframe.size(); ++u)
      if (sc_.join_superframe[u] < min_join) {
        min_join = sc_.join_superframe[u];
        first_uav_ = static_cast<int>(u);
      }
    for (std::size_t u = 0; u < sc_.join_superframe.size(); ++u) {
      if (sc_.join_superframe[u] < 0)
        throw std::invalid_argument("join superframe must be >= 0");
      if (static_cast<int>(u) != first_uav_ && sc_.join_superframe[u] == min_join)
        throw std::invalid_argument("exactly one UAV must join before all others");
    }
    for (const auto& [u, leave_sf] : sc_.leave_superframe) {
      if (u < 0 || static_cast<std::size_t>(u) >= formation_.size())
        throw std::invalid_argument("leave schedule names unknown UAV");
      if (leave_sf <= sc_.join_superframe[u])
        throw std::invalid_argument("leave must come after join");
    }

    uavs_.reserve(formation_.size());
    for (std::size_t u = 0; u < formation_.size(); ++u)
      uavs_.emplace_back(static_cast<int>(u), formation_.position(u), sc_.protocol,
                         formation_.safety_radius(), derive_seed(sc_.seed, u),
                         sc_.eval_delay);

    if (formation_.size() <= kGainCacheLimit) {
      gains_.resize(formation_.size() * formation_.size(), 0.0);
      for (std::size_t i = 0; i < formation_.size(); ++i)
        for (std::size_t j = 0; j < formation_.size(); ++j)
          if (i != j)
            gains_[i * formation_.size() + j] =
                link_gain(distance(formation_.position(i), formation_.position(j)),
                          sc_.channel);
    }
  }

  RunResult run() {
    RunResult result;
    result.uav_count = formation_.size();
    const double n = static_cast<double>(formation_.size());
    size_ = static_cast<std::size_t>(sc_.protocol.dss);

    std::vector<BoundaryEvent> events;
    long slot_count = 0;
    for (long sf = 0;; ++sf) {
      // Scheduled joins take effect at the top of the superframe.
      for (std::size_t u = 0; u < uavs_.size(); ++u)
        if (!uavs_[u].joined() && sc_.join_superframe[u] == sf)
          uavs_[u].join(sf, static_cast<int>(u) == first_uav_);
      for (const auto& [u, leave_sf] : sc_.leave_superframe)
        if (leave_sf == sf) {
          if (uavs_[u].lifecycle() != Lifecycle::Resolved)
            throw SimFault("scheduled departure of a non-resolved UAV");
          uavs_[u].schedule_leave(sf);
        }

      run_slot(SlotId::grow(), sf, result);
      run_slot(SlotId::grow_nack(), sf, result);

      // Local growth resolution; consensus on the size is asserted below.
      for (auto& uav : uavs_)
        if (uav.joined() && !uav.left()) uav.resolve_growth();
      const auto grown = consensus_size();
      if (grown && *grown != size_) {
        if (sc_.record_trace)
          result.trace.push_back(std::to_string(sf) + ",-1,engine,,-," + "grow:" +
                                 std::to_string(*grown - size_));
        size_ = *grown;
      }

      run_slot(SlotId::shrink(), sf, result);
      run_slot(SlotId::shrink_object(), sf, result);
      run_slot(SlotId::shrink_nack(), sf, result);
      for (std::size_t t = 1; t <= size_; ++t) run_slot(SlotId::tx(t), sf, result);

      slot_count += 5 + static_cast<long>(size_);

      // --- superframe boundary ---
      std::optional<std::size_t> removal;
      bool removal_known = false;
      shrink_res_.assign(uavs_.size(), ShrinkResolution::no_change());
      for (std::size_t u = 0; u < uavs_.size(); ++u) {
        const auto& uav = uavs_[u];
        if (!uav.joined() || uav.left() || (!uav.synced() && uav.lifecycle() == Lifecycle::Start))
          continue;
        shrink_res_[u] = uav.resolve_shrink();
        if (shrink_res_[u].kind == ShrinkResolution::Kind::RemoveSlot) {
          if (removal_known && removal != std::optional<std::size_t>{shrink_res_[u].slot})
            throw SimFault("slot-removal consensus breach");
          removal = shrink_res_[u].slot;
          removal_known = true;
        }
      }
      if (removal) {
        // every participant must have reached the same removal decision
        for (std::size_t u = 0; u < uavs_.size(); ++u) {
          const auto& uav = uavs_[u];
          if (!uav.joined() || uav.left() ||
              (!uav.synced() && uav.lifecycle() == Lifecycle::Start))
            continue;
          if (shrink_res_[u].kind != ShrinkResolution::Kind::RemoveSlot)
            throw SimFault("slot-removal consensus breach");
        }
      }

      events.clear();
      for (std::size_t u = 0; u < uavs_.size(); ++u)
        uavs_[u].end_of_superframe(sf, removal, shrink_res_[u],
                                   sc_.record_trace ? &events : nullptr);
      if (removal) {
        ++result.removed_slots;
        --size_;
        if (sc_.record_trace)
          result.trace.push_back(std::to_string(sf) + ",-1,engine,,-," + "remove:" +
                                 std::to_string(*removal));
      }
      const auto agreed = consensus_size();
      if (agreed) size_ = *agreed;

      if (sc_.record_trace)
        for (const auto& e : events)
          result.trace.push_back(std::to_string(e.superframe) + "," +
                                 std::to_string(e.uav) + "," +
                                 lifecycle_name(uavs_[e.uav].lifecycle()) + "," +
                                 claimed_str(uavs_[e.uav]) + "," + std::to_string(size_) +
                                 "," + e.what);

      ++result.total_superframes;
      result.total_slots = slot_count;

      // --- omniscient detection (never feeds back into the protocol) ---
      const bool resolution = detect_resolution();
      if (resolution && !result.resolved) {
        result.resolved = true;
        result.resolution_slot = slot_count;
        result.resolution_rounds = static_cast<double>(slot_count) / n;
        result.superframe_at_resolution = size_;
      }
      bool convergence = false;
      if (resolution && no_empty_slot()) convergence = validate(true).empty();
      if (convergence && !result.converged) {
        result.converged = true;
        result.valid = true;
        result.convergence_slot = slot_count;
        result.convergence_rounds = static_cast<double>(slot_count) / n;
        result.final_superframe = size_;
        result.reuse = n / static_cast<double>(size_);
        result.control_packets = control_packets_;
        result.overhead_normalized =
            static_cast<double>(control_packets_) / (n * result.convergence_rounds);
      }
      if (result.converged && !convergence && sc_.stop.kind == StopKind::Slots)
        result.left_convergence = true;

      if (sc_.stop.kind == StopKind::Resolution && result.resolved) {
        finish_at_stop(result, result.converged);
        return result;
      }
      if (sc_.stop.kind == StopKind::Convergence && result.converged) return result;
      if (sc_.stop.kind == StopKind::Slots && slot_count >= sc_.stop.slots) {
        finish_at_stop(result, result.converged);
        return result;
      }
      if (slot_count >= sc_.max_slots) {
        finish_at_stop(result, result.converged);
        return result;
      }
    }
  }

 private:
  static constexpr std::size_t kGainCacheLimit = 3000;

  static const char* lifecycle_name(Lifecycle l) {
    switch (l) {
      case Lifecycle::Start: return "start";
      case Lifecycle::Allocation: return "allocation";
      case Lifecycle::Resolved: return "resolved";
    }
    return "?";
  }

  static std::string claimed_str(const Uav& u) {
    return u.claimed_slot() ? std::to_string(*u.claimed_slot()) : std::string("-");
  }

  double gain(std::size_t i, std::size_t j) const {
    if (!gains_.empty()) return gains_[i * formation_.size() + j];
    return link_gain(distance(formation_.position(i), formation_.position(j)), sc_.channel);
  }

  void run_slot(const SlotId& slot, long sf, RunResult& result) {
    plans_.clear();
    for (std::size_t u = 0; u < uavs_.size(); ++u) {
      if (!uavs_[u].joined() || uavs_[u].left()) continue;
      if (auto b = uavs_[u].plan_transmission(slot, sf))
        plans_.emplace_back(static_cast<int>(u), std::move(*b));
    }
    if (slot.is_management()) control_packets_ += static_cast<long>(plans_.size());
    if (sc_.record_trace && slot.is_management() && !plans_.empty()) {
      std::string who;
      for (const auto& [u, b] : plans_) who += (who.empty() ? "" : "|") + std::to_string(u);
      result.trace.push_back(std::to_string(sf) + ",-1,engine,,-,tx-" + to_string(slot) +
                             ":" + who);
    }
    if (plans_.empty()) return;  // all-Nothing superframe slots need no delivery

    const double power =
        slot.is_management() ? sc_.protocol.adapt_tx_power : sc_.protocol.beacon_tx_power;
    const MgmtModel model = slot.is_management() ? sc_.mgmt_model : MgmtModel::Sinr;
    const double tx_mw = dbm_to_mw(power);

    txs_.clear();
    txs_.reserve(plans_.size());
    for (const auto& [u, b] : plans_)
      txs_.push_back({u, formation_.position(u), power, &b});

    transmitting_.assign(uavs_.size(), false);
    for (const auto& [u, b] : plans_) transmitting_[u] = true;

    rx_mw_.resize(plans_.size());
    for (std::size_t u = 0; u < uavs_.size(); ++u) {
      if (!uavs_[u].joined() || uavs_[u].left() || transmitting_[u]) continue;
      for (std::size_t t = 0; t < txs_.size(); ++t)
        rx_mw_[t] = tx_mw * gain(txs_[t].sender, u);
      uavs_[u].observe(slot, classify_slot(rx_mw_, txs_, sc_.channel, model));
    }
  }

  std::optional<std::size_t> consensus_size() const {
    std::optional<std::size_t> agreed;
    for (const auto& uav : uavs_) {
      if (!uav.participating()) continue;
      if (!agreed)
        agreed = uav.local_superframe_size();
      else if (*agreed != uav.local_superframe_size())
        throw SimFault("superframe size consensus breach");
    }
    return agreed;
  }

  bool detect_resolution() const {
    bool any = false;
    for (const auto& uav : uavs_) {
      if (uav.left()) continue;
      if (!uav.joined() || uav.lifecycle() != Lifecycle::Resolved) return false;
      any = true;
    }
    // UAVs that have not joined yet block resolution.
    for (std::size_t u = 0; u < uavs_.size(); ++u)
      if (!uavs_[u].joined()) return false;
    return any;
  }

  bool no_empty_slot() const {
    std::vector<bool> used(size_ + 1, false);
    for (const auto& uav : uavs_) {
      if (uav.left() || !uav.claimed_slot()) continue;
      if (*uav.claimed_slot() <= size_) used[*uav.claimed_slot()] = true;
    }
    for (std::size_t t = 1; t <= size_; ++t)
      if (!used[t]) return false;
    return true;
  }

  std::vector<Violation> validate(bool check_empty) const {
    std::vector<std::optional<std::size_t>> claims(uavs_.size());
    for (std::size_t u = 0; u < uavs_.size(); ++u)
      if (!uavs_[u].left() && uavs_[u].lifecycle() == Lifecycle::Resolved)
        claims[u] = uavs_[u].claimed_slot();
    return validate_allocation(claims, formation_, sc_.channel,
                               sc_.protocol.beacon_tx_power, size_, check_empty);
  }

  void finish_at_stop(RunResult& result, bool already_converged) {
    if (already_converged) return;  // converged metrics stay frozen
    result.final_superframe = size_;
    result.control_packets = control_packets_;
    if (detect_resolution()) {
      result.violations = validate(false);
      result.valid = result.violations.empty();
    } else {
      result.valid = false;
    }
  }

  const Formation& formation_;
  Scenario sc_;
  std::vector<Uav> uavs_;
  std::vector<double> gains_;
  std::size_t size_ = 0;
  int first_uav_ = 0;
  long control_packets_ = 0;

  // scratch
  std::vector<std::pair<int, Beacon>> plans_;
  std::vector<Transmission> txs_;
  std::vector<double> rx_mw_;
  std::vector<bool> transmitting_;
  std::vector<ShrinkResolution> shrink_res_;
};

inline RunResult run_scenario(const Formation& formation, const Scenario& scenario) {
  return SimEngine(formation, scenario).run();
}

}  // namespace dstr
