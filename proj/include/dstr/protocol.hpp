#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dstr/beacon.hpp"
#include "dstr/channel.hpp"
#include "dstr/forbidden_set.hpp"
#include "dstr/record.hpp"
#include "dstr/rng.hpp"

namespace dstr {

enum class Lifecycle : std::uint8_t { Start, Allocation, Resolved };

enum class GrowRequest : std::uint8_t { None, PlusOne, PlusMargin };

// Uniform pick among the slots the record reports as available. Empty
// result means the superframe is locally full and the caller should raise
// a grow request.
inline std::optional<std::size_t> select_allocation(const Record& record, Rng& rng) {
  const auto avail = available_slots(record);
  if (avail.empty()) return std::nullopt;
  return avail[rng.below(avail.size())];
}

enum class AttemptResult : std::uint8_t { Claimed, Failed };

// An allocation attempt succeeded iff every neighbor beacon decoded during
// the evaluation superframe reports the slot as successfully received. With
// no beacons at all the claim is vacuous: an isolated UAV resolves
// immediately and later reports correct it if wrong.
inline AttemptResult evaluate_attempt_reports(const std::vector<Setting>& reports_at_own_slot) {
  for (Setting s : reports_at_own_slot)
    if (s != Setting::Received) return AttemptResult::Failed;
  return AttemptResult::Claimed;
}

inline AttemptResult evaluate_attempt(std::size_t own_slot,
                                      const std::vector<Beacon>& neighbor_beacons) {
  std::vector<Setting> reports;
  reports.reserve(neighbor_beacons.size());
  for (const auto& b : neighbor_beacons) reports.push_back(b.record.at(own_slot));
  return evaluate_attempt_reports(reports);
}

enum class FailureAction : std::uint8_t { RetrySelect, RequestGrowMargin };

struct FailureStep {
  FailureAction action;
  int c;  // updated consecutive-failure counter
};

inline FailureStep on_attempt_failed(int c, int ct) {
  ++c;
  if (c >= ct) return {FailureAction::RequestGrowMargin, 0};
  return {FailureAction::RetrySelect, c};
}

// Whether a non-G transmitter NACKs in the GrowNack slot: only when the G
// slot carried energy it could not decode, i.e. several UAVs collided.
inline bool gn_decision(const SlotOutcome& g_outcome) { return g_outcome.is_energy(); }

// Superframe growth every UAV derives from its own view of the G and GN
// slots. Any GN activity forces the full margin; a decoded G request grows
// by what the sender asked; a G transmitter that heard no NACK gets its own
// request. Everyone reaches the same number when fed the shared outcomes of
// the collision-model channel.
inline std::size_t resolve_grow_phase(const SlotOutcome& g_outcome,
                                      const SlotOutcome& gn_outcome, bool i_transmitted_g,
                                      GrowRequest my_request, std::size_t gm) {
  if (gn_outcome.any_signal()) return gm;
  if (g_outcome.is_decoded()) return g_outcome.beacon.grow_margin_flag ? gm : 1;
  if (i_transmitted_g) return my_request == GrowRequest::PlusMargin ? gm : 1;
  return 0;
}

// End-of-superframe silence bookkeeping for a resolved UAV. Counters cover
// every transmission slot except the claimed one; any grow activity this
// superframe zeroes them all, since slots must not be removed while UAVs
// are still self-allocating.
struct SilenceUpdate {
  std::optional<std::size_t> proposal;
};

inline SilenceUpdate update_silence_counters(std::vector<int>& counters,
                                             const std::vector<SlotOutcome::Kind>& observed,
                                             std::size_t claimed_slot, bool grow_activity,
                                             int st, const ForbiddenSet& forbidden) {
  if (grow_activity) {
    for (auto& c : counters) c = 0;
    return {std::nullopt};
  }
  SilenceUpdate out;
  for (std::size_t slot = 1; slot <= counters.size(); ++slot) {
    if (slot == claimed_slot) {
      counters[slot - 1] = 0;
      continue;
    }
    if (observed[slot - 1] == SlotOutcome::Kind::Nothing)
      ++counters[slot - 1];
    else
      counters[slot - 1] = 0;
    if (!out.proposal && counters[slot - 1] >= st && !forbidden.contains(slot))
      out.proposal = slot;  // lowest eligible slot wins
  }
  return out;
}

struct ShrinkResolution {
  enum class Kind : std::uint8_t { RemoveSlot, NoChange, BackoffAndRetry, AbortToForbidden };
  Kind kind = Kind::NoChange;
  std::size_t slot = 0;  // valid for RemoveSlot / AbortToForbidden

  static ShrinkResolution remove(std::size_t s) { return {Kind::RemoveSlot, s}; }
  static ShrinkResolution no_change() { return {Kind::NoChange, 0}; }
  static ShrinkResolution backoff() { return {Kind::BackoffAndRetry, 0}; }
  static ShrinkResolution abort(std::size_t s) { return {Kind::AbortToForbidden, s}; }
};

// Shrink negotiation result from one UAV's view of the S / SO / SN slots.
// A removal needs a decodable proposal and silence in both veto slots; an
// objection kills the proposal outright, a NACK only delays it.
inline ShrinkResolution resolve_shrink_phase(const SlotOutcome& s_outcome,
                                             const SlotOutcome& so_outcome,
                                             const SlotOutcome& sn_outcome, bool i_proposed,
                                             std::optional<std::size_t> my_proposal) {
  if (i_proposed) {
    if (so_outcome.any_signal()) return ShrinkResolution::abort(*my_proposal);
    if (sn_outcome.any_signal()) return ShrinkResolution::backoff();
    return ShrinkResolution::remove(*my_proposal);
  }
  if (s_outcome.is_decoded() && s_outcome.beacon.slot_to_remove && !so_outcome.any_signal() &&
      !sn_outcome.any_signal())
    return ShrinkResolution::remove(*s_outcome.beacon.slot_to_remove);
  return ShrinkResolution::no_change();
}

// Whether a non-proposer objects in the ShrinkObject slot. Allocation UAVs
// object to any shrink attempt; a resolved UAV objects only when its own
// slot is on the block.
inline bool so_decision(const SlotOutcome& s_outcome, Lifecycle lifecycle,
                        std::optional<std::size_t> claimed_slot) {
  if (lifecycle == Lifecycle::Allocation) return s_outcome.any_signal();
  if (lifecycle == Lifecycle::Resolved && s_outcome.is_decoded())
    return s_outcome.beacon.slot_to_remove == claimed_slot;
  return false;
}

// Delay in superframes before (re)transmitting a shrink proposal. The first
// attempt maps to the UAV's slot order so simultaneous proposers spread
// out deterministically; retries draw from a truncated exponential window.
inline std::size_t shrink_backoff(int s, int backoff_cap, std::size_t own_slot,
                                  bool first_attempt, Rng& rng) {
  if (first_attempt) return own_slot;
  const int exponent = std::min(s, backoff_cap);
  return rng.below(1ULL << exponent);
}

// Index shift after a slot removal: slots above the removed one move down.
inline std::size_t shift_after_removal(std::size_t index, std::size_t removed) {
  return index > removed ? index - 1 : index;
}

enum class RetentionDecision : std::uint8_t { Keep, Release };

struct RetentionStep {
  RetentionDecision decision;
  int f;  // updated failed-reception counter
};

// Resolved-state reception check at superframe end. One bad superframe is
// tolerated; from the second consecutive failure on, the slot is released
// with probability 1 - tsr.
inline RetentionStep resolved_failure_check_reports(int f,
                                                    const std::vector<Setting>& reports_at_claimed,
                                                    double tsr, Rng& rng) {
  bool all_ok = true;
  for (Setting s : reports_at_claimed)
    if (s != Setting::Received) {
      all_ok = false;
      break;
    }
  if (all_ok) return {RetentionDecision::Keep, 0};
  ++f;
  if (f >= 2 && !rng.bernoulli(tsr)) return {RetentionDecision::Release, 0};
  return {RetentionDecision::Keep, f};
}

inline RetentionStep resolved_failure_check(int f, std::size_t claimed_slot,
                                            const std::vector<Beacon>& neighbor_beacons,
                                            double tsr, Rng& rng) {
  std::vector<Setting> reports;
  reports.reserve(neighbor_beacons.size());
  for (const auto& b : neighbor_beacons) reports.push_back(b.record.at(claimed_slot));
  return resolved_failure_check_reports(f, reports, tsr, rng);
}

}  // namespace dstr
