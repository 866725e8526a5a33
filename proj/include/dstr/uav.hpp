#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "dstr/beacon.hpp"
#include "dstr/channel.hpp"
#include "dstr/forbidden_set.hpp"
#include "dstr/params.hpp"
#include "dstr/protocol.hpp"
#include "dstr/record.hpp"
#include "dstr/rng.hpp"

namespace dstr {

// Raised on protocol consistency breaches the simulation must not paper
// over (size disagreement, invalid removal index, ...).
struct SimFault : std::logic_error {
  using std::logic_error::logic_error;
};

struct BoundaryEvent {
  long superframe;
  int uav;
  std::string what;
};

// One UAV's full protocol state and per-slot behavior. The engine drives
// it strictly in slot order: plan_transmission for every slot, observe for
// every slot it listened in, resolve_growth after the GN slot, then
// resolve_shrink and end_of_superframe at the boundary. All outcomes a UAV
// acts on are its own observations; nothing omniscient leaks in here.
class Uav {
 public:
  Uav(int id, Vec3 position, const ProtocolParams& params, double safety_radius,
      std::uint64_t seed, int eval_delay)
      : id_(id),
        position_(position),
        p_(params),
        safety_radius_(safety_radius),
        rng_(seed),
        eval_delay_(eval_delay) {}

  int id() const { return id_; }
  const Vec3& position() const { return position_; }
  Lifecycle lifecycle() const { return life_; }
  bool joined() const { return joined_; }
  bool left() const { return left_; }
  bool synced() const { return synced_; }
  bool participating() const { return joined_ && !left_ && life_ != Lifecycle::Start; }
  std::optional<std::size_t> claimed_slot() const { return claimed_; }
  std::optional<std::size_t> attempt_slot() const { return attempt_; }
  std::size_t local_superframe_size() const { return size_; }
  const ForbiddenSet& forbidden_set() const { return fs_; }
  const std::vector<int>& silence_counters() const { return silence_; }
  int failed_attempts() const { return c_; }
  int failed_receptions() const { return f_; }

  void join(long superframe, bool designated_first) {
    joined_ = true;
    join_sf_ = superframe;
    designated_first_ = designated_first;
  }

  void schedule_leave(long superframe) { leave_sf_ = superframe; }
  std::optional<long> leave_superframe() const { return leave_sf_; }

  // --- slot phase -------------------------------------------------------

  std::optional<Beacon> plan_transmission(const SlotId& slot, long superframe) {
    if (!joined_ || left_ || life_ == Lifecycle::Start) return std::nullopt;
    switch (slot.kind) {
      case SlotKind::Grow:
        if (life_ == Lifecycle::Allocation && grow_intent_ != GrowRequest::None) {
          tx_g_ = true;
          grow_seen_ = true;
          c_ = 0;  // reset on any G transmission
          Beacon b = base_beacon(slot);
          b.grow_margin_flag = grow_intent_ == GrowRequest::PlusMargin;
          return b;
        }
        return std::nullopt;
      case SlotKind::GrowNack:
        if (!tx_g_ && gn_decision(g_out_)) {
          tx_gn_ = true;
          grow_seen_ = true;
          return base_beacon(slot);
        }
        return std::nullopt;
      case SlotKind::Shrink:
        if (life_ == Lifecycle::Resolved && pending_proposal_ && backoff_ == 0 && !grow_seen_) {
          tx_s_ = true;
          Beacon b = base_beacon(slot);
          b.slot_to_remove = pending_proposal_;
          return b;
        }
        return std::nullopt;
      case SlotKind::ShrinkObject:
        if (!tx_s_ && so_decision(s_out_, life_, claimed_)) {
          tx_so_ = true;
          return base_beacon(slot);
        }
        return std::nullopt;
      case SlotKind::ShrinkNack:
        if (!tx_s_ && s_out_.is_energy()) {
          tx_sn_ = true;
          return base_beacon(slot);
        }
        return std::nullopt;
      case SlotKind::Tx: {
        const auto mine = transmit_slot();
        if (!mine || *mine != slot.tx_index) return std::nullopt;
        Beacon b = base_beacon(slot);
        if (life_ == Lifecycle::Resolved && leave_sf_ && *leave_sf_ == superframe)
          b.leaving_flag = true;
        return b;
      }
    }
    return std::nullopt;
  }

  void observe(const SlotId& slot, const SlotOutcome& outcome) {
    if (!joined_ || left_) return;
    if (outcome.any_signal()) heard_anything_ = true;
    switch (slot.kind) {
      case SlotKind::Grow:
        g_out_ = outcome;
        if (outcome.any_signal()) grow_seen_ = true;
        maybe_sync(slot, outcome);
        return;
      case SlotKind::GrowNack:
        gn_out_ = outcome;
        if (outcome.any_signal()) grow_seen_ = true;
        maybe_sync(slot, outcome);
        return;
      case SlotKind::Shrink:
        s_out_ = outcome;
        maybe_sync(slot, outcome);
        return;
      case SlotKind::ShrinkObject:
        so_out_ = outcome;
        maybe_sync(slot, outcome);
        return;
      case SlotKind::ShrinkNack:
        sn_out_ = outcome;
        maybe_sync(slot, outcome);
        return;
      case SlotKind::Tx:
        maybe_sync(slot, outcome);
        if ((synced_ || life_ != Lifecycle::Start) && slot.tx_index <= size_)
          curr_obs_[slot.tx_index - 1] = outcome.kind;
        if (outcome.is_decoded()) note_decoded_beacon(slot.tx_index, outcome);
        return;
    }
  }

  // Applies the locally-derived superframe growth right after the GN slot.
  // Returns the number of slots appended.
  std::size_t resolve_growth() {
    if (!joined_ || left_) return 0;
    if (life_ == Lifecycle::Start && !synced_) return 0;
    std::size_t g = 0;
    if (!(life_ == Lifecycle::Start && !sync_growth_pending_)) {
      const SlotOutcome gn_eff = tx_gn_ ? SlotOutcome::energy() : gn_out_;
      g = resolve_grow_phase(g_out_, gn_eff, tx_g_, grow_intent_, p_.gm);
    }
    sync_growth_pending_ = false;
    if (g > 0) extend(g);
    if (tx_g_ && life_ == Lifecycle::Allocation) {
      // The requester picks its next slot as soon as the new tail exists.
      pending_select_.grow(g);
      do_select(pending_select_);
    }
    if (life_ != Lifecycle::Start) grow_intent_ = GrowRequest::None;
    return g;
  }

  // --- boundary phase ----------------------------------------------------

  ShrinkResolution resolve_shrink() const {
    const SlotOutcome so_eff = tx_so_ ? SlotOutcome::energy() : so_out_;
    const SlotOutcome sn_eff = tx_sn_ ? SlotOutcome::energy() : sn_out_;
    return resolve_shrink_phase(s_out_, so_eff, sn_eff, tx_s_, pending_proposal_);
  }

  // Runs all end-of-superframe logic. `removal` is the consensus-removed
  // slot (engine-checked), `my_shrink` this UAV's own resolution.
  void end_of_superframe(long superframe, std::optional<std::size_t> removal,
                         const ShrinkResolution& my_shrink,
                         std::vector<BoundaryEvent>* events) {
    if (!joined_ || left_) return;

    // Proposer-side outcome of this superframe's shrink negotiation.
    if (tx_s_) {
      switch (my_shrink.kind) {
        case ShrinkResolution::Kind::AbortToForbidden:
          silence_[my_shrink.slot - 1] = 0;
          fs_.insert(my_shrink.slot);
          pending_proposal_.reset();
          s_ = 0;
          note(events, superframe, "shrink-vetoed:" + std::to_string(my_shrink.slot));
          break;
        case ShrinkResolution::Kind::BackoffAndRetry:
          ++s_;
          backoff_ = shrink_backoff(s_, p_.backoff_cap, *claimed_, false, rng_);
          break;
        case ShrinkResolution::Kind::RemoveSlot:
          pending_proposal_.reset();
          s_ = 0;
          break;
        case ShrinkResolution::Kind::NoChange:
          break;
      }
    }

    const bool leaving_now = leave_sf_ && *leave_sf_ == superframe;

    // Resolved: reception check, then silence bookkeeping.
    if (life_ == Lifecycle::Resolved && !leaving_now) {
      const auto step = resolved_failure_check_reports(f_, reports_at_claimed_, p_.tsr, rng_);
      f_ = step.f;
      if (step.decision == RetentionDecision::Release) {
        release();
        note(events, superframe, "release");
      }
    }
    if (life_ == Lifecycle::Resolved && !leaving_now) {
      update_silence_counters(silence_, curr_obs_, *claimed_, grow_seen_, p_.st, fs_);
      if (grow_seen_ && pending_proposal_) {
        pending_proposal_.reset();
        s_ = 0;
      }
    }

    // Allocation: evaluate the attempt once its report superframe is over.
    bool want_margin = false;
    if (life_ == Lifecycle::Allocation && attempt_) {
      if (attempt_age_ >= eval_delay_) {
        if (evaluate_attempt_reports(reports_at_attempt_) == AttemptResult::Claimed) {
          claim(*attempt_);
          note(events, superframe, "claim:" + std::to_string(*claimed_));
        } else {
          const auto step = on_attempt_failed(c_, p_.ct);
          c_ = step.c;
          attempt_.reset();
          if (step.action == FailureAction::RequestGrowMargin) want_margin = true;
        }
      } else {
        ++attempt_age_;
      }
    }

    // Consensus slot removal takes effect at this boundary.
    if (removal) apply_removal(*removal);
    fs_.tick(p_.fst);

    // Availability view of the completed superframe, in next-superframe
    // slot indices. Only (re)selecting UAVs need it.
    const bool needs_merge =
        (life_ == Lifecycle::Allocation && (!attempt_ || want_margin)) ||
        (life_ == Lifecycle::Start && synced_);
    Record merged;
    if (needs_merge) merged = merged_availability(removal);

    // Rotate observation buffers.
    prev_obs_ = curr_obs_;
    curr_obs_.assign(size_, SlotOutcome::Kind::Nothing);

    // Transition and next-superframe planning.
    if (life_ == Lifecycle::Start) {
      if (designated_first_ && !synced_ && superframe >= join_sf_) {
        if (heard_anything_)
          throw SimFault("designated first UAV heard traffic before claiming");
        become_first();
        note(events, superframe, "first-claim");
      } else if (synced_) {
        life_ = Lifecycle::Allocation;
        note(events, superframe, "allocation");
        do_select(merged);
      }
    } else if (life_ == Lifecycle::Allocation) {
      if (want_margin) {
        grow_intent_ = GrowRequest::PlusMargin;
        pending_select_ = merged;
        note(events, superframe, "grow-request:margin");
      } else if (!attempt_ && grow_intent_ == GrowRequest::None) {
        do_select(merged);
        if (grow_intent_ == GrowRequest::PlusOne) note(events, superframe, "grow-request:one");
      }
    } else if (!leaving_now) {
      if (pending_proposal_ && silence_[*pending_proposal_ - 1] < p_.st) {
        // The candidate slot showed activity while we were waiting.
        pending_proposal_.reset();
        s_ = 0;
      }
      if (pending_proposal_) {
        if (backoff_ > 0) --backoff_;
      } else if (!grow_seen_) {
        for (std::size_t slot = 1; slot <= size_; ++slot) {
          if (slot == *claimed_ || fs_.contains(slot)) continue;
          if (silence_[slot - 1] >= p_.st) {
            pending_proposal_ = slot;
            s_ = 0;
            backoff_ = shrink_backoff(0, p_.backoff_cap, *claimed_, true, rng_);
            note(events, superframe, "propose:" + std::to_string(slot));
            break;
          }
        }
      }
    }

    if (leaving_now) {
      left_ = true;
      note(events, superframe, "left");
    }
    reset_scratch();
  }

 private:
  std::optional<std::size_t> transmit_slot() const {
    if (life_ == Lifecycle::Resolved) return claimed_;
    if (life_ == Lifecycle::Allocation) return attempt_;
    return std::nullopt;
  }

  static Setting obs_to_setting(SlotOutcome::Kind k) {
    switch (k) {
      case SlotOutcome::Kind::Decoded: return Setting::Received;
      case SlotOutcome::Kind::Energy: return Setting::Energy;
      case SlotOutcome::Kind::Nothing: break;
    }
    return Setting::Nothing;
  }

  // Record shipped in a beacon sent at `slot`: slots already elapsed this
  // superframe report fresh observations, later slots the previous
  // superframe's. A UAV reports nothing for the slots it transmits in.
  Record build_record(const SlotId& slot) const {
    Record r(size_);
    const std::size_t fresh_below = slot.kind == SlotKind::Tx ? slot.tx_index : 1;
    for (std::size_t i = 1; i <= size_; ++i)
      r.set(i, obs_to_setting(i < fresh_below ? curr_obs_[i - 1] : prev_obs_[i - 1]));
    return r;
  }

  Beacon base_beacon(const SlotId& slot) const {
    Beacon b;
    b.superframe_size = size_;
    b.current_slot = slot;
    b.uav_id = id_;
    b.safety.position = position_;
    b.record = build_record(slot);
    return b;
  }

  // First beacon decoded by a Start UAV synchronizes it: it adopts the
  // sender's superframe size and starts observing. A sync in the G or GN
  // slot predates this superframe's growth, so growth still applies.
  void maybe_sync(const SlotId& slot, const SlotOutcome& outcome) {
    if (life_ != Lifecycle::Start || synced_ || !outcome.is_decoded()) return;
    synced_ = true;
    size_ = outcome.beacon.superframe_size;
    sync_growth_pending_ = slot.kind == SlotKind::Grow || slot.kind == SlotKind::GrowNack;
    curr_obs_.assign(size_, SlotOutcome::Kind::Nothing);
    prev_obs_.assign(size_, SlotOutcome::Kind::Nothing);
    silence_.assign(size_, 0);
  }

  void note_decoded_beacon(std::size_t slot, const SlotOutcome& outcome) {
    if (distance(position_, outcome.beacon.safety.position) > safety_radius_) return;
    // Reports about our own slot feed the reception checks; full records
    // are only kept while we are still choosing a slot.
    const auto mine = transmit_slot();
    if (mine && outcome.beacon.record.size() >= *mine) {
      const Setting rep = outcome.beacon.record.at(*mine);
      if (life_ == Lifecycle::Resolved)
        reports_at_claimed_.push_back(rep);
      else
        reports_at_attempt_.push_back(rep);
    }
    if (life_ != Lifecycle::Resolved) neighbor_records_.push_back(outcome.beacon.record);
    if (outcome.beacon.leaving_flag) vacated_ = slot;
  }

  // Joint availability view: a slot is taken once we decoded someone in it
  // or any neighbor record reports successful reception there. A decoded
  // leaving flag overrides, the slot frees up next superframe.
  Record merged_availability(std::optional<std::size_t> removal) const {
    Record merged(size_);
    auto raise = [&](std::size_t idx, Setting s) {
      if (s == Setting::Nothing) return;
      const Setting cur = merged.at(idx);
      if (cur == Setting::Received) return;
      if (s == Setting::Received || cur == Setting::Nothing) merged.set(idx, s);
    };
    for (std::size_t i = 1; i <= size_; ++i)
      raise(i, obs_to_setting(curr_obs_[i - 1]));  // already in post-removal indices
    for (const auto& rec : neighbor_records_)
      for (std::size_t i = 1; i <= rec.size(); ++i) {
        if (removal && i == *removal) continue;
        const std::size_t idx = removal ? shift_after_removal(i, *removal) : i;
        if (idx <= size_) raise(idx, rec.at(i));
      }
    if (vacated_ && !(removal && *vacated_ == *removal)) {
      const std::size_t idx = removal ? shift_after_removal(*vacated_, *removal) : *vacated_;
      if (idx <= size_) merged.set(idx, Setting::Nothing);
    }
    return merged;
  }

  void do_select(const Record& merged) {
    const auto pick = select_allocation(merged, rng_);
    if (!pick) {
      // Locally full superframe: ask for one more slot and finish the
      // selection once it exists.
      grow_intent_ = GrowRequest::PlusOne;
      attempt_.reset();
      if (&merged != &pending_select_) pending_select_ = merged;
      return;
    }
    if (merged.at(*pick) == Setting::Received)
      throw SimFault("selected a slot known to be in use");
    attempt_ = *pick;
    attempt_age_ = 0;
    grow_intent_ = GrowRequest::None;
  }

  void claim(std::size_t slot) {
    life_ = Lifecycle::Resolved;
    claimed_ = slot;
    attempt_.reset();
    c_ = 0;
    f_ = 0;
    silence_.assign(size_, 0);
    neighbor_records_.clear();
  }

  void release() {
    life_ = Lifecycle::Allocation;
    claimed_.reset();
    attempt_.reset();
    c_ = 0;
    f_ = 0;
    s_ = 0;
    silence_.assign(size_, 0);
    pending_proposal_.reset();
    backoff_ = 0;
  }

  void become_first() {
    life_ = Lifecycle::Resolved;
    size_ = static_cast<std::size_t>(p_.dss);
    claimed_ = 1;
    curr_obs_.assign(size_, SlotOutcome::Kind::Nothing);
    prev_obs_.assign(size_, SlotOutcome::Kind::Nothing);
    silence_.assign(size_, 0);
    synced_ = true;
  }

  void extend(std::size_t g) {
    size_ += g;
    curr_obs_.resize(size_, SlotOutcome::Kind::Nothing);
    prev_obs_.resize(size_, SlotOutcome::Kind::Nothing);
    silence_.resize(size_, 0);
  }

  void apply_removal(std::size_t removed) {
    if (removed < 1 || removed > size_)
      throw SimFault("slot removal index out of range");
    if (claimed_ && *claimed_ == removed) throw SimFault("claimed slot removed");
    --size_;
    curr_obs_.erase(curr_obs_.begin() + static_cast<long>(removed) - 1);
    prev_obs_.erase(prev_obs_.begin() + static_cast<long>(removed) - 1);
    silence_.erase(silence_.begin() + static_cast<long>(removed) - 1);
    if (claimed_) claimed_ = shift_after_removal(*claimed_, removed);
    if (attempt_) {
      if (*attempt_ == removed)
        attempt_.reset();  // our tentative slot vanished; reselect below
      else
        attempt_ = shift_after_removal(*attempt_, removed);
    }
    if (pending_proposal_) {
      if (*pending_proposal_ == removed) {
        pending_proposal_.reset();
        s_ = 0;
      } else {
        pending_proposal_ = shift_after_removal(*pending_proposal_, removed);
      }
    }
    fs_.apply_slot_removal(removed);
  }

  void reset_scratch() {
    g_out_ = gn_out_ = s_out_ = so_out_ = sn_out_ = SlotOutcome::nothing();
    tx_g_ = tx_gn_ = tx_s_ = tx_so_ = tx_sn_ = false;
    grow_seen_ = false;
    reports_at_claimed_.clear();
    reports_at_attempt_.clear();
    neighbor_records_.clear();
    vacated_.reset();
  }

  void note(std::vector<BoundaryEvent>* events, long sf, std::string what) const {
    if (events) events->push_back({sf, id_, std::move(what)});
  }

  int id_;
  Vec3 position_;
  ProtocolParams p_;
  double safety_radius_;
  Rng rng_;
  int eval_delay_;

  Lifecycle life_ = Lifecycle::Start;
  bool joined_ = false;
  long join_sf_ = -1;
  bool designated_first_ = false;
  bool left_ = false;
  std::optional<long> leave_sf_;
  bool synced_ = false;
  bool heard_anything_ = false;
  bool sync_growth_pending_ = false;

  std::size_t size_ = 0;
  std::optional<std::size_t> claimed_;
  std::optional<std::size_t> attempt_;
  int attempt_age_ = 0;
  int c_ = 0;
  int f_ = 0;
  int s_ = 0;
  std::vector<int> silence_;
  ForbiddenSet fs_;
  std::optional<std::size_t> pending_proposal_;
  std::size_t backoff_ = 0;
  GrowRequest grow_intent_ = GrowRequest::None;
  Record pending_select_;  // availability snapshot waiting on growth

  // per-superframe scratch
  std::vector<SlotOutcome::Kind> curr_obs_, prev_obs_;
  SlotOutcome g_out_, gn_out_, s_out_, so_out_, sn_out_;
  bool tx_g_ = false, tx_gn_ = false, tx_s_ = false, tx_so_ = false, tx_sn_ = false;
  bool grow_seen_ = false;
  std::vector<Setting> reports_at_claimed_;
  std::vector<Setting> reports_at_attempt_;
  std::vector<Record> neighbor_records_;
  std::optional<std::size_t> vacated_;
};

}  // namespace dstr
