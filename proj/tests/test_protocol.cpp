#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <map>

#include "dstr/forbidden_set.hpp"
#include "dstr/protocol.hpp"

using namespace dstr;

namespace {

Record make_record(std::initializer_list<int> settings) {
  std::vector<Setting> s;
  for (int v : settings) s.push_back(static_cast<Setting>(v));
  return Record(std::move(s));
}

Beacon beacon_with_record(std::initializer_list<int> settings) {
  Beacon b;
  b.record = make_record(settings);
  b.superframe_size = b.record.size();
  return b;
}

}  // namespace

TEST_CASE("slot selection is uniform over the available slots") {
  Rng rng(7);
  SECTION("fully occupied record yields no slot") {
    CHECK_FALSE(select_allocation(make_record({1, 1, 1}), rng));
  }
  SECTION("a single candidate is always picked") {
    for (int i = 0; i < 50; ++i)
      CHECK(select_allocation(make_record({1, 0, 1}), rng) == std::size_t{2});
  }
  SECTION("draws over four free slots stay within 3 sigma of uniform") {
    const Record r = make_record({0, 0, 0, 0});
    std::array<int, 4> counts{};
    for (int i = 0; i < 10000; ++i) ++counts[*select_allocation(r, rng) - 1];
    // expected 2500 per bin, sigma = sqrt(10000 * 0.25 * 0.75) ~= 43.3
    for (int c : counts) CHECK(std::abs(c - 2500) <= 130);
  }
}

TEST_CASE("attempt evaluation follows the unanimous-success rule") {
  SECTION("all neighbors report success") {
    const std::vector<Beacon> beacons{beacon_with_record({1, 1}), beacon_with_record({0, 1})};
    CHECK(evaluate_attempt(2, beacons) == AttemptResult::Claimed);
  }
  SECTION("a single dissenting report fails the attempt") {
    const std::vector<Beacon> beacons{beacon_with_record({1}), beacon_with_record({2})};
    CHECK(evaluate_attempt(1, beacons) == AttemptResult::Failed);
    const std::vector<Beacon> zero{beacon_with_record({1, 0})};
    CHECK(evaluate_attempt(2, zero) == AttemptResult::Failed);
  }
  SECTION("no beacons at all is a vacuous claim") {
    CHECK(evaluate_attempt(3, {}) == AttemptResult::Claimed);
  }
}

TEST_CASE("failed attempts count toward the collision threshold") {
  auto s = on_attempt_failed(0, 3);
  CHECK(s.action == FailureAction::RetrySelect);
  CHECK(s.c == 1);

  s = on_attempt_failed(2, 3);
  CHECK(s.action == FailureAction::RequestGrowMargin);
  CHECK(s.c == 0);

  s = on_attempt_failed(6, 7);
  CHECK(s.action == FailureAction::RequestGrowMargin);
  CHECK(s.c == 0);
}

TEST_CASE("GN transmission happens exactly on undecodable G energy") {
  CHECK(gn_decision(SlotOutcome::energy()));
  CHECK_FALSE(gn_decision(SlotOutcome::decoded(1, Beacon{})));
  CHECK_FALSE(gn_decision(SlotOutcome::nothing()));
}

TEST_CASE("grow phase resolution matches the signaling rules") {
  const std::size_t gm = 5;
  Beacon plus_one;
  plus_one.grow_margin_flag = false;
  Beacon plus_margin;
  plus_margin.grow_margin_flag = true;

  SECTION("decoded single request grows by what was asked") {
    CHECK(resolve_grow_phase(SlotOutcome::decoded(1, plus_one), SlotOutcome::nothing(), false,
                             GrowRequest::None, gm) == 1);
    CHECK(resolve_grow_phase(SlotOutcome::decoded(1, plus_margin), SlotOutcome::nothing(),
                             false, GrowRequest::None, gm) == gm);
  }
  SECTION("any GN activity forces the margin") {
    CHECK(resolve_grow_phase(SlotOutcome::energy(), SlotOutcome::energy(), false,
                             GrowRequest::None, gm) == gm);
    CHECK(resolve_grow_phase(SlotOutcome::nothing(), SlotOutcome::decoded(2, Beacon{}), true,
                             GrowRequest::PlusOne, gm) == gm);
  }
  SECTION("quiet slots mean no growth") {
    CHECK(resolve_grow_phase(SlotOutcome::nothing(), SlotOutcome::nothing(), false,
                             GrowRequest::None, gm) == 0);
  }
  SECTION("an unchallenged transmitter gets its own request") {
    CHECK(resolve_grow_phase(SlotOutcome::nothing(), SlotOutcome::nothing(), true,
                             GrowRequest::PlusOne, gm) == 1);
    CHECK(resolve_grow_phase(SlotOutcome::nothing(), SlotOutcome::nothing(), true,
                             GrowRequest::PlusMargin, gm) == gm);
  }
}

// Every UAV must derive the same growth from the shared channel outcomes.
// Enumerates the request mixes and the per-role observations the
// collision-model channel produces for them.
TEST_CASE("grow phase reaches formation-wide consensus") {
  const std::size_t gm = 7;
  const std::vector<GrowRequest> kinds{GrowRequest::PlusOne, GrowRequest::PlusMargin};

  SECTION("no request, all quiet") {
    CHECK(resolve_grow_phase(SlotOutcome::nothing(), SlotOutcome::nothing(), false,
                             GrowRequest::None, gm) == 0);
  }
  SECTION("exactly one transmitter") {
    for (GrowRequest req : kinds) {
      Beacon b;
      b.grow_margin_flag = req == GrowRequest::PlusMargin;
      const auto tx_growth = resolve_grow_phase(SlotOutcome::nothing(), SlotOutcome::nothing(),
                                                true, req, gm);
      const auto rx_growth = resolve_grow_phase(SlotOutcome::decoded(0, b),
                                                SlotOutcome::nothing(), false,
                                                GrowRequest::None, gm);
      CHECK(tx_growth == rx_growth);
    }
  }
  SECTION("several transmitters collide") {
    for (GrowRequest a : kinds)
      for (GrowRequest b : kinds) {
        // listeners sense energy in G and NACK; their own GN transmission
        // counts as energy, and the G transmitters hear that NACK
        const auto listener = resolve_grow_phase(SlotOutcome::energy(), SlotOutcome::energy(),
                                                 false, GrowRequest::None, gm);
        const auto tx_a = resolve_grow_phase(SlotOutcome::nothing(), SlotOutcome::energy(),
                                             true, a, gm);
        const auto tx_b = resolve_grow_phase(SlotOutcome::nothing(), SlotOutcome::energy(),
                                             true, b, gm);
        CHECK(listener == gm);
        CHECK(tx_a == gm);
        CHECK(tx_b == gm);
      }
  }
}

TEST_CASE("silence counters trigger proposals at the threshold") {
  ForbiddenSet fs;
  std::vector<int> counters{0, 0, 0, 2};
  const std::vector<SlotOutcome::Kind> silent(4, SlotOutcome::Kind::Nothing);

  SECTION("threshold reached on the silent slot") {
    std::vector<SlotOutcome::Kind> obs = silent;
    obs[0] = SlotOutcome::Kind::Decoded;
    obs[1] = SlotOutcome::Kind::Decoded;
    obs[2] = SlotOutcome::Kind::Energy;
    const auto up = update_silence_counters(counters, obs, 1, false, 3, fs);
    CHECK(up.proposal == std::size_t{4});
    CHECK(counters == std::vector<int>{0, 0, 0, 3});
  }
  SECTION("forbidden slots are skipped, lowest eligible wins") {
    std::vector<int> two_silent{0, 2, 0, 2};
    ForbiddenSet forbidden;
    forbidden.insert(2);
    std::vector<SlotOutcome::Kind> obs = silent;
    obs[0] = SlotOutcome::Kind::Decoded;
    obs[2] = SlotOutcome::Kind::Decoded;
    const auto up = update_silence_counters(two_silent, obs, 1, false, 3, forbidden);
    CHECK(up.proposal == std::size_t{4});
  }
  SECTION("grow activity resets everything and blocks proposals") {
    std::vector<int> hot{0, 5, 5, 5};
    const auto up = update_silence_counters(hot, silent, 1, true, 3, fs);
    CHECK_FALSE(up.proposal);
    CHECK(hot == std::vector<int>{0, 0, 0, 0});
  }
  SECTION("the claimed slot never accumulates silence") {
    std::vector<int> mine{7, 0, 0, 0};
    const auto up = update_silence_counters(mine, silent, 1, false, 3, fs);
    CHECK(mine[0] == 0);
    CHECK(up.proposal == std::size_t{2});
  }
}

TEST_CASE("shrink phase resolution covers proposer and bystander views") {
  Beacon proposal;
  proposal.slot_to_remove = 3;

  SECTION("bystander applies an unopposed decoded proposal") {
    const auto r = resolve_shrink_phase(SlotOutcome::decoded(1, proposal),
                                        SlotOutcome::nothing(), SlotOutcome::nothing(), false,
                                        std::nullopt);
    CHECK(r.kind == ShrinkResolution::Kind::RemoveSlot);
    CHECK(r.slot == 3);
  }
  SECTION("objection aborts the proposer regardless of the NACK slot") {
    const auto r = resolve_shrink_phase(SlotOutcome::nothing(), SlotOutcome::energy(),
                                        SlotOutcome::energy(), true, std::size_t{5});
    CHECK(r.kind == ShrinkResolution::Kind::AbortToForbidden);
    CHECK(r.slot == 5);
  }
  SECTION("NACK without objection sends the proposer into backoff") {
    const auto r = resolve_shrink_phase(SlotOutcome::nothing(), SlotOutcome::nothing(),
                                        SlotOutcome::energy(), true, std::size_t{5});
    CHECK(r.kind == ShrinkResolution::Kind::BackoffAndRetry);
  }
  SECTION("quiet veto slots let the proposer remove") {
    const auto r = resolve_shrink_phase(SlotOutcome::nothing(), SlotOutcome::nothing(),
                                        SlotOutcome::nothing(), true, std::size_t{5});
    CHECK(r.kind == ShrinkResolution::Kind::RemoveSlot);
    CHECK(r.slot == 5);
  }
  SECTION("bystander holds position when veto slots carry signal") {
    const auto r = resolve_shrink_phase(SlotOutcome::decoded(1, proposal),
                                        SlotOutcome::energy(), SlotOutcome::nothing(), false,
                                        std::nullopt);
    CHECK(r.kind == ShrinkResolution::Kind::NoChange);
  }
}

TEST_CASE("objection rules for the ShrinkObject slot") {
  Beacon rm5;
  rm5.slot_to_remove = 5;
  SECTION("allocation UAVs object to any shrink signal") {
    CHECK(so_decision(SlotOutcome::energy(), Lifecycle::Allocation, std::nullopt));
    CHECK(so_decision(SlotOutcome::decoded(1, rm5), Lifecycle::Allocation, std::nullopt));
    CHECK_FALSE(so_decision(SlotOutcome::nothing(), Lifecycle::Allocation, std::nullopt));
  }
  SECTION("resolved UAVs defend only their own slot") {
    CHECK(so_decision(SlotOutcome::decoded(1, rm5), Lifecycle::Resolved, std::size_t{5}));
    CHECK_FALSE(so_decision(SlotOutcome::decoded(1, rm5), Lifecycle::Resolved, std::size_t{2}));
    CHECK_FALSE(so_decision(SlotOutcome::energy(), Lifecycle::Resolved, std::size_t{5}));
  }
  SECTION("start UAVs never transmit") {
    CHECK_FALSE(so_decision(SlotOutcome::decoded(1, rm5), Lifecycle::Start, std::nullopt));
  }
}

TEST_CASE("shrink backoff maps the first attempt to the slot order") {
  Rng rng(11);
  CHECK(shrink_backoff(0, 5, 3, true, rng) == 3);
  CHECK(shrink_backoff(4, 5, 1, true, rng) == 1);
}

TEST_CASE("shrink retry backoff is uniform over the truncated window") {
  Rng rng(13);
  SECTION("window of size two") {
    std::array<int, 2> counts{};
    for (int i = 0; i < 2000; ++i) {
      const auto d = shrink_backoff(1, 5, 9, false, rng);
      REQUIRE(d <= 1);
      ++counts[d];
    }
    CHECK(counts[0] > 800);
    CHECK(counts[1] > 800);
  }
  SECTION("the cap truncates the exponent") {
    std::array<int, 32> counts{};
    for (int i = 0; i < 10000; ++i) {
      const auto d = shrink_backoff(9, 5, 9, false, rng);
      REQUIRE(d <= 31);
      ++counts[d];
    }
    // expected 312.5 per bin, sigma ~= 17.4
    for (int c : counts) CHECK(std::abs(c - 312) <= 53);
  }
}

TEST_CASE("index shifting after a removal") {
  CHECK(shift_after_removal(5, 3) == 4);
  CHECK(shift_after_removal(2, 7) == 2);
  CHECK(shift_after_removal(3, 3) == 3);  // the removed index itself is erased by callers
}

TEST_CASE("forbidden set ages and evicts entries") {
  SECTION("boundary eviction at exactly the timeout") {
    ForbiddenSet fs;
    fs.insert(4);
    for (int i = 0; i < 9; ++i) fs.tick(10);
    REQUIRE(fs.contains(4));
    CHECK(fs.age(4) == 9);
    fs.tick(10);
    CHECK_FALSE(fs.contains(4));
  }
  SECTION("empty set stays empty") {
    ForbiddenSet fs;
    fs.tick(10);
    CHECK(fs.empty());
  }
  SECTION("ages advance together") {
    ForbiddenSet fs;
    fs.insert(3);
    fs.tick(10);
    fs.tick(10);
    fs.insert(6);
    fs.tick(10);
    fs.tick(10);
    CHECK(fs.age(3) == 4);
    CHECK(fs.age(6) == 2);
  }
  SECTION("removal shifts higher entries down") {
    ForbiddenSet fs;
    fs.insert(3);
    fs.insert(5);
    fs.insert(7);
    fs.apply_slot_removal(5);
    CHECK(fs.size() == 2);
    CHECK(fs.contains(3));
    CHECK(fs.contains(6));
    CHECK_FALSE(fs.contains(5));
    CHECK_FALSE(fs.contains(7));
  }
}

TEST_CASE("resolved reception check tolerates exactly one bad superframe") {
  Rng rng(3);
  const std::vector<Beacon> good{beacon_with_record({1, 1}), beacon_with_record({2, 1})};
  const std::vector<Beacon> bad{beacon_with_record({1, 0})};

  SECTION("unanimous success clears the counter") {
    const auto r = resolved_failure_check(1, 2, good, 0.5, rng);
    CHECK(r.decision == RetentionDecision::Keep);
    CHECK(r.f == 0);
  }
  SECTION("first failure is tolerated") {
    const auto r = resolved_failure_check(0, 2, bad, 0.0, rng);
    CHECK(r.decision == RetentionDecision::Keep);
    CHECK(r.f == 1);
  }
  SECTION("second failure releases with probability 1 - tsr") {
    const auto r = resolved_failure_check(1, 2, bad, 0.0, rng);
    CHECK(r.decision == RetentionDecision::Release);
    CHECK(r.f == 0);
  }
  SECTION("full retention never releases") {
    for (int i = 0; i < 100; ++i) {
      const auto r = resolved_failure_check(5, 2, bad, 1.0, rng);
      CHECK(r.decision == RetentionDecision::Keep);
    }
  }
  SECTION("zero beacons count as success") {
    const auto r = resolved_failure_check(1, 2, {}, 0.0, rng);
    CHECK(r.decision == RetentionDecision::Keep);
    CHECK(r.f == 0);
  }
}
