#include <catch2/catch_amalgamated.hpp>

#include "dstr/record.hpp"
#include "dstr/rng.hpp"

using namespace dstr;

namespace {

Record make_record(std::initializer_list<int> settings) {
  std::vector<Setting> s;
  for (int v : settings) s.push_back(static_cast<Setting>(v));
  return Record(std::move(s));
}

// Extracts the 2-bit pair for a slot out of the wire bytes.
int pair_at(const std::vector<std::uint8_t>& bytes, std::size_t slot) {
  const std::size_t bit = 2 * (slot - 1);
  return (bytes[bit / 8] >> (bit % 8)) & 0x3;
}

}  // namespace

TEST_CASE("record wire encoding maps settings to bit pairs") {
  const Record r = make_record({1, 0, 2, 1, 1});
  const auto bytes = encode_record(r);
  REQUIRE(bytes.size() == 2);
  // pairs 01 00 10 01 01, slot 1 first
  CHECK(pair_at(bytes, 1) == 1);
  CHECK(pair_at(bytes, 2) == 0);
  CHECK(pair_at(bytes, 3) == 2);
  CHECK(pair_at(bytes, 4) == 1);
  CHECK(pair_at(bytes, 5) == 1);
  CHECK(decode_record(bytes, 5) == r);
}

TEST_CASE("empty record encodes to an empty bit-string") {
  CHECK(encode_record(Record{}).empty());
  CHECK(decode_record({}, 0) == Record{});
}

TEST_CASE("all-silent record encodes to zero pairs") {
  const Record r = make_record({0, 0, 0});
  const auto bytes = encode_record(r);
  REQUIRE(bytes.size() == 1);
  CHECK(bytes[0] == 0x00);
  CHECK(decode_record(bytes, 3) == r);
}

TEST_CASE("record round-trips for all lengths up to 512") {
  Rng rng(0xd57f00d);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t len = rng.below(513);
    std::vector<Setting> settings(len);
    for (auto& s : settings) s = static_cast<Setting>(rng.below(3));
    const Record r{std::move(settings)};
    CHECK(decode_record(encode_record(r), r.size()) == r);
  }
}

TEST_CASE("the invalid pair 11 is rejected") {
  CHECK_THROWS_AS(decode_record({0x03}, 1), std::invalid_argument);
  CHECK_THROWS_AS(decode_record({0x01}, 3), std::invalid_argument);  // short payload
}

TEST_CASE("available slots are exactly the 0 and 2 entries") {
  CHECK(available_slots(make_record({1, 0, 2, 1, 1})) == std::vector<std::size_t>{2, 3});
  CHECK(available_slots(make_record({1, 1, 1})).empty());
  CHECK(available_slots(make_record({0, 0})) == std::vector<std::size_t>{1, 2});
}

TEST_CASE("available slots never include a decoded slot") {
  Rng rng(42);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Setting> settings(1 + rng.below(64));
    for (auto& s : settings) s = static_cast<Setting>(rng.below(3));
    const Record r{std::move(settings)};
    for (std::size_t slot : available_slots(r)) CHECK(r.at(slot) != Setting::Received);
  }
}
