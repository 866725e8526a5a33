#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace dstr {

// Per-slot reception outcome carried in every beacon.
enum class Setting : std::uint8_t {
  Nothing = 0,  // no energy sensed in the slot
  Received = 1, // a packet was decoded
  Energy = 2,   // energy sensed but undecodable
};

// Observation log over the transmission slots of one superframe, as shipped
// over the air. Slot indices are 1-based throughout the library.
class Record {
 public:
  Record() = default;
  explicit Record(std::size_t slots) : settings_(slots, Setting::Nothing) {}
  explicit Record(std::vector<Setting> settings) : settings_(std::move(settings)) {}

  std::size_t size() const { return settings_.size(); }
  bool empty() const { return settings_.empty(); }

  Setting at(std::size_t slot) const { return settings_.at(slot - 1); }
  void set(std::size_t slot, Setting s) { settings_.at(slot - 1) = s; }

  // Appends `n` slots reported as Nothing (superframe growth).
  void grow(std::size_t n) { settings_.resize(settings_.size() + n, Setting::Nothing); }

  const std::vector<Setting>& settings() const { return settings_; }

  friend bool operator==(const Record& a, const Record& b) {
    return a.settings_ == b.settings_;
  }

 private:
  std::vector<Setting> settings_;
};

// Wire layout: 2 bits per slot, slot i stored at bit offset 2*(i-1),
// least-significant bits of each byte first. Setting 0 -> 00, 1 -> 01,
// 2 -> 10; the pair 11 never appears in a valid record.
inline std::vector<std::uint8_t> encode_record(const Record& record) {
  std::vector<std::uint8_t> bytes((record.size() + 3) / 4, 0);
  for (std::size_t slot = 1; slot <= record.size(); ++slot) {
    const std::size_t bit = 2 * (slot - 1);
    bytes[bit / 8] |= static_cast<std::uint8_t>(record.at(slot)) << (bit % 8);
  }
  return bytes;
}

inline Record decode_record(const std::vector<std::uint8_t>& bytes, std::size_t slots) {
  if (bytes.size() < (slots + 3) / 4)
    throw std::invalid_argument("record payload shorter than slot count");
  Record record(slots);
  for (std::size_t slot = 1; slot <= slots; ++slot) {
    const std::size_t bit = 2 * (slot - 1);
    const std::uint8_t pair = (bytes[bit / 8] >> (bit % 8)) & 0x3;
    if (pair == 3) throw std::invalid_argument("invalid record pair 11");
    record.set(slot, static_cast<Setting>(pair));
  }
  return record;
}

// Slots a joining UAV may self-allocate to: exactly those reported as
// Nothing or Energy. Decoded slots are in use by a reachable transmitter.
inline std::vector<std::size_t> available_slots(const Record& record) {
  std::vector<std::size_t> out;
  for (std::size_t slot = 1; slot <= record.size(); ++slot)
    if (record.at(slot) != Setting::Received) out.push_back(slot);
  return out;
}

}  // namespace dstr
