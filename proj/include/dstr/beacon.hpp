#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "dstr/geometry.hpp"
#include "dstr/record.hpp"

namespace dstr {

// Slot labels within one superframe. The five management slots lead, then
// the transmission slots T1..Tn (1-based index).
enum class SlotKind : std::uint8_t { Grow, GrowNack, Shrink, ShrinkObject, ShrinkNack, Tx };

struct SlotId {
  SlotKind kind = SlotKind::Tx;
  std::size_t tx_index = 0;  // valid when kind == Tx

  static SlotId grow() { return {SlotKind::Grow, 0}; }
  static SlotId grow_nack() { return {SlotKind::GrowNack, 0}; }
  static SlotId shrink() { return {SlotKind::Shrink, 0}; }
  static SlotId shrink_object() { return {SlotKind::ShrinkObject, 0}; }
  static SlotId shrink_nack() { return {SlotKind::ShrinkNack, 0}; }
  static SlotId tx(std::size_t index) { return {SlotKind::Tx, index}; }

  bool is_management() const { return kind != SlotKind::Tx; }

  friend bool operator==(const SlotId& a, const SlotId& b) {
    return a.kind == b.kind && a.tx_index == b.tx_index;
  }
};

inline std::string to_string(const SlotId& s) {
  switch (s.kind) {
    case SlotKind::Grow: return "G";
    case SlotKind::GrowNack: return "GN";
    case SlotKind::Shrink: return "S";
    case SlotKind::ShrinkObject: return "SO";
    case SlotKind::ShrinkNack: return "SN";
    case SlotKind::Tx: return "T" + std::to_string(s.tx_index);
  }
  return "?";
}

struct SafetyInfo {
  Vec3 position;
  Vec3 heading{1.0, 0.0, 0.0};
  double speed = 0.0;
};

// The over-the-air message. Every transmission, periodic or management,
// is a beacon; only the signaling fields differ.
struct Beacon {
  std::size_t superframe_size = 0;  // transmission slots in the sender's view
  SlotId current_slot;
  bool grow_margin_flag = false;
  std::optional<std::size_t> slot_to_remove;
  bool leaving_flag = false;
  int uav_id = -1;
  SafetyInfo safety;
  Record record;
};

}  // namespace dstr
