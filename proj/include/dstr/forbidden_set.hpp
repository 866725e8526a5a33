#pragma once

#include <cstddef>
#include <map>

namespace dstr {

// Timed blacklist of transmission slots whose removal was vetoed. An entry
// ages once per superframe and is evicted when its age reaches the timeout.
class ForbiddenSet {
 public:
  bool contains(std::size_t slot) const { return ages_.count(slot) > 0; }
  bool empty() const { return ages_.empty(); }
  std::size_t size() const { return ages_.size(); }

  void insert(std::size_t slot) { ages_[slot] = 0; }

  int age(std::size_t slot) const {
    auto it = ages_.find(slot);
    return it == ages_.end() ? -1 : it->second;
  }

  // Called once per superframe: increment every age, evict entries that
  // have been in the set for `timeout` superframes.
  void tick(int timeout) {
    for (auto it = ages_.begin(); it != ages_.end();) {
      if (++it->second >= timeout)
        it = ages_.erase(it);
      else
        ++it;
    }
  }

  // Superframe shrink: the removed slot's entry is erased and every higher
  // index shifts down by one.
  void apply_slot_removal(std::size_t removed) {
    std::map<std::size_t, int> shifted;
    for (const auto& [slot, age] : ages_) {
      if (slot == removed) continue;
      shifted[slot > removed ? slot - 1 : slot] = age;
    }
    ages_ = std::move(shifted);
  }

  const std::map<std::size_t, int>& entries() const { return ages_; }

 private:
  std::map<std::size_t, int> ages_;  // slot -> superframes since insertion
};

}  // namespace dstr
