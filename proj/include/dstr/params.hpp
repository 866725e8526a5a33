#pragma once

#include <stdexcept>

namespace dstr {

// Pre-deployment protocol settings shared by every UAV in the formation,
// plus the simulator-decided constants (backoff cap, shrink timings).
struct ProtocolParams {
  int ct = 3;                    // consecutive failed self-allocations before a grow request
  int gm = 3;                    // slots appended on a margin grow
  int st = 5;                    // silent superframes before a shrink proposal
  int dss = 10;                  // starting superframe size, in transmission slots
  double tsr = 0.75;             // time-slot retention probability
  int fst = 10;                  // forbidden-set entry timeout, in superframes
  int backoff_cap = 5;           // exponent cap for the shrink retry window
  double beacon_tx_power = 0.0;  // dBm, transmission slots
  double adapt_tx_power = 0.0;   // dBm, management slots

  void validate() const {
    if (ct < 1) throw std::invalid_argument("ct must be >= 1");
    if (gm < 1) throw std::invalid_argument("gm must be >= 1");
    if (st < 1) throw std::invalid_argument("st must be >= 1");
    if (dss < 1) throw std::invalid_argument("dss must be >= 1");
    if (tsr < 0.0 || tsr > 1.0) throw std::invalid_argument("tsr must be in [0,1]");
    if (fst < 1) throw std::invalid_argument("fst must be >= 1");
    if (backoff_cap < 1) throw std::invalid_argument("backoff_cap must be >= 1");
    if (adapt_tx_power < beacon_tx_power)
      throw std::invalid_argument("adapt power below beacon power");
  }
};

}  // namespace dstr
