#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "dstr/beacon.hpp"
#include "dstr/geometry.hpp"

namespace dstr {

struct ChannelParams {
  double wavelength = 0.125;          // m
  double path_loss_exponent = 2.0;    // gamma
  double pl0_db = 40.0;               // path loss at d0 = 1 m
  double noise_dbm = -101.0;          // total noise power
  double sinr_threshold_db = 15.0;    // Gamma, required SINR for decoding
  double energy_detect_margin_db = 3.0;  // dB above noise for energy detection

  void validate() const {
    if (path_loss_exponent <= 0.0) throw std::invalid_argument("path_loss_exponent must be > 0");
    if (sinr_threshold_db <= 0.0) throw std::invalid_argument("sinr_threshold_db must be > 0 dB");
    if (energy_detect_margin_db < 0.0)
      throw std::invalid_argument("energy_detect_margin_db must be >= 0");
  }
};

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

// Log-distance path loss with reference distance 1 m.
inline double path_loss_db(double d, const ChannelParams& p) {
  if (d <= 0.0) throw std::invalid_argument("path_loss_db: distance must be > 0");
  return p.pl0_db + 10.0 * p.path_loss_exponent * std::log10(d);
}

// Linear power gain of the link (receiver sees tx_mw * gain).
inline double link_gain(double d, const ChannelParams& p) {
  return std::pow(10.0, -path_loss_db(d, p) / 10.0);
}

// Beacon power for transmission slots: decodable at the safety radius with
// the given margin on top of the SINR threshold to absorb slot-reuse
// interference.
inline double beacon_tx_power_dbm(double safety_radius, const ChannelParams& p,
                                  double margin_db) {
  return p.noise_dbm + p.sinr_threshold_db + margin_db + path_loss_db(safety_radius, p);
}

// Management-slot power: decodable across the whole formation, with a fixed
// 3 dB headroom over the threshold at the farthest pair.
inline double adapt_tx_power_dbm(double max_diameter, const ChannelParams& p) {
  return p.noise_dbm + p.sinr_threshold_db + 3.0 + path_loss_db(max_diameter, p);
}

// How concurrent management-slot transmissions resolve at a listener.
// Pessimistic never allows capture, which keeps grow/shrink signaling
// consensus-safe; full SINR is available for sensitivity runs.
enum class MgmtModel { Pessimistic, Sinr };

struct SlotOutcome {
  enum class Kind : std::uint8_t { Nothing, Energy, Decoded } kind = Kind::Nothing;
  int sender = -1;  // valid when Decoded
  Beacon beacon;    // valid when Decoded

  static SlotOutcome nothing() { return {}; }
  static SlotOutcome energy() { return {Kind::Energy, -1, {}}; }
  static SlotOutcome decoded(int sender, Beacon b) {
    return {Kind::Decoded, sender, std::move(b)};
  }

  bool is_nothing() const { return kind == Kind::Nothing; }
  bool is_energy() const { return kind == Kind::Energy; }
  bool is_decoded() const { return kind == Kind::Decoded; }
  bool any_signal() const { return kind != Kind::Nothing; }
};

struct Transmission {
  int sender = -1;
  Vec3 position;
  double power_dbm = 0.0;
  const Beacon* beacon = nullptr;
};

// Classification given already-computed received powers, one per
// transmitter. Decoding needs SINR >= Gamma against noise plus every other
// co-slot transmitter; at most one transmitter can satisfy that when Gamma
// exceeds 0 dB. Energy detection needs total power over noise + margin.
inline SlotOutcome classify_slot(const std::vector<double>& rx_mw,
                                 const std::vector<Transmission>& transmitters,
                                 const ChannelParams& params, MgmtModel model) {
  if (transmitters.empty()) return SlotOutcome::nothing();
  const double noise_mw = dbm_to_mw(params.noise_dbm);
  double total_mw = 0.0;
  for (double p : rx_mw) total_mw += p;

  const bool allow_capture = model == MgmtModel::Sinr || transmitters.size() == 1;
  if (allow_capture) {
    const double gamma = std::pow(10.0, params.sinr_threshold_db / 10.0);
    std::size_t best = 0;
    double best_sinr = -1.0;
    for (std::size_t i = 0; i < rx_mw.size(); ++i) {
      const double sinr = rx_mw[i] / (noise_mw + (total_mw - rx_mw[i]));
      if (sinr > best_sinr) {
        best_sinr = sinr;
        best = i;
      }
    }
    if (best_sinr >= gamma) {
      const auto& t = transmitters[best];
      return SlotOutcome::decoded(t.sender, t.beacon ? *t.beacon : Beacon{});
    }
  }
  const double floor_mw = noise_mw * std::pow(10.0, params.energy_detect_margin_db / 10.0);
  return total_mw >= floor_mw ? SlotOutcome::energy() : SlotOutcome::nothing();
}

// Resolves what one listening radio experiences in one slot.
inline SlotOutcome resolve_slot(const Vec3& receiver,
                                const std::vector<Transmission>& transmitters,
                                const ChannelParams& params,
                                MgmtModel model = MgmtModel::Sinr) {
  std::vector<double> rx_mw(transmitters.size());
  for (std::size_t i = 0; i < transmitters.size(); ++i) {
    const double d = distance(receiver, transmitters[i].position);
    rx_mw[i] = dbm_to_mw(transmitters[i].power_dbm) * link_gain(d, params);
  }
  return classify_slot(rx_mw, transmitters, params, model);
}

}  // namespace dstr
