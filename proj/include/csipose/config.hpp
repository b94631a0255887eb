#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "csipose/core.hpp"

namespace csipose {

struct StaticReflector {
  Vec3 position{0, 0, 0};
  Cplx gain{0, 0};
};

/// Ambient interferer: a point scatterer oscillating sinusoidally along the
/// radial direction from the transmitter. Never assigned a limb identity.
struct InterferenceReflector {
  Vec3 position{0, 0, 0};
  double motion_amplitude = 0.0;  // m
  double motion_freq = 0.0;       // Hz
};

/// Radio and noise parameters of the simulated channel.
struct ChannelConfig {
  double carrier_freq = 5.32e9;  // Hz
  double bandwidth = 40e6;       // Hz
  int n_subcarriers = 30;
  int n_tx_antennas = 3;
  int n_rx_antennas = 3;
  double packet_rate = 1000.0;               // packets/s
  std::optional<double> noise_snr;           // dB; absent = noiseless
  double common_phase_noise_std = 0.5;       // rad per packet
  double nlos_attenuation = 1.0;             // (0, 1]
  std::vector<StaticReflector> static_reflectors;
  std::vector<InterferenceReflector> interference_reflectors;

  double wavelength() const { return kSpeedOfLight / carrier_freq; }

  /// Subcarrier k center frequency, symmetric about the carrier.
  double subcarrier_freq(int k) const {
    return carrier_freq + (k - 0.5 * (n_subcarriers - 1)) * (bandwidth / n_subcarriers);
  }

  void validate() const {
    if (carrier_freq <= 0) throw ConfigError("carrier_freq must be positive");
    if (n_subcarriers < 1) throw ConfigError("n_subcarriers must be >= 1");
    if (n_tx_antennas < 1 || n_rx_antennas < 1)
      throw ConfigError("antenna counts must be >= 1");
    if (packet_rate <= 0) throw ConfigError("packet_rate must be positive");
    if (!(nlos_attenuation > 0.0 && nlos_attenuation <= 1.0))
      throw ConfigError("nlos_attenuation must be in (0, 1]");
    if (common_phase_noise_std < 0) throw ConfigError("common_phase_noise_std must be >= 0");
  }
};

/// Positions of the transmitter, the three tracking receivers (one per
/// coordinate axis through the transmitter) and the L-array receiver.
///
/// Antenna-level geometry:
///  - tx antennas sit along +x at half-wavelength spacing from tx_position;
///  - tracking receiver i's antennas run along the next coordinate axis
///    (x-axis receiver -> antennas along y, and so on);
///  - the L-array has its corner element at aoa_rx_position with one arm
///    along -x and one along -z, which matches the steering-vector phase
///    convention used by the spectrum estimator.
struct TransceiverLayout {
  Vec3 tx_position{0, 0, 0};
  std::array<Vec3, 3> rx_positions{Vec3{2, 0, 0}, Vec3{0, 2, 0}, Vec3{0, 0, 2}};
  Vec3 aoa_rx_position{0.6, 0.7, 0.6};  // 1.1 m from the tx
  double element_spacing = 0.5 * kSpeedOfLight / 5.32e9;  // λ/2

  static TransceiverLayout with_defaults(double wavelength, double r = 2.0) {
    TransceiverLayout layout;
    layout.rx_positions = {Vec3{r, 0, 0}, Vec3{0, r, 0}, Vec3{0, 0, r}};
    layout.element_spacing = 0.5 * wavelength;
    return layout;
  }

  double tracking_radius() const { return (rx_positions[0] - tx_position).norm(); }

  Vec3 tx_antenna(int p) const { return tx_position + Vec3{p * element_spacing, 0, 0}; }

  Vec3 rx_antenna(Receiver rx, int q) const {
    if (rx == Receiver::Aoa) {
      switch (q) {
        case 0: return aoa_rx_position;
        case 1: return aoa_rx_position - Vec3{element_spacing, 0, 0};
        case 2: return aoa_rx_position - Vec3{0, 0, element_spacing};
        default: throw ConfigError("aoa receiver has 3 antennas");
      }
    }
    const int i = static_cast<int>(rx) - 1;
    Vec3 axis_dir = Vec3::Zero();
    axis_dir[(i + 1) % 3] = 1.0;
    return rx_positions[static_cast<size_t>(i)] + q * element_spacing * axis_dir;
  }

  void validate(double wavelength) const {
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        const Vec3 a = rx_positions[static_cast<size_t>(i)] - tx_position;
        const Vec3 b = rx_positions[static_cast<size_t>(j)] - tx_position;
        if (std::abs(a.dot(b)) > 1e-9 * a.norm() * b.norm())
          throw ConfigError("tracking receivers must lie on orthogonal axes through the tx");
      }
    const double expected = 0.5 * wavelength;
    if (std::abs(element_spacing - expected) > 1e-12 * expected)
      throw ConfigError("array element spacing must equal half the carrier wavelength");
  }
};

// ---------------------------------------------------------------------------
// JSON bindings (field names match the on-disk config format).
// ---------------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const StaticReflector& r) {
  j = {{"position", {r.position.x(), r.position.y(), r.position.z()}},
       {"gain", {r.gain.real(), r.gain.imag()}}};
}
inline void from_json(const nlohmann::json& j, StaticReflector& r) {
  const auto& p = j.at("position");
  r.position = Vec3{p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()};
  const auto& g = j.at("gain");
  r.gain = Cplx{g.at(0).get<double>(), g.at(1).get<double>()};
}

inline void to_json(nlohmann::json& j, const InterferenceReflector& r) {
  j = {{"position", {r.position.x(), r.position.y(), r.position.z()}},
       {"motion_amplitude", r.motion_amplitude},
       {"motion_freq", r.motion_freq}};
}
inline void from_json(const nlohmann::json& j, InterferenceReflector& r) {
  const auto& p = j.at("position");
  r.position = Vec3{p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()};
  r.motion_amplitude = j.at("motion_amplitude");
  r.motion_freq = j.at("motion_freq");
}

inline void to_json(nlohmann::json& j, const ChannelConfig& c) {
  j = {{"carrier_freq", c.carrier_freq},
       {"bandwidth", c.bandwidth},
       {"n_subcarriers", c.n_subcarriers},
       {"n_tx_antennas", c.n_tx_antennas},
       {"n_rx_antennas", c.n_rx_antennas},
       {"packet_rate", c.packet_rate},
       {"noise_snr", nullptr},
       {"common_phase_noise_std", c.common_phase_noise_std},
       {"nlos_attenuation", c.nlos_attenuation},
       {"static_reflectors", c.static_reflectors},
       {"interference_reflectors", c.interference_reflectors}};
  if (c.noise_snr) j["noise_snr"] = *c.noise_snr;
}
inline void from_json(const nlohmann::json& j, ChannelConfig& c) {
  c = ChannelConfig{};
  if (j.contains("carrier_freq")) c.carrier_freq = j.at("carrier_freq");
  if (j.contains("bandwidth")) c.bandwidth = j.at("bandwidth");
  if (j.contains("n_subcarriers")) c.n_subcarriers = j.at("n_subcarriers");
  if (j.contains("n_tx_antennas")) c.n_tx_antennas = j.at("n_tx_antennas");
  if (j.contains("n_rx_antennas")) c.n_rx_antennas = j.at("n_rx_antennas");
  if (j.contains("packet_rate")) c.packet_rate = j.at("packet_rate");
  if (j.contains("noise_snr") && !j.at("noise_snr").is_null())
    c.noise_snr = j.at("noise_snr").get<double>();
  if (j.contains("common_phase_noise_std")) c.common_phase_noise_std = j.at("common_phase_noise_std");
  if (j.contains("nlos_attenuation")) c.nlos_attenuation = j.at("nlos_attenuation");
  if (j.contains("static_reflectors"))
    c.static_reflectors = j.at("static_reflectors").get<std::vector<StaticReflector>>();
  if (j.contains("interference_reflectors"))
    c.interference_reflectors =
        j.at("interference_reflectors").get<std::vector<InterferenceReflector>>();
}

inline void to_json(nlohmann::json& j, const TransceiverLayout& l) {
  auto vec = [](const Vec3& v) { return nlohmann::json{v.x(), v.y(), v.z()}; };
  j = {{"tx_position", vec(l.tx_position)},
       {"rx_positions", {vec(l.rx_positions[0]), vec(l.rx_positions[1]), vec(l.rx_positions[2])}},
       {"aoa_rx_position", vec(l.aoa_rx_position)},
       {"element_spacing", l.element_spacing}};
}
inline void from_json(const nlohmann::json& j, TransceiverLayout& l) {
  auto vec = [](const nlohmann::json& a) { return Vec3{a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()}; };
  l = TransceiverLayout{};
  if (j.contains("tx_position")) l.tx_position = vec(j.at("tx_position"));
  if (j.contains("rx_positions")) {
    const auto& rs = j.at("rx_positions");
    for (size_t i = 0; i < 3; ++i) l.rx_positions[i] = vec(rs.at(i));
  }
  if (j.contains("aoa_rx_position")) l.aoa_rx_position = vec(j.at("aoa_rx_position"));
  if (j.contains("element_spacing")) l.element_spacing = j.at("element_spacing");
}

}  // namespace csipose
