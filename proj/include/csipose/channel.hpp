#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "csipose/config.hpp"
#include "csipose/motion.hpp"
#include "csipose/rng.hpp"

namespace csipose {

/// One packet's channel matrix, indexed (tx antenna, rx antenna, subcarrier).
struct CsiFrame {
  double timestamp = 0.0;
  int n_tx = 0, n_rx = 0, n_sub = 0;
  std::vector<Cplx> data;

  CsiFrame() = default;
  CsiFrame(double t, int tx, int rx, int sub)
      : timestamp(t), n_tx(tx), n_rx(rx), n_sub(sub),
        data(static_cast<size_t>(tx) * rx * sub) {}

  Cplx& h(int p, int q, int k) {
    return data[(static_cast<size_t>(p) * n_rx + q) * n_sub + k];
  }
  const Cplx& h(int p, int q, int k) const {
    return data[(static_cast<size_t>(p) * n_rx + q) * n_sub + k];
  }
};

namespace detail {

// Radar-cross-section style gain factors for the single specular point each
// reflector contributes. Legs reflect more strongly than arms; ambient
// interferers (whole bodies) more than either. The arm value puts the
// dynamic/static power ratio near -10 dB at 2 m range.
inline constexpr double kArmRcs = 0.63;
inline constexpr double kLegRcs = 1.5 * kArmRcs;
inline constexpr double kInterferenceRcs = 2.0 * kArmRcs;

inline double limb_rcs(LimbId limb) { return is_arm(limb) ? kArmRcs : kLegRcs; }

/// Adds amp * exp(-j 2π f_k L / c) for every subcarrier of one (p, q) pair,
/// using an incremental phasor over k so only two trig evaluations happen.
inline void accumulate_path(Cplx* row, const ChannelConfig& cfg, double path_len, double amp) {
  const double base_phase = -2.0 * std::numbers::pi * cfg.subcarrier_freq(0) * path_len /
                            kSpeedOfLight;
  const double step_phase = -2.0 * std::numbers::pi * (cfg.bandwidth / cfg.n_subcarriers) *
                            path_len / kSpeedOfLight;
  Cplx phasor = amp * Cplx{std::cos(base_phase), std::sin(base_phase)};
  const Cplx step{std::cos(step_phase), std::sin(step_phase)};
  for (int k = 0; k < cfg.n_subcarriers; ++k) {
    row[k] += phasor;
    phasor *= step;
  }
}

inline double two_hop_length(const Vec3& tx, const Vec3& point, const Vec3& rx) {
  return (point - tx).norm() + (rx - point).norm();
}

}  // namespace detail

inline int rx_antenna_count(const ChannelConfig& cfg, Receiver rx) {
  if (rx == Receiver::Aoa) {
    if (cfg.n_rx_antennas != 3)
      throw ConfigError("the L-array receiver requires exactly 3 rx antennas");
    return 3;
  }
  return cfg.n_rx_antennas;
}

/// Static part of the channel for one receiver: line of sight, configured
/// static reflectors, and every limb frozen at its initial pose. Scaled by
/// `attenuation` (pass cfg.nlos_attenuation, or 1 for the noise reference).
inline CsiFrame static_channel(const GroundTruth& truth, const ChannelConfig& cfg,
                               const TransceiverLayout& layout, Receiver rx, double attenuation) {
  const int n_rx = rx_antenna_count(cfg, rx);
  CsiFrame frame(0.0, cfg.n_tx_antennas, n_rx, cfg.n_subcarriers);
  for (int p = 0; p < cfg.n_tx_antennas; ++p) {
    const Vec3 tp = layout.tx_antenna(p);
    for (int q = 0; q < n_rx; ++q) {
      const Vec3 rq = layout.rx_antenna(rx, q);
      Cplx* row = &frame.h(p, q, 0);
      const double los_len = (rq - tp).norm();
      detail::accumulate_path(row, cfg, los_len, attenuation / los_len);
      for (const auto& refl : cfg.static_reflectors) {
        // reflector's own complex gain contributes a fixed extra phase
        const double len = detail::two_hop_length(tp, refl.position, rq);
        const double amp = attenuation * std::abs(refl.gain) / (len * len);
        const double base = -2.0 * std::numbers::pi * cfg.subcarrier_freq(0) * len /
                                kSpeedOfLight +
                            std::arg(refl.gain);
        const double step = -2.0 * std::numbers::pi * (cfg.bandwidth / cfg.n_subcarriers) * len /
                            kSpeedOfLight;
        Cplx phasor = amp * Cplx{std::cos(base), std::sin(base)};
        const Cplx stepf{std::cos(step), std::sin(step)};
        for (int k = 0; k < cfg.n_subcarriers; ++k) {
          row[k] += phasor;
          phasor *= stepf;
        }
      }
      for (LimbId limb : kAllLimbs) {
        if (truth.moving.count(limb)) continue;
        const Vec3 mid = truth.poses.at(limb).front().mid;
        const double len = detail::two_hop_length(tp, mid, rq);
        detail::accumulate_path(row, cfg, len,
                                attenuation * detail::limb_rcs(limb) / (len * len));
      }
    }
  }
  return frame;
}

/// Mean static-scene power at unit attenuation; the additive-noise floor is
/// defined relative to this so that NLoS attenuation lowers the effective SNR.
inline double noise_reference_power(const GroundTruth& truth, const ChannelConfig& cfg,
                                    const TransceiverLayout& layout, Receiver rx) {
  GroundTruth all_static = truth;
  all_static.moving.clear();  // every limb at its first pose
  const CsiFrame ref = static_channel(all_static, cfg, layout, rx, 1.0);
  double acc = 0.0;
  for (const Cplx& v : ref.data) acc += std::norm(v);
  return acc / static_cast<double>(ref.data.size());
}

/// Response of one limb's reflected path alone over time (no line of sight,
/// no statics, no noise). Useful for per-path diagnostics.
inline std::vector<CsiFrame> limb_path_response(const GroundTruth& truth,
                                                const ChannelConfig& cfg,
                                                const TransceiverLayout& layout, Receiver rx,
                                                LimbId limb) {
  const int n_rx = rx_antenna_count(cfg, rx);
  std::vector<CsiFrame> frames;
  frames.reserve(truth.size());
  for (size_t i = 0; i < truth.size(); ++i) {
    CsiFrame frame(truth.timestamps[i], cfg.n_tx_antennas, n_rx, cfg.n_subcarriers);
    const Vec3 mid = truth.poses.at(limb)[i].mid;
    for (int p = 0; p < cfg.n_tx_antennas; ++p) {
      const Vec3 tp = layout.tx_antenna(p);
      for (int q = 0; q < n_rx; ++q) {
        const Vec3 rq = layout.rx_antenna(rx, q);
        const double len = detail::two_hop_length(tp, mid, rq);
        detail::accumulate_path(&frame.h(p, q, 0), cfg, len,
                                cfg.nlos_attenuation * detail::limb_rcs(limb) / (len * len));
      }
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

/// Synthesizes the CSI packet stream seen by one receiver: static paths plus
/// one moving specular point per moving limb and per interference reflector,
/// a per-packet common random phase, and additive complex Gaussian noise.
inline std::vector<CsiFrame> simulate_csi(const GroundTruth& truth, const ChannelConfig& cfg,
                                          const TransceiverLayout& layout, Receiver rx,
                                          std::uint64_t seed) {
  cfg.validate();
  layout.validate(cfg.wavelength());
  if (std::abs(truth.packet_rate - cfg.packet_rate) > 1e-9 * cfg.packet_rate)
    throw ConfigError("ground truth must be sampled at the channel packet rate");
  const int n_rx = rx_antenna_count(cfg, rx);
  const size_t n_packets = truth.size();

  const CsiFrame statics = static_channel(truth, cfg, layout, rx, cfg.nlos_attenuation);
  double sigma = 0.0;
  if (cfg.noise_snr) {
    const double pref = noise_reference_power(truth, cfg, layout, rx);
    sigma = std::sqrt(pref * std::pow(10.0, -*cfg.noise_snr / 10.0));
  }

  Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(rx));
  std::vector<CsiFrame> frames;
  frames.reserve(n_packets);

  std::vector<LimbId> moving(truth.moving.begin(), truth.moving.end());

  for (size_t i = 0; i < n_packets; ++i) {
    CsiFrame frame = statics;
    frame.timestamp = truth.timestamps[i];

    for (int p = 0; p < cfg.n_tx_antennas; ++p) {
      const Vec3 tp = layout.tx_antenna(p);
      for (int q = 0; q < n_rx; ++q) {
        const Vec3 rq = layout.rx_antenna(rx, q);
        Cplx* row = &frame.h(p, q, 0);
        for (LimbId limb : moving) {
          const Vec3 mid = truth.poses.at(limb)[i].mid;
          const double len = detail::two_hop_length(tp, mid, rq);
          detail::accumulate_path(row, cfg, len,
                                  cfg.nlos_attenuation * detail::limb_rcs(limb) / (len * len));
        }
        for (const auto& interferer : cfg.interference_reflectors) {
          const Vec3 radial = (interferer.position - layout.tx_position).normalized();
          const Vec3 pos = interferer.position +
                           interferer.motion_amplitude *
                               std::sin(2.0 * std::numbers::pi * interferer.motion_freq *
                                        frame.timestamp) *
                               radial;
          const double len = detail::two_hop_length(tp, pos, rq);
          detail::accumulate_path(row, cfg, len,
                                  cfg.nlos_attenuation * detail::kInterferenceRcs / (len * len));
        }
      }
    }

    if (cfg.common_phase_noise_std > 0.0) {
      const double psi = rng.normal(0.0, cfg.common_phase_noise_std);
      const Cplx rot{std::cos(psi), std::sin(psi)};
      for (Cplx& v : frame.data) v *= rot;
    }
    if (sigma > 0.0) {
      for (Cplx& v : frame.data) v += sigma * rng.cnormal();
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

}  // namespace csipose
