#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "csipose/channel.hpp"

namespace csipose {

/// A 0.1 s window of CSI from one receiver. Samples are stored per antenna
/// pair (tx p, rx q) as an n_subcarriers x L complex matrix.
struct Segment {
  Receiver rx = Receiver::Rx1;
  double start_time = 0.0;
  double packet_rate = 1000.0;
  int n_tx = 0, n_rx = 0, n_sub = 0;
  bool calibrated = false;
  std::vector<Eigen::MatrixXcd> samples;  // [pair](subcarrier, t), pair = p * n_rx + q

  int length() const { return samples.empty() ? 0 : static_cast<int>(samples[0].cols()); }
  int n_pairs() const { return n_tx * n_rx; }
  int pair_index(int p, int q) const { return p * n_rx + q; }
};

/// Splits a time-ordered packet stream into contiguous non-overlapping 0.1 s
/// segments; the trailing partial window is dropped.
inline std::vector<Segment> segment_trace(std::span<const CsiFrame> frames, Receiver rx,
                                          double packet_rate) {
  if (packet_rate <= 0) throw ConfigError("packet_rate must be positive");
  const double dt_nominal = 1.0 / packet_rate;
  for (size_t i = 1; i < frames.size(); ++i) {
    const double dt = frames[i].timestamp - frames[i - 1].timestamp;
    if (dt <= 0)
      throw Error("packet timestamps not strictly increasing at t=" +
                  std::to_string(frames[i].timestamp));
    if (dt > 3.0 * dt_nominal)
      throw GapError("packet gap of " + std::to_string(dt) + " s at t=" +
                     std::to_string(frames[i - 1].timestamp) + " exceeds three packet intervals");
  }

  const auto window = static_cast<size_t>(std::llround(0.1 * packet_rate));
  std::vector<Segment> segments;
  if (window == 0 || frames.size() < window) return segments;

  for (size_t start = 0; start + window <= frames.size(); start += window) {
    Segment seg;
    seg.rx = rx;
    seg.start_time = frames[start].timestamp;
    seg.packet_rate = packet_rate;
    seg.n_tx = frames[start].n_tx;
    seg.n_rx = frames[start].n_rx;
    seg.n_sub = frames[start].n_sub;
    seg.samples.assign(static_cast<size_t>(seg.n_pairs()),
                       Eigen::MatrixXcd(seg.n_sub, static_cast<Eigen::Index>(window)));
    for (size_t t = 0; t < window; ++t) {
      const CsiFrame& f = frames[start + t];
      for (int p = 0; p < seg.n_tx; ++p)
        for (int q = 0; q < seg.n_rx; ++q)
          for (int k = 0; k < seg.n_sub; ++k)
            seg.samples[static_cast<size_t>(seg.pair_index(p, q))](k,
                                                                   static_cast<Eigen::Index>(t)) =
                f.h(p, q, k);
    }
    segments.push_back(std::move(seg));
  }
  return segments;
}

/// Removes the per-segment static component (temporal mean) from every
/// (pair, subcarrier) series. Idempotent.
inline Segment remove_static(Segment seg) {
  for (auto& mat : seg.samples) {
    const Eigen::VectorXcd mean = mat.rowwise().mean();
    mat.colwise() -= mean;
  }
  return seg;
}

/// Calibrates a raw segment: estimates the per-packet common phase injected
/// by the radio from the full antenna/subcarrier measurement vector
/// (alternating alignment against the static mean), removes it, then
/// subtracts the static component. Rx antenna 0 anchors the overall phase.
inline Segment calibrate(const Segment& raw) {
  if (raw.n_rx < 2) throw CalibrationError("calibration needs at least 2 rx antennas");
  const int L = raw.length();
  if (L == 0) throw CalibrationError("empty segment");

  // reference-antenna sanity: an all-zero reference series cannot anchor phase
  double ref_power = 0.0;
  for (int p = 0; p < raw.n_tx; ++p)
    ref_power += raw.samples[static_cast<size_t>(raw.pair_index(p, 0))].squaredNorm();
  if (ref_power <= 0.0) throw CalibrationError("reference antenna series is all zero");

  const int dim = raw.n_pairs() * raw.n_sub;
  Eigen::MatrixXcd v(dim, L);
  for (int pair = 0; pair < raw.n_pairs(); ++pair)
    v.block(pair * raw.n_sub, 0, raw.n_sub, L) = raw.samples[static_cast<size_t>(pair)];

  Eigen::VectorXd psi = Eigen::VectorXd::Zero(L);
  for (int iter = 0; iter < 2; ++iter) {
    Eigen::VectorXcd mean = Eigen::VectorXcd::Zero(dim);
    for (int t = 0; t < L; ++t)
      mean += v.col(t) * Cplx{std::cos(-psi[t]), std::sin(-psi[t])};
    mean /= static_cast<double>(L);
    if (mean.norm() <= 1e-300) throw CalibrationError("segment mean vanishes; cannot align phase");
    for (int t = 0; t < L; ++t) {
      const Cplx corr = mean.dot(v.col(t));  // <v_t, mean> with Eigen's conj-on-left dot
      psi[t] = std::arg(corr);
    }
  }

  Segment out = raw;
  for (int t = 0; t < L; ++t) {
    const Cplx rot{std::cos(-psi[t]), std::sin(-psi[t])};
    for (auto& mat : out.samples) mat.col(t) *= rot;
  }
  out = remove_static(std::move(out));
  out.calibrated = true;
  return out;
}

/// Fraction of (non-DC) spectral energy in the limb-movement band
/// 0 < f <= 20 Hz. The DC bin is excluded from numerator and denominator;
/// the total non-DC energy comes from the Parseval identity.
inline double movement_energy_ratio(const Eigen::VectorXd& amplitude, double packet_rate) {
  const auto L = static_cast<int>(amplitude.size());
  if (L < 8) throw Error("movement energy ratio needs at least 8 samples");
  if (packet_rate <= 0) throw ConfigError("packet_rate must be positive");

  const double total = amplitude.squaredNorm();
  const double dc = amplitude.sum();
  const double denom = L * total - dc * dc;  // sum over non-DC bins of |X_k|^2
  if (denom <= 1e-24 * std::max(1.0, L * total)) return 0.0;

  const int half = L / 2;
  int band = static_cast<int>(std::floor(20.0 * L / packet_rate));
  band = std::min(band, half);

  double num = 0.0;
  for (int k = 1; k <= band; ++k) {
    Cplx bin{0.0, 0.0};
    const double w = -2.0 * std::numbers::pi * k / L;
    // Goertzel-style direct bin evaluation
    const Cplx step{std::cos(w), std::sin(w)};
    Cplx phase{1.0, 0.0};
    for (int t = 0; t < L; ++t) {
      bin += amplitude[t] * phase;
      phase *= step;
    }
    const double e = std::norm(bin);
    num += (2 * k == L) ? e : 2.0 * e;  // mirrored bin, except at Nyquist
  }
  return std::clamp(num / denom, 0.0, 1.0);
}

/// Per-subcarrier movement energy ratio averaged over all antenna pairs.
inline Eigen::VectorXd subcarrier_energy_ratios(const Segment& seg) {
  Eigen::VectorXd ratios = Eigen::VectorXd::Zero(seg.n_sub);
  for (int k = 0; k < seg.n_sub; ++k) {
    double acc = 0.0;
    for (const auto& mat : seg.samples)
      acc += movement_energy_ratio(mat.row(k).cwiseAbs().transpose(), seg.packet_rate);
    ratios[k] = acc / static_cast<double>(seg.samples.size());
  }
  return ratios;
}

/// Most motion-sensitive subcarrier; ties broken toward the lowest index.
inline int select_subcarrier(const Segment& seg) {
  const Eigen::VectorXd ratios = subcarrier_energy_ratios(seg);
  int best = 0;
  for (int k = 1; k < seg.n_sub; ++k)
    if (ratios[k] > ratios[best]) best = k;
  return best;
}

/// Antenna pairs ranked by movement energy ratio at one subcarrier,
/// strongest first; ties broken toward the lower pair index.
inline std::vector<int> rank_pairs_by_energy(const Segment& seg, int subcarrier) {
  std::vector<std::pair<double, int>> scored;
  for (int pair = 0; pair < seg.n_pairs(); ++pair) {
    const double r = movement_energy_ratio(
        seg.samples[static_cast<size_t>(pair)].row(subcarrier).cwiseAbs().transpose(),
        seg.packet_rate);
    scored.emplace_back(-r, pair);
  }
  std::sort(scored.begin(), scored.end());
  std::vector<int> order;
  order.reserve(scored.size());
  for (const auto& [negr, pair] : scored) order.push_back(pair);
  return order;
}

}  // namespace csipose
