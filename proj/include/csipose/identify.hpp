#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "csipose/music.hpp"

namespace csipose {

struct ClusterOptions {
  double eps_deg = 8.0;        // DBSCAN neighborhood radius, degrees
  int min_pts = 3;             // DBSCAN core-point threshold (neighborhood incl. self)
  double peak_threshold = 0.5; // keep cells above this fraction of the global max
};

struct IdentificationResult {
  std::set<LimbId> limbs;
  int count = 0;
  std::vector<std::pair<double, double>> centroids;  // (azimuth, elevation) per limb, limb order
};

namespace detail {

struct PeakCell {
  double az, el, weight;
};

/// Plain DBSCAN over (az, el) with Euclidean metric in degrees. Returns one
/// index list per cluster; noise points are dropped.
inline std::vector<std::vector<size_t>> dbscan(const std::vector<PeakCell>& pts, double eps,
                                               int min_pts) {
  const size_t n = pts.size();
  constexpr int kUnvisited = -2, kNoise = -1;
  std::vector<int> label(n, kUnvisited);
  const double eps2 = eps * eps;

  auto neighbors_of = [&](size_t i) {
    std::vector<size_t> out;
    for (size_t j = 0; j < n; ++j) {
      const double da = pts[i].az - pts[j].az, de = pts[i].el - pts[j].el;
      if (da * da + de * de <= eps2) out.push_back(j);
    }
    return out;
  };

  int next_cluster = 0;
  for (size_t i = 0; i < n; ++i) {
    if (label[i] != kUnvisited) continue;
    auto neigh = neighbors_of(i);
    if (static_cast<int>(neigh.size()) < min_pts) {
      label[i] = kNoise;
      continue;
    }
    const int cid = next_cluster++;
    label[i] = cid;
    std::vector<size_t> frontier(neigh.begin(), neigh.end());
    for (size_t f = 0; f < frontier.size(); ++f) {
      const size_t j = frontier[f];
      if (label[j] == kNoise) label[j] = cid;  // border point
      if (label[j] != kUnvisited) continue;
      label[j] = cid;
      auto jn = neighbors_of(j);
      if (static_cast<int>(jn.size()) >= min_pts)
        frontier.insert(frontier.end(), jn.begin(), jn.end());
    }
  }

  std::vector<std::vector<size_t>> clusters(static_cast<size_t>(next_cluster));
  for (size_t i = 0; i < n; ++i)
    if (label[i] >= 0) clusters[static_cast<size_t>(label[i])].push_back(i);
  return clusters;
}

}  // namespace detail

/// Thresholds the residual spectrum and clusters the retained cells with
/// DBSCAN; returns power-weighted cluster centroids as (azimuth, elevation).
/// An empty result means "no moving limbs".
inline std::vector<std::pair<double, double>> cluster_peaks(const AzElSpectrum& residual,
                                                            const ClusterOptions& opts = {}) {
  const double peak = residual.power.maxCoeff();
  if (!(peak > 0.0)) return {};
  std::vector<detail::PeakCell> cells;
  for (int r = 0; r < residual.n_el(); ++r)
    for (int c = 0; c < residual.n_az(); ++c)
      if (residual.power(r, c) >= opts.peak_threshold * peak)
        cells.push_back({residual.az_of(c), residual.el_of(r), residual.power(r, c)});

  std::vector<std::pair<double, double>> centroids;
  for (const auto& cluster : detail::dbscan(cells, opts.eps_deg, opts.min_pts)) {
    double waz = 0, wel = 0, wsum = 0;
    for (size_t i : cluster) {
      waz += cells[i].weight * cells[i].az;
      wel += cells[i].weight * cells[i].el;
      wsum += cells[i].weight;
    }
    centroids.emplace_back(waz / wsum, wel / wsum);
  }
  return centroids;
}

/// Quadrant rule for a subject facing the aoa array in the canonical
/// orientation. Centroids exactly on a 90 degree boundary go to the first
/// matching limb in the order LeftArm, RightArm, LeftLeg, RightLeg.
inline LimbId quadrant_limb(double az_deg, double el_deg) {
  const bool left_ok = az_deg <= 90.0, right_ok = az_deg >= 90.0;
  const bool arm_ok = el_deg <= 90.0, leg_ok = el_deg >= 90.0;
  for (LimbId limb : kAllLimbs) {
    const bool side = is_left(limb) ? left_ok : right_ok;
    const bool level = is_arm(limb) ? arm_ok : leg_ok;
    if (side && level) return limb;
  }
  return LimbId::LeftArm;  // unreachable: the quadrants cover the grid
}

/// Maps per-window centroid lists to limb identities; with several windows
/// the per-limb decision is a strict majority vote across windows.
inline IdentificationResult identify_limbs(
    const std::vector<std::vector<std::pair<double, double>>>& window_centroids) {
  const size_t n_windows = window_centroids.size();
  std::map<LimbId, int> votes;
  std::map<LimbId, std::pair<double, double>> acc;
  std::map<LimbId, int> acc_n;

  for (const auto& centroids : window_centroids) {
    std::map<LimbId, std::pair<double, double>> in_window;
    std::map<LimbId, int> in_window_n;
    for (const auto& [az, el] : centroids) {
      const LimbId limb = quadrant_limb(az, el);
      auto& [a, e] = in_window[limb];
      a += az;
      e += el;
      in_window_n[limb]++;
    }
    for (auto& [limb, sum] : in_window) {
      votes[limb]++;
      acc[limb].first += sum.first / in_window_n[limb];
      acc[limb].second += sum.second / in_window_n[limb];
      acc_n[limb]++;
    }
  }

  IdentificationResult result;
  for (LimbId limb : kAllLimbs) {
    const auto it = votes.find(limb);
    if (it == votes.end()) continue;
    if (2 * static_cast<size_t>(it->second) > n_windows) {
      result.limbs.insert(limb);
      result.centroids.emplace_back(acc[limb].first / acc_n[limb], acc[limb].second / acc_n[limb]);
    }
  }
  result.count = static_cast<int>(result.limbs.size());
  return result;
}

struct IdentifyOutcome {
  IdentificationResult result;
  AzElSpectrum static_spectrum;               // unit-peak
  std::vector<AzElSpectrum> residuals;        // one per window
};

/// Full identification pass over an aoa trace: static reference spectrum
/// from the motion-free head of the trace, then `n_windows` overlapping
/// 100-packet windows (50% overlap), each subtracted, clustered and voted.
inline IdentifyOutcome identify_trace(const MusicContext& ctx, std::span<const CsiFrame> frames,
                                      double static_window_s, int n_windows,
                                      const ClusterOptions& cluster_opts = {}) {
  if (n_windows < 1) throw Error("need at least one identification window");
  const double rate = ctx.channel().packet_rate;
  const auto static_count = static_cast<size_t>(std::llround(static_window_s * rate));
  const size_t window_len = 100, hop = 50;
  const size_t needed = static_count + window_len + hop * static_cast<size_t>(n_windows - 1);
  if (static_count < 100)
    throw Error("static reference window must cover at least 100 packets");
  if (frames.size() < needed)
    throw Error("trace too short: need " + std::to_string(needed) + " packets, have " +
                std::to_string(frames.size()));

  IdentifyOutcome outcome;
  outcome.static_spectrum =
      ctx.compute_spectrum(frames.subspan(0, static_count)).normalized();

  std::vector<std::vector<std::pair<double, double>>> window_centroids;
  for (int w = 0; w < n_windows; ++w) {
    const size_t start = static_count + hop * static_cast<size_t>(w);
    const AzElSpectrum dyn = ctx.compute_spectrum(frames.subspan(start, window_len)).normalized();
    AzElSpectrum residual = subtract_static(dyn, outcome.static_spectrum);
    window_centroids.push_back(cluster_peaks(residual, cluster_opts));
    outcome.residuals.push_back(std::move(residual));
  }
  outcome.result = identify_limbs(window_centroids);
  return outcome;
}

}  // namespace csipose
