#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "csipose/channel.hpp"
#include "csipose/config.hpp"
#include "csipose/motion.hpp"

namespace csipose {

struct TraceFile {
  ChannelConfig channel;
  TransceiverLayout layout;
  Receiver rx = Receiver::Rx1;
  std::vector<CsiFrame> frames;
};

/// Writes a CSI trace as JSON Lines: a metadata object first, then one
/// object per packet {"t", "rx", "h"} with h indexed [tx][rx][subcarrier].
inline void write_trace(const std::filesystem::path& path, const ChannelConfig& cfg,
                        const TransceiverLayout& layout, Receiver rx,
                        const std::vector<CsiFrame>& frames) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  nlohmann::json meta = {{"channel", cfg}, {"layout", layout}};
  out << meta.dump() << '\n';
  for (const CsiFrame& f : frames) {
    nlohmann::json h = nlohmann::json::array();
    for (int p = 0; p < f.n_tx; ++p) {
      nlohmann::json rxs = nlohmann::json::array();
      for (int q = 0; q < f.n_rx; ++q) {
        nlohmann::json subs = nlohmann::json::array();
        for (int k = 0; k < f.n_sub; ++k) {
          const Cplx& v = f.h(p, q, k);
          subs.push_back({v.real(), v.imag()});
        }
        rxs.push_back(std::move(subs));
      }
      h.push_back(std::move(rxs));
    }
    nlohmann::json line = {{"t", f.timestamp}, {"rx", static_cast<int>(rx)}, {"h", std::move(h)}};
    out << line.dump() << '\n';
  }
}

inline TraceFile read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trace " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error("empty trace file " + path.string());
  nlohmann::json meta = nlohmann::json::parse(line);
  TraceFile trace;
  trace.channel = meta.at("channel").get<ChannelConfig>();
  trace.layout = meta.at("layout").get<TransceiverLayout>();
  bool rx_set = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    const auto& h = j.at("h");
    const int n_tx = static_cast<int>(h.size());
    const int n_rx = static_cast<int>(h.at(0).size());
    const int n_sub = static_cast<int>(h.at(0).at(0).size());
    CsiFrame frame(j.at("t").get<double>(), n_tx, n_rx, n_sub);
    for (int p = 0; p < n_tx; ++p)
      for (int q = 0; q < n_rx; ++q)
        for (int k = 0; k < n_sub; ++k) {
          const auto& v = h.at(p).at(q).at(k);
          frame.h(p, q, k) = Cplx{v.at(0).get<double>(), v.at(1).get<double>()};
          if (!std::isfinite(frame.h(p, q, k).real()) || !std::isfinite(frame.h(p, q, k).imag()))
            throw Error("non-finite CSI value in " + path.string());
        }
    if (!rx_set) {
      trace.rx = receiver_from_int(j.at("rx").get<int>());
      rx_set = true;
    }
    trace.frames.push_back(std::move(frame));
  }
  return trace;
}

/// Ground-truth JSON Lines: {"t", "limb", "mid", "prox", "dist"}, meters.
inline void write_ground_truth(const std::filesystem::path& path, const GroundTruth& truth) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  auto vec = [](const Vec3& v) { return nlohmann::json{v.x(), v.y(), v.z()}; };
  for (size_t i = 0; i < truth.size(); ++i) {
    for (LimbId limb : kAllLimbs) {
      const auto it = truth.poses.find(limb);
      if (it == truth.poses.end()) continue;
      const LimbPose& pose = it->second[i];
      nlohmann::json line = {{"t", truth.timestamps[i]},
                             {"limb", to_string(limb)},
                             {"mid", vec(pose.mid)},
                             {"prox", vec(pose.prox)},
                             {"dist", vec(pose.dist)}};
      out << line.dump() << '\n';
    }
  }
}

inline GroundTruth read_ground_truth(const std::filesystem::path& path, double packet_rate) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open truth " + path.string());
  GroundTruth truth;
  truth.packet_rate = packet_rate;
  std::map<LimbId, std::vector<LimbPose>> poses;
  std::vector<double> times;
  std::string line;
  auto vec = [](const nlohmann::json& a) { return Vec3{a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()}; };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    const LimbId limb = limb_from_string(j.at("limb"));
    const double t = j.at("t");
    if (times.empty() || t > times.back() + 1e-12) times.push_back(t);
    poses[limb].push_back(LimbPose{vec(j.at("mid")), vec(j.at("prox")), vec(j.at("dist"))});
  }
  truth.timestamps = std::move(times);
  truth.poses = std::move(poses);
  for (const auto& [limb, series] : truth.poses) {
    for (const LimbPose& p : series)
      if ((p.mid - series.front().mid).norm() > 1e-9) {
        truth.moving.insert(limb);
        break;
      }
  }
  return truth;
}

// Small CSV helpers shared by the CLI and the evaluation stage.

inline void write_csv(const std::filesystem::path& path, const std::string& header,
                      const std::vector<std::string>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << header << '\n';
  for (const auto& r : rows) out << r << '\n';
}

inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                                      bool skip_header = true) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open csv " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first && skip_header) {
      first = false;
      continue;
    }
    first = false;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    rows.push_back(std::move(fields));
  }
  return rows;
}

/// Formats a double with enough digits to round-trip exactly.
inline std::string fmt_full(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

}  // namespace csipose
