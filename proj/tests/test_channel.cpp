#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "csipose/channel.hpp"
#include "csipose/io.hpp"

using namespace csipose;

namespace {

ChannelConfig quiet_config() {
  ChannelConfig cfg;
  cfg.common_phase_noise_std = 0.0;
  cfg.noise_snr.reset();
  return cfg;
}

MotionResult radial_motion(const BodyModel& body, double duration, double rate) {
  MotionSpec spec;
  spec.duration = duration;
  const double target = std::min(90.0, 120.0 * duration);
  spec.programs[LimbId::LeftArm].phases = {
      MotionPhase::ramp(duration, JointAngles{target, 0, 0})};
  return synthesize_motion(spec, body, rate, 11);
}

}  // namespace

TEST_CASE("static noiseless scene produces identical frames") {
  const ChannelConfig cfg = quiet_config();
  const TransceiverLayout layout = TransceiverLayout::with_defaults(cfg.wavelength());
  MotionSpec spec;
  spec.duration = 0.2;
  const MotionResult res = synthesize_motion(spec, BodyModel{}, cfg.packet_rate, 5);
  const auto frames = simulate_csi(res.truth, cfg, layout, Receiver::Rx1, 5);
  REQUIRE(frames.size() == 200);
  for (const auto& f : frames) REQUIRE(f.data == frames.front().data);
}

TEST_CASE("superposition: two-limb channel equals sum of single-limb channels") {
  ChannelConfig cfg = quiet_config();
  cfg.static_reflectors = {{Vec3{2.6, 2.2, 1.5}, Cplx{1.1, 0.4}}};
  const TransceiverLayout layout = TransceiverLayout::with_defaults(cfg.wavelength());
  const BodyModel body;
  const double rate = cfg.packet_rate;

  MotionSpec both;
  both.duration = 0.3;
  both.programs[LimbId::LeftArm].phases = {MotionPhase::ramp(0.3, JointAngles{40, 10, 20})};
  both.programs[LimbId::RightLeg].phases = {MotionPhase::ramp(0.3, JointAngles{30, 5, 10})};

  MotionSpec only_arm = both;
  only_arm.programs.erase(LimbId::RightLeg);
  MotionSpec only_leg = both;
  only_leg.programs.erase(LimbId::LeftArm);
  MotionSpec none;
  none.duration = 0.3;

  const auto t_both = synthesize_motion(both, body, rate, 1).truth;
  const auto t_arm = synthesize_motion(only_arm, body, rate, 1).truth;
  const auto t_leg = synthesize_motion(only_leg, body, rate, 1).truth;
  const auto t_none = synthesize_motion(none, body, rate, 1).truth;

  for (Receiver rx : {Receiver::Rx2, Receiver::Aoa}) {
    const auto f_both = simulate_csi(t_both, cfg, layout, rx, 9);
    const auto f_arm = simulate_csi(t_arm, cfg, layout, rx, 9);
    const auto f_leg = simulate_csi(t_leg, cfg, layout, rx, 9);
    const auto f_none = simulate_csi(t_none, cfg, layout, rx, 9);
    double max_err = 0;
    for (size_t i = 0; i < f_both.size(); ++i)
      for (size_t j = 0; j < f_both[i].data.size(); ++j)
        max_err = std::max(max_err,
                           std::abs(f_both[i].data[j] - f_arm[i].data[j] - f_leg[i].data[j] +
                                    f_none[i].data[j]));
    CHECK(max_err < 1e-9);
  }
}

TEST_CASE("dynamic phase advances by 2 pi per wavelength of path change") {
  const ChannelConfig cfg = quiet_config();
  const TransceiverLayout layout = TransceiverLayout::with_defaults(cfg.wavelength());
  const BodyModel body;
  const MotionResult res = radial_motion(body, 0.5, cfg.packet_rate);

  for (Receiver rx : {Receiver::Rx1, Receiver::Rx3}) {
    const auto dyn = limb_path_response(res.truth, cfg, layout, rx, LimbId::LeftArm);

    const int k = cfg.n_subcarriers / 2;
    const double fk = cfg.subcarrier_freq(k);
    const Vec3 tx = layout.tx_antenna(0);
    const Vec3 rq = layout.rx_antenna(rx, 0);

    double prev_phase = 0.0, unwrapped = 0.0;
    double len_start = 0.0, len_end = 0.0;
    for (size_t i = 0; i < dyn.size(); ++i) {
      const double ph = std::arg(dyn[i].h(0, 0, k));
      if (i == 0) {
        prev_phase = ph;
      } else {
        double d = ph - prev_phase;
        while (d > std::numbers::pi) d -= 2 * std::numbers::pi;
        while (d < -std::numbers::pi) d += 2 * std::numbers::pi;
        unwrapped += d;
        prev_phase = ph;
      }
      const Vec3 mid = res.truth.poses.at(LimbId::LeftArm)[i].mid;
      const double len = (mid - tx).norm() + (rq - mid).norm();
      if (i == 0) len_start = len;
      if (i + 1 == dyn.size()) len_end = len;
    }
    // receding path (longer) means the phase winds clockwise (negative)
    const double expected = -(len_end - len_start) * 2.0 * std::numbers::pi * fk / kSpeedOfLight;
    CHECK(std::abs(unwrapped - expected) < 1e-6);
  }
}

TEST_CASE("fixed seed reproduces bit-identical noisy traces") {
  ChannelConfig cfg;
  cfg.noise_snr = 15.0;
  const TransceiverLayout layout = TransceiverLayout::with_defaults(cfg.wavelength());
  const MotionResult res = radial_motion(BodyModel{}, 0.1, cfg.packet_rate);
  const auto a = simulate_csi(res.truth, cfg, layout, Receiver::Rx1, 1234);
  const auto b = simulate_csi(res.truth, cfg, layout, Receiver::Rx1, 1234);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) REQUIRE(a[i].data == b[i].data);
  const auto c = simulate_csi(res.truth, cfg, layout, Receiver::Rx1, 1235);
  CHECK(a.front().data != c.front().data);
}

TEST_CASE("nlos attenuation scales the noiseless channel linearly") {
  ChannelConfig cfg = quiet_config();
  const TransceiverLayout layout = TransceiverLayout::with_defaults(cfg.wavelength());
  const MotionResult res = radial_motion(BodyModel{}, 0.05, cfg.packet_rate);
  ChannelConfig lo = cfg;
  lo.nlos_attenuation = 0.3;
  const auto full = simulate_csi(res.truth, cfg, layout, Receiver::Rx2, 8);
  const auto att = simulate_csi(res.truth, lo, layout, Receiver::Rx2, 8);
  for (size_t j = 0; j < full.front().data.size(); ++j)
    CHECK(std::abs(att.front().data[j] - 0.3 * full.front().data[j]) < 1e-12);
}

TEST_CASE("noise snr controls the residual power") {
  ChannelConfig cfg = quiet_config();
  const TransceiverLayout layout = TransceiverLayout::with_defaults(cfg.wavelength());
  MotionSpec spec;
  spec.duration = 1.0;
  const auto truth = synthesize_motion(spec, BodyModel{}, cfg.packet_rate, 2).truth;
  const auto clean = simulate_csi(truth, cfg, layout, Receiver::Rx1, 77);

  ChannelConfig noisy = cfg;
  noisy.noise_snr = 20.0;
  const auto dirty = simulate_csi(truth, noisy, layout, Receiver::Rx1, 77);

  double signal = 0, noise = 0;
  for (size_t i = 0; i < clean.size(); ++i)
    for (size_t j = 0; j < clean[i].data.size(); ++j) {
      signal += std::norm(clean[i].data[j]);
      noise += std::norm(dirty[i].data[j] - clean[i].data[j]);
    }
  const double snr_db = 10.0 * std::log10(signal / noise);
  CHECK(snr_db == Catch::Approx(20.0).margin(0.3));
}

TEST_CASE("unknown receiver id is rejected") {
  CHECK_THROWS_AS(receiver_from_int(9), std::invalid_argument);
}

TEST_CASE("trace files round-trip bit-exactly") {
  ChannelConfig cfg;
  cfg.noise_snr = 25.0;
  cfg.static_reflectors = {{Vec3{1, 2, 1}, Cplx{0.5, -0.2}}};
  const TransceiverLayout layout = TransceiverLayout::with_defaults(cfg.wavelength());
  const MotionResult res = radial_motion(BodyModel{}, 0.02, cfg.packet_rate);
  const auto frames = simulate_csi(res.truth, cfg, layout, Receiver::Rx3, 42);

  const auto path = std::filesystem::temp_directory_path() / "csipose_trace_test.jsonl";
  write_trace(path, cfg, layout, Receiver::Rx3, frames);
  const TraceFile trace = read_trace(path);
  REQUIRE(trace.frames.size() == frames.size());
  CHECK(trace.rx == Receiver::Rx3);
  CHECK(trace.channel.noise_snr == cfg.noise_snr);
  CHECK(trace.channel.static_reflectors.size() == 1);
  for (size_t i = 0; i < frames.size(); ++i) {
    REQUIRE(trace.frames[i].data == frames[i].data);
    REQUIRE(trace.frames[i].timestamp == frames[i].timestamp);
  }
  std::filesystem::remove(path);
}

TEST_CASE("ground truth files round-trip") {
  const BodyModel body;
  const MotionResult res = radial_motion(body, 0.05, 1000.0);
  const auto path = std::filesystem::temp_directory_path() / "csipose_truth_test.jsonl";
  write_ground_truth(path, res.truth);
  const GroundTruth back = read_ground_truth(path, 1000.0);
  REQUIRE(back.size() == res.truth.size());
  CHECK(back.moving == res.truth.moving);
  for (LimbId limb : kAllLimbs)
    for (size_t i = 0; i < back.size(); ++i)
      REQUIRE((back.poses.at(limb)[i].mid - res.truth.poses.at(limb)[i].mid).norm() == 0.0);
  std::filesystem::remove(path);
}
