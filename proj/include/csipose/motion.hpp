#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "csipose/kinematics.hpp"
#include "csipose/rng.hpp"

namespace csipose {

struct LimbPose {
  Vec3 mid, prox, dist;
};

/// Per-packet limb/joint truth emitted by the motion synthesizer; the
/// reference every downstream estimate is scored against.
struct GroundTruth {
  double packet_rate = 1000.0;
  std::vector<double> timestamps;
  std::map<LimbId, std::vector<LimbPose>> poses;  // all four limbs
  std::map<LimbId, std::vector<JointAngles>> angles;
  std::set<LimbId> moving;

  size_t size() const { return timestamps.size(); }
};

struct MotionPhase {
  enum class Kind { Hold, Ramp, Orbit, RandomWalk };
  Kind kind = Kind::Hold;
  double duration = 1.0;  // s

  JointAngles target{};  // Ramp: linear interpolation from current to target

  // Orbit: closed loop in (flexion, abduction), one revolution per 1/freq.
  double orbit_freq = 0.5;           // Hz
  double orbit_flexion_amp = 20.0;   // deg
  double orbit_abduction_amp = 20.0; // deg

  // RandomWalk: smoothed wander inside a safe sub-range of the ROM.
  double walk_speed = 60.0;  // deg/s scale

  static MotionPhase hold(double duration) { return {Kind::Hold, duration}; }
  static MotionPhase ramp(double duration, JointAngles to) {
    MotionPhase p{Kind::Ramp, duration};
    p.target = to;
    return p;
  }
  static MotionPhase orbit(double duration, double freq, double flex_amp, double abd_amp) {
    MotionPhase p{Kind::Orbit, duration};
    p.orbit_freq = freq;
    p.orbit_flexion_amp = flex_amp;
    p.orbit_abduction_amp = abd_amp;
    return p;
  }
  static MotionPhase random_walk(double duration, double speed) {
    MotionPhase p{Kind::RandomWalk, duration};
    p.walk_speed = speed;
    return p;
  }
};

struct LimbProgram {
  std::vector<MotionPhase> phases;
};

/// A motion description: a quiet prefix (everything at rest) followed by
/// per-limb phase programs. Limbs without a program stay at rest.
struct MotionSpec {
  double static_prefix = 0.0;  // s
  double duration = 1.0;       // s of motion after the prefix
  std::map<LimbId, LimbProgram> programs;
  double max_angular_velocity = 180.0;  // deg/s

  double total_duration() const { return static_prefix + duration; }
};

namespace detail {

/// Safe wander ranges for free-form random walks; leg knee flexion is kept
/// moderate so the shank midpoint stays below the array horizon.
inline AngleRange walk_flexion_range(LimbId limb) {
  return is_arm(limb) ? AngleRange{-50.0, 170.0} : AngleRange{-10.0, 50.0};
}
inline AngleRange walk_abduction_range(LimbId limb) {
  return is_arm(limb) ? AngleRange{0.0, 110.0} : AngleRange{0.0, 40.0};
}
inline AngleRange walk_bend_range(LimbId limb) {
  return is_arm(limb) ? AngleRange{0.0, 135.0} : AngleRange{0.0, 60.0};
}

struct WalkState {
  double v_flex = 0, v_abd = 0, v_bend = 0;
};

inline double walk_step(double value, double& velocity, const AngleRange& range, double dt,
                        double speed, double vmax, Rng& rng) {
  velocity = 0.995 * velocity + speed * 2.5 * std::sqrt(dt) * rng.normal();
  velocity = std::clamp(velocity, -vmax, vmax);
  double next = value + velocity * dt;
  if (next < range.lo) {
    next = range.lo + (range.lo - next);
    velocity = -velocity;
  } else if (next > range.hi) {
    next = range.hi - (next - range.hi);
    velocity = -velocity;
  }
  return std::clamp(next, range.lo, range.hi);
}

}  // namespace detail

struct MotionResult {
  BodyModel body;
  GroundTruth truth;
};

/// Samples the motion spec at the packet rate, producing per-limb angle and
/// joint series plus the moving-limb set. Angle series are validated against
/// the ROM and the angular-velocity bound.
inline MotionResult synthesize_motion(const MotionSpec& spec, const BodyModel& body,
                                      double packet_rate, std::uint64_t seed) {
  if (spec.duration < 0 || spec.static_prefix < 0)
    throw InfeasibleMotionError("motion durations must be non-negative");
  if (packet_rate <= 0) throw ConfigError("packet_rate must be positive");

  const double dt = 1.0 / packet_rate;
  const auto n_samples = static_cast<size_t>(std::llround(spec.total_duration() * packet_rate));
  if (n_samples == 0) throw InfeasibleMotionError("motion spec produces no samples");

  MotionResult result;
  result.body = body;
  GroundTruth& truth = result.truth;
  truth.packet_rate = packet_rate;
  truth.timestamps.resize(n_samples);
  for (size_t i = 0; i < n_samples; ++i) truth.timestamps[i] = static_cast<double>(i) * dt;

  for (LimbId limb : kAllLimbs) {
    std::vector<JointAngles> series(n_samples);
    JointAngles current{};  // rest pose
    const auto it = spec.programs.find(limb);

    if (it != spec.programs.end() && !it->second.phases.empty()) {
      const auto& phases = it->second.phases;
      size_t phase_idx = 0;
      double phase_start = spec.static_prefix;
      JointAngles phase_origin = current;
      detail::WalkState walk;
      Rng walk_rng = Rng::stream(seed, 7919u * (static_cast<unsigned>(limb) + 1) + phase_idx);

      for (size_t i = 0; i < n_samples; ++i) {
        const double t = truth.timestamps[i];
        if (t < spec.static_prefix) {
          series[i] = current;
          continue;
        }
        // advance to the phase containing t
        while (phase_idx < phases.size() && t >= phase_start + phases[phase_idx].duration) {
          // lock in the phase's end state before moving on
          const auto& ph = phases[phase_idx];
          if (ph.kind == MotionPhase::Kind::Ramp) current = ph.target;
          phase_start += ph.duration;
          ++phase_idx;
          phase_origin = current;
          walk = detail::WalkState{};
          walk_rng = Rng::stream(seed, 7919u * (static_cast<unsigned>(limb) + 1) + phase_idx);
        }
        if (phase_idx >= phases.size()) {
          series[i] = current;
          continue;
        }
        const auto& ph = phases[phase_idx];
        const double tau = t - phase_start;
        switch (ph.kind) {
          case MotionPhase::Kind::Hold:
            series[i] = current;
            break;
          case MotionPhase::Kind::Ramp: {
            const double a = std::clamp(tau / ph.duration, 0.0, 1.0);
            series[i] = {phase_origin.flexion + a * (ph.target.flexion - phase_origin.flexion),
                         phase_origin.abduction + a * (ph.target.abduction - phase_origin.abduction),
                         phase_origin.bend + a * (ph.target.bend - phase_origin.bend)};
            current = series[i];
            break;
          }
          case MotionPhase::Kind::Orbit: {
            const double w = 2.0 * std::numbers::pi * ph.orbit_freq * tau;
            series[i] = {phase_origin.flexion + ph.orbit_flexion_amp * std::sin(w),
                         phase_origin.abduction + ph.orbit_abduction_amp * (1.0 - std::cos(w)),
                         phase_origin.bend};
            current = series[i];
            break;
          }
          case MotionPhase::Kind::RandomWalk: {
            const double vmax = 0.9 * spec.max_angular_velocity;
            JointAngles next;
            next.flexion = detail::walk_step(current.flexion, walk.v_flex,
                                             detail::walk_flexion_range(limb), dt, ph.walk_speed,
                                             vmax, walk_rng);
            next.abduction = detail::walk_step(current.abduction, walk.v_abd,
                                               detail::walk_abduction_range(limb), dt,
                                               ph.walk_speed, vmax, walk_rng);
            next.bend = detail::walk_step(current.bend, walk.v_bend,
                                          detail::walk_bend_range(limb), dt, ph.walk_speed, vmax,
                                          walk_rng);
            series[i] = next;
            current = next;
            break;
          }
        }
      }
    } else {
      for (size_t i = 0; i < n_samples; ++i) series[i] = current;
    }

    // Range and velocity feasibility over the sampled series.
    double max_dev = 0.0;
    for (size_t i = 0; i < n_samples; ++i) {
      validate_angles(series[i], limb);
      if (i > 0) {
        const double v = std::max({std::abs(series[i].flexion - series[i - 1].flexion),
                                   std::abs(series[i].abduction - series[i - 1].abduction),
                                   std::abs(series[i].bend - series[i - 1].bend)}) /
                         dt;
        if (v > spec.max_angular_velocity * (1.0 + 1e-9))
          throw InfeasibleMotionError("angular velocity " + std::to_string(v) + " deg/s on " +
                                      to_string(limb) + " exceeds the " +
                                      std::to_string(spec.max_angular_velocity) + " deg/s bound");
      }
      max_dev = std::max({max_dev, std::abs(series[i].flexion - series[0].flexion),
                          std::abs(series[i].abduction - series[0].abduction),
                          std::abs(series[i].bend - series[0].bend)});
    }
    if (max_dev > 1e-9) truth.moving.insert(limb);

    auto& poses = truth.poses[limb];
    poses.resize(n_samples);
    for (size_t i = 0; i < n_samples; ++i) {
      const JointChain chain = forward_kinematics(series[i], body, limb);
      poses[i] = LimbPose{chain.midpoint, chain.proximal, chain.distal};
    }
    truth.angles[limb] = std::move(series);
  }
  return result;
}

// Commonly used scripted motions.

/// Both arms raised from rest to straight up.
inline MotionSpec lift_both_arms(double duration = 2.0, double static_prefix = 1.0) {
  MotionSpec spec;
  spec.static_prefix = static_prefix;
  spec.duration = duration;
  const JointAngles up{180.0, 0.0, 0.0};
  spec.programs[LimbId::LeftArm].phases = {MotionPhase::ramp(duration, up)};
  spec.programs[LimbId::RightArm].phases = {MotionPhase::ramp(duration, up)};
  return spec;
}

/// One arm drawing closed circles; lead-in ramp to the loop anchor point.
inline MotionSpec draw_circle(LimbId arm, int cycles = 2, double cycle_s = 2.5,
                              double static_prefix = 1.0) {
  MotionSpec spec;
  spec.static_prefix = static_prefix;
  const double lead_in = 1.5;
  spec.duration = lead_in + cycles * cycle_s;
  spec.programs[arm].phases = {
      MotionPhase::ramp(lead_in, JointAngles{70.0, 25.0, 0.0}),
      MotionPhase::orbit(cycles * cycle_s, 1.0 / cycle_s, 18.0, 18.0)};
  return spec;
}

/// Free-form random wander on the given limbs.
inline MotionSpec free_form(const std::set<LimbId>& limbs, double duration, double speed = 60.0,
                            double static_prefix = 1.0) {
  MotionSpec spec;
  spec.static_prefix = static_prefix;
  spec.duration = duration;
  for (LimbId limb : limbs)
    spec.programs[limb].phases = {MotionPhase::random_walk(duration, speed)};
  return spec;
}

}  // namespace csipose
