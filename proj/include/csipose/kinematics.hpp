#pragma once

#include <array>
#include <cmath>
#include <string>

#include "csipose/core.hpp"

namespace csipose {

/// One limb's joint angles in degrees.
///  - flexion:   shoulder flexion/extension (arm) or hip flexion (leg);
///               0 = hanging straight down, positive = forward/up.
///  - abduction: shoulder/hip abduction away from the body midline; >= 0.
///  - bend:      elbow flexion (arm, bends forward) or knee flexion
///               (leg, bends backward).
struct JointAngles {
  double flexion = 0.0;
  double abduction = 0.0;
  double bend = 0.0;
};

/// Allowed range of motion per angle, degrees (clinical averages; abduction
/// minimum held at 0 so limbs never cross the midline).
struct AngleRange {
  double lo, hi;
  bool contains(double v, double tol = 1e-9) const { return v >= lo - tol && v <= hi + tol; }
};

inline AngleRange flexion_range(LimbId limb) {
  return is_arm(limb) ? AngleRange{-60.0, 180.0} : AngleRange{-10.0, 50.0};
}
inline AngleRange abduction_range(LimbId limb) {
  return is_arm(limb) ? AngleRange{0.0, 120.0} : AngleRange{0.0, 45.0};
}
inline AngleRange bend_range(LimbId limb) {
  return is_arm(limb) ? AngleRange{0.0, 145.0} : AngleRange{0.0, 130.0};
}

inline void validate_angles(const JointAngles& a, LimbId limb) {
  const char* joint = is_arm(limb) ? "shoulder" : "hip";
  if (!flexion_range(limb).contains(a.flexion))
    throw AngleRangeError(std::string(joint) + "_flexion " + std::to_string(a.flexion) +
                          " deg outside [" + std::to_string(flexion_range(limb).lo) + ", " +
                          std::to_string(flexion_range(limb).hi) + "] for " + to_string(limb));
  if (!abduction_range(limb).contains(a.abduction))
    throw AngleRangeError(std::string(joint) + "_abduction " + std::to_string(a.abduction) +
                          " deg outside [0, " + std::to_string(abduction_range(limb).hi) +
                          "] for " + to_string(limb));
  const char* distal = is_arm(limb) ? "elbow_flexion" : "knee_flexion";
  if (!bend_range(limb).contains(a.bend))
    throw AngleRangeError(std::string(distal) + " " + std::to_string(a.bend) +
                          " deg outside [0, " + std::to_string(bend_range(limb).hi) + "] for " +
                          to_string(limb));
}

/// Standing subject in the tracking frame: anchors fixed, facing -y so that
/// the subject's left side points along +x (the canonical orientation the
/// limb-identification quadrant rule assumes).
struct BodyModel {
  std::array<Vec3, 2> shoulder_anchors{Vec3{0.80, 1.60, 1.40}, Vec3{0.40, 1.60, 1.40}};  // L, R
  std::array<Vec3, 2> hip_anchors{Vec3{0.72, 1.60, 0.85}, Vec3{0.48, 1.60, 0.85}};       // L, R
  double arm_upper_len = 0.30;  // upper arm, m
  double arm_lower_len = 0.27;  // forearm, m
  double leg_upper_len = 0.42;  // thigh, m
  double leg_lower_len = 0.41;  // shank, m

  Vec3 anchor(LimbId limb) const {
    const size_t side = is_left(limb) ? 0 : 1;
    return is_arm(limb) ? shoulder_anchors[side] : hip_anchors[side];
  }
  double upper_len(LimbId limb) const { return is_arm(limb) ? arm_upper_len : leg_upper_len; }
  double lower_len(LimbId limb) const { return is_arm(limb) ? arm_lower_len : leg_lower_len; }

  /// Default body scaled to a subject height (reference height 1.70 m).
  static BodyModel scaled_to_height(double height_m) {
    const double s = height_m / 1.70;
    BodyModel b;
    b.arm_upper_len *= s;
    b.arm_lower_len *= s;
    b.leg_upper_len *= s;
    b.leg_lower_len *= s;
    const Vec3 station{0.60, 1.60, 0.0};
    auto rescale = [&](Vec3& v) { v = station + Vec3{(v.x() - 0.60) * s, 0.0, v.z() * s}; };
    for (auto& v : b.shoulder_anchors) rescale(v);
    for (auto& v : b.hip_anchors) rescale(v);
    return b;
  }

  void validate() const {
    if (arm_upper_len <= 0 || arm_lower_len <= 0 || leg_upper_len <= 0 || leg_lower_len <= 0)
      throw ConfigError("segment lengths must be positive");
  }
};

struct JointChain {
  Vec3 proximal;  // elbow or knee
  Vec3 distal;    // wrist or ankle
  Vec3 midpoint;  // midpoint of the lower segment (forearm / shank)
};

namespace detail {
/// Direction of a segment in the world frame for a subject facing -y,
/// given flexion f and abduction a (radians) and the left/right sign.
/// Local components (left=+x, forward=-y, up=+z):
///   (s*sin(a)*cos(f), sin(f) forward, -cos(f)*cos(a) up)
inline Vec3 segment_dir(double f_rad, double a_rad, double side_sign) {
  const double cf = std::cos(f_rad), sf = std::sin(f_rad);
  const double ca = std::cos(a_rad), sa = std::sin(a_rad);
  return Vec3{side_sign * sa * cf, -sf, -cf * ca};
}
}  // namespace detail

/// Positions of the proximal joint, distal joint and the lower-segment
/// midpoint for one limb at the given joint angles.
inline JointChain forward_kinematics(const JointAngles& angles, const BodyModel& body,
                                     LimbId limb) {
  validate_angles(angles, limb);
  const double s = is_left(limb) ? 1.0 : -1.0;
  const double f = deg2rad(angles.flexion);
  const double a = deg2rad(angles.abduction);
  // Elbow bends the forearm forward; the knee folds the shank backward.
  const double bend_signed = is_arm(limb) ? angles.bend : -angles.bend;
  const double g = deg2rad(angles.flexion + bend_signed);

  const Vec3 anchor = body.anchor(limb);
  const Vec3 upper_dir = detail::segment_dir(f, a, s);
  const Vec3 lower_dir = detail::segment_dir(g, a, s);

  JointChain chain;
  chain.proximal = anchor + body.upper_len(limb) * upper_dir;
  chain.distal = chain.proximal + body.lower_len(limb) * lower_dir;
  chain.midpoint = chain.proximal + 0.5 * body.lower_len(limb) * lower_dir;
  return chain;
}

/// Reachable band of lower-segment midpoints around the anchor.
inline std::pair<double, double> midpoint_reach(const BodyModel& body, LimbId limb) {
  const double u = body.upper_len(limb);
  const double q = 0.5 * body.lower_len(limb);
  return {std::abs(u - q), u + q};
}

}  // namespace csipose
