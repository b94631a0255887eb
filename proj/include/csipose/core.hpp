#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace csipose {

using Vec3 = Eigen::Vector3d;
using Cplx = std::complex<double>;

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s

inline constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// The four tracked limbs. Values double as canonical ordering everywhere
/// a deterministic limb order is needed (candidate enumeration, reports).
enum class LimbId : int { LeftArm = 0, RightArm = 1, LeftLeg = 2, RightLeg = 3 };

inline constexpr std::array<LimbId, 4> kAllLimbs{LimbId::LeftArm, LimbId::RightArm,
                                                 LimbId::LeftLeg, LimbId::RightLeg};

inline bool is_arm(LimbId limb) { return limb == LimbId::LeftArm || limb == LimbId::RightArm; }
inline bool is_left(LimbId limb) { return limb == LimbId::LeftArm || limb == LimbId::LeftLeg; }

inline std::string to_string(LimbId limb) {
  switch (limb) {
    case LimbId::LeftArm: return "left_arm";
    case LimbId::RightArm: return "right_arm";
    case LimbId::LeftLeg: return "left_leg";
    case LimbId::RightLeg: return "right_leg";
  }
  return "unknown";
}

inline LimbId limb_from_string(const std::string& s) {
  for (LimbId limb : kAllLimbs)
    if (to_string(limb) == s) return limb;
  throw std::invalid_argument("unknown limb name: " + s);
}

/// Receiver identifiers. Rx1..Rx3 are the tracking receivers on the
/// coordinate axes; Aoa carries the L-shaped array.
enum class Receiver : int { Rx1 = 1, Rx2 = 2, Rx3 = 3, Aoa = 4 };

inline constexpr std::array<Receiver, 3> kTrackingReceivers{Receiver::Rx1, Receiver::Rx2,
                                                            Receiver::Rx3};

inline Receiver receiver_from_int(int id) {
  if (id < 1 || id > 4) throw std::invalid_argument("unknown receiver id: " + std::to_string(id));
  return static_cast<Receiver>(id);
}

// ---------------------------------------------------------------------------
// Error hierarchy. Each named contract failure gets its own type so callers
// (and tests) can discriminate without parsing messages.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error { using Error::Error; };
struct AngleRangeError : Error { using Error::Error; };
struct InfeasibleMotionError : Error { using Error::Error; };
struct GapError : Error { using Error::Error; };
struct CalibrationError : Error { using Error::Error; };
struct DegenerateCovarianceError : Error { using Error::Error; };
struct GridMismatchError : Error { using Error::Error; };
struct RankError : Error { using Error::Error; };
struct NoIntersectionError : Error { using Error::Error; };
struct OutOfVolumeError : Error { using Error::Error; };
struct ReachabilityError : Error { using Error::Error; };
struct NoSolutionError : Error { using Error::Error; };
struct CoverageError : Error { using Error::Error; };
struct AlignmentError : Error { using Error::Error; };

struct ConvergenceError : Error {
  int iterations = 0;
  double kurtosis = 0.0;
  ConvergenceError(const std::string& msg, int iters, double kurt)
      : Error(msg), iterations(iters), kurtosis(kurt) {}
};

struct StitchError : Error {
  int segment_index = -1;
  explicit StitchError(const std::string& msg, int segment = -1)
      : Error(msg), segment_index(segment) {}
};

/// Stage failure wrapper used by the pipeline driver: remembers which stage
/// (and segment, when applicable) the underlying error came from.
struct StageError : Error {
  std::string stage;
  int segment_index = -1;
  StageError(const std::string& stage_name, const std::string& msg, int segment = -1)
      : Error(stage_name + ": " + msg), stage(stage_name), segment_index(segment) {}
};

}  // namespace csipose
