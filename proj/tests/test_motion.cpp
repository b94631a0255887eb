#include <catch2/catch_amalgamated.hpp>

#include "csipose/motion.hpp"

using namespace csipose;

TEST_CASE("lifting both arms ramps flexion to vertical, legs stay put") {
  const BodyModel body;
  const MotionSpec spec = lift_both_arms(2.0, 0.5);
  const MotionResult res = synthesize_motion(spec, body, 1000.0, 1);
  const GroundTruth& truth = res.truth;

  CHECK(truth.moving == std::set<LimbId>{LimbId::LeftArm, LimbId::RightArm});
  const auto& left = truth.angles.at(LimbId::LeftArm);
  CHECK(left.front().flexion == Catch::Approx(0.0));
  CHECK(left.back().flexion == Catch::Approx(180.0).margin(0.2));
  // monotone rise after the static prefix
  for (size_t i = 1; i < left.size(); ++i) CHECK(left[i].flexion >= left[i - 1].flexion - 1e-9);
  const auto& leg = truth.angles.at(LimbId::LeftLeg);
  CHECK(leg.back().flexion == 0.0);
}

TEST_CASE("circle drawing closes the wrist loop") {
  const BodyModel body;
  const MotionSpec spec = draw_circle(LimbId::RightArm, 1, 2.0, 0.2);
  const MotionResult res = synthesize_motion(spec, body, 1000.0, 2);
  const auto& poses = res.truth.poses.at(LimbId::RightArm);

  // one full cycle: the loop start (after the lead-in) must match the end
  const auto start_idx = static_cast<size_t>(std::llround((0.2 + 1.5) * 1000.0));
  const Vec3 loop_start = poses[start_idx].dist;
  const Vec3 loop_end = poses.back().dist;
  CHECK((loop_end - loop_start).norm() < 5e-3);

  // and it is a genuine loop, not a point
  double max_excursion = 0;
  for (size_t i = start_idx; i < poses.size(); ++i)
    max_excursion = std::max(max_excursion, (poses[i].dist - loop_start).norm());
  CHECK(max_excursion > 0.10);
}

TEST_CASE("all-hold spec yields constant truth and empty moving set") {
  const BodyModel body;
  MotionSpec spec;
  spec.duration = 0.5;
  spec.programs[LimbId::LeftArm].phases = {MotionPhase::hold(0.5)};
  const MotionResult res = synthesize_motion(spec, body, 500.0, 3);
  CHECK(res.truth.moving.empty());
  for (LimbId limb : kAllLimbs) {
    const auto& poses = res.truth.poses.at(limb);
    for (const auto& p : poses) CHECK((p.mid - poses.front().mid).norm() < 1e-15);
  }
  CHECK(res.truth.size() == 250);
}

TEST_CASE("velocity bound violations are rejected") {
  const BodyModel body;
  MotionSpec spec;
  spec.duration = 0.5;
  spec.programs[LimbId::LeftArm].phases = {
      MotionPhase::ramp(0.5, JointAngles{170, 0, 0})};  // 340 deg/s
  CHECK_THROWS_AS(synthesize_motion(spec, body, 1000.0, 4), InfeasibleMotionError);

  // exactly at the bound is allowed
  MotionSpec ok;
  ok.duration = 1.0;
  ok.programs[LimbId::LeftArm].phases = {MotionPhase::ramp(1.0, JointAngles{180, 0, 0})};
  CHECK_NOTHROW(synthesize_motion(ok, body, 1000.0, 4));
}

TEST_CASE("random walks stay inside the range of motion") {
  const BodyModel body;
  const MotionSpec spec = free_form({LimbId::LeftArm, LimbId::RightLeg}, 4.0, 80.0, 0.0);
  const MotionResult res = synthesize_motion(spec, body, 1000.0, 99);
  CHECK(res.truth.moving == std::set<LimbId>{LimbId::LeftArm, LimbId::RightLeg});
  for (const auto& a : res.truth.angles.at(LimbId::RightLeg)) {
    CHECK(flexion_range(LimbId::RightLeg).contains(a.flexion));
    CHECK(abduction_range(LimbId::RightLeg).contains(a.abduction));
    CHECK(bend_range(LimbId::RightLeg).contains(a.bend));
  }
  // the walk actually moves
  double dev = 0;
  for (const auto& a : res.truth.angles.at(LimbId::LeftArm))
    dev = std::max(dev, std::abs(a.flexion));
  CHECK(dev > 2.0);
}

TEST_CASE("identical seeds reproduce identical walks") {
  const BodyModel body;
  const MotionSpec spec = free_form({LimbId::LeftArm}, 1.0, 60.0, 0.0);
  const MotionResult a = synthesize_motion(spec, body, 1000.0, 7);
  const MotionResult b = synthesize_motion(spec, body, 1000.0, 7);
  const auto& pa = a.truth.poses.at(LimbId::LeftArm);
  const auto& pb = b.truth.poses.at(LimbId::LeftArm);
  for (size_t i = 0; i < pa.size(); ++i) REQUIRE(pa[i].mid == pb[i].mid);
}
