#include <catch2/catch_amalgamated.hpp>

#include "csipose/phase.hpp"
#include "csipose/rng.hpp"

using namespace csipose;

TEST_CASE("savitzky-golay reproduces cubics exactly, ends included") {
  const SavitzkyGolay sg(11, 3);
  Eigen::VectorXd x(40);
  for (int i = 0; i < 40; ++i) {
    const double t = 0.13 * i - 2.0;
    x[i] = 0.4 - 1.7 * t + 0.3 * t * t + 0.05 * t * t * t;
  }
  const Eigen::VectorXd y = sg.smooth(x);
  CHECK((y - x).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("savitzky-golay attenuates noise") {
  const SavitzkyGolay sg(11, 3);
  Rng rng(9);
  Eigen::VectorXd x(500);
  for (int i = 0; i < 500; ++i)
    x[i] = std::sin(2 * std::numbers::pi * i / 250.0) + 0.3 * rng.normal();
  Eigen::VectorXd clean(500);
  for (int i = 0; i < 500; ++i) clean[i] = std::sin(2 * std::numbers::pi * i / 250.0);
  const double before = (x - clean).squaredNorm();
  const double after = (sg.smooth(x) - clean).squaredNorm();
  CHECK(after < 0.4 * before);
}

TEST_CASE("phase unwrapping straightens a fast winding") {
  Eigen::VectorXd wrapped(200);
  for (int i = 0; i < 200; ++i) {
    double p = -0.11 * i;  // clockwise winding through many wraps
    while (p <= -std::numbers::pi) p += 2 * std::numbers::pi;
    wrapped[i] = p;
  }
  const Eigen::VectorXd u = unwrap_phase(wrapped);
  for (int i = 0; i < 200; ++i) CHECK(u[i] == Catch::Approx(-0.11 * i).margin(1e-9));
}

TEST_CASE("worked phase-to-distance conversions") {
  const double lambda = kSpeedOfLight / 5.32e9;  // 5.635 cm
  const int n = 100;

  auto clockwise_series = [&](double total) {
    Eigen::VectorXcd z(n);
    for (int i = 0; i < n; ++i) {
      const double phi = -total * i / (n - 1.0);  // clockwise: phase decreasing
      z[i] = Cplx{std::cos(phi), std::sin(phi)};
    }
    return z;
  };

  const SourceDelta a = path_length_delta(clockwise_series(3.25), lambda);
  CHECK(a.dphi == Catch::Approx(3.25).margin(1e-9));
  CHECK(a.delta == Catch::Approx(0.0291).margin(5e-4));   // 2.91 cm
  CHECK(std::abs(a.delta - 0.029) < 5e-4);                // vs the rounded 2.9 cm

  const SourceDelta b = path_length_delta(clockwise_series(3.51), lambda);
  CHECK(b.delta == Catch::Approx(0.0315).margin(5e-4));   // 3.15 cm
  CHECK(a.delta == Catch::Approx(a.dphi / (2 * std::numbers::pi) * lambda));

  const SourceDelta zero = path_length_delta(Eigen::VectorXcd::Ones(50), lambda);
  CHECK(zero.dphi == 0.0);
  CHECK(zero.delta == 0.0);
}

TEST_CASE("short series are rejected") {
  const double lambda = 0.056;
  CHECK_THROWS_AS(path_length_delta(Eigen::VectorXcd::Ones(10), lambda), Error);
}

TEST_CASE("path delta is invariant under complex scaling") {
  const double lambda = kSpeedOfLight / 5.32e9;
  Rng rng(12);
  Eigen::VectorXcd z(80);
  for (int i = 0; i < 80; ++i) {
    const double phi = -2.4 * i / 79.0 + 0.05 * std::sin(0.3 * i);
    z[i] = (1.0 + 0.1 * std::cos(0.2 * i)) * Cplx{std::cos(phi), std::sin(phi)};
  }
  const SourceDelta base = path_length_delta(z, lambda);
  for (int trial = 0; trial < 5; ++trial) {
    const double mag = rng.uniform(0.2, 5.0);
    const double ang = rng.uniform(0.0, 2 * std::numbers::pi);
    const Cplx c = mag * Cplx{std::cos(ang), std::sin(ang)};
    const SourceDelta scaled = path_length_delta(z * c, lambda);
    CHECK(scaled.dphi == Catch::Approx(base.dphi).margin(1e-9));
    CHECK(scaled.delta == Catch::Approx(base.delta).margin(1e-12));
  }
}
