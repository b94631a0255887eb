#include <catch2/catch_amalgamated.hpp>

#include "csipose/ica.hpp"
#include "csipose/rng.hpp"

using namespace csipose;

namespace {

/// Unit-modulus rotating phasor with a mild chirp, strongly non-Gaussian.
Eigen::VectorXcd phasor_source(int n, double omega, double chirp, double phase0) {
  Eigen::VectorXcd s(n);
  for (int t = 0; t < n; ++t) {
    const double phi = phase0 + omega * t + chirp * t * t / n;
    s[t] = Cplx{std::cos(phi), std::sin(phi)};
  }
  return s;
}

double best_correlation(const Eigen::VectorXcd& out, const Eigen::VectorXcd& src) {
  const Cplx c = src.dot(out);  // conjugated on src
  return std::abs(c) / (out.norm() * src.norm());
}

/// Random mixing matrix with controlled condition number.
Eigen::MatrixXcd random_mixing(int m, int k, double cond, Rng& rng) {
  auto random_unitary = [&](int n) {
    Eigen::MatrixXcd g(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = rng.cnormal();
    return Eigen::HouseholderQR<Eigen::MatrixXcd>(g).householderQ();
  };
  Eigen::MatrixXcd u = random_unitary(m);
  Eigen::MatrixXcd v = random_unitary(k);
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(m, k);
  for (int i = 0; i < k; ++i)
    a(i, i) = std::pow(cond, -static_cast<double>(i) / std::max(1, k - 1));
  return u.leftCols(k) * a.topRows(k) * v.adjoint();
}

/// Fraction of trials in which every source is recovered above the bar.
double contract_pass_rate(int n_trials, int k, double snr_db, double corr_bar,
                          std::uint64_t seed0) {
  const int L = 200, M = k;
  int pass = 0;
  for (int trial = 0; trial < n_trials; ++trial) {
    Rng rng(seed0 + static_cast<std::uint64_t>(trial));
    Eigen::MatrixXcd s(k, L);
    for (int i = 0; i < k; ++i)
      s.row(i) = phasor_source(L, rng.uniform(0.05, 0.5) + 0.35 * i, rng.uniform(-2.0, 2.0),
                               rng.uniform(0.0, 6.28))
                     .transpose();
    const Eigen::MatrixXcd a = random_mixing(M, k, rng.uniform(1.0, 10.0), rng);
    Eigen::MatrixXcd x = a * s;
    const double sigma = std::sqrt(x.squaredNorm() / x.size()) *
                         std::pow(10.0, -snr_db / 20.0);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) += sigma * rng.cnormal();

    const SeparatedSources sep = separate(x, k);

    // best assignment over source permutations (k <= 3)
    std::vector<int> perm(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) perm[static_cast<size_t>(i)] = i;
    double best_min = 0;
    do {
      double worst = 1.0;
      for (int i = 0; i < k; ++i)
        worst = std::min(worst, best_correlation(sep.sources.row(i).transpose(),
                                                 s.row(perm[static_cast<size_t>(i)]).transpose()));
      best_min = std::max(best_min, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (best_min >= corr_bar) ++pass;
  }
  return static_cast<double>(pass) / n_trials;
}

}  // namespace

TEST_CASE("single source with identity mixing passes through") {
  const Eigen::VectorXcd s = phasor_source(150, 0.2, 0.5, 0.3);
  Eigen::MatrixXcd x(1, 150);
  x.row(0) = s.transpose();
  const SeparatedSources sep = separate(x, 1);
  REQUIRE(sep.sources.rows() == 1);
  CHECK(best_correlation(sep.sources.row(0).transpose(), s) >= 0.999);
  // unit empirical power
  CHECK(sep.sources.row(0).squaredNorm() / 150.0 == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("two counter-rotating phasors separate through a random mixing") {
  Rng rng(33);
  const int L = 150;
  Eigen::MatrixXcd s(2, L);
  s.row(0) = phasor_source(L, 0.25, 0.8, 0.1).transpose();
  s.row(1) = phasor_source(L, -0.19, -0.5, 1.2).transpose();  // opposite sense
  Eigen::MatrixXcd a(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) a(i, j) = rng.cnormal();
  const Eigen::MatrixXcd x = a * s;
  const SeparatedSources sep = separate(x, 2);
  const double c00 = best_correlation(sep.sources.row(0).transpose(), s.row(0).transpose());
  const double c01 = best_correlation(sep.sources.row(0).transpose(), s.row(1).transpose());
  const double c10 = best_correlation(sep.sources.row(1).transpose(), s.row(0).transpose());
  const double c11 = best_correlation(sep.sources.row(1).transpose(), s.row(1).transpose());
  const double assignment = std::max(std::min(c00, c11), std::min(c01, c10));
  CHECK(assignment >= 0.99);
}

TEST_CASE("separation contract holds over random mixings") {
  // condensed version of the acceptance sweep
  CHECK(contract_pass_rate(60, 2, 20.0, 0.97, 1000) >= 0.95);
  CHECK(contract_pass_rate(30, 3, 20.0, 0.97, 5000) >= 0.95);
}

TEST_CASE("separation is deterministic") {
  Rng rng(71);
  const int L = 120;
  Eigen::MatrixXcd s(2, L);
  s.row(0) = phasor_source(L, 0.3, 1.0, 0.0).transpose();
  s.row(1) = phasor_source(L, -0.22, 0.3, 0.7).transpose();
  Eigen::MatrixXcd a(3, 2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) a(i, j) = rng.cnormal();
  Eigen::MatrixXcd x = a * s;
  const SeparatedSources r1 = separate(x, 2);
  const SeparatedSources r2 = separate(x, 2);
  CHECK(r1.sources == r2.sources);
  CHECK(r1.diagnostics[0].iterations == r2.diagnostics[0].iterations);
}

TEST_CASE("more sources than channels is a rank error") {
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Random(2, 100);
  CHECK_THROWS_AS(separate(x, 3), RankError);
}

TEST_CASE("rank-deficient channels are rejected") {
  const Eigen::VectorXcd s = phasor_source(100, 0.2, 0.0, 0.0);
  Eigen::MatrixXcd x(3, 100);
  x.row(0) = s.transpose();
  x.row(1) = 2.0 * s.transpose();
  x.row(2) = Cplx{0, 1} * s.transpose();
  CHECK_THROWS_AS(separate(x, 2), RankError);
}

TEST_CASE("non-convergence carries diagnostics") {
  Rng rng(5);
  const int L = 150;
  Eigen::MatrixXcd s(2, L);
  s.row(0) = phasor_source(L, 0.31, 0.9, 0.2).transpose();
  s.row(1) = phasor_source(L, -0.27, -0.4, 0.9).transpose();
  Eigen::MatrixXcd a(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) a(i, j) = rng.cnormal();
  Eigen::MatrixXcd x = a * s;
  IcaOptions strict;
  strict.tolerance = 0.0;  // unreachable
  strict.max_iters = 25;
  try {
    separate(x, 2, strict);
    FAIL("expected a convergence error");
  } catch (const ConvergenceError& e) {
    CHECK(e.iterations == 25);
    CHECK(std::isfinite(e.kurtosis));
  }
}
