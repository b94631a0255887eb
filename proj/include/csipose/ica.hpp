#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/Polynomials>

#include "csipose/core.hpp"

namespace csipose {

struct IcaOptions {
  int max_iters = 200;
  double tolerance = 1e-6;  // on the extraction-vector change per iteration
};

struct SourceDiagnostics {
  int iterations = 0;
  double kurtosis = 0.0;
};

struct SeparatedSources {
  Eigen::MatrixXcd sources;  // K x L, unit empirical power, order arbitrary
  std::vector<SourceDiagnostics> diagnostics;
};

namespace detail {

/// Normalized kurtosis of a centered complex series:
/// (E|y|^4 - 2 (E|y|^2)^2 - |E y^2|^2) / (E|y|^2)^2.
inline double kurtosis_contrast(const Eigen::VectorXcd& y) {
  const double n = static_cast<double>(y.size());
  const double p2 = y.squaredNorm() / n;
  if (p2 <= 0) return 0.0;
  double p4 = 0.0;
  Cplx c2{0.0, 0.0};
  for (Eigen::Index t = 0; t < y.size(); ++t) {
    const double a2 = std::norm(y[t]);
    p4 += a2 * a2;
    c2 += y[t] * y[t];
  }
  p4 /= n;
  c2 /= n;
  return (p4 - 2.0 * p2 * p2 - std::norm(c2)) / (p2 * p2);
}

/// Real roots of a real-coefficient polynomial (ascending coefficients).
inline std::vector<double> real_roots(std::vector<double> coeffs) {
  double max_abs = 0.0;
  for (double c : coeffs) max_abs = std::max(max_abs, std::abs(c));
  if (max_abs == 0.0) return {};
  while (coeffs.size() > 1 && std::abs(coeffs.back()) < 1e-12 * max_abs) coeffs.pop_back();
  if (coeffs.size() <= 1) return {};
  if (coeffs.size() == 2) return {-coeffs[0] / coeffs[1]};
  Eigen::VectorXd poly = Eigen::Map<Eigen::VectorXd>(coeffs.data(),
                                                     static_cast<Eigen::Index>(coeffs.size()));
  Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
  solver.compute(poly);
  std::vector<double> roots;
  for (Eigen::Index i = 0; i < solver.roots().size(); ++i) {
    const auto& r = solver.roots()[i];
    if (std::abs(r.imag()) < 1e-8 * (1.0 + std::abs(r.real()))) roots.push_back(r.real());
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

inline double eval_poly(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
  return acc;
}

}  // namespace detail

/// Deflationary kurtosis-maximization ICA for complex-valued signals.
///
/// Channels are whitened to K dimensions by PCA; each source is extracted by
/// iterating the kurtosis-gradient update whose step size is chosen
/// algebraically: the kurtosis contrast along the search line is a rational
/// function whose stationary points are the real roots of a quartic, and the
/// root that globally maximizes |kurtosis| on the line is taken. Extraction
/// vectors are deflated by projection. Fully deterministic: initialization
/// walks the whitened basis, no randomness anywhere.
inline SeparatedSources separate(const Eigen::MatrixXcd& channels, int K,
                                 const IcaOptions& opts = {}) {
  const auto M = channels.rows();
  const auto L = channels.cols();
  if (K < 1) throw RankError("need at least one source");
  if (K > M)
    throw RankError("cannot extract " + std::to_string(K) + " sources from " +
                    std::to_string(M) + " channels");
  if (L < 8) throw Error("too few samples for separation");

  // center
  Eigen::MatrixXcd x = channels;
  const Eigen::VectorXcd mean = x.rowwise().mean();
  x.colwise() -= mean;

  // PCA whitening to K dimensions
  const Eigen::MatrixXcd cov = (x * x.adjoint()) / static_cast<double>(L);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(cov);
  if (eig.info() != Eigen::Success) throw Error("channel covariance eigendecomposition failed");
  const Eigen::VectorXd evals = eig.eigenvalues();  // ascending
  if (!(evals[M - 1] > 0.0)) throw RankError("channels carry no energy");
  for (int i = 0; i < K; ++i)
    if (evals[M - 1 - i] < 1e-12 * evals[M - 1])
      throw RankError("channels do not span " + std::to_string(K) + " dimensions");

  Eigen::MatrixXcd whiten(K, M);
  for (int i = 0; i < K; ++i)
    whiten.row(i) = eig.eigenvectors().col(M - 1 - i).adjoint() / std::sqrt(evals[M - 1 - i]);
  const Eigen::MatrixXcd z = whiten * x;  // K x L, identity covariance

  SeparatedSources out;
  out.sources.resize(K, L);
  out.diagnostics.resize(static_cast<size_t>(K));

  Eigen::MatrixXcd extracted(K, 0);
  auto deflate = [&](Eigen::VectorXcd v) {
    if (extracted.cols() > 0) v -= extracted * (extracted.adjoint() * v);
    return v;
  };

  for (int k = 0; k < K; ++k) {
    // deterministic init: first whitened basis vector with a usable
    // component outside the extracted subspace
    Eigen::VectorXcd w;
    for (int b = 0; b < K; ++b) {
      Eigen::VectorXcd cand = deflate(Eigen::VectorXcd::Unit(K, (k + b) % K));
      if (cand.norm() > 1e-6) {
        w = cand.normalized();
        break;
      }
    }
    if (w.size() == 0) throw RankError("whitened space exhausted during deflation");

    int iters = 0;
    bool converged = false;
    for (; iters < opts.max_iters; ++iters) {
      const Eigen::VectorXcd y = (w.adjoint() * z).transpose().conjugate();  // y_t = w^H z_t
      const double n = static_cast<double>(L);

      // moments
      const double p2 = y.squaredNorm() / n;
      double p4 = 0.0;
      Cplx c2{0, 0};
      for (Eigen::Index t = 0; t < L; ++t) {
        p4 += std::norm(y[t]) * std::norm(y[t]);
        c2 += y[t] * y[t];
      }
      p4 /= n;
      c2 /= n;

      // gradient of the kurtosis contrast (Wirtinger, up to a positive scale)
      Eigen::VectorXcd e_yz = Eigen::VectorXcd::Zero(K);    // E[conj(y) z]
      Eigen::VectorXcd e_yz2 = Eigen::VectorXcd::Zero(K);   // E[|y|^2 conj(y) z]
      Eigen::VectorXcd e_yzp = Eigen::VectorXcd::Zero(K);   // E[y z]
      for (Eigen::Index t = 0; t < L; ++t) {
        const Cplx yc = std::conj(y[t]);
        e_yz += yc * z.col(t);
        e_yz2 += std::norm(y[t]) * yc * z.col(t);
        e_yzp += y[t] * z.col(t);
      }
      e_yz /= n;
      e_yz2 /= n;
      e_yzp /= n;
      const double contrast_num = p4 - 2.0 * p2 * p2 - std::norm(c2);
      Eigen::VectorXcd g =
          p2 * (e_yz2 - 2.0 * p2 * e_yz - std::conj(c2) * e_yzp) - contrast_num * e_yz;
      g = deflate(g);

      if (g.norm() < 1e-14 * std::max(1.0, p2 * p2)) {
        converged = true;
        break;
      }

      // exact line search: kurtosis along w + mu g is N(mu)/Q(mu)^2
      const Eigen::VectorXcd h = (g.adjoint() * z).transpose().conjugate();
      std::vector<double> pa(3, 0.0);   // p2(mu)
      std::vector<double> pc4(5, 0.0);  // p4(mu)
      std::array<Cplx, 3> cc{Cplx{0, 0}, Cplx{0, 0}, Cplx{0, 0}};  // c2(mu)
      for (Eigen::Index t = 0; t < L; ++t) {
        const double A = std::norm(y[t]);
        const double B = 2.0 * std::real(y[t] * std::conj(h[t]));
        const double C = std::norm(h[t]);
        pa[0] += A;
        pa[1] += B;
        pa[2] += C;
        pc4[0] += A * A;
        pc4[1] += 2.0 * A * B;
        pc4[2] += B * B + 2.0 * A * C;
        pc4[3] += 2.0 * B * C;
        pc4[4] += C * C;
        cc[0] += y[t] * y[t];
        cc[1] += 2.0 * y[t] * h[t];
        cc[2] += h[t] * h[t];
      }
      for (auto& v : pa) v /= n;
      for (auto& v : pc4) v /= n;
      for (auto& v : cc) v /= n;

      // N(mu) = p4(mu) - 2 p2(mu)^2 - |c2(mu)|^2, degree 4, real
      std::vector<double> N(5, 0.0);
      for (int i = 0; i < 5; ++i) N[i] = pc4[i];
      for (int i = 0; i <= 2; ++i)
        for (int j = 0; j <= 2; ++j) {
          N[static_cast<size_t>(i + j)] -= 2.0 * pa[static_cast<size_t>(i)] *
                                           pa[static_cast<size_t>(j)];
          N[static_cast<size_t>(i + j)] -=
              std::real(cc[static_cast<size_t>(i)] * std::conj(cc[static_cast<size_t>(j)]));
        }

      // P(mu) = N'(mu) Q(mu) - 2 N(mu) Q'(mu); the mu^5 terms cancel
      const std::vector<double> Q{pa[0], pa[1], pa[2]};
      std::vector<double> dN{N[1], 2 * N[2], 3 * N[3], 4 * N[4]};
      std::vector<double> dQ{Q[1], 2 * Q[2]};
      std::vector<double> P(6, 0.0);
      for (size_t i = 0; i < dN.size(); ++i)
        for (size_t j = 0; j < Q.size(); ++j) P[i + j] += dN[i] * Q[j];
      for (size_t i = 0; i < N.size(); ++i)
        for (size_t j = 0; j < dQ.size(); ++j) P[i + j] -= 2.0 * N[i] * dQ[j];

      double best_mu = 0.0, best_val = std::abs(contrast_num / (p2 * p2));
      bool found = false;
      for (double mu : detail::real_roots(P)) {
        const double q = detail::eval_poly(Q, mu);
        if (q <= 1e-300) continue;
        const double val = std::abs(detail::eval_poly(N, mu) / (q * q));
        if (val > best_val * (1.0 + 1e-12)) {
          best_val = val;
          best_mu = mu;
          found = true;
        }
      }

      Eigen::VectorXcd w_new = found ? Eigen::VectorXcd(w + best_mu * g) : w;
      w_new = deflate(w_new);
      const double nrm = w_new.norm();
      if (nrm < 1e-12) throw ConvergenceError("extraction vector collapsed under deflation",
                                              iters, contrast_num / (p2 * p2));
      w_new /= nrm;

      // phase-align before measuring the update size
      const Cplx align = w.adjoint() * w_new;
      if (std::abs(align) > 0)
        w_new *= std::conj(align) / std::abs(align);
      const double change = (w_new - w).norm();
      w = w_new;
      if (change < opts.tolerance) {
        ++iters;
        converged = true;
        break;
      }
    }

    Eigen::VectorXcd y = (w.adjoint() * z).transpose().conjugate();
    const double kurt = detail::kurtosis_contrast(y);
    if (!converged)
      throw ConvergenceError("source " + std::to_string(k) + " did not converge within " +
                                 std::to_string(opts.max_iters) + " iterations",
                             iters, kurt);

    const double power = std::sqrt(y.squaredNorm() / static_cast<double>(L));
    if (power > 0) y /= power;
    out.sources.row(k) = y.transpose();
    out.diagnostics[static_cast<size_t>(k)] = {iters, kurt};

    extracted.conservativeResize(K, extracted.cols() + 1);
    extracted.col(extracted.cols() - 1) = w;
  }
  return out;
}

}  // namespace csipose
