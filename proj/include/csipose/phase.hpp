#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "csipose/core.hpp"

namespace csipose {

/// Least-squares polynomial smoother. Interior samples use the centered
/// window; the head and tail reuse the first/last window's fit so the series
/// endpoints (which set the phase change) are smoothed consistently.
class SavitzkyGolay {
 public:
  explicit SavitzkyGolay(int window = 11, int order = 3) : window_(window), order_(order) {
    if (window < 3 || window % 2 == 0) throw ConfigError("smoothing window must be odd and >= 3");
    if (order < 1 || order >= window) throw ConfigError("polynomial order must be in [1, window)");
    Eigen::MatrixXd vand(window, order + 1);
    for (int i = 0; i < window; ++i) {
      const double x = i - (window - 1) / 2.0;
      double pow_x = 1.0;
      for (int j = 0; j <= order; ++j) {
        vand(i, j) = pow_x;
        pow_x *= x;
      }
    }
    hat_ = vand * (vand.transpose() * vand).ldlt().solve(vand.transpose());
  }

  int window() const { return window_; }

  Eigen::VectorXd smooth(const Eigen::VectorXd& series) const {
    const auto n = static_cast<int>(series.size());
    if (n < window_) throw Error("series shorter than the smoothing window");
    const int half = (window_ - 1) / 2;
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) {
      int start = i - half;
      int row = half;
      if (start < 0) {
        row = i;
        start = 0;
      } else if (start + window_ > n) {
        row = i - (n - window_);
        start = n - window_;
      }
      out[i] = hat_.row(row) * series.segment(start, window_);
    }
    return out;
  }

  Eigen::VectorXcd smooth(const Eigen::VectorXcd& series) const {
    const Eigen::VectorXd re = smooth(Eigen::VectorXd(series.real()));
    const Eigen::VectorXd im = smooth(Eigen::VectorXd(series.imag()));
    Eigen::VectorXcd out(series.size());
    out.real() = re;
    out.imag() = im;
    return out;
  }

 private:
  int window_, order_;
  Eigen::MatrixXd hat_;
};

/// Continuous phase series: wrapped per-sample differences accumulated.
inline Eigen::VectorXd unwrap_phase(const Eigen::VectorXd& wrapped) {
  Eigen::VectorXd out(wrapped.size());
  if (wrapped.size() == 0) return out;
  out[0] = wrapped[0];
  for (Eigen::Index i = 1; i < wrapped.size(); ++i) {
    double d = wrapped[i] - wrapped[i - 1];
    while (d > std::numbers::pi) d -= 2.0 * std::numbers::pi;
    while (d < -std::numbers::pi) d += 2.0 * std::numbers::pi;
    out[i] = out[i - 1] + d;
  }
  return out;
}

/// Phase rotation and path-length change of one separated source over a
/// segment. Clockwise rotation in the complex plane (phase decreasing) means
/// the reflected path lengthened, so dphi and delta are positive when the
/// limb recedes: delta = dphi / (2 pi) * wavelength.
struct SourceDelta {
  double dphi = 0.0;   // rad, clockwise-positive
  double delta = 0.0;  // m, signed path-length change
};

inline SourceDelta path_length_delta(const Eigen::VectorXcd& source, double wavelength,
                                     const SavitzkyGolay& smoother = SavitzkyGolay{}) {
  if (source.size() < smoother.window())
    throw Error("source series shorter than the smoothing window");
  const Eigen::VectorXcd smoothed = smoother.smooth(source);
  Eigen::VectorXd phases(smoothed.size());
  for (Eigen::Index i = 0; i < smoothed.size(); ++i) phases[i] = std::arg(smoothed[i]);
  const Eigen::VectorXd cont = unwrap_phase(phases);
  SourceDelta out;
  out.dphi = -(cont[cont.size() - 1] - cont[0]);
  out.delta = out.dphi / (2.0 * std::numbers::pi) * wavelength;
  return out;
}

/// Per-segment deltas for all separated sources of one receiver; the wire
/// record emitted by the separation stage.
struct PathDelta {
  Receiver rx = Receiver::Rx1;
  double start_time = 0.0;
  int subcarrier = 0;
  std::vector<double> deltas;  // m, one per source, unordered across segments
  std::vector<double> dphi;    // rad
};

}  // namespace csipose
