#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "csipose/channel.hpp"
#include "csipose/config.hpp"

namespace csipose {

/// The two arms of the L-shaped array. Subarray X runs along the tracking
/// x axis, subarray Z along the tracking z axis; both share the corner
/// element (antenna 0).
enum class Subarray { X, Z };

/// Phase response of one subarray element to a unit plane wave arriving from
/// azimuth/elevation (degrees, both in [0, 180]) at half-wavelength spacing.
/// Element 0 is the shared corner and always responds with 1.
inline Cplx steering_element(double az_deg, double el_deg, Subarray sub, int m) {
  const double az = deg2rad(az_deg), el = deg2rad(el_deg);
  const double phase = (sub == Subarray::X)
                           ? -std::numbers::pi * m * std::cos(az) * std::sin(el)
                           : -std::numbers::pi * m * std::cos(el);
  return {std::cos(phase), std::sin(phase)};
}

/// Power over the azimuth x elevation grid.
struct AzElSpectrum {
  enum class Norm { Raw, UnitPeak };

  double step_deg = 2.0;
  Norm norm = Norm::Raw;
  Eigen::MatrixXd power;  // rows = elevation, cols = azimuth

  int n_az() const { return static_cast<int>(power.cols()); }
  int n_el() const { return static_cast<int>(power.rows()); }
  double az_of(int col) const { return col * step_deg; }
  double el_of(int row) const { return row * step_deg; }

  AzElSpectrum normalized() const {
    AzElSpectrum out = *this;
    const double peak = power.maxCoeff();
    if (peak > 0.0) out.power /= peak;
    out.norm = Norm::UnitPeak;
    return out;
  }

  /// (azimuth, elevation) of the global maximum, degrees.
  std::pair<double, double> peak() const {
    Eigen::Index r = 0, c = 0;
    power.maxCoeff(&r, &c);
    return {az_of(static_cast<int>(c)), el_of(static_cast<int>(r))};
  }
};

struct MusicOptions {
  double step_deg = 2.0;
  std::vector<double> reference_ranges{0.85, 1.0, 1.15, 1.3, 1.45};  // m
  int max_sources = 8;
  double eigenvalue_gap = 0.05;  // smallest s with lambda_{s+1}/lambda_1 below this
  int min_window = 100;          // packets
};

/// Precomputed virtual-array steering grids for one channel configuration.
///
/// Per subarray the virtual measurement vector stacks (rx element, tx
/// antenna, subcarrier) into 2 x n_tx x n_subcarriers entries. The steering
/// vector holds the exact spherical-wave phases of a reflector hypothesized
/// at a reference range along the look direction, which absorbs the
/// departure-angle and time-of-flight structure contributed by the tx
/// antennas and subcarriers. Range is a nuisance parameter: the spectrum
/// takes the best match over a small set of reference ranges so the grid
/// search itself stays two-dimensional.
class MusicContext {
 public:
  MusicContext(const ChannelConfig& cfg, const TransceiverLayout& layout, MusicOptions opts = {})
      : cfg_(cfg), layout_(layout), opts_(std::move(opts)) {
    if (cfg_.n_rx_antennas != 3)
      throw ConfigError("the L-array spectrum needs the 3-antenna aoa receiver");
    if (opts_.reference_ranges.empty()) throw ConfigError("need at least one reference range");
    n_az_ = static_cast<int>(std::llround(180.0 / opts_.step_deg)) + 1;
    n_el_ = n_az_;
    steering_x_.resize(opts_.reference_ranges.size());
    steering_z_.resize(opts_.reference_ranges.size());
    for (size_t ri = 0; ri < opts_.reference_ranges.size(); ++ri) {
      build_grid(Subarray::X, opts_.reference_ranges[ri], steering_x_[ri]);
      build_grid(Subarray::Z, opts_.reference_ranges[ri], steering_z_[ri]);
    }
  }

  const ChannelConfig& channel() const { return cfg_; }
  const TransceiverLayout& layout() const { return layout_; }
  const MusicOptions& options() const { return opts_; }
  int dim() const { return 2 * cfg_.n_tx_antennas * cfg_.n_subcarriers; }
  int n_cells() const { return n_az_ * n_el_; }

  /// MUSIC pseudospectrum over the az/el grid from a window of aoa frames.
  AzElSpectrum compute_spectrum(std::span<const CsiFrame> window) const {
    const auto T = static_cast<Eigen::Index>(window.size());
    if (T < opts_.min_window)
      throw Error("spectrum window needs at least " + std::to_string(opts_.min_window) +
                  " packets, got " + std::to_string(window.size()));
    bool all_identical = true;
    for (const CsiFrame& f : window) {
      if (f.n_rx < 3) throw Error("aoa frames must carry 3 rx antennas");
      if (f.data != window[0].data) all_identical = false;
    }
    if (all_identical)
      throw DegenerateCovarianceError(
          "covariance rank below 2: all frames in the window are identical");

    const Eigen::MatrixXcd sig_x = signal_subspace(window, Subarray::X);
    const Eigen::MatrixXcd sig_z = signal_subspace(window, Subarray::Z);

    AzElSpectrum spec;
    spec.step_deg = opts_.step_deg;
    spec.norm = AzElSpectrum::Norm::Raw;
    spec.power = Eigen::MatrixXd::Zero(n_el_, n_az_);
    for (size_t ri = 0; ri < opts_.reference_ranges.size(); ++ri) {
      const Eigen::MatrixXcd ox = sig_x.adjoint() * steering_x_[ri];
      const Eigen::MatrixXcd oz = sig_z.adjoint() * steering_z_[ri];
      for (int r = 0; r < n_el_; ++r)
        for (int c = 0; c < n_az_; ++c) {
          const int cell = r * n_az_ + c;
          const double null_x = std::max(1.0 - ox.col(cell).squaredNorm(), 1e-12);
          const double null_z = std::max(1.0 - oz.col(cell).squaredNorm(), 1e-12);
          spec.power(r, c) = std::max(spec.power(r, c), 1.0 / (null_x + null_z));
        }
    }
    return spec;
  }

 private:
  void build_grid(Subarray sub, double range, Eigen::MatrixXcd& grid) {
    const int d = dim();
    grid.resize(d, n_cells());
    const Vec3 corner = layout_.aoa_rx_position;
    const int outer_rx = (sub == Subarray::X) ? 1 : 2;
    for (int r = 0; r < n_el_; ++r) {
      const double el = r * opts_.step_deg;
      for (int c = 0; c < n_az_; ++c) {
        const double az = c * opts_.step_deg;
        const int cell = r * n_az_ + c;
        const Vec3 u{std::sin(deg2rad(el)) * std::cos(deg2rad(az)),
                     std::sin(deg2rad(el)) * std::sin(deg2rad(az)), std::cos(deg2rad(el))};
        const Vec3 hypothetical = corner + range * u;
        for (int qs = 0; qs < 2; ++qs) {
          const Vec3 rq = layout_.rx_antenna(Receiver::Aoa, qs == 0 ? 0 : outer_rx);
          for (int p = 0; p < cfg_.n_tx_antennas; ++p) {
            const double path = (hypothetical - layout_.tx_antenna(p)).norm() +
                                (hypothetical - rq).norm();
            for (int k = 0; k < cfg_.n_subcarriers; ++k) {
              const double phase =
                  -2.0 * std::numbers::pi * cfg_.subcarrier_freq(k) * path / kSpeedOfLight;
              grid(((qs * cfg_.n_tx_antennas) + p) * cfg_.n_subcarriers + k, cell) =
                  Cplx{std::cos(phase), std::sin(phase)};
            }
          }
        }
        grid.col(cell).normalize();
      }
    }
  }

  /// Top-s eigenvectors of the subarray sample covariance; s chosen by the
  /// eigenvalue-gap rule and capped.
  Eigen::MatrixXcd signal_subspace(std::span<const CsiFrame> window, Subarray sub) const {
    const int d = dim();
    const auto T = static_cast<Eigen::Index>(window.size());
    const int outer_rx = (sub == Subarray::X) ? 1 : 2;

    Eigen::MatrixXcd snapshots(d, T);
    for (Eigen::Index t = 0; t < T; ++t) {
      const CsiFrame& f = window[static_cast<size_t>(t)];
      for (int qs = 0; qs < 2; ++qs) {
        const int q = (qs == 0) ? 0 : outer_rx;
        for (int p = 0; p < cfg_.n_tx_antennas; ++p)
          for (int k = 0; k < cfg_.n_subcarriers; ++k)
            snapshots((qs * cfg_.n_tx_antennas + p) * cfg_.n_subcarriers + k, t) = f.h(p, q, k);
      }
    }

    Eigen::MatrixXcd cov = (snapshots * snapshots.adjoint()) / static_cast<double>(T);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(cov);
    if (eig.info() != Eigen::Success) throw Error("covariance eigendecomposition failed");
    const Eigen::VectorXd evals = eig.eigenvalues();  // ascending
    const double lambda_max = evals[d - 1];
    if (!(lambda_max > 0.0))
      throw DegenerateCovarianceError("covariance has no signal energy");

    const int s_cap = std::min<int>({opts_.max_sources, d - 1, static_cast<int>(T)});
    int s = s_cap;
    for (int i = 1; i <= s_cap; ++i) {
      if (evals[d - 1 - i] / lambda_max < opts_.eigenvalue_gap) {
        s = i;
        break;
      }
    }

    Eigen::MatrixXcd signal(d, s);
    for (int i = 0; i < s; ++i) signal.col(i) = eig.eigenvectors().col(d - 1 - i);
    return signal;
  }

  ChannelConfig cfg_;
  TransceiverLayout layout_;
  MusicOptions opts_;
  int n_az_ = 91, n_el_ = 91;
  std::vector<Eigen::MatrixXcd> steering_x_, steering_z_;
};

/// Residual after removing the static environment: max(0, dynamic - static).
/// Both inputs must share the grid and be unit-peak normalized.
inline AzElSpectrum subtract_static(const AzElSpectrum& dynamic, const AzElSpectrum& static_ref) {
  if (dynamic.step_deg != static_ref.step_deg || dynamic.n_az() != static_ref.n_az() ||
      dynamic.n_el() != static_ref.n_el())
    throw GridMismatchError("spectrum grids differ");
  if (dynamic.norm != AzElSpectrum::Norm::UnitPeak ||
      static_ref.norm != AzElSpectrum::Norm::UnitPeak)
    throw GridMismatchError("static subtraction requires unit-peak normalized spectra");
  AzElSpectrum out;
  out.step_deg = dynamic.step_deg;
  out.norm = AzElSpectrum::Norm::Raw;
  out.power = (dynamic.power - static_ref.power).cwiseMax(0.0);
  return out;
}

/// CSV dump for plotting: rows = elevation, cols = azimuth.
inline void write_spectrum_csv(const std::filesystem::path& path, const AzElSpectrum& spec) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.precision(10);
  for (int r = 0; r < spec.n_el(); ++r) {
    for (int c = 0; c < spec.n_az(); ++c) {
      if (c) out << ',';
      out << spec.power(r, c);
    }
    out << '\n';
  }
}

}  // namespace csipose
