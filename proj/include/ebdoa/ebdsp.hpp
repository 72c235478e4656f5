/*
Copyright 2026 The ebdoa Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS-IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

// Eigenbeam-domain covariance estimation and the EB-MVDR / EB-MUSIC spectra.

#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>

#include "ebdoa/errors.hpp"
#include "ebdoa/roomsim.hpp"
#include "ebdoa/sphharm.hpp"
#include "ebdoa/sps.hpp"

namespace ebdoa {

inline constexpr double kDefaultLoading = 1e-6;
inline constexpr double kMusicFloor = 1e-12;

/// Real symmetric (N+1)^2 x (N+1)^2 HOA covariance.
struct CovarianceMatrix {
  int order = 0;
  Eigen::MatrixXd values;

  Eigen::Index dim() const { return values.rows(); }
  double trace() const { return values.trace(); }
};

/// Manifold vectors of every cell of a direction grid.
struct SteeringTable {
  GridSpec spec;
  int order = 4;
  std::vector<Direction> directions;
  Eigen::MatrixXd manifolds;  // channels x cells

  SteeringTable() = default;
  SteeringTable(const GridSpec& s, int hoa_order)
      : spec(s), order(hoa_order), directions(build_grid(s)),
        manifolds(grid_manifold(directions, hoa_order)) {}
};

/// Broadband covariance (1/L) B B^T of a time-domain frame.
inline CovarianceMatrix time_cov(const HoaFrame& frame) {
  if (frame.length() == 0) throw DomainError("time_cov: empty frame");
  frame.validate();
  CovarianceMatrix cov{frame.order, Eigen::MatrixXd()};
  cov.values.noalias() = frame.samples * frame.samples.transpose();
  cov.values /= static_cast<double>(frame.length());
  return cov;
}

/// Sum over DFT bins [low_bin, high_bin] of Re{B(k) B(k)^H} / L^2 from a
/// rectangular full-frame DFT. Bins strictly between DC and Nyquist also
/// stand in for their negative-frequency mirror and carry weight 2, so the
/// full band [0, L/2] reproduces time_cov exactly (Parseval).
inline CovarianceMatrix freq_smoothed_cov(const HoaFrame& frame, Eigen::Index low_bin,
                                          Eigen::Index high_bin) {
  frame.validate();
  const Eigen::Index length = frame.length();
  const Eigen::Index nyquist = length / 2;
  if (low_bin < 0 || high_bin > nyquist)
    throw DomainError("freq_smoothed_cov: bins must lie in [0, " + std::to_string(nyquist) + "]");
  if (low_bin > high_bin) throw DomainError("freq_smoothed_cov: empty band");

  const Eigen::Index channels = frame.channels();
  const Eigen::Index bins = high_bin - low_bin + 1;
  Eigen::MatrixXcd spectra(channels, bins);
  Eigen::FFT<double> fft;
  std::vector<double> row(static_cast<std::size_t>(length));
  std::vector<std::complex<double>> spectrum;
  for (Eigen::Index ch = 0; ch < channels; ++ch) {
    for (Eigen::Index t = 0; t < length; ++t) row[static_cast<std::size_t>(t)] = frame.samples(ch, t);
    fft.fwd(spectrum, row);
    for (Eigen::Index k = 0; k < bins; ++k) {
      const Eigen::Index bin = low_bin + k;
      const bool self_mirror = bin == 0 || (length % 2 == 0 && bin == nyquist);
      const double weight = self_mirror ? 1.0 : std::sqrt(2.0);
      spectra(ch, k) = weight * spectrum[static_cast<std::size_t>(bin)];
    }
  }
  CovarianceMatrix cov{frame.order, (spectra * spectra.adjoint()).real()};
  cov.values /= static_cast<double>(length) * static_cast<double>(length);
  return cov;
}

/// R + eps * (trace(R) / M) * I.
inline CovarianceMatrix diag_load(const CovarianceMatrix& cov, double eps = kDefaultLoading) {
  if (eps < 0.0) throw DomainError("diag_load: negative loading");
  CovarianceMatrix out = cov;
  if (eps == 0.0) return out;
  const double delta = eps * cov.trace() / static_cast<double>(cov.dim());
  out.values.diagonal().array() += delta;
  return out;
}

namespace detail {

inline void check_table(const CovarianceMatrix& cov, const SteeringTable& table) {
  if (cov.values.rows() != cov.values.cols())
    throw DomainError("covariance is not square");
  if (cov.dim() != table.manifolds.rows())
    throw DomainError("covariance dimension " + std::to_string(cov.dim()) +
                      " does not match steering order " + std::to_string(table.order));
}

}  // namespace detail

/// 1 / (y^T R^-1 y) per cell after diagonal loading, via Cholesky.
inline SpsGrid eb_mvdr_spectrum(const CovarianceMatrix& cov, const SteeringTable& table,
                                double eps = kDefaultLoading) {
  detail::check_table(cov, table);
  const CovarianceMatrix loaded = diag_load(cov, eps);
  const Eigen::LLT<Eigen::MatrixXd> llt(loaded.values);
  if (llt.info() != Eigen::Success)
    throw NumericalError("eb_mvdr_spectrum: covariance not positive definite after loading");
  const Eigen::MatrixXd whitened = llt.matrixL().solve(table.manifolds);
  SpsGrid out(table.spec, SpsKind::Beamformer);
  for (Eigen::Index i = 0; i < whitened.cols(); ++i) {
    const double q = whitened.col(i).squaredNorm();
    if (!(q > 0.0) || !std::isfinite(q))
      throw NumericalError("eb_mvdr_spectrum: non-finite quadratic form");
    out.values[static_cast<std::size_t>(i)] = 1.0 / q;
  }
  return out;
}

inline SpsGrid eb_mvdr_spectrum(const CovarianceMatrix& cov, const GridSpec& spec = {},
                                double eps = kDefaultLoading) {
  return eb_mvdr_spectrum(cov, SteeringTable(spec, cov.order), eps);
}

/// MUSIC noise-subspace dimension default: seven arrivals per source, capped.
inline int default_music_sources(int source_count, int channels) {
  return std::clamp(7 * source_count, 1, channels - 1);
}

/// 1 / (||U_n^T y||^2 + 1e-12) with U_n the eigenvectors of the M - D
/// smallest eigenvalues of the loaded covariance.
inline SpsGrid eb_music_spectrum(const CovarianceMatrix& cov, const SteeringTable& table,
                                 int sources, double eps = kDefaultLoading) {
  detail::check_table(cov, table);
  const auto channels = static_cast<int>(cov.dim());
  if (sources < 1 || sources >= channels)
    throw DomainError("eb_music_spectrum: source count " + std::to_string(sources) +
                      " must lie in [1, " + std::to_string(channels - 1) + "]");
  const CovarianceMatrix loaded = diag_load(cov, eps);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(loaded.values);
  if (eig.info() != Eigen::Success)
    throw NumericalError("eb_music_spectrum: eigendecomposition failed");
  // Eigenvalues come back in ascending order.
  const Eigen::MatrixXd noise = eig.eigenvectors().leftCols(channels - sources);
  const Eigen::MatrixXd proj = noise.transpose() * table.manifolds;
  SpsGrid out(table.spec, SpsKind::Beamformer);
  for (Eigen::Index i = 0; i < proj.cols(); ++i)
    out.values[static_cast<std::size_t>(i)] = 1.0 / (proj.col(i).squaredNorm() + kMusicFloor);
  return out;
}

inline SpsGrid eb_music_spectrum(const CovarianceMatrix& cov, const GridSpec& spec, int sources,
                                 double eps = kDefaultLoading) {
  return eb_music_spectrum(cov, SteeringTable(spec, cov.order), sources, eps);
}

}  // namespace ebdoa
