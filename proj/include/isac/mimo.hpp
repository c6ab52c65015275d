#pragma once

// Vector Gaussian fixed-state designs with identity noise covariance.  The
// communication-optimal input covariance waterfills the modes of the
// communication matrix; the detection-optimal one beams all power onto the
// leading eigenvector of Gamma = (H1 - H0)^T (H1 - H0); the lambda-mixture
// path interpolates the two extreme covariances linearly (a simple heuristic
// path between the endpoints, not a claimed optimal frontier).  Rates are
// log-det closed forms and exponent pairs are (u^2, (1-u)^2)/2 * tr(Gamma
// Sigma), so no quantization is involved.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "isac/exponent.hpp"  // PointTag

namespace isac {

using Matrix = Eigen::MatrixXd;

[[nodiscard]] inline Matrix to_matrix(const std::vector<std::vector<double>>& rows,
                                      const char* what) {
  if (rows.empty() || rows[0].empty())
    throw std::invalid_argument(std::string(what) + ": empty matrix");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size())
      throw std::invalid_argument(std::string(what) + ": ragged rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

/// Input covariance waterfilling the modes of H (SVD gains s_i^2) at total
/// power P: per-mode power max(0, mu - 1/s_i^2) with the water level mu chosen
/// to spend P exactly.
[[nodiscard]] inline Matrix waterfill_covariance(const Matrix& h, double power) {
  if (!(power > 0.0)) throw std::invalid_argument("waterfill_covariance: power must be positive");
  Eigen::JacobiSVD<Matrix> svd(h, Eigen::ComputeFullV);
  const Eigen::VectorXd s = svd.singularValues();
  std::vector<double> inv_gain;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > 1e-12) inv_gain.push_back(1.0 / (s(i) * s(i)));
  if (inv_gain.empty())
    throw std::invalid_argument("waterfill_covariance: communication matrix is zero");
  // inv_gain is ascending (singular values come sorted descending).  Raise the
  // water level one mode at a time until the next mode sits above it.
  std::size_t active = inv_gain.size();
  double level = 0.0;
  for (std::size_t j = 1; j <= inv_gain.size(); ++j) {
    double sum_inv = 0.0;
    for (std::size_t i = 0; i < j; ++i) sum_inv += inv_gain[i];
    level = (power + sum_inv) / static_cast<double>(j);
    if (j == inv_gain.size() || level <= inv_gain[j]) {
      active = j;
      break;
    }
  }
  Eigen::VectorXd mode_power = Eigen::VectorXd::Zero(h.cols());
  for (std::size_t i = 0; i < active; ++i)
    mode_power(static_cast<Eigen::Index>(i)) = level - inv_gain[i];
  const Matrix v = svd.matrixV();
  return v * mode_power.asDiagonal() * v.transpose();
}

/// All power on the leading eigenvector of the detection Gram matrix Gamma.
[[nodiscard]] inline Matrix beamform_covariance(const Matrix& gamma, double power) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(gamma);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("beamform_covariance: eigendecomposition failed");
  const Eigen::VectorXd v = es.eigenvectors().col(gamma.cols() - 1);  // ascending order
  return power * v * v.transpose();
}

/// log det(I + H Sigma H^T) / 2 in nats.
[[nodiscard]] inline double gaussian_vector_rate(const Matrix& h, const Matrix& sigma) {
  const Matrix gram =
      Matrix::Identity(h.rows(), h.rows()) + h * sigma * h.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  double r = 0.0;
  for (Eigen::Index i = 0; i < gram.rows(); ++i) {
    if (es.eigenvalues()(i) <= 0.0)
      throw std::runtime_error("gaussian_vector_rate: Gram matrix lost positivity");
    r += std::log(es.eigenvalues()(i));
  }
  return 0.5 * r;
}

struct MimoDesign {
  double lambda = 0.0;
  Matrix sigma_x;
  double trace_sigma = 0.0;
  double trace_gamma_sigma = 0.0;  // governs both exponents
  double rate = 0.0;               // nats
};

struct MimoRegionRow {
  std::size_t design_index = 0;
  double lambda = 0.0;
  double trace_sigma = 0.0;
  double u = 0.0;
  double tau = 0.0;
  double rate = 0.0;  // nats
  double e_fa = 0.0;  // nats
  double e_md = 0.0;  // nats
  PointTag tag = PointTag::Interior;
};

/// The covariance at mixture weight lambda between the communication extreme
/// (waterfilling, lambda = 0) and the detection extreme (beamforming onto
/// Gamma's top eigenvector, lambda = 1), with its rate and detection trace.
[[nodiscard]] inline MimoDesign mimo_design(const Matrix& h0, const Matrix& h1,
                                            const Matrix& h_tilde, double power, double lambda) {
  if (h0.rows() != h1.rows() || h0.cols() != h1.cols())
    throw std::domain_error("mimo_design: H0 and H1 must share dimensions");
  if (h_tilde.cols() != h0.cols())
    throw std::domain_error("mimo_design: H_tilde input dimension mismatch");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::range_error("mimo_design: lambda outside [0,1]");
  if (!(power > 0.0)) throw std::invalid_argument("mimo_design: power must be positive");
  const Matrix diff = h1 - h0;
  const Matrix gamma = diff.transpose() * diff;
  MimoDesign d;
  d.lambda = lambda;
  d.sigma_x = (1.0 - lambda) * waterfill_covariance(h_tilde, power) +
              lambda * beamform_covariance(gamma, power);
  d.trace_sigma = d.sigma_x.trace();
  d.trace_gamma_sigma = (gamma * d.sigma_x).trace();
  d.rate = gaussian_vector_rate(h_tilde, d.sigma_x);
  return d;
}

/// Sweep the mixture path by lambda and tilt.  Exponents follow the fixed
/// labeling E_FA = u^2/2 * tr(Gamma Sigma), E_MD = (1-u)^2/2 * tr(Gamma
/// Sigma); the grid may include the closed tilt endpoints.
[[nodiscard]] inline std::vector<MimoRegionRow> mimo_region(
    const Matrix& h0, const Matrix& h1, const Matrix& h_tilde, double power,
    const std::vector<double>& lambda_grid, const std::vector<double>& u_grid) {
  std::vector<MimoRegionRow> rows;
  rows.reserve(lambda_grid.size() * u_grid.size());
  for (std::size_t li = 0; li < lambda_grid.size(); ++li) {
    const MimoDesign d = mimo_design(h0, h1, h_tilde, power, lambda_grid[li]);
    for (const double u : u_grid) {
      if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("mimo_region: u outside [0,1]");
      MimoRegionRow r;
      r.design_index = li;
      r.lambda = d.lambda;
      r.trace_sigma = d.trace_sigma;
      r.u = u;
      r.e_fa = u * u / 2.0 * d.trace_gamma_sigma;
      r.e_md = (1.0 - u) * (1.0 - u) / 2.0 * d.trace_gamma_sigma;
      r.tau = r.e_fa - r.e_md;
      r.rate = d.rate;
      rows.push_back(r);
    }
  }
  return rows;
}

}  // namespace isac
