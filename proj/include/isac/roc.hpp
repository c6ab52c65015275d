#pragma once

// Symbolwise receiver operating characteristics.  For a finite alphabet the
// exact Neyman-Pearson frontier is the concave polygon obtained by admitting
// outputs in decreasing likelihood-ratio order; for the scalar Gaussian it is
// sampled densely on a threshold grid (an inner approximation, since chords of
// a concave curve lie below it).  Any point on either frontier is realized by
// a randomized threshold test on the likelihood ratio.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "isac/channels.hpp"
#include "isac/math.hpp"

namespace isac {

/// Randomized likelihood-ratio test: declare 1 when LR > tau, declare 1 with
/// probability eta when LR == tau (within working precision), else declare 0.
struct RandomizedTest {
  double tau = 0.0;
  double eta = 0.0;
};

struct RocVertex {
  double p_fa = 0.0;
  double p_d = 0.0;
  /// LR threshold whose weak test (declare 1 iff LR >= tau) lands exactly
  /// here; +inf for the origin, where the test never declares.
  double tau = 0.0;
};

// ============================================================================
// RocCurve
// ============================================================================

/// Concave piecewise-linear detection frontier of one input symbol.  Vertices
/// run from (0,0) to (1,1) with strictly increasing p_fa; slopes[i] is the
/// slope of the segment from vertices[i] to vertices[i+1], non-increasing.
struct RocCurve {
  std::vector<RocVertex> vertices;
  std::vector<double> slopes;

  /// Best detection probability at false-alarm level p (piecewise linear).
  [[nodiscard]] double detection_at(double p) const {
    const std::size_t i = segment_of(p);
    if (i + 1 >= vertices.size()) return vertices.back().p_d;
    const RocVertex &a = vertices[i], &b = vertices[i + 1];
    return a.p_d + (p - a.p_fa) / (b.p_fa - a.p_fa) * (b.p_d - a.p_d);
  }

  /// Marginal detection gain per unit of false alarm at level p, using the
  /// right (next-segment) slope at vertices; zero once the budget level is
  /// past the end of the curve.
  [[nodiscard]] double slope_at(double p) const {
    const std::size_t i = segment_of(p);
    if (i >= slopes.size()) return 0.0;
    return slopes[i];
  }

  /// The randomized test achieving (p, detection_at(p)): threshold at the
  /// containing segment's likelihood ratio, tie-break probability equal to
  /// the fractional position along that segment.
  [[nodiscard]] RandomizedTest test_for(double p) const {
    const std::size_t i = segment_of(p);
    if (i + 1 >= vertices.size()) return {vertices.back().tau, 1.0};
    const RocVertex &a = vertices[i], &b = vertices[i + 1];
    return {b.tau, (p - a.p_fa) / (b.p_fa - a.p_fa)};
  }

 private:
  /// Index of the segment containing p under the half-open convention
  /// [v_i, v_{i+1}); p at or past the final vertex returns the one-past-end
  /// segment index.  Queries outside [0,1] are a domain error.
  [[nodiscard]] std::size_t segment_of(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("RocCurve: level outside [0,1]");
    if (vertices.size() < 2 || p >= vertices.back().p_fa) return vertices.size() - 1;
    std::size_t lo = 0, hi = vertices.size() - 1;
    while (lo + 1 < hi) {
      const std::size_t mid = (lo + hi) / 2;
      (vertices[mid].p_fa <= p ? lo : hi) = mid;
    }
    return lo;
  }
};

// ============================================================================
// Construction
// ============================================================================

/// Exact frontier from one likelihood pair (two rows over a common output
/// alphabet).  Outputs merge into groups of equal log-likelihood ratio
/// (within 1e-12); admitting groups in decreasing-ratio order traces the
/// vertices, and each segment's slope equals its group's likelihood ratio.
[[nodiscard]] inline RocCurve roc_from_likelihoods(const Pmf& p0, const Pmf& p1) {
  if (p0.size() != p1.size()) throw std::invalid_argument("roc_from_likelihoods: size mismatch");
  struct Cell {
    double l, m0, m1;
  };
  std::vector<Cell> cells;
  for (std::size_t y = 0; y < p0.size(); ++y) {
    if (p0[y] == 0.0 && p1[y] == 0.0) continue;  // dead output
    if (p0[y] == 0.0 || p1[y] == 0.0)
      throw std::domain_error("roc_from_likelihoods: support mismatch makes the ratio unbounded");
    cells.push_back({std::log(p1[y]) - std::log(p0[y]), p0[y], p1[y]});
  }
  if (cells.empty()) throw std::invalid_argument("roc_from_likelihoods: empty support");
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.l > b.l; });

  RocCurve roc;
  roc.vertices.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  double cum0 = 0.0, cum1 = 0.0;
  std::size_t i = 0;
  while (i < cells.size()) {
    double g0 = 0.0, g1 = 0.0;
    std::size_t j = i;
    while (j < cells.size() && cells[i].l - cells[j].l <= 1e-12) {
      g0 += cells[j].m0;
      g1 += cells[j].m1;
      ++j;
    }
    cum0 += g0;
    cum1 += g1;
    roc.slopes.push_back(g1 / g0);
    roc.vertices.push_back({cum0, cum1, std::exp(cells[i].l)});
    i = j;
  }
  // The running sums end at the row totals; pin the final vertex to the exact
  // corner so frontier endpoints are (0,0) and (1,1) by construction.
  roc.vertices.back().p_fa = 1.0;
  roc.vertices.back().p_d = 1.0;
  return roc;
}

/// Scalar Gaussian frontier for testing N(0, sigma^2) against N(1, sigma^2):
/// (Q(t), Q(t - 1/sigma)) sampled on `num_thresholds` points equally spaced in
/// the log likelihood ratio, endpoints appended.  The local slope of the true
/// curve at a sample equals its LR threshold; chord slopes of the polygon
/// inherit monotonicity from concavity.
[[nodiscard]] inline RocCurve gaussian_roc(double sigma, std::size_t num_thresholds = 2048) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("gaussian_roc: sigma must be positive");
  if (num_thresholds < 8) throw std::invalid_argument("gaussian_roc: need at least 8 thresholds");
  // t'' = (normalized decision threshold); linear here <=> log-spaced in LR.
  const double t_hi = 8.0 + 1.0 / sigma, t_lo = -8.0;
  RocCurve roc;
  roc.vertices.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::vector<double> ts = {std::numeric_limits<double>::infinity()};
  for (std::size_t k = 0; k < num_thresholds; ++k) {
    const double t = t_hi - (t_hi - t_lo) * static_cast<double>(k) /
                                static_cast<double>(num_thresholds - 1);
    const double pfa = normal_sf(t), pd = normal_sf(t - 1.0 / sigma);
    if (pfa <= roc.vertices.back().p_fa) continue;  // tail samples collapse in double
    // LR at the decision threshold y = sigma * t: exp((2y - 1) / (2 sigma^2)).
    roc.vertices.push_back({pfa, pd, std::exp((2.0 * sigma * t - 1.0) / (2.0 * sigma * sigma))});
    ts.push_back(t);
  }
  if (roc.vertices.back().p_fa < 1.0) {
    roc.vertices.push_back({1.0, 1.0, 0.0});
    ts.push_back(-std::numeric_limits<double>::infinity());
  }
  // Chord slopes as exact cell-mass ratios over each threshold interval.
  // Differencing the stored vertices instead would cancel catastrophically in
  // the deep left tail (both coordinates within ulps of 1) and break the
  // non-increasing-slope invariant.
  roc.slopes.resize(roc.vertices.size() - 1);
  for (std::size_t k = 0; k + 1 < roc.vertices.size(); ++k) {
    const double lo = ts[k + 1], hi = ts[k];
    roc.slopes[k] =
        normal_cell_prob(lo - 1.0 / sigma, hi - 1.0 / sigma) / normal_cell_prob(lo, hi);
  }
  return roc;
}

}  // namespace isac
