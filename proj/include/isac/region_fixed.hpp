#pragma once

// Fixed-state rate-exponent region.  A composition p_X buys a communication
// rate (the worst-case mutual information over the two possible states) and a
// one-parameter family of (false-alarm, miss) exponent pairs traced by the
// tilt u.  The generic sweep works on any finite pair; the binary
// equal-exponent curve and the scalar Gaussian boundary are the closed forms
// it is cross-checked against; time sharing gives the straight-line reference
// that the joint design must dominate.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "isac/channels.hpp"
#include "isac/exponent.hpp"
#include "isac/iid_detection.hpp"  // mutual_information
#include "isac/math.hpp"

namespace isac {

/// Achievable communication rate of a composition: the mutual information
/// under the worst of the two state-conditional communication laws (the
/// decoder must survive either fixed state).
[[nodiscard]] inline double min_rate_over_states(const Pmf& p_x, const CommChannel& comm) {
  return std::min(mutual_information(p_x, comm.p0), mutual_information(p_x, comm.p1));
}

/// One row of a fixed-state region sweep.  Corner rows describe the trivial
/// one-sided tests: the infinite exponent is implied by the tag (the stored
/// inf is only ever printed, never computed with), and u/tau are NaN because
/// no tilt realizes a corner.
struct RegionPointFixed {
  std::size_t px_index = 0;
  double u = 0.0;
  double tau = 0.0;
  double rate = 0.0;  // nats
  double e_fa = 0.0;  // nats
  double e_md = 0.0;  // nats
  PointTag tag = PointTag::Interior;
};

namespace detail {

inline RegionPointFixed corner_point(std::size_t px_index, double rate, PointTag tag) {
  RegionPointFixed p;
  p.px_index = px_index;
  p.u = p.tau = std::numeric_limits<double>::quiet_NaN();
  p.rate = rate;
  if (tag == PointTag::CornerFa0) {
    p.e_fa = 0.0;
    p.e_md = std::numeric_limits<double>::infinity();
  } else if (tag == PointTag::CornerMd0) {
    p.e_fa = std::numeric_limits<double>::infinity();
    p.e_md = 0.0;
  } else {
    throw std::invalid_argument("corner_point: tag is not a corner");
  }
  p.tag = tag;
  return p;
}

}  // namespace detail

/// Trace the region boundary over a grid of compositions and tilts.  Per
/// composition the rows run: the always-declare corner (E_FA = 0), the
/// interior tilt sweep in ascending u, the never-declare corner (E_MD = 0).
[[nodiscard]] inline std::vector<RegionPointFixed> sweep_region(
    const ChannelModel& model, const std::vector<Pmf>& px_grid,
    const std::vector<double>& u_grid) {
  for (double u : u_grid)
    if (!(u > 0.0 && u < 1.0))
      throw std::domain_error("sweep_region: tilt grid must lie strictly inside (0,1)");
  std::vector<RegionPointFixed> rows;
  rows.reserve(px_grid.size() * (u_grid.size() + 2));
  for (std::size_t i = 0; i < px_grid.size(); ++i) {
    const double rate = min_rate_over_states(px_grid[i], model.comm);
    const TiltedFamily tf(model.sensing, px_grid[i]);
    rows.push_back(detail::corner_point(i, rate, PointTag::CornerFa0));
    for (const double u : u_grid) {
      const ExponentPoint e = exponent_pair(tf, u);
      rows.push_back({i, e.u, e.tau, rate, e.e_fa, e.e_md, PointTag::Interior});
    }
    rows.push_back(detail::corner_point(i, rate, PointTag::CornerMd0));
  }
  return rows;
}

// ============================================================================
// Closed forms
// ============================================================================

/// One point of the binary multiplicative equal-exponent curve.
struct EqualExponentPoint {
  double t = 0.0;         // weight on the active input symbol
  double rate = 0.0;      // nats
  double exponent = 0.0;  // common value of both exponents at the symmetric tilt
};

/// Equal-exponent trade-off of the binary multiplicative example at the
/// symmetric tilt u = 1/2: rate H(t*p) - H(p), exponent t * D(1/2 || q),
/// for active-symbol weights t in [1/2, 1].
[[nodiscard]] inline std::vector<EqualExponentPoint> binary_equal_exponent_curve(
    double p, double q, const std::vector<double>& t_grid) {
  detail::check_unit_interval(p, "p", /*open=*/true);
  detail::check_unit_interval(q, "q", /*open=*/true);
  const double d_half_q = binary_kl(0.5, q);
  std::vector<EqualExponentPoint> out;
  out.reserve(t_grid.size());
  for (const double t : t_grid) {
    if (!(t >= 0.5 && t <= 1.0))
      throw std::domain_error("binary_equal_exponent_curve: t outside [1/2, 1]");
    out.push_back({t, binary_entropy(binary_convolve(t, p)) - binary_entropy(p), t * d_half_q});
  }
  return out;
}

/// Closed-form boundary of the scalar Gaussian fixed-state channel (unit
/// noise, state-1 gain h != 1, full power on the input): rate log(1+P)/2 and
/// exponent pairs (u^2, (1-u)^2) * (1-h)^2 P / 2.  The grid may include the
/// closed endpoints u = 0, 1; they are the finite axis intercepts of the
/// exponent curve, not trivial corners.
[[nodiscard]] inline std::vector<RegionPointFixed> gaussian_region(
    double h, double power, const std::vector<double>& u_grid) {
  if (h == 1.0) throw std::invalid_argument("gaussian_region: h = 1 makes the states identical");
  if (!(power > 0.0) || !std::isfinite(power))
    throw std::invalid_argument("gaussian_region: power must be positive");
  const double scale = (1.0 - h) * (1.0 - h) * power / 2.0;
  const double rate = 0.5 * std::log1p(power);
  std::vector<RegionPointFixed> rows;
  rows.reserve(u_grid.size());
  for (const double u : u_grid) {
    if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("gaussian_region: u outside [0,1]");
    RegionPointFixed r;
    r.px_index = 0;
    r.u = u;
    r.e_fa = u * u * scale;
    r.e_md = (1.0 - u) * (1.0 - u) * scale;
    r.tau = r.e_fa - r.e_md;
    r.rate = rate;
    r.tag = PointTag::Interior;
    rows.push_back(r);
  }
  return rows;
}

// ============================================================================
// Time sharing
// ============================================================================

/// Straight-line reference: sense a fraction (1-share) of the block with the
/// best detection test and communicate on the rest, giving (share * R,
/// (1-share) * E_FA, (1-share) * E_MD) from any jointly achievable point.
[[nodiscard]] inline RegionPointFixed time_sharing_baseline(const ChannelModel& model,
                                                            const Pmf& p_x, double u,
                                                            double share) {
  if (!(share >= 0.0 && share <= 1.0))
    throw std::range_error("time_sharing_baseline: share outside [0,1]");
  const TiltedFamily tf(model.sensing, p_x);
  const ExponentPoint e = exponent_pair(tf, u);
  RegionPointFixed r;
  r.px_index = 0;
  r.u = u;
  r.tau = std::numeric_limits<double>::quiet_NaN();  // the scaled point is not a threshold test
  r.rate = share * min_rate_over_states(p_x, model.comm);
  r.e_fa = (1.0 - share) * e.e_fa;
  r.e_md = (1.0 - share) * e.e_md;
  r.tag = PointTag::Timeshare;
  return r;
}

}  // namespace isac
