#pragma once

// Cumulant generating function of the per-symbol log-likelihood ratio, the
// tilted (geometric-mixture) channel family it generates, and the Legendre
// mapping from tilt u to the (false-alarm, miss) exponent pair of the
// threshold test on (1/n) log p1(y|x)/p0(y|x).
//
// Conventions, used consistently everywhere:
//   kappa0(u)  = sum_x p_X(x) log sum_y p0(y|x)^(1-u) p1(y|x)^u   (state-0 CGF)
//   tau        = kappa0'(u)                                        (threshold)
//   E_FA       = D(p_u || p0 | p_X) = u*kappa0'(u) - kappa0(u)
//   E_MD       = D(p_u || p1 | p_X) = (u-1)*kappa0'(u) - kappa0(u)
// The false-alarm exponent is the divergence against the state-0 law; some
// derived example curves swap the two labels, and comparisons against those
// are made as point sets under u <-> 1-u.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "isac/channels.hpp"
#include "isac/math.hpp"

namespace isac {

/// Per-symbol log-likelihood ratio log(p1(y|x)/p0(y|x)).  Indices must be in
/// range; a cell with zero mass under both states has no defined ratio.
[[nodiscard]] inline double llr(const BinaryStatePair& pair, std::size_t x, std::size_t y) {
  if (x >= pair.num_inputs() || y >= pair.num_outputs())
    throw std::domain_error("llr: symbol index out of range");
  const double a = pair.p1[x][y], b = pair.p0[x][y];
  if (a == 0.0 && b == 0.0)
    throw std::domain_error("llr: output has zero mass under both states");
  return std::log(a) - std::log(b);  // +-inf on a support mismatch
}

/// Label-based overload for user-facing entry points.
[[nodiscard]] inline double llr(const BinaryStatePair& pair, const std::string& x,
                                const std::string& y) {
  std::size_t yi = pair.num_outputs();
  for (std::size_t i = 0; i < pair.num_outputs(); ++i)
    if (pair.outputs[i] == y) {
      yi = i;
      break;
    }
  if (yi == pair.num_outputs()) throw std::domain_error("unknown output symbol '" + y + "'");
  return llr(pair, pair.input_index(x), yi);
}

/// Average divergence sum_x p_X(x) D(a(.|x) || b(.|x)) in nats, with the
/// 0*log 0 convention.  Mass in `a` outside the support of `b` is infinite
/// divergence and throws.
[[nodiscard]] inline double conditional_kl(const CondPmf& a, const CondPmf& b, const Pmf& p_x) {
  if (a.size() != b.size() || a.size() != p_x.size())
    throw std::invalid_argument("conditional_kl: shape mismatch");
  double total = 0.0;
  for (std::size_t x = 0; x < a.size(); ++x) {
    if (p_x[x] == 0.0) continue;
    if (a[x].size() != b[x].size()) throw std::invalid_argument("conditional_kl: ragged rows");
    double d = 0.0;
    for (std::size_t y = 0; y < a[x].size(); ++y) d += kl_term(a[x][y], b[x][y]);
    total += p_x[x] * d;
  }
  return total;
}

// ============================================================================
// Tilted family
// ============================================================================

/// CGF machinery for one sensing pair and one input distribution.  Log-domain
/// matrices are cached at construction; every evaluation max-shifts within a
/// row, so tails of quantized Gaussian channels stay representable.
class TiltedFamily {
 public:
  TiltedFamily(BinaryStatePair pair, Pmf p_x) : pair_(std::move(pair)), px_(std::move(p_x)) {
    require_valid(pair_, "TiltedFamily");
    check_input_distribution(px_, pair_.num_inputs());
    const std::size_t nx = pair_.num_inputs(), ny = pair_.num_outputs();
    lp0_.assign(nx, std::vector<double>(ny, kNegInf));
    lp1_.assign(nx, std::vector<double>(ny, kNegInf));
    for (std::size_t x = 0; x < nx; ++x) {
      if (px_[x] > 0.0) active_.push_back(x);
      for (std::size_t y = 0; y < ny; ++y) {
        if (pair_.p0[x][y] > 0.0) lp0_[x][y] = std::log(pair_.p0[x][y]);
        if (pair_.p1[x][y] > 0.0) lp1_[x][y] = std::log(pair_.p1[x][y]);
      }
    }
  }

  [[nodiscard]] const BinaryStatePair& pair() const { return pair_; }
  [[nodiscard]] const Pmf& p_x() const { return px_; }

  /// kappa0(u) = sum_x p_X(x) log Z_x(u), Z_x(u) = sum_y p0^(1-u) p1^u.
  [[nodiscard]] double kappa0(double u) const {
    double s = 0.0;
    for (std::size_t x : active_) s += px_[x] * x_eval(x, u).log_z;
    return s;
  }

  /// Exact derivative: kappa0'(u) = sum_x p_X(x) E_{p_u(.|x)}[log p1/p0].
  [[nodiscard]] double kappa0_prime(double u) const {
    double s = 0.0;
    for (std::size_t x : active_) s += px_[x] * x_eval(x, u).dlog_z;
    return s;
  }

  /// State-1 CGF from its own definition, kappa1(v) = sum_x p_X log sum_y
  /// p0^(-v) p1^(v+1); it must satisfy kappa1(u - 1) = kappa0(u).
  [[nodiscard]] double kappa1(double v) const {
    double s = 0.0;
    std::vector<double> t;
    for (std::size_t x : active_) {
      t.clear();
      for (std::size_t y = 0; y < pair_.num_outputs(); ++y) {
        if (lp1_[x][y] == kNegInf) continue;  // no p1 mass: term vanishes for v > -1
        t.push_back((v + 1.0) * lp1_[x][y] - v * lp0_[x][y]);
      }
      s += px_[x] * log_sum_exp(t);
    }
    return s;
  }

  /// Tilted rows p_u(y|x) = p0^(1-u) p1^u / Z_x(u) for u in [0,1]; the
  /// endpoints return p0 resp. p1 exactly.  Inputs with p_X(x) = 0 still get
  /// a valid row so the result is a full conditional law.
  [[nodiscard]] CondPmf tilted(double u) const {
    if (!(u >= 0.0 && u <= 1.0))
      throw std::domain_error("tilted: u outside [0,1]");
    const std::size_t nx = pair_.num_inputs(), ny = pair_.num_outputs();
    CondPmf out(nx, Pmf(ny, 0.0));
    for (std::size_t x = 0; x < nx; ++x) {
      double m = kNegInf;
      std::vector<double> t(ny, kNegInf);
      for (std::size_t y = 0; y < ny; ++y) {
        if (lp0_[x][y] == kNegInf && lp1_[x][y] == kNegInf) continue;  // dead cell
        t[y] = (1.0 - u) * lp0_[x][y] + u * lp1_[x][y];
        m = std::max(m, t[y]);
      }
      double z = 0.0;
      for (std::size_t y = 0; y < ny; ++y)
        if (t[y] != kNegInf) z += std::exp(t[y] - m);
      for (std::size_t y = 0; y < ny; ++y)
        if (t[y] != kNegInf) out[x][y] = std::exp(t[y] - m) / z;
    }
    return out;
  }

  /// D(p0 || p1 | p_X) and D(p1 || p0 | p_X): the ends of the admissible
  /// threshold range, computed as direct divergences.
  [[nodiscard]] double kl_p0_p1() const { return conditional_kl(pair_.p0, pair_.p1, px_); }
  [[nodiscard]] double kl_p1_p0() const { return conditional_kl(pair_.p1, pair_.p0, px_); }

 private:
  struct XEval {
    double log_z;
    double dlog_z;
  };

  /// log Z_x(u) and its u-derivative in one pass, max-shifted.  The common
  /// support guarantee makes every retained exponent pair finite.
  [[nodiscard]] XEval x_eval(std::size_t x, double u) const {
    const std::size_t ny = pair_.num_outputs();
    double m = kNegInf;
    std::vector<double> t(ny, kNegInf);
    for (std::size_t y = 0; y < ny; ++y) {
      if (lp0_[x][y] == kNegInf && lp1_[x][y] == kNegInf) continue;
      t[y] = (1.0 - u) * lp0_[x][y] + u * lp1_[x][y];
      m = std::max(m, t[y]);
    }
    double z = 0.0, dz = 0.0;
    for (std::size_t y = 0; y < ny; ++y) {
      if (t[y] == kNegInf) continue;
      const double w = std::exp(t[y] - m);
      z += w;
      dz += w * (lp1_[x][y] - lp0_[x][y]);
    }
    return {m + std::log(z), dz / z};
  }

  BinaryStatePair pair_;
  Pmf px_;
  std::vector<std::vector<double>> lp0_, lp1_;
  std::vector<std::size_t> active_;
};

// ============================================================================
// Exponent pairs and threshold inversion
// ============================================================================

/// Classification of a rate-exponent boundary entry; the two corners stand
/// for the one-sided tests whose missing exponent is infinite, and stay
/// symbolic (the CSV layer prints "inf", nothing computes with it).
enum class PointTag { Interior, CornerFa0, CornerMd0, Timeshare };

[[nodiscard]] inline const char* to_string(PointTag t) {
  switch (t) {
    case PointTag::Interior: return "interior";
    case PointTag::CornerFa0: return "corner_fa0";
    case PointTag::CornerMd0: return "corner_md0";
    case PointTag::Timeshare: return "timeshare";
  }
  return "?";
}

/// One interior boundary point: tilt, matched threshold, and both exponents
/// (nats).  tau = kappa0'(u) is the threshold of the test achieving the pair.
struct ExponentPoint {
  double u = 0.0;
  double tau = 0.0;
  double e_fa = 0.0;  // D(p_u || p0 | p_X)
  double e_md = 0.0;  // D(p_u || p1 | p_X)
};

/// Exponent pair at tilt u, via the direct divergences of the tilted law.
[[nodiscard]] inline ExponentPoint exponent_pair(const TiltedFamily& tf, double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("exponent_pair: u outside [0,1]");
  const CondPmf pu = tf.tilted(u);
  ExponentPoint p;
  p.u = u;
  p.tau = tf.kappa0_prime(u);
  p.e_fa = conditional_kl(pu, tf.pair().p0, tf.p_x());
  p.e_md = conditional_kl(pu, tf.pair().p1, tf.p_x());
  return p;
}

/// Thrown when a requested threshold sits outside the open admissible range
/// (-D(p0||p1|p_X), D(p1||p0|p_X)): only a trivial one-sided corner achieves
/// it, and that corner is carried along for the caller to tag.
class TrivialCornerError : public std::range_error {
 public:
  TrivialCornerError(PointTag corner, double tau, double lo, double hi)
      : std::range_error("threshold " + std::to_string(tau) + " outside admissible range (" +
                         std::to_string(lo) + ", " + std::to_string(hi) + "); only the " +
                         std::string(to_string(corner)) + " corner achieves it"),
        corner_(corner) {}
  [[nodiscard]] PointTag corner() const { return corner_; }

 private:
  PointTag corner_;
};

/// Invert tau = kappa0'(u) by bisection on [1e-9, 1-1e-9].  kappa0' is
/// strictly increasing whenever p0 != p1 on the active inputs, so the root is
/// unique; iteration stops once |kappa0'(u) - tau| < 1e-10 (or the bracket is
/// exhausted at machine width).
[[nodiscard]] inline double solve_u_for_tau(const TiltedFamily& tf, double tau) {
  const double lo_d = -tf.kl_p0_p1(), hi_d = tf.kl_p1_p0();
  if (tau <= lo_d) throw TrivialCornerError(PointTag::CornerFa0, tau, lo_d, hi_d);
  if (tau >= hi_d) throw TrivialCornerError(PointTag::CornerMd0, tau, lo_d, hi_d);
  double lo = 1e-9, hi = 1.0 - 1e-9;
  double mid = 0.5;
  if (tf.kappa0_prime(lo) >= tau) return lo;  // sliver between u=0 and the clamp
  if (tf.kappa0_prime(hi) <= tau) return hi;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    mid = 0.5 * (lo + hi);
    const double r = tf.kappa0_prime(mid) - tau;
    if (std::abs(r) < 1e-10) return mid;
    (r < 0.0 ? lo : hi) = mid;
  }
  return mid;
}

/// Open u-grid of k points: equally spaced on [0,1] with the endpoints pulled
/// in by 1e-9 so every grid point has a proper tilted law.
[[nodiscard]] inline std::vector<double> make_u_grid(std::size_t k) {
  if (k < 2) throw std::invalid_argument("make_u_grid: need at least 2 points");
  std::vector<double> g(k);
  for (std::size_t i = 0; i < k; ++i) g[i] = static_cast<double>(i) / static_cast<double>(k - 1);
  g.front() = 1e-9;
  g.back() = 1.0 - 1e-9;
  return g;
}

}  // namespace isac
