#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <stdexcept>

#include "isac/channels.hpp"
#include "isac/exponent.hpp"

using namespace isac;

namespace {

// Random common-support pair with <= 4 inputs and outputs.  Entries are floored
// away from zero so log-likelihood ratios stay bounded and first/second-order
// tolerances below are meaningful.
BinaryStatePair random_pair(std::mt19937& rng, std::size_t nx, std::size_t ny) {
  std::uniform_real_distribution<double> uni(0.05, 1.0);
  BinaryStatePair pair;
  for (std::size_t x = 0; x < nx; ++x) pair.inputs.push_back("x" + std::to_string(x));
  for (std::size_t y = 0; y < ny; ++y) pair.outputs.push_back("y" + std::to_string(y));
  for (CondPmf* m : {&pair.p0, &pair.p1}) {
    m->assign(nx, Pmf(ny, 0.0));
    for (std::size_t x = 0; x < nx; ++x) {
      double s = 0.0;
      for (std::size_t y = 0; y < ny; ++y) s += ((*m)[x][y] = uni(rng));
      for (std::size_t y = 0; y < ny; ++y) (*m)[x][y] /= s;
    }
  }
  return pair;
}

Pmf random_px(std::mt19937& rng, std::size_t nx) {
  std::uniform_real_distribution<double> uni(0.05, 1.0);
  Pmf p(nx);
  double s = 0.0;
  for (double& v : p) s += (v = uni(rng));
  for (double& v : p) v /= s;
  return p;
}

}  // namespace

// ============================================================================
// Hand-frozen values on the binary multiplicative example, q = 0.2
// ============================================================================

TEST_CASE("llr on the multiplicative example") {
  const ChannelModel m = build_binary_multiplicative(0.1, 0.2);
  // log(0.8/0.2) = log 4.
  REQUIRE(std::abs(llr(m.sensing, 1, 1) - 1.38629436111989) < 1e-13);
  REQUIRE(std::abs(llr(m.sensing, 1, 0) + 1.38629436111989) < 1e-13);
  REQUIRE(llr(m.sensing, 0, 0) == 0.0);  // state has no effect on x = 0
  REQUIRE(llr(m.sensing, 0, 1) == 0.0);
  REQUIRE(std::abs(llr(m.sensing, "1", "1") - 1.38629436111989) < 1e-13);
  REQUIRE_THROWS_AS(llr(m.sensing, "2", "1"), std::domain_error);
  REQUIRE_THROWS_AS(llr(m.sensing, "1", "oops"), std::domain_error);
  REQUIRE_THROWS_AS(llr(m.sensing, 5, 0), std::domain_error);
}

TEST_CASE("CGF hand values at the all-ones composition") {
  const ChannelModel m = build_binary_multiplicative(0.1, 0.2);
  const TiltedFamily tf(m.sensing, {0.0, 1.0});
  REQUIRE(std::abs(tf.kappa0(0.0)) < 1e-14);
  REQUIRE(std::abs(tf.kappa0(1.0)) < 1e-14);
  // kappa0(1/2) = log(2 sqrt(0.16)) = log 0.8.
  REQUIRE(std::abs(tf.kappa0(0.5) - std::log(0.8)) < 1e-14);
  // Endpoint slopes are -D(p0||p1) and +D(p1||p0); both equal
  // D2(0.2||0.8) = 0.6 log 4 = 0.83177661667193 here.
  REQUIRE(std::abs(tf.kappa0_prime(0.0) + 0.83177661667193) < 1e-12);
  REQUIRE(std::abs(tf.kappa0_prime(1.0) - 0.83177661667193) < 1e-12);
  REQUIRE(std::abs(tf.kappa0_prime(0.5)) < 1e-14);  // symmetric family
  REQUIRE(std::abs(tf.kl_p0_p1() - 0.83177661667193) < 1e-12);
  REQUIRE(std::abs(tf.kl_p1_p0() - 0.83177661667193) < 1e-12);
}

TEST_CASE("mixing weight scales the CGF linearly in the composition") {
  const ChannelModel m = build_binary_multiplicative(0.1, 0.2);
  const TiltedFamily all1(m.sensing, {0.0, 1.0});
  const TiltedFamily mix(m.sensing, {0.4, 0.6});
  // x = 0 contributes log Z = 0 at every u, so kappa scales by p_X(1).
  REQUIRE(std::abs(mix.kappa0(0.37) - 0.6 * all1.kappa0(0.37)) < 1e-14);
  REQUIRE(std::abs(mix.kappa0_prime(0.37) - 0.6 * all1.kappa0_prime(0.37)) < 1e-14);
}

TEST_CASE("tilted family rows") {
  const ChannelModel m = build_binary_multiplicative(0.1, 0.2);
  const TiltedFamily tf(m.sensing, {0.0, 1.0});
  const CondPmf mid = tf.tilted(0.5);
  // Geometric midpoint of Bern(0.2) and Bern(0.8) is Bern(1/2); x = 0 stays Bern(0.2).
  REQUIRE(std::abs(mid[1][1] - 0.5) < 1e-14);
  REQUIRE(std::abs(mid[0][1] - 0.2) < 1e-14);
  REQUIRE(tf.tilted(0.0) == m.sensing.p0);
  REQUIRE(tf.tilted(1.0) == m.sensing.p1);
  REQUIRE_THROWS_AS(tf.tilted(-0.1), std::domain_error);
  REQUIRE_THROWS_AS(tf.tilted(1.0001), std::domain_error);
}

TEST_CASE("conditional divergence") {
  const CondPmf a = {{0.5, 0.5}, {0.1, 0.9}};
  const CondPmf b = {{0.2, 0.8}, {0.1, 0.9}};
  // Row 1 contributes zero; row 0 is D2(0.5||0.2) = 0.22314355131421 nats.
  REQUIRE(std::abs(conditional_kl(a, b, {1.0, 0.0}) - 0.223143551314210) < 1e-12);
  REQUIRE(std::abs(conditional_kl(a, b, {0.5, 0.5}) - 0.5 * 0.223143551314210) < 1e-12);
  REQUIRE(conditional_kl(a, b, {0.0, 1.0}) == 0.0);
  const CondPmf c = {{0.5, 0.5}, {1.0, 0.0}};
  const CondPmf d = {{0.5, 0.5}, {0.0, 1.0}};
  REQUIRE_THROWS_AS(conditional_kl(c, d, {0.5, 0.5}), std::domain_error);
  REQUIRE(conditional_kl(c, d, {1.0, 0.0}) == 0.0);  // offending row has no weight
  REQUIRE_THROWS_AS(conditional_kl(a, b, {1.0}), std::invalid_argument);
}

TEST_CASE("exponent pair at the symmetric tilt") {
  const ChannelModel m = build_binary_multiplicative(0.1, 0.2);
  const TiltedFamily tf(m.sensing, {0.0, 1.0});
  const ExponentPoint p = exponent_pair(tf, 0.5);
  REQUIRE(std::abs(p.e_fa - 0.223143551314210) < 1e-12);
  REQUIRE(std::abs(p.e_md - 0.223143551314210) < 1e-12);
  REQUIRE(std::abs(p.tau) < 1e-14);
  // Mixed composition scales both exponents by p_X(1): the inactive symbol's
  // identical rows contribute nothing to either divergence.
  const TiltedFamily mix(m.sensing, {0.3, 0.7});
  const ExponentPoint q = exponent_pair(mix, 0.5);
  REQUIRE(std::abs(q.e_fa - 0.7 * 0.223143551314210) < 1e-12);
  REQUIRE(std::abs(q.e_md - 0.7 * 0.223143551314210) < 1e-12);
}

TEST_CASE("threshold inversion") {
  const ChannelModel m = build_binary_multiplicative(0.1, 0.2);
  const TiltedFamily tf(m.sensing, {0.0, 1.0});
  // Round trip through the derivative.
  const double tau = tf.kappa0_prime(0.3);
  REQUIRE(std::abs(solve_u_for_tau(tf, tau) - 0.3) < 1e-8);
  REQUIRE(std::abs(solve_u_for_tau(tf, 0.0) - 0.5) < 1e-8);
  // Residual convergence criterion.
  const double u = solve_u_for_tau(tf, 0.1234);
  REQUIRE(std::abs(tf.kappa0_prime(u) - 0.1234) < 1e-10);

  // Outside the admissible range only the one-sided corners remain.
  const double d = tf.kl_p1_p0();
  try {
    (void)solve_u_for_tau(tf, d + 0.1);
    FAIL("expected TrivialCornerError");
  } catch (const TrivialCornerError& e) {
    REQUIRE(e.corner() == PointTag::CornerMd0);
  }
  try {
    (void)solve_u_for_tau(tf, -d - 0.1);
    FAIL("expected TrivialCornerError");
  } catch (const TrivialCornerError& e) {
    REQUIRE(e.corner() == PointTag::CornerFa0);
  }
  // The closed endpoints themselves are already corners.
  REQUIRE_THROWS_AS(solve_u_for_tau(tf, d), TrivialCornerError);

  // Indistinguishable hypotheses admit no finite threshold at all.
  BinaryStatePair same;
  same.inputs = {"0"};
  same.outputs = {"0", "1"};
  same.p0 = {{0.5, 0.5}};
  same.p1 = {{0.5, 0.5}};
  const TiltedFamily flat(same, {1.0});
  REQUIRE_THROWS_AS(solve_u_for_tau(flat, 0.01), TrivialCornerError);
}

TEST_CASE("u grid is open at both ends") {
  const auto g = make_u_grid(101);
  REQUIRE(g.size() == 101);
  REQUIRE(g.front() == 1e-9);
  REQUIRE(g.back() == 1.0 - 1e-9);
  REQUIRE(std::abs(g[50] - 0.5) < 1e-15);
}

// ============================================================================
// Property suite over random common-support pairs
// ============================================================================

TEST_CASE("CGF properties hold on random small pairs") {
  std::mt19937 rng(20240817);
  std::uniform_int_distribution<std::size_t> size(2, 4);
  for (int trial = 0; trial < 120; ++trial) {
    const BinaryStatePair pair = random_pair(rng, size(rng), size(rng));
    const Pmf px = random_px(rng, pair.num_inputs());
    const TiltedFamily tf(pair, px);

    // Zeros of the CGF at the endpoints.
    REQUIRE(std::abs(tf.kappa0(0.0)) < 1e-10);
    REQUIRE(std::abs(tf.kappa0(1.0)) < 1e-10);

    // Endpoint derivatives against direct divergences.
    REQUIRE(std::abs(tf.kappa0_prime(0.0) + tf.kl_p0_p1()) < 1e-9);
    REQUIRE(std::abs(tf.kappa0_prime(1.0) - tf.kl_p1_p0()) < 1e-9);

    // Shift identity between the two state CGFs, and finite differences.
    for (double u : {0.1, 0.25, 0.5, 0.75, 0.9}) {
      REQUIRE(std::abs(tf.kappa0(u) - tf.kappa1(u - 1.0)) < 1e-10);
      const double h = 1e-5;
      const double fd = (tf.kappa0(u + h) - tf.kappa0(u - h)) / (2.0 * h);
      REQUIRE(std::abs(fd - tf.kappa0_prime(u)) < 1e-6);
      // Derivative stays inside the divergence bracket.
      REQUIRE(tf.kappa0_prime(u) >= -tf.kl_p0_p1() - 1e-9);
      REQUIRE(tf.kappa0_prime(u) <= tf.kl_p1_p0() + 1e-9);
    }

    // Midpoint convexity on a coarse grid.
    for (double a : {0.0, 0.25, 0.5}) {
      const double b = a + 0.5;
      REQUIRE(tf.kappa0(0.5 * (a + b)) <= 0.5 * (tf.kappa0(a) + tf.kappa0(b)) + 1e-12);
    }

    // Legendre identities tie exponents, tilt, and CGF together.
    for (double u : {0.2, 0.5, 0.8}) {
      const ExponentPoint p = exponent_pair(tf, u);
      REQUIRE(std::abs(p.e_fa - (u * p.tau - tf.kappa0(u))) < 1e-9);
      REQUIRE(std::abs(p.e_md - ((u - 1.0) * p.tau - tf.kappa0(u))) < 1e-9);
      REQUIRE(std::abs((p.e_fa - p.e_md) - p.tau) < 1e-9);
    }

    // The exponent trade-off is monotone in u.
    ExponentPoint prev = exponent_pair(tf, 0.05);
    for (double u = 0.15; u < 1.0; u += 0.1) {
      const ExponentPoint p = exponent_pair(tf, u);
      REQUIRE(p.e_fa >= prev.e_fa - 1e-12);
      REQUIRE(p.e_md <= prev.e_md + 1e-12);
      prev = p;
    }
  }
}

TEST_CASE("threshold inversion round-trips on random pairs") {
  std::mt19937 rng(987654321);
  std::uniform_int_distribution<std::size_t> size(2, 4);
  std::uniform_real_distribution<double> pick_u(0.05, 0.95);
  for (int trial = 0; trial < 60; ++trial) {
    const BinaryStatePair pair = random_pair(rng, size(rng), size(rng));
    const TiltedFamily tf(pair, random_px(rng, pair.num_inputs()));
    const double u_true = pick_u(rng);
    const double tau = tf.kappa0_prime(u_true);
    if (tau <= -tf.kl_p0_p1() || tau >= tf.kl_p1_p0()) continue;  // degenerate random pair
    const double u_hat = solve_u_for_tau(tf, tau);
    REQUIRE(std::abs(tf.kappa0_prime(u_hat) - tau) < 1e-9);
    REQUIRE(std::abs(u_hat - u_true) < 1e-6);
  }
}
