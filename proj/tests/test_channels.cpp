#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>

#include "isac/channels.hpp"
#include "isac/math.hpp"

using namespace isac;

// ============================================================================
// Scalar helpers
// ============================================================================

TEST_CASE("binary entropy and divergence hand values") {
  // Frozen by hand: H2(0.1) = 0.46899559358928 bits, D2(0.5||0.2) = 0.22314355131421 nats.
  REQUIRE(std::abs(nats_to_bits(binary_entropy(0.1)) - 0.468995593589281) < 1e-12);
  REQUIRE(std::abs(binary_kl(0.5, 0.2) - 0.223143551314210) < 1e-12);
  REQUIRE(binary_kl(0.3, 0.3) == 0.0);
  REQUIRE(binary_entropy(0.0) == 0.0);  // 0*log 0 convention
  REQUIRE(binary_entropy(1.0) == 0.0);
  REQUIRE_THROWS_AS(binary_entropy(1.5), std::domain_error);
  REQUIRE_THROWS_AS(kl_term(0.5, 0.0), std::domain_error);
  REQUIRE(kl_term(0.0, 0.0) == 0.0);
}

TEST_CASE("binary convolution") {
  REQUIRE(std::abs(binary_convolve(0.5, 0.1) - 0.5) < 1e-15);
  REQUIRE(std::abs(binary_convolve(1.0, 0.1) - 0.9) < 1e-15);
  REQUIRE(std::abs(binary_convolve(0.7, 0.1) - (0.7 * 0.9 + 0.3 * 0.1)) < 1e-15);
}

TEST_CASE("largest-remainder composition is exact and deterministic") {
  auto c = largest_remainder_counts({0.3, 0.7}, 10);
  REQUIRE(c == std::vector<long long>{3, 7});
  // Equal fractional parts: the leftover goes to the lowest index.
  c = largest_remainder_counts({1.0 / 3, 1.0 / 3, 1.0 / 3}, 10);
  REQUIRE(c == std::vector<long long>{4, 3, 3});
  c = largest_remainder_counts({0.5175, 0.4825}, 1000);
  REQUIRE(c[0] + c[1] == 1000);
  REQUIRE(c == std::vector<long long>{518, 482});
  REQUIRE(largest_remainder_counts({0.0, 1.0}, 7) == std::vector<long long>{0, 7});
}

TEST_CASE("normal cell probabilities keep tail accuracy") {
  // A cell 12 sigma out still has strictly positive, finite mass.
  const double p = normal_cell_prob(12.0, 12.1);
  REQUIRE(p > 0.0);
  REQUIRE(p < 1e-30);
  // Symmetric cells match by reflection.
  REQUIRE(std::abs(normal_cell_prob(-12.1, -12.0) - p) < 1e-45);
  // Q(0.5) frozen from tables.
  REQUIRE(std::abs(normal_sf(0.5) - 0.308537538725987) < 1e-13);
}

// ============================================================================
// Worked-example builders
// ============================================================================

TEST_CASE("binary multiplicative builder lays out the gated rows") {
  const ChannelModel m = build_binary_multiplicative(0.1, 0.2);
  REQUIRE(m.sensing.inputs == std::vector<std::string>{"0", "1"});
  // State 0 is pure noise for every input; state 1 flips the noise around x=1.
  REQUIRE(m.sensing.p0[0] == Pmf{0.8, 0.2});
  REQUIRE(m.sensing.p0[1] == Pmf{0.8, 0.2});
  REQUIRE(m.sensing.p1[0] == Pmf{0.8, 0.2});
  REQUIRE(m.sensing.p1[1] == Pmf{0.2, 0.8});
  // Communication side: BSC(0.1), identical under both states, no prior.
  REQUIRE(m.comm.p0[0] == Pmf{0.9, 0.1});
  REQUIRE(m.comm.p0[1] == Pmf{0.1, 0.9});
  REQUIRE(m.comm.p0 == m.comm.p1);
  REQUIRE_FALSE(m.comm.state_prior.has_value());

  // Bitwise deterministic across rebuilds.
  const ChannelModel m2 = build_binary_multiplicative(0.1, 0.2);
  REQUIRE(m.sensing.p0 == m2.sensing.p0);
  REQUIRE(m.sensing.p1 == m2.sensing.p1);
}

TEST_CASE("binary multiplicative rejects out-of-range parameters") {
  REQUIRE_THROWS_AS(build_binary_multiplicative(0.0, 0.2), std::invalid_argument);
  REQUIRE_THROWS_AS(build_binary_multiplicative(0.1, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(build_binary_multiplicative(-0.1, 0.2), std::invalid_argument);
}

TEST_CASE("iid binary builder carries the state prior") {
  const ChannelModel m = build_iid_binary(0.2, 0.2, 0.5);
  REQUIRE(m.comm.state_prior.has_value());
  REQUIRE(*m.comm.state_prior == 0.5);
  // Ytilde = S*x xor Z: under state 1, input 1 sees the flipped noise law.
  REQUIRE(m.comm.p1[1] == Pmf{0.2, 0.8});
  REQUIRE(m.comm.p1[0] == Pmf{0.8, 0.2});
  REQUIRE(m.comm.p0[1] == Pmf{0.8, 0.2});
  REQUIRE(m.sensing.p1[1] == Pmf{0.2, 0.8});
  // Degenerate priors are allowed (the marginal then equals one state's law).
  REQUIRE_NOTHROW(build_iid_binary(0.2, 0.2, 0.0));
  REQUIRE_THROWS_AS(build_iid_binary(0.2, 0.2, 1.5), std::invalid_argument);
}

// ============================================================================
// Validation
// ============================================================================

TEST_CASE("validate reports support mismatches and row residuals") {
  BinaryStatePair pair;
  pair.inputs = {"a"};
  pair.outputs = {"0", "1", "2"};
  pair.p0 = {{0.5, 0.5, 0.0}};
  pair.p1 = {{0.25, 0.25, 0.5}};
  ChannelDiagnostics d = validate(pair);
  REQUIRE_FALSE(d.pass);
  REQUIRE(d.support_mismatches == std::vector<std::pair<std::size_t, std::size_t>>{{0, 2}});
  REQUIRE_THROWS_AS(require_valid(pair, "test"), std::invalid_argument);

  pair.p1 = {{0.3, 0.65, 0.0}};  // support now matches but the row leaks mass
  d = validate(pair);
  REQUIRE_FALSE(d.pass);
  REQUIRE(std::abs(d.max_row_sum_residual - 0.05) < 1e-12);

  pair.p1 = {{0.3, 0.7, 0.0}};
  d = validate(pair);
  REQUIRE(d.pass);
  REQUIRE(d.max_llr_variance > 0.0);
  REQUIRE(std::isfinite(d.max_llr_variance));
}

TEST_CASE("input distribution checks") {
  REQUIRE_NOTHROW(check_input_distribution({0.25, 0.75}, 2));
  REQUIRE_THROWS_AS(check_input_distribution({0.25, 0.75}, 3), std::invalid_argument);
  REQUIRE_THROWS_AS(check_input_distribution({0.5, 0.6}, 2), std::invalid_argument);
  REQUIRE_THROWS_AS(check_input_distribution({-0.1, 1.1}, 2), std::invalid_argument);
}

// ============================================================================
// Gaussian quantization
// ============================================================================

TEST_CASE("quantized scalar fixed-state channel is row-stochastic with common support") {
  GaussianSpec spec;
  spec.kind = GaussianSpec::Kind::ScalarFixedState;
  spec.h = 0.5;
  spec.power = 1.0;
  spec.input_grid = {-1.0, 0.0, 1.0};
  const ChannelModel m = quantize_gaussian(spec, 128, 8.0);
  REQUIRE(m.sensing.num_inputs() == 3);
  REQUIRE(m.sensing.num_outputs() == 130);  // 128 cells + 2 tails
  const ChannelDiagnostics d = validate(m.sensing);
  REQUIRE(d.pass);
  REQUIRE(d.max_row_sum_residual <= 1e-12);

  // Quantized divergence approximates the continuous shift formula
  // D(N(x,1) || N(hx,1)) = (1-h)^2 x^2 / 2 = 0.125 at x = +-1.
  for (std::size_t x : {std::size_t{0}, std::size_t{2}}) {
    double dkl = 0.0;
    for (std::size_t y = 0; y < m.sensing.num_outputs(); ++y)
      dkl += kl_term(m.sensing.p0[x][y], m.sensing.p1[x][y]);
    REQUIRE(std::abs(dkl - 0.125) < 1e-3);
  }
  // The x = 0 input is blind: both states show N(0,1).
  REQUIRE(m.sensing.p0[1] == m.sensing.p1[1]);
}

TEST_CASE("quantized scalar iid channel: on-off grid, prior, separate noise scales") {
  GaussianSpec spec;
  spec.kind = GaussianSpec::Kind::ScalarIid;
  spec.sigma_c2 = 1.0;
  spec.sigma_s2 = 2.0;
  spec.state_prior = 0.5;
  const ChannelModel m = quantize_gaussian(spec, 64, 8.0);
  REQUIRE(m.sensing.inputs == std::vector<std::string>{"0", "1"});
  REQUIRE(m.comm.state_prior.has_value());
  // Off input is indistinguishable across states on both links.
  REQUIRE(m.sensing.p0[0] == m.sensing.p1[0]);
  REQUIRE(m.comm.p0[0] == m.comm.p1[0]);
  // On input under state 1 approximates D(N(1,s)||N(0,s)) = 1/(2 sigma_s^2).
  double dkl = 0.0;
  for (std::size_t y = 0; y < m.sensing.num_outputs(); ++y)
    dkl += kl_term(m.sensing.p1[1][y], m.sensing.p0[1][y]);
  REQUIRE(std::abs(dkl - 0.25) < 2e-3);
}

TEST_CASE("quantization parameter guards") {
  GaussianSpec spec;
  spec.kind = GaussianSpec::Kind::ScalarFixedState;
  spec.h = 0.5;
  spec.power = 1.0;
  REQUIRE_THROWS_AS(quantize_gaussian(spec, 8, 8.0), std::invalid_argument);
  REQUIRE_THROWS_AS(quantize_gaussian(spec, 64, 2.0), std::invalid_argument);
  spec.power = -1.0;
  REQUIRE_THROWS_AS(quantize_gaussian(spec, 64, 8.0), std::invalid_argument);
  GaussianSpec vec;
  vec.kind = GaussianSpec::Kind::VectorFixedState;
  REQUIRE_THROWS_AS(quantize_gaussian(vec, 64, 8.0), std::domain_error);
}

TEST_CASE("unknown symbols raise domain errors") {
  const ChannelModel m = build_binary_multiplicative(0.1, 0.2);
  REQUIRE(m.sensing.input_index("1") == 1);
  REQUIRE_THROWS_AS(m.sensing.input_index("2"), std::domain_error);
}
