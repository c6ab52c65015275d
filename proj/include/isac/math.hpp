#pragma once

// Scalar numerics shared across the library: entropies and divergences (always
// in nats; conversion to bits happens only at the output layer), log-domain
// reductions, normal tail probabilities, and the rounding scheme that turns
// input weights into integer symbol compositions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace isac {

inline constexpr double kLn2 = 0.69314718055994530942;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Rates and exponents are kept in nats internally; callers convert on output.
[[nodiscard]] inline double nats_to_bits(double x) { return x / kLn2; }

/// x*log(x), continuously extended with 0*log(0) = 0.
[[nodiscard]] inline double xlogx(double x) {
  return x > 0.0 ? x * std::log(x) : 0.0;
}

/// One Kullback-Leibler summand a*log(a/b), with 0*log(0/b) = 0.  A positive
/// mass a on a point where b vanishes means the divergence is infinite; that is
/// always a modeling error here, so it throws instead of returning inf.
[[nodiscard]] inline double kl_term(double a, double b) {
  if (a <= 0.0) return 0.0;
  if (b <= 0.0) throw std::domain_error("kl_term: positive mass where the reference law vanishes");
  return a * std::log(a / b);
}

/// Binary entropy in nats.
[[nodiscard]] inline double binary_entropy(double p) {
  if (p < 0.0 || p > 1.0) throw std::domain_error("binary_entropy: p outside [0,1]");
  return -xlogx(p) - xlogx(1.0 - p);
}

/// Binary divergence D(a||b) in nats.
[[nodiscard]] inline double binary_kl(double a, double b) {
  return kl_term(a, b) + kl_term(1.0 - a, 1.0 - b);
}

/// Binary convolution a*b = a(1-b) + (1-a)b: the crossover probability of two
/// cascaded binary symmetric channels.
[[nodiscard]] inline double binary_convolve(double a, double b) {
  return a * (1.0 - b) + (1.0 - a) * b;
}

/// log(sum_i exp(v_i)) with the usual max shift; -inf for an empty input.
[[nodiscard]] inline double log_sum_exp(const std::vector<double>& v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

/// Standard normal CDF, computed via erfc so the lower tail keeps full
/// relative accuracy far beyond where 1 - Phi(-z) would round to zero.
[[nodiscard]] inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

/// Standard normal tail probability Q(z) = 1 - Phi(z).
[[nodiscard]] inline double normal_sf(double z) {
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

/// P(za < Z <= zb) for standard normal Z.  The branch keeps the subtraction on
/// the tail side of the distribution, so cells deep in the right tail come out
/// as a difference of two small erfc values instead of two numbers near one.
[[nodiscard]] inline double normal_cell_prob(double za, double zb) {
  if (zb < za) throw std::invalid_argument("normal_cell_prob: zb < za");
  if (za >= 0.0) return normal_sf(za) - normal_sf(zb);
  return normal_cdf(zb) - normal_cdf(za);  // left-tail and straddling cells
}

/// Apportion n items to weights by largest-remainder rounding: each index gets
/// floor(n*w_i), and the leftover items go to the largest fractional parts,
/// ties broken toward the lowest index.  The counts sum to n exactly, so a
/// codeword composition derived from an input distribution is reproducible.
[[nodiscard]] inline std::vector<long long> largest_remainder_counts(
    const std::vector<double>& w, long long n) {
  if (n < 0) throw std::invalid_argument("largest_remainder_counts: negative n");
  const std::size_t k = w.size();
  std::vector<long long> counts(k, 0);
  std::vector<double> frac(k, 0.0);
  long long assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (w[i] < 0.0) throw std::invalid_argument("largest_remainder_counts: negative weight");
    const double quota = w[i] * static_cast<double>(n);
    counts[i] = static_cast<long long>(std::floor(quota));
    frac[i] = quota - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  long long leftover = n - assigned;
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&frac](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t j = 0; leftover > 0 && j < k; ++j, --leftover) counts[order[j]] += 1;
  if (leftover != 0) throw std::runtime_error("largest_remainder_counts: weights do not sum to 1");
  return counts;
}

}  // namespace isac
