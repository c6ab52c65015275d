#pragma once

// Finite-alphabet channel models for joint communication and binary state
// detection.  A sensing channel is a pair of conditional laws (p0, p1) over a
// common output alphabet, one per hypothesis on the state; the communication
// channel carries its own per-state laws plus an optional prior on the state
// for the i.i.d. setting.  Builders cover the worked examples (binary
// multiplicative, binary i.i.d., quantized scalar Gaussians); anything else
// can be supplied as explicit matrices and validated.

#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "isac/math.hpp"

namespace isac {

using Pmf = std::vector<double>;    // one conditional law p(.|x)
using CondPmf = std::vector<Pmf>;   // rows indexed by the input alphabet

// ============================================================================
// Channel types
// ============================================================================

/// Sensing channel: two conditional laws over one output alphabet, indexed by
/// the binary state.  Immutable after construction by convention; builders and
/// the JSON loader run full validation before handing one out.
struct BinaryStatePair {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  CondPmf p0;  // p(y|x, state = 0)
  CondPmf p1;  // p(y|x, state = 1)

  [[nodiscard]] std::size_t num_inputs() const { return inputs.size(); }
  [[nodiscard]] std::size_t num_outputs() const { return outputs.size(); }

  /// Index of an input symbol by label; unknown symbols are a domain error.
  [[nodiscard]] std::size_t input_index(const std::string& sym) const {
    for (std::size_t i = 0; i < inputs.size(); ++i)
      if (inputs[i] == sym) return i;
    throw std::domain_error("unknown input symbol '" + sym + "'");
  }
};

/// Communication channel, possibly state-dependent.  `state_prior` is P(S=1)
/// and is only present in the i.i.d.-state setting.
struct CommChannel {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  CondPmf p0;  // p(ytilde|x, state = 0)
  CondPmf p1;  // p(ytilde|x, state = 1)
  std::optional<double> state_prior;

  [[nodiscard]] std::size_t num_inputs() const { return inputs.size(); }
  [[nodiscard]] std::size_t num_outputs() const { return outputs.size(); }
};

/// A sensing pair and the matching communication channel over one input
/// alphabet -- what every worked example produces.
struct ChannelModel {
  BinaryStatePair sensing;
  CommChannel comm;
};

/// Continuous Gaussian model, kept symbolic until quantization (scalar kinds)
/// or handed to the closed-form vector path as-is.
struct GaussianSpec {
  enum class Kind { ScalarFixedState, ScalarIid, VectorFixedState };
  Kind kind = Kind::ScalarFixedState;

  // scalar fixed state: Y = X + Z vs Y = h*X + Z, unit noise, E[X^2] <= P
  double h = 0.0;
  double power = 0.0;
  std::vector<double> input_grid;  // finite signaling grid; empty = {-sqrt(P), 0, +sqrt(P)}

  // scalar i.i.d. state: on-off signaling {0,1}, Y = S*X + Z
  double sigma_c2 = 1.0;  // communication noise variance
  double sigma_s2 = 1.0;  // sensing noise variance
  double state_prior = 0.5;

  // vector fixed state: Y = H_s X + Z, identity noise covariance
  std::vector<std::vector<double>> H0, H1, H_tilde;
};

// ============================================================================
// Validation
// ============================================================================

struct ChannelDiagnostics {
  double max_row_sum_residual = 0.0;
  /// (x, y) cells where exactly one of p0, p1 vanishes -- the likelihood ratio
  /// is unbounded there and every exponent formula breaks down.
  std::vector<std::pair<std::size_t, std::size_t>> support_mismatches;
  /// Largest per-input variance of log(p1/p0) under either state.  Finite for
  /// every common-support finite alphabet; recorded as the direct analogue of
  /// the bounded-variance condition the theory imposes on the ratio.
  double max_llr_variance = 0.0;
  bool pass = false;
};

namespace detail {

inline void check_matrix_shape(const CondPmf& m, std::size_t rows, std::size_t cols,
                               const char* what) {
  if (m.size() != rows)
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(rows) + " rows");
  for (const Pmf& r : m)
    if (r.size() != cols)
      throw std::invalid_argument(std::string(what) + ": ragged row (expected " +
                                  std::to_string(cols) + " columns)");
}

}  // namespace detail

/// Structural diagnostics for a sensing pair: row-stochasticity, common
/// support, and the per-symbol LLR variances.  `pass` requires row sums within
/// 1e-12 and no support mismatches.
[[nodiscard]] inline ChannelDiagnostics validate(const BinaryStatePair& pair) {
  detail::check_matrix_shape(pair.p0, pair.num_inputs(), pair.num_outputs(), "p0");
  detail::check_matrix_shape(pair.p1, pair.num_inputs(), pair.num_outputs(), "p1");
  ChannelDiagnostics d;
  for (std::size_t x = 0; x < pair.num_inputs(); ++x) {
    for (const CondPmf* m : {&pair.p0, &pair.p1}) {
      double s = 0.0;
      for (double v : (*m)[x]) {
        if (v < 0.0 || !std::isfinite(v))
          throw std::invalid_argument("conditional law has a negative or non-finite entry");
        s += v;
      }
      d.max_row_sum_residual = std::max(d.max_row_sum_residual, std::abs(s - 1.0));
    }
    for (std::size_t y = 0; y < pair.num_outputs(); ++y) {
      const bool z0 = pair.p0[x][y] == 0.0, z1 = pair.p1[x][y] == 0.0;
      if (z0 != z1) d.support_mismatches.emplace_back(x, y);
    }
    // LLR variance over the common support, under each state's law.
    for (const CondPmf* m : {&pair.p0, &pair.p1}) {
      double mean = 0.0, mom2 = 0.0;
      for (std::size_t y = 0; y < pair.num_outputs(); ++y) {
        const double w = (*m)[x][y];
        if (w == 0.0 || pair.p0[x][y] == 0.0 || pair.p1[x][y] == 0.0) continue;
        const double l = std::log(pair.p1[x][y] / pair.p0[x][y]);
        mean += w * l;
        mom2 += w * l * l;
      }
      d.max_llr_variance = std::max(d.max_llr_variance, mom2 - mean * mean);
    }
  }
  d.pass = d.max_row_sum_residual <= 1e-12 && d.support_mismatches.empty();
  return d;
}

/// Validate-or-throw.  Error text lists the first few offending cells so a bad
/// explicit channel file can be fixed without a debugger.
inline void require_valid(const BinaryStatePair& pair, const char* context) {
  const ChannelDiagnostics d = validate(pair);
  if (d.pass) return;
  std::ostringstream os;
  os << context << ": invalid sensing pair;";
  if (d.max_row_sum_residual > 1e-12)
    os << " row sum residual " << d.max_row_sum_residual << ";";
  if (!d.support_mismatches.empty()) {
    os << " support mismatches at";
    for (std::size_t i = 0; i < d.support_mismatches.size() && i < 4; ++i)
      os << " (x=" << d.support_mismatches[i].first << ",y=" << d.support_mismatches[i].second
         << ")";
    if (d.support_mismatches.size() > 4) os << " ...";
  }
  throw std::invalid_argument(os.str());
}

/// Input weights must be a distribution over the channel's input alphabet:
/// correct length, nonnegative, total within 1e-12 of one.
inline void check_input_distribution(const Pmf& p_x, std::size_t num_inputs) {
  if (p_x.size() != num_inputs)
    throw std::invalid_argument("input distribution length does not match the input alphabet");
  double s = 0.0;
  for (double v : p_x) {
    if (v < 0.0 || !std::isfinite(v))
      throw std::invalid_argument("input distribution has a negative or non-finite weight");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-12)
    throw std::invalid_argument("input distribution does not sum to 1 (residual " +
                                std::to_string(s - 1.0) + ")");
}

// ============================================================================
// Worked-example builders
// ============================================================================

namespace detail {

inline void check_unit_interval(double v, const char* name, bool open) {
  const bool bad = open ? (v <= 0.0 || v >= 1.0) : (v < 0.0 || v > 1.0);
  if (!std::isfinite(v) || bad)
    throw std::invalid_argument(std::string(name) + " must lie in " + (open ? "(0,1)" : "[0,1]"));
}

}  // namespace detail

/// Multiplicative binary example: the state gates whether the input reaches
/// the sensing output.  Sensing Y = S*X xor Z with Z ~ Bern(q), so state 0
/// shows pure noise Bern(q) for every input and state 1 flips the noise around
/// X.  Communication is a state-independent BSC(p).
[[nodiscard]] inline ChannelModel build_binary_multiplicative(double p, double q) {
  detail::check_unit_interval(p, "p", /*open=*/true);
  detail::check_unit_interval(q, "q", /*open=*/true);
  ChannelModel m;
  m.sensing.inputs = {"0", "1"};
  m.sensing.outputs = {"0", "1"};
  m.sensing.p0 = {{1.0 - q, q}, {1.0 - q, q}};
  m.sensing.p1 = {{1.0 - q, q}, {q, 1.0 - q}};
  m.comm.inputs = {"0", "1"};
  m.comm.outputs = {"0", "1"};
  m.comm.p0 = {{1.0 - p, p}, {p, 1.0 - p}};
  m.comm.p1 = m.comm.p0;
  require_valid(m.sensing, "build_binary_multiplicative");
  return m;
}

/// Binary example with an i.i.d. state: both links see Y = S*X xor Z, with
/// crossover gamma1 on the communication side, gamma2 on the sensing side, and
/// P(S=1) = gamma_s.
[[nodiscard]] inline ChannelModel build_iid_binary(double gamma1, double gamma2, double gamma_s) {
  detail::check_unit_interval(gamma1, "gamma1", /*open=*/true);
  detail::check_unit_interval(gamma2, "gamma2", /*open=*/true);
  detail::check_unit_interval(gamma_s, "gamma_s", /*open=*/false);
  ChannelModel m;
  m.sensing.inputs = {"0", "1"};
  m.sensing.outputs = {"0", "1"};
  m.sensing.p0 = {{1.0 - gamma2, gamma2}, {1.0 - gamma2, gamma2}};
  m.sensing.p1 = {{1.0 - gamma2, gamma2}, {gamma2, 1.0 - gamma2}};
  m.comm.inputs = {"0", "1"};
  m.comm.outputs = {"0", "1"};
  m.comm.p0 = {{1.0 - gamma1, gamma1}, {1.0 - gamma1, gamma1}};
  m.comm.p1 = {{1.0 - gamma1, gamma1}, {gamma1, 1.0 - gamma1}};
  m.comm.state_prior = gamma_s;
  require_valid(m.sensing, "build_iid_binary");
  return m;
}

// ============================================================================
// Gaussian quantization
// ============================================================================

namespace detail {

/// Uniform cells over [lo, hi] plus two unbounded tail cells; rows are the
/// exact cell masses of N(mu, sigma^2), renormalized to kill the ~1e-16
/// telescoping residual.
struct QuantGrid {
  std::vector<double> edges;  // interior edges, size bins+1
  std::vector<std::string> labels;

  QuantGrid(double lo, double hi, int bins) {
    edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i)
      edges[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / bins;
    std::ostringstream os;
    os.precision(6);
    labels.reserve(static_cast<std::size_t>(bins) + 2);
    auto fmt = [&os](double v) {
      os.str("");
      os << v;
      return os.str();
    };
    labels.push_back("(-inf," + fmt(lo) + ")");
    for (int i = 0; i < bins; ++i)
      labels.push_back("[" + fmt(edges[static_cast<std::size_t>(i)]) + "," +
                       fmt(edges[static_cast<std::size_t>(i) + 1]) + ")");
    labels.push_back("[" + fmt(hi) + ",inf)");
  }

  [[nodiscard]] Pmf row(double mu, double sigma) const {
    Pmf r;
    r.reserve(labels.size());
    r.push_back(normal_cdf((edges.front() - mu) / sigma));
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
      r.push_back(normal_cell_prob((edges[i] - mu) / sigma, (edges[i + 1] - mu) / sigma));
    r.push_back(normal_sf((edges.back() - mu) / sigma));
    double s = 0.0;
    for (double v : r) s += v;
    for (double& v : r) v /= s;
    return r;
  }
};

[[nodiscard]] inline std::string format_grid_value(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace detail

/// Quantization error distinct from parameter misuse: the requested grid
/// cannot represent both hypotheses at working precision.
class QuantizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Discretize a scalar Gaussian spec onto `bins` uniform cells spanning
/// [mu_min - span*sigma, mu_max + span*sigma] plus two unbounded tails (so
/// every density comparison happens on a finite common alphabet).  Sensing and
/// communication sides get their own grids.  Vector specs have no scalar bin
/// grid; they are served entirely by the closed-form region path.
[[nodiscard]] inline ChannelModel quantize_gaussian(const GaussianSpec& spec, int bins = 512,
                                                    double span_sigmas = 8.0) {
  if (spec.kind == GaussianSpec::Kind::VectorFixedState)
    throw std::domain_error(
        "quantize_gaussian: vector specs have no scalar bin grid; use the closed-form region");
  if (bins < 16) throw std::invalid_argument("quantize_gaussian: bins must be >= 16");
  if (span_sigmas < 4.0) throw std::invalid_argument("quantize_gaussian: span_sigmas must be >= 4");

  // Per-input means under each state for both links, plus the noise scales.
  std::vector<double> grid;
  double sigma_sense = 1.0, sigma_comm = 1.0;
  std::vector<double> mu_sense0, mu_sense1, mu_comm0, mu_comm1;
  std::optional<double> prior;
  if (spec.kind == GaussianSpec::Kind::ScalarFixedState) {
    if (!(spec.power > 0.0) || !std::isfinite(spec.power))
      throw std::invalid_argument("quantize_gaussian: power must be positive");
    grid = spec.input_grid;
    if (grid.empty()) grid = {-std::sqrt(spec.power), 0.0, std::sqrt(spec.power)};
    for (double x : grid) {
      mu_sense0.push_back(x);
      mu_sense1.push_back(spec.h * x);
      mu_comm0.push_back(x);
      mu_comm1.push_back(x);
    }
  } else {
    if (!(spec.sigma_c2 > 0.0) || !(spec.sigma_s2 > 0.0))
      throw std::invalid_argument("quantize_gaussian: noise variances must be positive");
    detail::check_unit_interval(spec.state_prior, "state_prior", /*open=*/false);
    grid = {0.0, 1.0};  // on-off signaling
    sigma_sense = std::sqrt(spec.sigma_s2);
    sigma_comm = std::sqrt(spec.sigma_c2);
    for (double x : grid) {
      mu_sense0.push_back(0.0);
      mu_sense1.push_back(x);
      mu_comm0.push_back(0.0);
      mu_comm1.push_back(x);
    }
    prior = spec.state_prior;
  }

  auto build_side = [bins, span_sigmas](const std::vector<double>& mu0,
                                        const std::vector<double>& mu1, double sigma) {
    double lo = mu0[0], hi = mu0[0];
    for (const std::vector<double>* mus : {&mu0, &mu1})
      for (double m : *mus) {
        lo = std::min(lo, m);
        hi = std::max(hi, m);
      }
    detail::QuantGrid g(lo - span_sigmas * sigma, hi + span_sigmas * sigma, bins);
    CondPmf r0, r1;
    for (std::size_t x = 0; x < mu0.size(); ++x) {
      r0.push_back(g.row(mu0[x], sigma));
      r1.push_back(g.row(mu1[x], sigma));
    }
    return std::tuple<std::vector<std::string>, CondPmf, CondPmf>(g.labels, std::move(r0),
                                                                  std::move(r1));
  };

  ChannelModel m;
  for (double x : grid) m.sensing.inputs.push_back(detail::format_grid_value(x));
  m.comm.inputs = m.sensing.inputs;
  std::tie(m.sensing.outputs, m.sensing.p0, m.sensing.p1) =
      build_side(mu_sense0, mu_sense1, sigma_sense);
  std::tie(m.comm.outputs, m.comm.p0, m.comm.p1) = build_side(mu_comm0, mu_comm1, sigma_comm);
  m.comm.state_prior = prior;

  const ChannelDiagnostics d = validate(m.sensing);
  if (!d.support_mismatches.empty())
    throw QuantizationError(
        "quantize_gaussian: a cell underflowed to zero under one hypothesis only; "
        "adjust span_sigmas/bins so both densities stay representable");
  return m;
}

}  // namespace isac
