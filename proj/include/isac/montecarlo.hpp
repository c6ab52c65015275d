#pragma once

// Monte Carlo verification of the two constructive detectors: the blockwise
// log-likelihood-ratio threshold test for a fixed state, and the randomized
// symbolwise tests of a budget allocation for an i.i.d. state.  Because the
// codeword has constant composition and the channel is memoryless, the block
// LLR depends on the outputs only through the per-input output histograms, so
// each trial samples those histograms directly (a chain of conditional
// binomial splits) instead of n individual symbols -- an exact simulation of
// the test statistic at a per-trial cost independent of n.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "isac/channels.hpp"
#include "isac/exponent.hpp"
#include "isac/iid_detection.hpp"
#include "isac/math.hpp"
#include "isac/rng.hpp"
#include "isac/roc.hpp"

namespace isac {

// ============================================================================
// Configuration and result rows
// ============================================================================

struct SimConfig {
  std::uint64_t seed = 1;
  /// Fixed-state runs: trials per (blocklength, state).  I.i.d. runs: total
  /// number of simulated channel uses.
  long long trials = 100000;
  std::vector<long long> n_values;  // fixed-state blocklengths, each >= 1
  Pmf composition;                  // nominal p_X; realized exactly per n
  unsigned threads = 0;             // worker count; 0 = hardware concurrency
};

/// One empirical error-rate estimate.  The tallied event depends on the run:
/// fixed-state rows count errors (state 0: false alarms, state 1: misses) and
/// `bound` is the matching finite-n Chernoff bound at the realized type;
/// i.i.d. rows count declare-1 decisions (state 0: false alarms, state 1:
/// detections) and `bound` is the allocation's exact expectation.
struct SimRow {
  long long n = 0;  // blocklength (fixed state) or total channel uses (iid)
  int state = 0;
  long long trials = 0;
  long long errors = 0;
  double p_hat = 0.0;
  double ci_lo = 0.0;  // two-sided 95% Clopper-Pearson
  double ci_hi = 0.0;
  double bound = 0.0;
};

/// Exact two-sided binomial (Clopper-Pearson) interval from k successes in n.
struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 1.0;
};

[[nodiscard]] inline ConfidenceInterval clopper_pearson(long long k, long long n,
                                                        double confidence = 0.95) {
  if (n < 1 || k < 0 || k > n) throw std::invalid_argument("clopper_pearson: need 0 <= k <= n");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw std::invalid_argument("clopper_pearson: confidence must lie in (0,1)");
  const double half_tail = (1.0 - confidence) / 2.0;
  ConfidenceInterval ci;
  const auto kd = static_cast<double>(k), nd = static_cast<double>(n);
  if (k > 0) ci.lo = boost::math::ibeta_inv(kd, nd - kd + 1.0, half_tail);
  if (k < n) ci.hi = boost::math::ibeta_inv(kd + 1.0, nd - kd, 1.0 - half_tail);
  return ci;
}

// ============================================================================
// Exponent fitting
// ============================================================================

/// Weighted least-squares fit of log(p_hat) = intercept - exponent * n.
/// Weights are the error counts (delta method: Var[log p_hat] ~ 1/errors);
/// blocklengths with fewer than `min_errors` events carry no usable rate
/// information and are excluded and listed.  A probability of zero cannot be
/// upper-bounded from data alone, so zero-count rows are always excluded.
struct ExponentFit {
  double exponent = 0.0;   // fitted decay rate, nats per channel use
  double std_error = 0.0;  // standard error of the fitted rate
  double intercept = 0.0;  // fitted log-prefactor
  std::size_t points_used = 0;
  std::vector<long long> excluded;  // blocklengths dropped from the fit

  [[nodiscard]] bool usable() const { return points_used >= 2; }
};

[[nodiscard]] inline ExponentFit fit_exponent(const std::vector<SimRow>& rows, int state,
                                              long long min_errors = 20) {
  ExponentFit fit;
  double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const SimRow& r : rows) {
    if (r.state != state) continue;
    if (r.errors < min_errors) {
      fit.excluded.push_back(r.n);
      continue;
    }
    const double w = static_cast<double>(r.errors);
    const double x = static_cast<double>(r.n);
    const double y = std::log(r.p_hat);
    sw += w;
    sx += w * x;
    sy += w * y;
    sxx += w * x * x;
    sxy += w * x * y;
    ++fit.points_used;
  }
  if (!fit.usable()) return fit;
  const double det = sw * sxx - sx * sx;
  const double slope = (sw * sxy - sx * sy) / det;
  fit.exponent = -slope;
  fit.intercept = (sy - slope * sx) / sw;
  fit.std_error = std::sqrt(sw / det);
  return fit;
}

// ============================================================================
// Chernoff reference values
// ============================================================================

struct BoundCheck {
  double u = 0.0;
  double tau = 0.0;
  double e_fa = 0.0;      // nats
  double e_md = 0.0;      // nats
  double bound_fa = 0.0;  // exp(-n * e_fa); underflows to 0 deep in the tail
  double bound_md = 0.0;
};

/// Finite-n Chernoff bounds of the threshold test with tau matched to the
/// tilt u under composition p_X.
[[nodiscard]] inline BoundCheck chernoff_bound_check(const BinaryStatePair& pair, const Pmf& p_x,
                                                     double u, long long n) {
  if (n < 1) throw std::invalid_argument("chernoff_bound_check: n must be >= 1");
  const TiltedFamily tf(pair, p_x);
  const ExponentPoint e = exponent_pair(tf, u);
  const auto nd = static_cast<double>(n);
  return {e.u, e.tau, e.e_fa, e.e_md, std::exp(-nd * e.e_fa), std::exp(-nd * e.e_md)};
}

namespace detail {

/// Exponent pair of the threshold test at level tau, extended to thresholds
/// outside the interior range: past a corner the optimal tilt clamps to the
/// endpoint, one exponent collapses to zero (vacuous bound) and the other is
/// |tau| by the endpoint Chernoff argument.
struct TauExponents {
  double u = 0.0;
  double e_fa = 0.0;
  double e_md = 0.0;
};

[[nodiscard]] inline TauExponents exponents_for_tau(const TiltedFamily& tf, double tau) {
  try {
    const ExponentPoint e = exponent_pair(tf, solve_u_for_tau(tf, tau));
    return {e.u, e.e_fa, e.e_md};
  } catch (const TrivialCornerError& corner) {
    if (corner.corner() == PointTag::CornerFa0) return {0.0, 0.0, -tau};
    return {1.0, tau, 0.0};
  }
}

/// Histogram of `count` i.i.d. draws from `row`, via conditional binomial
/// splits cell by cell.  Exact, and O(#outputs) per call.
inline void sample_histogram(CounterRng& rng, const Pmf& row, long long count,
                             std::vector<long long>& hist) {
  hist.assign(row.size(), 0);
  double remaining_mass = 1.0;
  long long left = count;
  for (std::size_t y = 0; y + 1 < row.size() && left > 0; ++y) {
    if (row[y] <= 0.0) continue;
    const double p = std::clamp(row[y] / remaining_mass, 0.0, 1.0);
    std::binomial_distribution<long long> split(left, p);
    const long long k = split(rng);
    hist[y] = k;
    left -= k;
    remaining_mass -= row[y];
    if (remaining_mass <= 0.0) break;
  }
  if (left > 0) hist[row.size() - 1] += left;
}

/// Log-likelihood-ratio matrix with zeros on dead cells (which no draw can
/// land on for a validated pair).
[[nodiscard]] inline std::vector<std::vector<double>> llr_matrix(const BinaryStatePair& pair) {
  std::vector<std::vector<double>> l(pair.num_inputs(),
                                     std::vector<double>(pair.num_outputs(), 0.0));
  for (std::size_t x = 0; x < pair.num_inputs(); ++x)
    for (std::size_t y = 0; y < pair.num_outputs(); ++y)
      if (pair.p0[x][y] > 0.0 && pair.p1[x][y] > 0.0)
        l[x][y] = std::log(pair.p1[x][y]) - std::log(pair.p0[x][y]);
  return l;
}

[[nodiscard]] inline unsigned worker_count(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

/// Count errors over [0, trials) in parallel chunks.  `trial_error` must be a
/// pure function of the trial index (each trial derives its own stream), so
/// the count is independent of the worker split.
template <typename TrialFn>
[[nodiscard]] long long count_errors(long long trials, unsigned threads, const TrialFn& trial_error) {
  const unsigned workers = std::min<unsigned>(
      worker_count(threads), static_cast<unsigned>(std::min<long long>(trials, 64)));
  if (workers <= 1) {
    long long errors = 0;
    for (long long t = 0; t < trials; ++t) errors += trial_error(t) ? 1 : 0;
    return errors;
  }
  std::vector<long long> partial(workers, 0);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const long long lo = trials * w / workers, hi = trials * (w + 1) / workers;
      long long errors = 0;
      for (long long t = lo; t < hi; ++t) errors += trial_error(t) ? 1 : 0;
      partial[w] = errors;
    });
  }
  for (std::thread& th : pool) th.join();
  long long total = 0;
  for (long long e : partial) total += e;
  return total;
}

inline void check_sim_config(const SimConfig& cfg, std::size_t num_inputs) {
  if (cfg.trials < 1) throw std::invalid_argument("simulation: trials must be >= 1");
  check_input_distribution(cfg.composition, num_inputs);
}

}  // namespace detail

// ============================================================================
// Fixed-state simulation
// ============================================================================

/// Exponents the bounds were computed against, per blocklength (the realized
/// composition differs from the nominal one by the integer rounding of
/// p_X * n, and the analysis runs against the realized type).
struct RealizedTilt {
  long long n = 0;
  double u = 0.0;
  double e_fa = 0.0;  // nats
  double e_md = 0.0;  // nats
};

struct FixedStateSim {
  double tau = 0.0;
  std::vector<SimRow> rows;          // per n: state-0 row then state-1 row
  std::vector<RealizedTilt> tilts;   // one per blocklength
  ExponentFit fit_fa, fit_md;
};

/// Simulate the threshold test (declare state 1 iff the blockwise LLR is at
/// least n*tau) along composition-exact codewords, under both true states.
/// Thresholds beyond the admissible range are allowed: the test then errs
/// almost surely on one side, and the bounds clamp accordingly.
[[nodiscard]] inline FixedStateSim simulate_fixed_state(const BinaryStatePair& pair,
                                                        const SimConfig& cfg, double tau) {
  require_valid(pair, "simulate_fixed_state");
  detail::check_sim_config(cfg, pair.num_inputs());
  if (cfg.n_values.empty())
    throw std::invalid_argument("simulate_fixed_state: no blocklengths requested");
  for (long long n : cfg.n_values)
    if (n < 1) throw std::invalid_argument("simulate_fixed_state: blocklengths must be >= 1");

  const auto llr = detail::llr_matrix(pair);
  FixedStateSim out;
  out.tau = tau;

  for (const long long n : cfg.n_values) {
    const std::vector<long long> counts = largest_remainder_counts(cfg.composition, n);
    Pmf realized(counts.size());
    for (std::size_t x = 0; x < counts.size(); ++x)
      realized[x] = static_cast<double>(counts[x]) / static_cast<double>(n);
    const detail::TauExponents te =
        detail::exponents_for_tau(TiltedFamily(pair, realized), tau);
    out.tilts.push_back({n, te.u, te.e_fa, te.e_md});
    const double gate = static_cast<double>(n) * tau;

    for (int state = 0; state < 2; ++state) {
      const CondPmf& rows_s = state == 0 ? pair.p0 : pair.p1;
      const long long errors = detail::count_errors(
          cfg.trials, cfg.threads, [&](long long trial) {
            CounterRng rng = trial_stream(cfg.seed, static_cast<std::uint64_t>(n),
                                          static_cast<std::uint64_t>(state),
                                          static_cast<std::uint64_t>(trial));
            std::vector<long long> hist;
            double llr_sum = 0.0;
            for (std::size_t x = 0; x < counts.size(); ++x) {
              if (counts[x] == 0) continue;
              detail::sample_histogram(rng, rows_s[x], counts[x], hist);
              for (std::size_t y = 0; y < hist.size(); ++y)
                if (hist[y] > 0) llr_sum += static_cast<double>(hist[y]) * llr[x][y];
            }
            const bool declare_one = llr_sum >= gate;
            return state == 0 ? declare_one : !declare_one;
          });
      SimRow row;
      row.n = n;
      row.state = state;
      row.trials = cfg.trials;
      row.errors = errors;
      row.p_hat = static_cast<double>(errors) / static_cast<double>(cfg.trials);
      const ConfidenceInterval ci = clopper_pearson(errors, cfg.trials);
      row.ci_lo = ci.lo;
      row.ci_hi = ci.hi;
      row.bound = std::exp(-static_cast<double>(n) * (state == 0 ? te.e_fa : te.e_md));
      out.rows.push_back(row);
    }
  }
  out.fit_fa = fit_exponent(out.rows, 0);
  out.fit_md = fit_exponent(out.rows, 1);
  return out;
}

// ============================================================================
// I.i.d.-state simulation
// ============================================================================

struct IidSim {
  long long symbols = 0;    // total channel uses
  SimRow false_alarm;       // state 0: declare-1 rate vs the allocation's avg_p_fa
  SimRow detection;         // state 1: declare-1 rate vs the allocation's avg_p_d
};

/// Simulate the randomized symbolwise detector of an allocation: at each
/// channel use the state is drawn from the prior, the output from the
/// matching sensing law, and the symbol's randomized LR test declares.  Both
/// reported rates tally the declare-1 event, conditioned on the true state.
[[nodiscard]] inline IidSim simulate_iid(const BinaryStatePair& pair, const CommChannel& comm,
                                         const SimConfig& cfg, const Allocation& allocation) {
  require_valid(pair, "simulate_iid");
  detail::check_sim_config(cfg, pair.num_inputs());
  if (!comm.state_prior)
    throw std::invalid_argument("simulate_iid: communication channel carries no state prior");
  if (allocation.per_symbol.size() != pair.num_inputs())
    throw std::invalid_argument("simulate_iid: allocation does not match the input alphabet");
  const double gamma_s = *comm.state_prior;

  const auto llr = detail::llr_matrix(pair);
  std::vector<double> log_tau(pair.num_inputs());
  for (std::size_t x = 0; x < log_tau.size(); ++x)
    log_tau[x] = std::log(allocation.per_symbol[x].test.tau);

  const std::vector<long long> counts = largest_remainder_counts(cfg.composition, cfg.trials);
  long long tallies[2][2] = {{0, 0}, {0, 0}};  // [state][declared]
  for (std::size_t x = 0; x < counts.size(); ++x) {
    const double eta = allocation.per_symbol[x].test.eta;
    for (long long i = 0; i < counts[x]; ++i) {
      CounterRng rng = trial_stream(cfg.seed, 0, static_cast<std::uint64_t>(x),
                                    static_cast<std::uint64_t>(i));
      const int state = rng.uniform() < gamma_s ? 1 : 0;
      const Pmf& row = state == 0 ? pair.p0[x] : pair.p1[x];
      double mass = rng.uniform();
      std::size_t y = 0;
      for (; y + 1 < row.size(); ++y) {
        mass -= row[y];
        if (mass < 0.0) break;
      }
      const double l = llr[x][y];
      bool declare;
      if (l > log_tau[x] + 1e-12)
        declare = true;
      else if (l >= log_tau[x] - 1e-12)
        declare = rng.uniform() < eta;  // on-threshold output: randomize
      else
        declare = false;
      ++tallies[state][declare ? 1 : 0];
    }
  }

  IidSim out;
  out.symbols = cfg.trials;
  for (int state = 0; state < 2; ++state) {
    SimRow& row = state == 0 ? out.false_alarm : out.detection;
    row.n = cfg.trials;
    row.state = state;
    row.trials = tallies[state][0] + tallies[state][1];
    row.errors = tallies[state][1];
    row.p_hat = row.trials > 0
                    ? static_cast<double>(row.errors) / static_cast<double>(row.trials)
                    : 0.0;
    if (row.trials > 0) {
      const ConfidenceInterval ci = clopper_pearson(row.errors, row.trials);
      row.ci_lo = ci.lo;
      row.ci_hi = ci.hi;
    }
    row.bound = state == 0 ? allocation.avg_p_fa : allocation.avg_p_d;
  }
  return out;
}

}  // namespace isac
