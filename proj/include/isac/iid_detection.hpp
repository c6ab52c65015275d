#pragma once

// Detection under an i.i.d. state with a symbolwise false-alarm budget.  Each
// input symbol owns a concave ROC; spending the budget is a fractional
// knapsack over ROC segments, solved two ways: the greedy budget-pouring
// iteration (Delta at a time onto the steepest current slope) and the exact
// segment-sorted solution of the same linear program, used as its oracle.
// The rate/detection sweep couples the detector with the mutual information
// of the state-marginalized communication channel.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "isac/channels.hpp"
#include "isac/math.hpp"
#include "isac/roc.hpp"

namespace isac {

// ============================================================================
// Marginal communication channel
// ============================================================================

/// Collapse the per-state communication laws under the state prior:
/// p(ytilde|x) = (1-gamma_s) p0 + gamma_s p1.  Decoding in the i.i.d. setting
/// sees exactly this marginal.
[[nodiscard]] inline CondPmf marginal_comm_channel(const CommChannel& comm) {
  if (!comm.state_prior)
    throw std::invalid_argument("marginal_comm_channel: channel carries no state prior");
  const double g = *comm.state_prior;
  if (g < 0.0 || g > 1.0)
    throw std::invalid_argument("marginal_comm_channel: state prior outside [0,1]");
  CondPmf rows(comm.num_inputs(), Pmf(comm.num_outputs(), 0.0));
  for (std::size_t x = 0; x < comm.num_inputs(); ++x)
    for (std::size_t y = 0; y < comm.num_outputs(); ++y)
      rows[x][y] = (1.0 - g) * comm.p0[x][y] + g * comm.p1[x][y];
  return rows;
}

// ============================================================================
// Budget allocation
// ============================================================================

/// Operating point chosen for one input symbol, with the randomized test that
/// realizes it.
struct SymbolOperatingPoint {
  double p_fa = 0.0;
  double p_d = 0.0;
  RandomizedTest test;
};

struct Allocation {
  std::vector<SymbolOperatingPoint> per_symbol;
  double avg_p_fa = 0.0;  // sum_x p_X(x) p_fa_x, <= alpha by construction
  double avg_p_d = 0.0;   // the detection objective beta
};

namespace detail {

inline void check_allocation_inputs(const Pmf& p_x, const std::vector<RocCurve>& rocs,
                                    double alpha) {
  if (rocs.size() != p_x.size())
    throw std::invalid_argument("allocation: one ROC per input symbol required");
  check_input_distribution(p_x, p_x.size());
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::range_error("allocation: alpha must lie in (0,1]");
}

inline Allocation finish_allocation(const Pmf& p_x, const std::vector<RocCurve>& rocs,
                                    const std::vector<double>& pfa) {
  Allocation a;
  a.per_symbol.resize(p_x.size());
  for (std::size_t x = 0; x < p_x.size(); ++x) {
    SymbolOperatingPoint& op = a.per_symbol[x];
    op.p_fa = pfa[x];
    op.p_d = rocs[x].detection_at(pfa[x]);
    op.test = rocs[x].test_for(pfa[x]);
    a.avg_p_fa += p_x[x] * op.p_fa;
    a.avg_p_d += p_x[x] * op.p_d;
  }
  return a;
}

}  // namespace detail

/// Greedy budget pouring: start all symbols at zero false alarm and repeatedly
/// give Delta of averaged budget to the symbol with the steepest current
/// (right-hand) ROC slope, ties to the lowest symbol index.  Pours cross
/// vertices blindly, which is what bounds the optimality gap by
/// slope_max * Delta; only the final pour is truncated so the spent budget
/// lands exactly on alpha.  Symbols with p_X(x) = 0 never receive budget.
[[nodiscard]] inline Allocation waterfill(const Pmf& p_x, const std::vector<RocCurve>& rocs,
                                          double alpha, double delta) {
  detail::check_allocation_inputs(p_x, rocs, alpha);
  if (!(delta > 0.0)) throw std::range_error("waterfill: Delta must be positive");
  std::vector<double> pfa(p_x.size(), 0.0);
  double left = alpha;
  while (left > 1e-15) {
    std::size_t best = p_x.size();
    double best_slope = 0.0;
    for (std::size_t x = 0; x < p_x.size(); ++x) {
      if (p_x[x] == 0.0 || pfa[x] >= 1.0) continue;
      const double s = rocs[x].slope_at(pfa[x]);
      if (best == p_x.size() || s > best_slope) {
        best = x;
        best_slope = s;
      }
    }
    if (best == p_x.size()) break;  // every weighted symbol saturated
    const double pour = std::min(delta, left);
    const double room = (1.0 - pfa[best]) * p_x[best];
    const double take = std::min(pour, room);
    // Consuming the whole room saturates the symbol exactly; accumulating
    // take/p_X instead would land ulps shy of 1 and leave it a candidate.
    pfa[best] = take == room ? 1.0 : std::min(1.0, pfa[best] + take / p_x[best]);
    left -= take;
  }
  // A full budget should saturate exactly even when the last truncated pour
  // leaves an fp-residual sliver unspent.
  for (double& v : pfa) v = v > 1.0 - 1e-12 ? 1.0 : v;
  return detail::finish_allocation(p_x, rocs, pfa);
}

/// Exact optimum of the same program: pool every ROC segment, sort by slope
/// (ties to the lowest symbol index; a symbol's own segments already arrive
/// steepest-first), and fill until the budget runs out.  Concavity of each ROC
/// makes this greedy exact, which is what certifies the pouring iteration.
[[nodiscard]] inline Allocation allocation_oracle(const Pmf& p_x,
                                                  const std::vector<RocCurve>& rocs,
                                                  double alpha) {
  detail::check_allocation_inputs(p_x, rocs, alpha);
  struct Segment {
    double slope, cost;  // cost in averaged-budget units: p_X(x) * width
    std::size_t x;
  };
  std::vector<Segment> segs;
  for (std::size_t x = 0; x < p_x.size(); ++x) {
    if (p_x[x] == 0.0) continue;
    const RocCurve& r = rocs[x];
    for (std::size_t i = 0; i + 1 < r.vertices.size(); ++i)
      segs.push_back({r.slopes[i], p_x[x] * (r.vertices[i + 1].p_fa - r.vertices[i].p_fa), x});
  }
  std::stable_sort(segs.begin(), segs.end(), [](const Segment& a, const Segment& b) {
    if (a.slope != b.slope) return a.slope > b.slope;
    return a.x < b.x;
  });
  std::vector<double> pfa(p_x.size(), 0.0);
  double left = alpha;
  for (const Segment& s : segs) {
    if (left <= 0.0) break;
    const double take = std::min(left, s.cost);
    pfa[s.x] += take / p_x[s.x];
    left -= take;
  }
  // Guard fp accumulation; widths that sum to a full curve saturate exactly.
  for (double& v : pfa) v = v > 1.0 - 1e-12 ? 1.0 : v;
  return detail::finish_allocation(p_x, rocs, pfa);
}

// ============================================================================
// Rate / detection-probability sweep
// ============================================================================

/// Average mutual information sum_x p_X(x) sum_y p(y|x) log(p(y|x)/p(y)) in
/// nats, with the 0 log 0 convention.
[[nodiscard]] inline double mutual_information(const Pmf& p_x, const CondPmf& rows) {
  check_input_distribution(p_x, rows.size());
  if (rows.empty()) throw std::invalid_argument("mutual_information: empty channel");
  const std::size_t ny = rows[0].size();
  Pmf marginal(ny, 0.0);
  for (std::size_t x = 0; x < rows.size(); ++x) {
    if (rows[x].size() != ny) throw std::invalid_argument("mutual_information: ragged rows");
    for (std::size_t y = 0; y < ny; ++y) marginal[y] += p_x[x] * rows[x][y];
  }
  double info = 0.0;
  for (std::size_t x = 0; x < rows.size(); ++x) {
    if (p_x[x] == 0.0) continue;
    double d = 0.0;
    for (std::size_t y = 0; y < ny; ++y) d += kl_term(rows[x][y], marginal[y]);
    info += p_x[x] * d;
  }
  return info;
}

struct IidRegionRow {
  std::size_t px_index = 0;
  double alpha = 0.0;
  double rate = 0.0;  // nats
  double beta = 0.0;
  bool flat = false;  // lies in a numerically flat stretch of beta over the grid
};

/// Rate/detection cross-sections: for every false-alarm level and every input
/// distribution on the grid, the mutual information of the marginal channel
/// and the exact optimal detection probability.  Rows are grouped per alpha in
/// grid order; beta stretches that vary by <= 1e-10 between neighbors are
/// flagged flat.
[[nodiscard]] inline std::vector<IidRegionRow> rate_probability_region(
    const ChannelModel& model, const std::vector<Pmf>& px_grid,
    const std::vector<double>& alphas) {
  require_valid(model.sensing, "rate_probability_region");
  const CondPmf marginal = marginal_comm_channel(model.comm);
  std::vector<RocCurve> rocs;
  rocs.reserve(model.sensing.num_inputs());
  for (std::size_t x = 0; x < model.sensing.num_inputs(); ++x)
    rocs.push_back(roc_from_likelihoods(model.sensing.p0[x], model.sensing.p1[x]));

  std::vector<double> rates(px_grid.size());
  for (std::size_t i = 0; i < px_grid.size(); ++i)
    rates[i] = mutual_information(px_grid[i], marginal);

  std::vector<IidRegionRow> rows;
  rows.reserve(px_grid.size() * alphas.size());
  for (const double alpha : alphas) {
    const std::size_t base = rows.size();
    for (std::size_t i = 0; i < px_grid.size(); ++i) {
      IidRegionRow r;
      r.px_index = i;
      r.alpha = alpha;
      r.rate = rates[i];
      r.beta = allocation_oracle(px_grid[i], rocs, alpha).avg_p_d;
      rows.push_back(r);
    }
    for (std::size_t i = base; i < rows.size(); ++i) {
      const bool prev = i > base && std::abs(rows[i].beta - rows[i - 1].beta) <= 1e-10;
      const bool next = i + 1 < rows.size() && std::abs(rows[i + 1].beta - rows[i].beta) <= 1e-10;
      rows[i].flat = prev || next;
    }
  }
  return rows;
}

}  // namespace isac
