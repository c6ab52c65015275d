// Command-line front end: loads a channel configuration, runs region sweeps,
// ROC extraction, or Monte Carlo simulations, and writes plot-ready CSV plus a
// manifest that pins every parameter of the run.  All outputs are
// deterministic: re-running a command with the parameters recorded in its
// manifest reproduces the files byte for byte.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "isac/io.hpp"

namespace fs = std::filesystem;
using namespace isac;

namespace {

// ============================================================================
// Grids
// ============================================================================

/// k tilts strictly inside (0,1): i/(k+1) for i = 1..k.  Odd k puts the
/// balanced tilt exactly on the grid.
std::vector<double> open_unit_grid(int k) {
  if (k < 1) throw ConfigError("grid-u must be at least 1");
  std::vector<double> g(k);
  for (int i = 1; i <= k; ++i) g[i - 1] = static_cast<double>(i) / (k + 1);
  return g;
}

/// k points covering [0,1] inclusive; closed-form sweeps keep the endpoints
/// because they are finite axis intercepts there, not trivial corners.
std::vector<double> closed_unit_grid(int k) {
  if (k < 2) throw ConfigError("grid-u must be at least 2 for closed-form sweeps");
  std::vector<double> g(k);
  for (int i = 0; i < k; ++i) g[i] = static_cast<double>(i) / (k - 1);
  return g;
}

long long grid_steps(double step) {
  const long long steps = std::llround(1.0 / step);
  if (steps < 2) throw ConfigError("grid-t step must be at most 1/2");
  return steps;
}

/// Interior weights i/steps for i = 1..steps-1, built by integer division so
/// the grid carries no accumulated rounding.
std::vector<double> open_step_grid(double step) {
  const long long steps = grid_steps(step);
  std::vector<double> g;
  g.reserve(steps - 1);
  for (long long i = 1; i < steps; ++i)
    g.push_back(static_cast<double>(i) / static_cast<double>(steps));
  return g;
}

/// Mixture weights 0..1 inclusive on the same spacing.
std::vector<double> closed_step_grid(double step) {
  const long long steps = grid_steps(step);
  std::vector<double> g;
  g.reserve(steps + 1);
  for (long long i = 0; i <= steps; ++i)
    g.push_back(static_cast<double>(i) / static_cast<double>(steps));
  return g;
}

// ============================================================================
// Small helpers
// ============================================================================

Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) throw ConfigError("matrix fields must be non-empty");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size())
      throw ConfigError("matrix fields must have rows of equal length");
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      m(static_cast<long>(i), static_cast<long>(k)) = rows[i][k];
  }
  return m;
}

void write_file(const std::string& out_dir, const std::string& name, const std::string& content) {
  fs::create_directories(out_dir);
  const fs::path p = fs::path(out_dir) / name;
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write output file '" + p.string() + "'");
  os << content;
}

void write_manifest(const std::string& out_dir, const RunManifest& man) {
  write_file(out_dir, "manifest.json", manifest_json(man).dump(2) + "\n");
}

std::vector<Pmf> binary_px_grid(const std::vector<double>& t_grid) {
  std::vector<Pmf> grid;
  grid.reserve(t_grid.size());
  for (double t : t_grid) grid.push_back({1.0 - t, t});
  return grid;
}

std::vector<RocCurve> sensing_rocs(const BinaryStatePair& pair) {
  std::vector<RocCurve> rocs;
  rocs.reserve(pair.num_inputs());
  for (std::size_t x = 0; x < pair.num_inputs(); ++x)
    rocs.push_back(roc_from_likelihoods(pair.p0[x], pair.p1[x]));
  return rocs;
}

const ChannelModel& require_model(const LoadedChannel& lc, const char* command) {
  if (!lc.model)
    throw ConfigError(lc.path + ": kind '" + lc.kind + "' has no finite-alphabet model (" +
                      command + " needs one; single-power scalar configs quantize to one)");
  return *lc.model;
}

nlohmann::json real_array(const std::vector<double>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : v) a.push_back(json_real(x));
  return a;
}

// ============================================================================
// region-fixed
// ============================================================================

struct RegionFixedArgs {
  std::string config;
  std::string out = ".";
  std::string units = "bits";
  int grid_u = 101;
  double grid_t = 0.01;
};

int cmd_region_fixed(const RegionFixedArgs& a) {
  const Units units = parse_units(a.units);
  const LoadedChannel lc = load_channel_config(a.config);

  RunManifest man;
  man.command = "region-fixed";
  man.config_path = a.config;
  man.config_hash = lc.config_hash;
  man.parameters = {{"units", a.units}, {"grid_u", a.grid_u}, {"grid_t", json_real(a.grid_t)}};

  std::ostringstream csv;
  std::string schema;
  if (lc.kind == "gaussian_vector_fixed") {
    const std::vector<double> lambda_grid = closed_step_grid(a.grid_t);
    const std::vector<MimoRegionRow> rows =
        mimo_region(to_matrix(lc.gaussian->H0), to_matrix(lc.gaussian->H1),
                    to_matrix(lc.gaussian->H_tilde), lc.gaussian->power, lambda_grid,
                    closed_unit_grid(a.grid_u));
    write_mimo_region_csv(csv, rows, units);
    schema = "mimo_region_csv_v1";
    man.parameters["grid_kind"] = "closed";
  } else if (lc.kind == "gaussian_scalar_fixed") {
    const std::vector<double> u_grid = closed_unit_grid(a.grid_u);
    std::vector<RegionPointFixed> rows;
    for (std::size_t i = 0; i < lc.powers.size(); ++i) {
      std::vector<RegionPointFixed> part = gaussian_region(lc.gaussian->h, lc.powers[i], u_grid);
      for (RegionPointFixed& r : part) r.px_index = i;
      rows.insert(rows.end(), part.begin(), part.end());
    }
    write_region_fixed_csv(csv, rows, units);
    schema = "region_fixed_csv_v1";
    man.parameters["power"] = real_array(lc.powers);
    man.parameters["grid_kind"] = "closed";
  } else {
    const ChannelModel& model = require_model(lc, "region-fixed");
    std::vector<Pmf> px_grid;
    if (model.sensing.num_inputs() == 2)
      px_grid = binary_px_grid(open_step_grid(a.grid_t));
    else
      px_grid = {Pmf(model.sensing.num_inputs(),
                     1.0 / static_cast<double>(model.sensing.num_inputs()))};
    const std::vector<RegionPointFixed> rows =
        sweep_region(model, px_grid, open_unit_grid(a.grid_u));
    write_region_fixed_csv(csv, rows, units);
    schema = "region_fixed_csv_v1";
    man.parameters["grid_kind"] = "open";
  }

  write_file(a.out, "region_fixed.csv", csv.str());
  man.outputs = {{"region_fixed.csv", schema}};
  write_manifest(a.out, man);
  return 0;
}

// ============================================================================
// region-iid
// ============================================================================

struct RegionIidArgs {
  std::string config;
  std::string out = ".";
  std::string units = "bits";
  std::string method = "oracle";
  std::vector<double> alphas;
  double grid_t = 0.01;
  double delta = 0.0;  // 0 = per-alpha default alpha * 1e-4
  bool dump_allocations = false;
};

int cmd_region_iid(const RegionIidArgs& a) {
  const Units units = parse_units(a.units);
  const LoadedChannel lc = load_channel_config(a.config);
  const ChannelModel& model = require_model(lc, "region-iid");
  if (!model.comm.state_prior)
    throw ConfigError(lc.path + ": kind '" + lc.kind +
                      "' carries no state prior; region-iid needs an i.i.d. state");
  if (model.sensing.num_inputs() != 2)
    throw ConfigError(lc.path + ": region-iid sweeps binary-input models only");
  if (a.alphas.empty()) throw ConfigError("region-iid needs at least one --alpha");
  for (double al : a.alphas)
    if (!(al > 0.0 && al <= 1.0))
      throw ConfigError("alpha values must lie in (0,1], got " + format_double(al));

  const std::vector<double> t_grid = open_step_grid(a.grid_t);
  const std::vector<Pmf> px_grid = binary_px_grid(t_grid);

  std::vector<IidRegionRow> rows;
  const std::vector<RocCurve> rocs = sensing_rocs(model.sensing);
  if (a.method == "oracle") {
    rows = rate_probability_region(model, px_grid, a.alphas);
  } else {
    // Greedy pouring instead of the exact program; same row layout and the
    // same neighbor-flatness rule.
    const CondPmf marginal = marginal_comm_channel(model.comm);
    std::vector<double> rates(px_grid.size());
    for (std::size_t i = 0; i < px_grid.size(); ++i)
      rates[i] = mutual_information(px_grid[i], marginal);
    for (const double alpha : a.alphas) {
      const double delta = a.delta > 0.0 ? a.delta : alpha * 1e-4;
      const std::size_t base = rows.size();
      for (std::size_t i = 0; i < px_grid.size(); ++i) {
        IidRegionRow r;
        r.px_index = i;
        r.alpha = alpha;
        r.rate = rates[i];
        r.beta = waterfill(px_grid[i], rocs, alpha, delta).avg_p_d;
        rows.push_back(r);
      }
      for (std::size_t i = base; i < rows.size(); ++i) {
        const bool prev = i > base && std::abs(rows[i].beta - rows[i - 1].beta) <= 1e-10;
        const bool next = i + 1 < rows.size() && std::abs(rows[i + 1].beta - rows[i].beta) <= 1e-10;
        rows[i].flat = prev || next;
      }
    }
  }

  std::ostringstream csv;
  write_iid_region_csv(csv, rows, units);
  write_file(a.out, "region_iid.csv", csv.str());

  RunManifest man;
  man.command = "region-iid";
  man.config_path = a.config;
  man.config_hash = lc.config_hash;
  man.parameters = {{"units", a.units},
                    {"alpha", real_array(a.alphas)},
                    {"grid_t", json_real(a.grid_t)},
                    {"method", a.method},
                    {"delta", json_real(a.delta)}};
  man.outputs = {{"region_iid.csv", "iid_region_csv_v1"}};

  if (a.dump_allocations) {
    // One allocation per requested alpha, taken at the capacity-achieving
    // composition on the sweep grid (the first rate argmax).
    std::size_t best = 0;
    for (std::size_t i = 1; i < px_grid.size(); ++i)
      if (rows[i].rate > rows[best].rate) best = i;
    for (std::size_t k = 0; k < a.alphas.size(); ++k) {
      const double alpha = a.alphas[k];
      const Allocation alloc =
          a.method == "oracle"
              ? allocation_oracle(px_grid[best], rocs, alpha)
              : waterfill(px_grid[best], rocs, alpha,
                          a.delta > 0.0 ? a.delta : alpha * 1e-4);
      const std::string name = "allocation_alpha_" + std::to_string(k) + ".json";
      write_file(a.out, name, allocation_to_json(alpha, px_grid[best], alloc).dump(2) + "\n");
      man.outputs.emplace_back(name, "allocation_json_v1");
    }
  }
  write_manifest(a.out, man);
  return 0;
}

// ============================================================================
// simulate
// ============================================================================

struct SimulateArgs {
  std::string config;
  std::string out = ".";
  std::string mode;
  std::optional<double> tau;
  std::optional<double> u;
  std::vector<long long> n_values = {500, 1000, 2000};
  long long trials = 100000;
  std::vector<double> px;
  std::string allocation;
  std::uint64_t seed = 1;
};

int cmd_simulate(const SimulateArgs& a) {
  const LoadedChannel lc = load_channel_config(a.config);
  const ChannelModel& model = require_model(lc, "simulate");

  RunManifest man;
  man.command = "simulate";
  man.config_path = a.config;
  man.config_hash = lc.config_hash;
  man.seed = a.seed;
  man.parameters = {{"mode", a.mode}, {"trials", a.trials}};

  SimConfig cfg;
  cfg.seed = a.seed;
  cfg.trials = a.trials;

  std::ostringstream csv;
  nlohmann::json summary;
  if (a.mode == "fixed") {
    if (a.tau.has_value() == a.u.has_value())
      throw ConfigError("simulate --mode fixed needs exactly one of --tau and --u");
    Pmf px = a.px;
    if (px.empty())
      px.assign(model.sensing.num_inputs(), 1.0 / static_cast<double>(model.sensing.num_inputs()));
    try {
      check_input_distribution(px, model.sensing.num_inputs());
    } catch (const std::exception& e) {
      throw ConfigError(std::string("--px: ") + e.what());
    }
    double tau;
    if (a.tau) {
      tau = *a.tau;
    } else {
      if (!(*a.u > 0.0 && *a.u < 1.0))
        throw ConfigError("--u must lie strictly inside (0,1)");
      tau = exponent_pair(TiltedFamily(model.sensing, px), *a.u).tau;
      man.parameters["u"] = json_real(*a.u);
    }
    cfg.composition = px;
    cfg.n_values = a.n_values;
    const FixedStateSim sim = simulate_fixed_state(model.sensing, cfg, tau);
    write_sim_rows_csv(csv, sim.rows);
    summary = fixed_sim_summary_json(sim);
    man.parameters["tau"] = json_real(tau);
    man.parameters["px"] = real_array(px);
    man.parameters["n"] = a.n_values;
  } else if (a.mode == "iid") {
    if (a.allocation.empty()) throw ConfigError("simulate --mode iid needs --allocation FILE");
    const AllocationFile af = load_allocation_json(a.allocation);
    if (af.px.size() != model.sensing.num_inputs())
      throw ConfigError(a.allocation + ": allocation is for " + std::to_string(af.px.size()) +
                        " symbols but the channel has " +
                        std::to_string(model.sensing.num_inputs()));
    if (!model.comm.state_prior)
      throw ConfigError(lc.path + ": kind '" + lc.kind +
                        "' carries no state prior; iid simulation needs one");
    cfg.composition = af.px;
    const IidSim sim = simulate_iid(model.sensing, model.comm, cfg, af.allocation);
    write_sim_rows_csv(csv, {sim.false_alarm, sim.detection});
    summary = iid_sim_summary_json(sim);
    man.parameters["allocation"] = a.allocation;
    man.parameters["alpha"] = json_real(af.alpha);
  } else {
    throw ConfigError("invalid --mode '" + a.mode + "' (valid modes: fixed, iid)");
  }

  write_file(a.out, "simulation.csv", csv.str());
  write_file(a.out, "simulation_summary.json", summary.dump(2) + "\n");
  man.outputs = {{"simulation.csv", "sim_csv_v1"},
                 {"simulation_summary.json", "sim_summary_json_v1"}};
  write_manifest(a.out, man);
  return 0;
}

// ============================================================================
// roc
// ============================================================================

struct RocArgs {
  std::string config;
  std::string out = ".";
  std::string symbol;
};

[[noreturn]] void unknown_symbol(const std::string& symbol, const std::vector<std::string>& valid) {
  std::string msg = "unknown symbol '" + symbol + "'; valid symbols:";
  for (const std::string& s : valid) msg += " '" + s + "'";
  throw std::domain_error(msg);
}

RocCurve diagonal_roc() { return roc_from_likelihoods({1.0}, {1.0}); }

int cmd_roc(const RocArgs& a) {
  const LoadedChannel lc = load_channel_config(a.config);

  RocCurve roc;
  if (lc.kind == "gaussian_scalar_iid") {
    // Continuous frontier; the quantized model is only for generic sweeps.
    if (a.symbol == "1")
      roc = gaussian_roc(std::sqrt(lc.gaussian->sigma_s2));
    else if (a.symbol == "0")
      roc = diagonal_roc();
    else
      unknown_symbol(a.symbol, {"0", "1"});
  } else if (lc.kind == "gaussian_scalar_fixed") {
    std::vector<double> grid = lc.gaussian->input_grid;
    if (grid.empty()) {
      const double s = std::sqrt(lc.gaussian->power);
      grid = {-s, 0.0, s};
    }
    std::vector<std::string> labels;
    for (double x : grid) labels.push_back(isac::detail::format_grid_value(x));
    std::size_t idx = labels.size();
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == a.symbol) idx = i;
    if (idx == labels.size()) unknown_symbol(a.symbol, labels);
    const double separation = std::abs(1.0 - lc.gaussian->h) * std::abs(grid[idx]);
    roc = separation > 0.0 ? gaussian_roc(1.0 / separation) : diagonal_roc();
  } else {
    const ChannelModel& model = require_model(lc, "roc");
    std::size_t idx = model.sensing.inputs.size();
    for (std::size_t i = 0; i < model.sensing.inputs.size(); ++i)
      if (model.sensing.inputs[i] == a.symbol) idx = i;
    if (idx == model.sensing.inputs.size()) unknown_symbol(a.symbol, model.sensing.inputs);
    roc = roc_from_likelihoods(model.sensing.p0[idx], model.sensing.p1[idx]);
  }

  std::ostringstream csv;
  write_roc_csv(csv, roc);
  write_file(a.out, "roc.csv", csv.str());

  RunManifest man;
  man.command = "roc";
  man.config_path = a.config;
  man.config_hash = lc.config_hash;
  man.parameters = {{"symbol", a.symbol}};
  man.outputs = {{"roc.csv", "roc_csv_v1"}};
  write_manifest(a.out, man);
  return 0;
}

}  // namespace

// ============================================================================
// Entry point
// ============================================================================

int main(int argc, char** argv) {
  CLI::App app{"Rate-exponent and rate-probability sweeps for joint communication and detection"};
  app.require_subcommand(1);

  RegionFixedArgs rf;
  CLI::App* rf_cmd = app.add_subcommand(
      "region-fixed", "Sweep the fixed-state rate-exponent boundary of a channel config");
  rf_cmd->add_option("config", rf.config, "channel config JSON")->required();
  rf_cmd->add_option("--out", rf.out, "output directory");
  rf_cmd->add_option("--units", rf.units, "output units: bits|nats");
  rf_cmd->add_option("--grid-u", rf.grid_u, "number of tilt grid points")
      ->check(CLI::Range(1, 100000));
  rf_cmd->add_option("--grid-t", rf.grid_t, "composition / mixture grid step")
      ->check(CLI::Range(1e-9, 0.5));

  RegionIidArgs ri;
  CLI::App* ri_cmd = app.add_subcommand(
      "region-iid", "Sweep rate-detection cross-sections for an i.i.d.-state channel config");
  ri_cmd->add_option("config", ri.config, "channel config JSON")->required();
  ri_cmd->add_option("--out", ri.out, "output directory");
  ri_cmd->add_option("--units", ri.units, "output units: bits|nats");
  ri_cmd->add_option("--alpha", ri.alphas, "false-alarm budgets (one curve each)")
      ->required()
      ->delimiter(',');
  ri_cmd->add_option("--grid-t", ri.grid_t, "composition grid step")->check(CLI::Range(1e-9, 0.5));
  ri_cmd->add_option("--method", ri.method, "allocation method: oracle|waterfill")
      ->check(CLI::IsMember({"oracle", "waterfill"}));
  ri_cmd->add_option("--delta", ri.delta, "pour size for waterfill (0 = alpha * 1e-4)")
      ->check(CLI::Range(0.0, 1.0));
  ri_cmd->add_flag("--allocations", ri.dump_allocations,
                   "dump a per-alpha allocation JSON at the capacity-achieving composition");

  SimulateArgs sm;
  double sm_tau = 0.0, sm_u = 0.0;
  CLI::App* sm_cmd =
      app.add_subcommand("simulate", "Monte Carlo verification of a detector configuration");
  sm_cmd->add_option("config", sm.config, "channel config JSON")->required();
  sm_cmd->add_option("--out", sm.out, "output directory");
  sm_cmd->add_option("--mode", sm.mode, "fixed|iid")->required();
  CLI::Option* tau_opt = sm_cmd->add_option("--tau", sm_tau, "threshold level (fixed mode)");
  CLI::Option* u_opt =
      sm_cmd->add_option("--u", sm_u, "tilt whose matched threshold to use (fixed mode)");
  tau_opt->excludes(u_opt);
  sm_cmd->add_option("--n", sm.n_values, "blocklengths (fixed mode)")->delimiter(',');
  sm_cmd->add_option("--trials", sm.trials, "trials per blocklength and state (fixed) or total channel uses (iid)")
      ->check(CLI::Range(static_cast<long long>(1), static_cast<long long>(1) << 40));
  sm_cmd->add_option("--px", sm.px, "codeword composition (fixed mode; default uniform)")
      ->delimiter(',');
  sm_cmd->add_option("--allocation", sm.allocation, "allocation JSON from region-iid (iid mode)");
  sm_cmd->add_option("--seed", sm.seed, "random seed");

  RocArgs rc;
  CLI::App* rc_cmd =
      app.add_subcommand("roc", "Emit one input symbol's detection frontier as CSV");
  rc_cmd->add_option("config", rc.config, "channel config JSON")->required();
  rc_cmd->add_option("--out", rc.out, "output directory");
  rc_cmd->add_option("--symbol", rc.symbol, "input symbol label")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help/version exit clean; any usage problem is 2
  }

  try {
    if (rf_cmd->parsed()) return cmd_region_fixed(rf);
    if (ri_cmd->parsed()) return cmd_region_iid(ri);
    if (sm_cmd->parsed()) {
      if (tau_opt->count() > 0) sm.tau = sm_tau;
      if (u_opt->count() > 0) sm.u = sm_u;
      return cmd_simulate(sm);
    }
    if (rc_cmd->parsed()) return cmd_roc(rc);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
