#pragma once

// File formats of the command-line tool: JSON channel configurations, CSV
// emission for sweeps and simulations, allocation dumps, and the run manifest
// that makes every invocation reproducible.  All CSV numbers are printed with
// 12 significant digits; JSON payloads round their reals the same way so that
// regenerated outputs diff cleanly.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "isac/channels.hpp"
#include "isac/iid_detection.hpp"
#include "isac/math.hpp"
#include "isac/mimo.hpp"
#include "isac/montecarlo.hpp"
#include "isac/region_fixed.hpp"
#include "isac/roc.hpp"

namespace isac {

inline constexpr const char* kToolVersion = "1.0.0";

/// Configuration problem: unreadable file, malformed JSON, or a missing or
/// out-of-range field.  The message always names the offending file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ============================================================================
// Number formatting
// ============================================================================

enum class Units { Bits, Nats };

[[nodiscard]] inline Units parse_units(const std::string& s) {
  if (s == "bits") return Units::Bits;
  if (s == "nats") return Units::Nats;
  throw ConfigError("units must be 'bits' or 'nats', got '" + s + "'");
}

[[nodiscard]] inline const char* unit_suffix(Units u) {
  return u == Units::Bits ? "_bits" : "_nats";
}

/// Convert a value held internally in nats to the output unit.
[[nodiscard]] inline double from_nats(double v, Units u) {
  return u == Units::Bits ? v / kLn2 : v;
}

/// 12 significant digits, the precision of every CSV cell.
[[nodiscard]] inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// Round to the CSV precision so JSON payloads serialize identically to what
/// the CSVs show.
[[nodiscard]] inline double json_real(double v) {
  return std::strtod(format_double(v).c_str(), nullptr);
}

// ============================================================================
// Config hashing
// ============================================================================

[[nodiscard]] inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

[[nodiscard]] inline std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ============================================================================
// Channel configuration loading
// ============================================================================

/// A parsed channel configuration.  Discrete kinds carry a ready model;
/// scalar Gaussian kinds carry both the quantized model and the analytic
/// GaussianSpec (closed-form paths prefer the latter); the vector kind
/// carries only the GaussianSpec, since its designs live in covariance space.
struct LoadedChannel {
  std::string path;
  std::string kind;
  std::string config_hash;  // FNV-1a over the raw file bytes
  std::optional<ChannelModel> model;
  std::optional<GaussianSpec> gaussian;
  std::vector<double> powers;  // gaussian_scalar_fixed power sweep
  int bins = 512;
  double span_sigmas = 8.0;
};

namespace detail {

[[nodiscard]] inline double config_number(const nlohmann::json& j, const char* key,
                                          const std::string& path) {
  if (!j.contains(key))
    throw ConfigError(path + ": missing field '" + key + "'");
  if (!j.at(key).is_number())
    throw ConfigError(path + ": field '" + key + "' must be a number");
  return j.at(key).get<double>();
}

[[nodiscard]] inline std::vector<double> config_vector(const nlohmann::json& j, const char* key,
                                                       const std::string& path) {
  if (!j.contains(key) || !j.at(key).is_array())
    throw ConfigError(path + ": field '" + key + "' must be an array");
  std::vector<double> v;
  for (const auto& e : j.at(key)) {
    if (!e.is_number())
      throw ConfigError(path + ": field '" + key + "' must hold numbers");
    v.push_back(e.get<double>());
  }
  return v;
}

[[nodiscard]] inline std::vector<std::vector<double>> config_matrix(const nlohmann::json& j,
                                                                    const char* key,
                                                                    const std::string& path) {
  if (!j.contains(key) || !j.at(key).is_array())
    throw ConfigError(path + ": field '" + key + "' must be a matrix (array of rows)");
  std::vector<std::vector<double>> m;
  for (const auto& row : j.at(key)) {
    if (!row.is_array())
      throw ConfigError(path + ": field '" + key + "' must be a matrix (array of rows)");
    m.emplace_back();
    for (const auto& e : row) {
      if (!e.is_number())
        throw ConfigError(path + ": field '" + key + "' must hold numbers");
      m.back().push_back(e.get<double>());
    }
  }
  return m;
}

[[nodiscard]] inline std::vector<std::string> config_labels(const nlohmann::json& j,
                                                            const char* key,
                                                            const std::string& path) {
  if (!j.contains(key) || !j.at(key).is_array())
    throw ConfigError(path + ": field '" + key + "' must be an array of labels");
  std::vector<std::string> v;
  for (const auto& e : j.at(key)) {
    if (!e.is_string())
      throw ConfigError(path + ": field '" + key + "' must hold strings");
    v.push_back(e.get<std::string>());
  }
  return v;
}

[[nodiscard]] inline BinaryStatePair explicit_pair(const nlohmann::json& j,
                                                   const std::string& path, const char* section) {
  BinaryStatePair pair;
  pair.inputs = config_labels(j, "inputs", path);
  pair.outputs = config_labels(j, "outputs", path);
  pair.p0 = config_matrix(j, "p0", path);
  pair.p1 = j.contains("p1") ? config_matrix(j, "p1", path) : pair.p0;
  try {
    require_valid(pair, section);
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return pair;
}

}  // namespace detail

[[nodiscard]] inline LoadedChannel load_channel_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw ConfigError(path + ": config must be an object with a string field 'kind'");

  LoadedChannel lc;
  lc.path = path;
  lc.kind = j.at("kind").get<std::string>();
  lc.config_hash = hash_hex(fnv1a64(text));
  if (j.contains("bins")) lc.bins = static_cast<int>(detail::config_number(j, "bins", path));
  if (j.contains("span_sigmas")) lc.span_sigmas = detail::config_number(j, "span_sigmas", path);

  try {
    if (lc.kind == "binary_multiplicative") {
      lc.model = build_binary_multiplicative(detail::config_number(j, "p", path),
                                             detail::config_number(j, "q", path));
    } else if (lc.kind == "iid_binary") {
      lc.model = build_iid_binary(detail::config_number(j, "gamma1", path),
                                  detail::config_number(j, "gamma2", path),
                                  detail::config_number(j, "gamma_s", path));
    } else if (lc.kind == "gaussian_scalar_fixed") {
      GaussianSpec spec;
      spec.kind = GaussianSpec::Kind::ScalarFixedState;
      spec.h = detail::config_number(j, "h", path);
      if (j.contains("power") && j.at("power").is_array())
        lc.powers = detail::config_vector(j, "power", path);
      else
        lc.powers = {detail::config_number(j, "power", path)};
      spec.power = lc.powers.front();
      if (j.contains("input_grid")) spec.input_grid = detail::config_vector(j, "input_grid", path);
      lc.gaussian = spec;
      if (lc.powers.size() == 1) lc.model = quantize_gaussian(spec, lc.bins, lc.span_sigmas);
    } else if (lc.kind == "gaussian_scalar_iid") {
      GaussianSpec spec;
      spec.kind = GaussianSpec::Kind::ScalarIid;
      spec.sigma_c2 = detail::config_number(j, "sigma_c2", path);
      spec.sigma_s2 = detail::config_number(j, "sigma_s2", path);
      spec.state_prior = detail::config_number(j, "state_prior", path);
      lc.gaussian = spec;
      lc.model = quantize_gaussian(spec, lc.bins, lc.span_sigmas);
    } else if (lc.kind == "gaussian_vector_fixed") {
      GaussianSpec spec;
      spec.kind = GaussianSpec::Kind::VectorFixedState;
      spec.H0 = detail::config_matrix(j, "H0", path);
      spec.H1 = detail::config_matrix(j, "H1", path);
      spec.H_tilde = detail::config_matrix(j, "H_tilde", path);
      spec.power = detail::config_number(j, "power", path);
      lc.gaussian = spec;
    } else if (lc.kind == "explicit") {
      if (!j.contains("sensing") || !j.contains("comm"))
        throw ConfigError(path + ": explicit configs need 'sensing' and 'comm' sections");
      ChannelModel m;
      m.sensing = detail::explicit_pair(j.at("sensing"), path, "config sensing");
      const nlohmann::json& c = j.at("comm");
      const BinaryStatePair comm_pair = detail::explicit_pair(c, path, "config comm");
      m.comm.inputs = comm_pair.inputs;
      m.comm.outputs = comm_pair.outputs;
      m.comm.p0 = comm_pair.p0;
      m.comm.p1 = comm_pair.p1;
      if (c.contains("state_prior"))
        m.comm.state_prior = detail::config_number(c, "state_prior", path);
      if (m.sensing.num_inputs() != m.comm.inputs.size())
        throw ConfigError(path + ": sensing and comm input alphabets differ in size");
      lc.model = std::move(m);
    } else {
      throw ConfigError(path + ": unknown kind '" + lc.kind +
                        "' (expected binary_multiplicative, iid_binary, gaussian_scalar_fixed, "
                        "gaussian_scalar_iid, gaussian_vector_fixed, or explicit)");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return lc;
}

// ============================================================================
// CSV emission
// ============================================================================

inline void write_region_fixed_csv(std::ostream& os, const std::vector<RegionPointFixed>& rows,
                                   Units units) {
  const char* s = unit_suffix(units);
  os << "pX_index,u,tau,rate" << s << ",e_fa" << s << ",e_md" << s << ",tag\n";
  for (const RegionPointFixed& r : rows) {
    os << r.px_index << ',' << format_double(r.u) << ',' << format_double(r.tau) << ','
       << format_double(from_nats(r.rate, units)) << ','
       << format_double(from_nats(r.e_fa, units)) << ','
       << format_double(from_nats(r.e_md, units)) << ',' << to_string(r.tag) << '\n';
  }
}

inline void write_mimo_region_csv(std::ostream& os, const std::vector<MimoRegionRow>& rows,
                                  Units units) {
  const char* s = unit_suffix(units);
  os << "pX_index,u,tau,rate" << s << ",e_fa" << s << ",e_md" << s
     << ",tag,lambda,trace_sigma\n";
  for (const MimoRegionRow& r : rows) {
    os << r.design_index << ',' << format_double(r.u) << ',' << format_double(r.tau) << ','
       << format_double(from_nats(r.rate, units)) << ','
       << format_double(from_nats(r.e_fa, units)) << ','
       << format_double(from_nats(r.e_md, units)) << ',' << to_string(r.tag) << ','
       << format_double(r.lambda) << ',' << format_double(r.trace_sigma) << '\n';
  }
}

inline void write_iid_region_csv(std::ostream& os, const std::vector<IidRegionRow>& rows,
                                 Units units) {
  os << "pX_index,alpha,rate" << unit_suffix(units) << ",beta,flat_flag\n";
  for (const IidRegionRow& r : rows) {
    os << r.px_index << ',' << format_double(r.alpha) << ','
       << format_double(from_nats(r.rate, units)) << ',' << format_double(r.beta) << ','
       << (r.flat ? 1 : 0) << '\n';
  }
}

inline void write_sim_rows_csv(std::ostream& os, const std::vector<SimRow>& rows) {
  os << "n,state,trials,errors,p_hat,ci_lo,ci_hi,bound\n";
  for (const SimRow& r : rows) {
    os << r.n << ',' << r.state << ',' << r.trials << ',' << r.errors << ','
       << format_double(r.p_hat) << ',' << format_double(r.ci_lo) << ','
       << format_double(r.ci_hi) << ',' << format_double(r.bound) << '\n';
  }
}

/// Vertex list with the likelihood-ratio threshold landing on each vertex and
/// the slope of the segment leaving it (nan on the terminal vertex).
inline void write_roc_csv(std::ostream& os, const RocCurve& roc) {
  os << "p_fa,p_d,tau,slope\n";
  for (std::size_t i = 0; i < roc.vertices.size(); ++i) {
    const RocVertex& v = roc.vertices[i];
    const double slope =
        i < roc.slopes.size() ? roc.slopes[i] : std::numeric_limits<double>::quiet_NaN();
    os << format_double(v.p_fa) << ',' << format_double(v.p_d) << ',' << format_double(v.tau)
       << ',' << format_double(slope) << '\n';
  }
}

// ============================================================================
// Allocation files
// ============================================================================

[[nodiscard]] inline nlohmann::json allocation_to_json(double alpha, const Pmf& p_x,
                                                       const Allocation& alloc) {
  nlohmann::json j;
  j["alpha"] = json_real(alpha);
  j["px"] = nlohmann::json::array();
  for (double p : p_x) j["px"].push_back(json_real(p));
  j["per_symbol"] = nlohmann::json::array();
  for (const SymbolOperatingPoint& op : alloc.per_symbol) {
    j["per_symbol"].push_back({{"p_fa", json_real(op.p_fa)},
                               {"p_d", json_real(op.p_d)},
                               {"tau", json_real(op.test.tau)},
                               {"eta", json_real(op.test.eta)}});
  }
  j["avg_p_fa"] = json_real(alloc.avg_p_fa);
  j["avg_p_d"] = json_real(alloc.avg_p_d);
  return j;
}

struct AllocationFile {
  double alpha = 0.0;
  Pmf px;
  Allocation allocation;
};

[[nodiscard]] inline AllocationFile load_allocation_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read allocation file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  AllocationFile f;
  f.alpha = detail::config_number(j, "alpha", path);
  f.px = detail::config_vector(j, "px", path);
  if (!j.contains("per_symbol") || !j.at("per_symbol").is_array())
    throw ConfigError(path + ": field 'per_symbol' must be an array");
  for (const auto& e : j.at("per_symbol")) {
    SymbolOperatingPoint op;
    op.p_fa = detail::config_number(e, "p_fa", path);
    op.p_d = detail::config_number(e, "p_d", path);
    op.test.tau = detail::config_number(e, "tau", path);
    op.test.eta = detail::config_number(e, "eta", path);
    f.allocation.per_symbol.push_back(op);
  }
  f.allocation.avg_p_fa = detail::config_number(j, "avg_p_fa", path);
  f.allocation.avg_p_d = detail::config_number(j, "avg_p_d", path);
  if (f.px.size() != f.allocation.per_symbol.size())
    throw ConfigError(path + ": px and per_symbol lengths differ");
  return f;
}

// ============================================================================
// Simulation summaries
// ============================================================================

namespace detail {

[[nodiscard]] inline nlohmann::json fit_to_json(const ExponentFit& fit) {
  nlohmann::json j;
  j["exponent_nats"] = json_real(fit.exponent);
  j["std_error"] = json_real(fit.std_error);
  j["intercept"] = json_real(fit.intercept);
  j["points_used"] = fit.points_used;
  j["excluded_n"] = fit.excluded;
  j["usable"] = fit.usable();
  return j;
}

[[nodiscard]] inline nlohmann::json sim_row_to_json(const SimRow& r) {
  nlohmann::json j;
  j["n"] = r.n;
  j["state"] = r.state;
  j["trials"] = r.trials;
  j["errors"] = r.errors;
  j["p_hat"] = json_real(r.p_hat);
  j["ci_lo"] = json_real(r.ci_lo);
  j["ci_hi"] = json_real(r.ci_hi);
  j["bound"] = json_real(r.bound);
  return j;
}

}  // namespace detail

/// Fitted empirical exponents next to the theory values they chase.
[[nodiscard]] inline nlohmann::json fixed_sim_summary_json(const FixedStateSim& sim) {
  nlohmann::json j;
  j["mode"] = "fixed";
  j["tau"] = json_real(sim.tau);
  j["theory"] = nlohmann::json::array();
  for (const RealizedTilt& t : sim.tilts) {
    j["theory"].push_back({{"n", t.n},
                           {"u", json_real(t.u)},
                           {"e_fa_nats", json_real(t.e_fa)},
                           {"e_md_nats", json_real(t.e_md)}});
  }
  j["fit_fa"] = detail::fit_to_json(sim.fit_fa);
  j["fit_md"] = detail::fit_to_json(sim.fit_md);
  return j;
}

[[nodiscard]] inline nlohmann::json iid_sim_summary_json(const IidSim& sim) {
  nlohmann::json j;
  j["mode"] = "iid";
  j["symbols"] = sim.symbols;
  j["false_alarm"] = detail::sim_row_to_json(sim.false_alarm);
  j["detection"] = detail::sim_row_to_json(sim.detection);
  return j;
}

// ============================================================================
// Run manifests
// ============================================================================

/// Everything needed to reproduce a run: the command, its fully resolved
/// parameters, the hash of the channel config, the seed, and the files the
/// run wrote (each tagged with its schema version).  Deliberately carries no
/// timestamp, so re-running with identical inputs rewrites identical bytes.
struct RunManifest {
  std::string command;
  nlohmann::json parameters;
  std::string config_path;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> outputs;  // (file, schema)
};

[[nodiscard]] inline nlohmann::json manifest_json(const RunManifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  j["version"] = kToolVersion;
  j["parameters"] = m.parameters;
  j["config"] = {{"path", m.config_path}, {"hash", m.config_hash}};
  j["seed"] = m.seed;
  j["outputs"] = nlohmann::json::array();
  for (const auto& [file, schema] : m.outputs)
    j["outputs"].push_back({{"file", file}, {"schema", schema}});
  return j;
}

}  // namespace isac
