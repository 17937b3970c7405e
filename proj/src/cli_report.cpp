#include "qthermo/cli_report.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace qthermo {

using json = nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
  const char* ws = " \t\r";
  auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::string fmt(double x, int digits = 17) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

double parse_double(const std::string& text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError("'" + text + "' is not a number");
  if (!std::isfinite(v)) throw ConfigError("'" + text + "' is not finite");
  return v;
}

long long parse_int(const std::string& text) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError("'" + text + "' is not an integer");
  return v;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) throw ConfigError("list is empty");
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item)));
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["model.kind"] = [](RunConfig& c, const std::string& v) { c.model.kind = parse_model_kind(v); };
    t["model.omega-s"] = [](RunConfig& c, const std::string& v) { c.model.omega_s = parse_double(v); };
    t["model.omega-b"] = [](RunConfig& c, const std::string& v) { c.model.omega_b = parse_list(v); };
    t["model.couplings"] = [](RunConfig& c, const std::string& v) { c.model.couplings = parse_list(v); };
    t["model.fock-dim"] = [](RunConfig& c, const std::string& v) {
      long long d = parse_int(v);
      if (d < 2 || d > 4096) throw ConfigError("fock dimension must lie in [2, 4096]");
      c.model.fock_dim = int(d);
    };
    t["model.drive"] = [](RunConfig& c, const std::string& v) {
      c.model.drive = Drive{c.model.drive ? c.model.drive->J : 0.0, parse_drive_operator(v)};
    };
    t["grid.beta.from"] = [](RunConfig& c, const std::string& v) { c.beta.from = parse_double(v); };
    t["grid.beta.to"] = [](RunConfig& c, const std::string& v) { c.beta.to = parse_double(v); };
    t["grid.beta.steps"] = [](RunConfig& c, const std::string& v) {
      long long n = parse_int(v);
      if (n < 1 || n > 100000) throw ConfigError("steps must lie in [1, 100000]");
      c.beta.steps = int(n);
    };
    t["grid.beta.spacing"] = [](RunConfig& c, const std::string& v) {
      if (v != "log" && v != "linear") throw ConfigError("spacing must be 'log' or 'linear'");
      c.beta.log = v == "log";
    };
    t["grid.beta.values"] = [](RunConfig& c, const std::string& v) { c.beta.explicit_values = parse_list(v); };
    t["grid.g-scale"] = [](RunConfig& c, const std::string& v) { c.g_scale = parse_list(v); };
    t["grid.J"] = [](RunConfig& c, const std::string& v) { c.J = parse_list(v); };
    t["grid.P"] = [](RunConfig& c, const std::string& v) { c.P = parse_list(v); };
    t["fd.h-rel"] = [](RunConfig& c, const std::string& v) { c.fd.h_rel = parse_double(v); };
    t["fd.levels"] = [](RunConfig& c, const std::string& v) { c.fd.levels = int(parse_int(v)); };
    t["classical.omega-s"] = [](RunConfig& c, const std::string& v) { c.classical.omega_s = parse_double(v); };
    t["classical.omega-b"] = [](RunConfig& c, const std::string& v) { c.classical.omega_b = parse_list(v); };
    t["classical.g"] = [](RunConfig& c, const std::string& v) { c.classical.g = parse_list(v); };
    t["classical.kappa"] = [](RunConfig& c, const std::string& v) { c.classical.kappa = parse_double(v); };
    t["classical.a"] = [](RunConfig& c, const std::string& v) { c.classical.a = parse_double(v); };
    t["classical.v0"] = [](RunConfig& c, const std::string& v) { c.classical.v0 = parse_double(v); };
    t["classical.lambda"] = [](RunConfig& c, const std::string& v) { c.classical.lambda = parse_double(v); };
    t["classical.eta"] = [](RunConfig& c, const std::string& v) { c.classical.eta = parse_double(v); };
    t["classical.order"] = [](RunConfig& c, const std::string& v) { c.classical.order = int(parse_int(v)); };
    t["output.csv"] = [](RunConfig& c, const std::string& v) { c.csv_path = v; };
    t["output.json"] = [](RunConfig& c, const std::string& v) { c.json_path = v; };
    t["output.golden"] = [](RunConfig& c, const std::string& v) { c.golden_path = v; };
    t["sweep.kind"] = [](RunConfig& c, const std::string& v) {
      parse_sweep_kind(v);
      c.sweep_kind = v;
    };
    t["run.seed"] = [](RunConfig& c, const std::string& v) {
      long long s = parse_int(v);
      if (s < 0) throw ConfigError("seed must be >= 0");
      c.seed = std::uint64_t(s);
    };
    return t;
  }();
  return table;
}

void set_tolerance(RunConfig& cfg, const std::string& name, double value) {
  identity(name);
  if (!(value > 0.0)) throw ConfigError("tolerance for '" + name + "' must be > 0");
  if (value < kToleranceFloor)
    cfg.warnings.push_back("tolerance " + name + " = " + fmt(value, 3) + " is below the practical floor " +
                           fmt(kToleranceFloor, 3) + "; expect gate failures");
  cfg.tolerances[name] = value;
}

}  // namespace

std::vector<double> BetaGrid::values() const {
  if (!explicit_values.empty()) return explicit_values;
  if (steps == 1) return {from};
  std::vector<double> v(std::size_t(steps), 0.0);
  for (int i = 0; i < steps; ++i) {
    double t = double(i) / double(steps - 1);
    v[std::size_t(i)] = log ? from * std::pow(to / from, t) : from + (to - from) * t;
  }
  v.back() = to;
  return v;
}

ModelSpec RunConfig::model_at(double g, double J_value) const {
  ModelSpec s = model.with_coupling_scale(g);
  if (J_value != 0.0 || s.drive) s = s.with_J(J_value);
  return s;
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::string raw;
  int line_no = 0;
  auto fail = [&](const std::string& key, const std::string& msg) {
    std::ostringstream os;
    os << source << ":" << line_no << ": ";
    if (!key.empty()) os << "key '" << key << "': ";
    os << msg;
    throw ConfigError(os.str());
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) fail("", "expected 'section.key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.find('.') == std::string::npos) fail(key, "keys take the form section.key");
    if (!seen.insert(key).second) fail(key, "duplicate key");
    try {
      if (key.rfind("tolerance.", 0) == 0) {
        set_tolerance(cfg, key.substr(10), parse_double(value));
        continue;
      }
      auto it = setters().find(key);
      if (it == setters().end()) fail(key, "unknown key");
      it->second(cfg, value);
    } catch (const ConfigError& e) {
      if (std::string(e.what()).rfind(source + ":", 0) == 0) throw;
      fail(key, e.what());
    }
  }
  line_no = 0;
  if (!seen.count("model.couplings")) cfg.model.couplings.assign(cfg.model.omega_b.size(), 1.0);
  if (cfg.model.kind == ModelKind::TwoQubit && cfg.model.omega_b.size() != 1)
    throw ConfigError(source + ": two-qubit model takes exactly one bath frequency");
  try {
    cfg.model.validate();
    cfg.fd.validate();
    ClassicalModel check(cfg.classical);
  } catch (const std::exception& e) {
    throw ConfigError(source + ": " + e.what());
  }
  if (!(cfg.beta.from > 0.0) || !(cfg.beta.to >= cfg.beta.from))
    throw ConfigError(source + ": key 'grid.beta': need 0 < from <= to");
  for (double b : cfg.beta.explicit_values)
    if (!(b > 0.0)) throw ConfigError(source + ": key 'grid.beta.values': beta must be > 0");
  for (double p : cfg.P)
    if (p < 0.0) throw ConfigError(source + ": key 'grid.P': pressure must be >= 0");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "': " + std::strerror(errno));
  return parse_config(in, path);
}

void apply_tolerance(RunConfig& cfg, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("--tol expects name=value, got '" + assignment + "'");
  std::string name = trim(assignment.substr(0, eq));
  try {
    set_tolerance(cfg, name, parse_double(trim(assignment.substr(eq + 1))));
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("--tol ") + assignment + ": " + e.what());
  }
}

const std::vector<IdentitySpec>& identity_inventory() {
  static const std::vector<IdentitySpec> inv = {
      {"mf_state", "|| Tr_b rho_c - exp(-beta H*)/Z* ||_F", 1e-10},
      {"mf_partition", "|Z* Z_b - Z_c| / Z_c", 1e-10},
      {"mf_delta", "|| Delta_s - (H* - H_s + F_b) ||_F", 1e-8},
      {"gt_relation", "F_c = U_s + <Delta> + beta <d Delta> - beta d F_c", 1e-5},
      {"gt_heat_capacity", "C_gt: -beta^2 d<H_s> = -beta dS_vN - beta^2 (<dDelta> - d<Delta>)", 1e-5},
      {"pm_entropy", "S_s = S_vN + beta^2 <d_beta H*>", 1e-6},
      {"pm_energy", "-d_beta ln Z* = <H_s> + <H_i> + <H_b> - <H_b>_b", 1e-6},
      {"pm_free_energy", "F* = U_s - S_s / beta", 1e-6},
      {"pm_additivity", "S_s + S_b = S_c", 1e-8},
      {"pm_mi_decomposition", "I_sb = (S_b' - S_b) + (S_vN - S_s)", 1e-8},
      {"pm_mi_nonnegative", "I_sb >= 0", 1e-10},
      {"pm_mi_routes", "I_sb = S(rho_c || rho_s (x) rho_b')", 1e-8},
      {"pm_heat_capacity_routes", "-beta^2 dU_s = beta^2 d^2 ln Z* = -beta dS_s", 1e-5},
      {"pm_correlator", "beta <d H*> = beta d<H*> + beta cov(H_c, H*)", 1e-6},
      {"gt_pm_energy_gap", "C_pm - C_gt = -beta^2 d(<H_i> + <H_b> - <H_b>_b)", 1e-5},
      {"jz_gibbs", "G_c = G_s + G_b", 1e-8},
      {"jz_drive_conjugate", "-beta^-1 d_J ln Z_s = A_c - A_b", 1e-6},
      {"jz_enthalpy", "-d_beta ln Z_s = H_c - H_b", 1e-6},
      {"jz_enthalpy_decomposition", "H_s = U_s + J A_s", 1e-6},
      {"jz_energy", "U_c - U_b = <H_s> + <H_i> + <H_b> - <H_b>_b", 1e-8},
      {"jz_entropy_routes", "-Tr rho ln rho = beta^2 d_beta G for composite and bath", 1e-6},
      {"jz_entropy_relation", "S_s = beta (H_s - G_s)", 1e-8},
      {"jz_entropy_additivity", "S_s + S_b = S_c", 1e-8},
      {"jz_local_energy", "Tr rho_s U_s_op = U_c - U_b", 1e-8},
      {"jz_local_conjugate", "Tr rho_s A_s_op = A_c - A_b", 1e-8},
      {"jz_local_enthalpy", "Tr rho_s (U_s_op + J A_s_op) = U_s + J A_s", 1e-6},
      {"jz_gauge", "Tr rho_s (U_s_op + Lambda) = Tr rho_s U_s_op for Tr rho_s Lambda = 0", 1e-12},
      {"jz_bare_enthalpy", "U_s + J A_s(bare) = <H*>", 1e-10},
      {"jz_bare_entropy", "S_vN = beta (H_s(bare) - G_s)", 1e-8},
      {"jz_naive_mismatch", "<H_s + H_i>_c differs from H_c - H_b", 1e-6, true},
      {"cl_closed_form", "quadrature = Gaussian closed form (relative)", 1e-8},
      {"cl_volume_fd", "V_pm = d_P G_s", 1e-5},
      {"cl_entropy_fd", "S_pm = beta^2 d_beta G_s", 1e-6},
      {"cl_enthalpy_fd", "H_pm = -d_beta ln Z_s", 1e-6},
      {"cl_volume_split", "<d_P phi> = V_c - V_b", 1e-10},
      {"cl_enthalpy", "H_pm = U_pm + P V_pm", 1e-10},
      {"cl_entropy_relation", "S_pm = beta (H_pm - G_s)", 1e-10},
      {"cl_additivity", "S_pm + S_b = S_c", 1e-10},
      {"cl_bare_enthalpy", "H_bare = U_bare + P V_bare", 1e-10},
      {"cl_bare_gibbs", "G_s = H_bare - S_bare / beta", 1e-10},
  };
  return inv;
}

const IdentitySpec& identity(const std::string& name) {
  for (const IdentitySpec& s : identity_inventory())
    if (s.name == name) return s;
  throw ConfigError("unknown identity '" + name + "'");
}

bool IdentityLedger::ok() const {
  return std::all_of(entries.begin(), entries.end(), [](const LedgerEntry& e) { return e.pass && !e.flagged; });
}

std::vector<const LedgerEntry*> IdentityLedger::failures() const {
  std::vector<const LedgerEntry*> out;
  for (const LedgerEntry& e : entries)
    if (!e.pass || e.flagged) out.push_back(&e);
  return out;
}

std::string IdentityLedger::to_json() const {
  json j;
  j["points"] = points.size();
  j["entries_total"] = entries.size();
  j["pass"] = ok();
  json arr = json::array();
  for (const LedgerEntry& e : entries) {
    json r;
    r["identity"] = e.identity;
    r["relation"] = e.relation;
    r["point"] = e.point;
    r["residual"] = e.residual;
    r["tolerance"] = e.tolerance;
    r["fd_error"] = e.fd_error;
    r["bound"] = e.lower_bound ? "lower" : "upper";
    r["status"] = !e.pass ? "fail" : (e.flagged ? "flagged" : "pass");
    arr.push_back(std::move(r));
  }
  j["entries"] = std::move(arr);
  return j.dump(2) + "\n";
}

std::string QuantumPoint::label() const { return "beta=" + fmt(beta, 15) + ",g=" + fmt(g, 15) + ",J=" + fmt(J, 15); }

std::string ClassicalPoint::label() const { return "classical:beta=" + fmt(beta, 15) + ",P=" + fmt(P, 15); }

std::vector<QuantumPoint> quantum_points(const RunConfig& cfg) {
  std::vector<QuantumPoint> pts;
  const std::vector<double> betas = cfg.beta.values();
  for (double g : cfg.g_scale)
    for (double J : cfg.J)
      for (double b : betas) pts.push_back({b, g, J});
  return pts;
}

std::vector<ClassicalPoint> classical_points(const RunConfig& cfg) {
  std::vector<ClassicalPoint> pts;
  const std::vector<double> betas = cfg.beta.values();
  for (double P : cfg.P)
    for (double b : betas) pts.push_back({b, P});
  return pts;
}

namespace {

struct EntrySink {
  const RunConfig& cfg;
  std::string point;
  std::vector<LedgerEntry> out;

  void add(const std::string& name, double residual, double fd_error = 0.0) {
    const IdentitySpec& s = identity(name);
    LedgerEntry e;
    e.identity = s.name;
    e.relation = s.relation;
    e.point = point;
    e.residual = residual;
    auto it = cfg.tolerances.find(name);
    e.tolerance = it != cfg.tolerances.end() ? it->second : s.tolerance;
    e.fd_error = fd_error;
    e.lower_bound = s.lower_bound;
    e.pass = std::isfinite(residual) && (s.lower_bound ? residual > e.tolerance : residual <= e.tolerance);
    e.flagged = !s.lower_bound && !(fd_error <= e.tolerance);
    out.push_back(std::move(e));
  }
};

}  // namespace

std::vector<LedgerEntry> validate_point(const RunConfig& cfg, const QuantumPoint& pt, std::uint64_t seed) {
  const double beta = pt.beta;
  const ModelSpec spec = cfg.model_at(pt.g, pt.J);
  MeanForceSolver solver(build(spec));
  MeanForceResult mf = solver.solve(beta);
  GTReport gt = gt_report(solver, beta, cfg.fd);
  PMReport pm = pm_report(solver, beta, cfg.fd);
  EnergyGap gap = gt_pm_energy_gap(solver, beta, cfg.fd);
  JZReport jz = jz_partial_molar(spec, beta, cfg.fd);
  LocalOperators ops = local_operators(solver, beta);

  double gauge = 0.0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    auto kind = static_cast<GaugeKind>(k % 3);
    HermitianOperator lam = zero_mean_operator(mf.rho_s, kind, seed + k);
    gauge = std::max({gauge, gauge_check(ops.U_s_op, mf.rho_s, lam), gauge_check(ops.A_s_op, mf.rho_s, lam)});
  }

  EntrySink s{cfg, pt.label(), {}};
  s.add("mf_state", mf.residual_state);
  s.add("mf_partition", mf.residual_partition);
  s.add("mf_delta", mf.residual_delta);
  s.add("gt_relation", gt.residual_relation, gt.fd_error_relation);
  s.add("gt_heat_capacity", gt.residual_heat_capacity, gt.fd_error_heat_capacity);
  s.add("pm_entropy", pm.residual_entropy, pm.fd_error_entropy);
  s.add("pm_energy", pm.residual_energy, pm.fd_error_energy);
  s.add("pm_free_energy", pm.residual_free_energy, std::max(pm.fd_error_energy, pm.fd_error_entropy / beta));
  s.add("pm_additivity", pm.residual_additivity, pm.fd_error_entropy);
  s.add("pm_mi_decomposition", pm.residual_mi_decomposition, pm.fd_error_entropy);
  s.add("pm_mi_nonnegative", std::max(0.0, -pm.I_sb.value));
  s.add("pm_mi_routes", pm.residual_mi_routes);
  s.add("pm_heat_capacity_routes", pm.C_spread, pm.fd_error_heat_capacity);
  s.add("pm_correlator", pm.corr_residual, pm.fd_error_entropy / (beta * beta));
  s.add("gt_pm_energy_gap", gap.residual, gap.fd_error);
  s.add("jz_gibbs", jz.residual_gibbs);
  s.add("jz_drive_conjugate", jz.residual_A, jz.fd_error_A);
  s.add("jz_enthalpy", jz.residual_enthalpy, jz.fd_error_enthalpy);
  s.add("jz_enthalpy_decomposition", jz.residual_enthalpy_decomposition, std::abs(pt.J) * jz.fd_error_A);
  s.add("jz_energy", jz.residual_energy);
  s.add("jz_entropy_routes", jz.residual_entropy_routes, jz.fd_error_entropy);
  s.add("jz_entropy_relation", jz.residual_entropy_relation);
  s.add("jz_entropy_additivity", jz.residual_entropy_additivity);
  s.add("jz_local_energy", jz.residual_local_U);
  s.add("jz_local_conjugate", jz.residual_local_A);
  s.add("jz_local_enthalpy", jz.residual_local_H, std::abs(pt.J) * jz.fd_error_A);
  s.add("jz_gauge", gauge);
  if (jz.bare) {
    s.add("jz_bare_enthalpy", jz.bare->residual_enthalpy);
    s.add("jz_bare_entropy", jz.bare->residual_entropy);
    if (pt.g != 0.0) s.add("jz_naive_mismatch", jz.nonsensical_difference);
  }
  return s.out;
}

std::vector<LedgerEntry> validate_point(const RunConfig& cfg, const ClassicalPoint& pt) {
  ClassicalModel model(cfg.classical);
  ClassicalReport r = classical_report(model, pt.P, pt.beta, cfg.fd);
  EntrySink s{cfg, pt.label(), {}};
  if (r.closed_form_deviation) s.add("cl_closed_form", *r.closed_form_deviation);
  s.add("cl_volume_fd", r.pm.residual_volume_fd, r.pm.fd_error);
  s.add("cl_entropy_fd", r.pm.residual_entropy_fd, r.pm.fd_error);
  s.add("cl_enthalpy_fd", r.pm.residual_enthalpy_fd, r.pm.fd_error);
  s.add("cl_volume_split", r.pm.residual_volume_split);
  s.add("cl_enthalpy", r.pm.residual_enthalpy);
  s.add("cl_entropy_relation", r.pm.residual_entropy_relation);
  s.add("cl_additivity", r.pm.residual_additivity);
  if (r.bare) {
    s.add("cl_bare_enthalpy", r.bare->residual_enthalpy);
    s.add("cl_bare_gibbs", r.bare->residual_gibbs);
  }
  return s.out;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(n, std::size_t(std::max(jobs, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
}

IdentityLedger run_validate(const RunConfig& cfg, int jobs) {
  const std::vector<QuantumPoint> qp = quantum_points(cfg);
  const std::vector<ClassicalPoint> cp = classical_points(cfg);
  std::vector<std::vector<LedgerEntry>> per_point(qp.size() + cp.size());
  parallel_for(per_point.size(), jobs, [&](std::size_t i) {
    if (i < qp.size())
      per_point[i] = validate_point(cfg, qp[i], cfg.seed + 1000 * std::uint64_t(i));
    else
      per_point[i] = validate_point(cfg, cp[i - qp.size()]);
  });
  IdentityLedger ledger;
  for (const QuantumPoint& p : qp) ledger.points.push_back(p.label());
  for (const ClassicalPoint& p : cp) ledger.points.push_back(p.label());
  for (auto& entries : per_point)
    for (LedgerEntry& e : entries) ledger.entries.push_back(std::move(e));
  return ledger;
}

SweepKind parse_sweep_kind(const std::string& text) {
  if (text == "gt") return SweepKind::GT;
  if (text == "pm") return SweepKind::PM;
  if (text == "jz") return SweepKind::JZ;
  if (text == "canonical") return SweepKind::Canonical;
  throw ConfigError("unknown sweep kind '" + text + "' (expected gt, pm, jz or canonical)");
}

std::string CsvTable::render(const std::string& timestamp) const {
  std::string out = "# generated " + timestamp + "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + (std::isnan(row[i]) ? "nan" : fmt(row[i]));
    out += "\n";
  }
  for (const std::string& line : summary) out += "# " + line + "\n";
  return out;
}

namespace {

std::vector<std::vector<double>> sweep_rows(const RunConfig& cfg, int jobs,
                                            const std::function<std::vector<double>(const QuantumPoint&)>& row) {
  const std::vector<QuantumPoint> pts = quantum_points(cfg);
  std::vector<std::vector<double>> rows(pts.size());
  parallel_for(pts.size(), jobs, [&](std::size_t i) { rows[i] = row(pts[i]); });
  return rows;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

CsvTable run_sweep(const RunConfig& cfg, SweepKind kind, int jobs) {
  CsvTable t;
  const std::vector<std::string> head = {"beta[1/E]", "g[E]", "J[E]"};
  switch (kind) {
    case SweepKind::GT:
      t.columns = head;
      t.columns.insert(t.columns.end(),
                       {"U_s_gt[E]", "S_vN[k_B]", "F_star[E]", "F_c[E]", "mean_Delta[E]", "C_s_gt[k_B]",
                        "C_s_gt_alt[k_B]", "residual_relation[E]", "fd_error_relation[E]",
                        "residual_heat_capacity[k_B]", "fd_error_heat_capacity[k_B]", "flagged[bool]"});
      t.rows = sweep_rows(cfg, jobs, [&](const QuantumPoint& p) {
        MeanForceSolver solver(build(cfg.model_at(p.g, p.J)));
        GTReport r = gt_report(solver, p.beta, cfg.fd);
        return std::vector<double>{p.beta, p.g, p.J, r.U_s_gt, r.S_vN, r.F_star, r.F_c, r.mean_delta, r.C_s_gt,
                                   r.C_s_gt_alt, r.residual_relation, r.fd_error_relation,
                                   r.residual_heat_capacity, r.fd_error_heat_capacity, r.flagged ? 1.0 : 0.0};
      });
      break;
    case SweepKind::PM:
      t.columns = head;
      t.columns.insert(t.columns.end(),
                       {"F_star[E]", "U_s_pm[E]", "U_s_gt[E]", "S_s[k_B]", "S_vN[k_B]", "entropy_gap[k_B]",
                        "C_s_pm[k_B]", "C_s_gt[k_B]", "C_spread[k_B]", "S_c[k_B]", "S_b[k_B]", "S_b_prime[k_B]",
                        "I_sb[k_B]", "residual_entropy[k_B]", "fd_error_entropy[k_B]", "residual_energy[E]",
                        "fd_error_energy[E]", "residual_additivity[k_B]", "residual_mi_decomposition[k_B]",
                        "corr_residual[E]", "flagged[bool]"});
      t.rows = sweep_rows(cfg, jobs, [&](const QuantumPoint& p) {
        MeanForceSolver solver(build(cfg.model_at(p.g, p.J)));
        PMReport r = pm_report(solver, p.beta, cfg.fd);
        GTReport g = gt_report(solver, p.beta, cfg.fd);
        return std::vector<double>{p.beta,
                                   p.g,
                                   p.J,
                                   r.F_star,
                                   r.U_s_pm,
                                   g.U_s_gt,
                                   r.S_s,
                                   r.S_vN,
                                   r.entropy_gap,
                                   r.C_s_pm,
                                   g.C_s_gt,
                                   r.C_spread,
                                   r.S_c,
                                   r.S_b,
                                   r.S_b_prime,
                                   r.I_sb.value,
                                   r.residual_entropy,
                                   r.fd_error_entropy,
                                   r.residual_energy,
                                   r.fd_error_energy,
                                   r.residual_additivity,
                                   r.residual_mi_decomposition,
                                   r.corr_residual,
                                   r.flagged || g.flagged ? 1.0 : 0.0};
      });
      {
        std::vector<std::string> negative;
        for (const auto& row : t.rows)
          if (row[9] < 0.0)
            negative.push_back("beta=" + fmt(row[0], 6) + " g=" + fmt(row[1], 6) + " J=" + fmt(row[2], 6) +
                               " C_s_pm=" + fmt(row[9], 6));
        t.summary.push_back("C_s_pm < 0 at " + std::to_string(negative.size()) + " of " +
                            std::to_string(t.rows.size()) + " points");
        for (std::string& n : negative) t.summary.push_back("  " + n);
      }
      break;
    case SweepKind::JZ:
      t.columns = head;
      t.columns.insert(t.columns.end(),
                       {"A_s_pm[A]", "A_c[A]", "A_b[A]", "A_s_bare[A]", "bare_pm_gap[A]", "H_s[E]", "H_s_fd[E]",
                        "U_s[E]", "G_s[E]", "S_s[k_B]", "S_vN[k_B]", "residual_A[A]", "fd_error_A[A]",
                        "residual_enthalpy[E]", "fd_error_enthalpy[E]", "residual_local_U[E]",
                        "residual_local_A[A]", "naive_difference[E]", "U_i_asymmetry[E]", "flagged[bool]"});
      t.rows = sweep_rows(cfg, jobs, [&](const QuantumPoint& p) {
        JZReport r = jz_partial_molar(cfg.model_at(p.g, p.J), p.beta, cfg.fd);
        return std::vector<double>{p.beta,
                                   p.g,
                                   p.J,
                                   r.A_s_pm,
                                   r.A_c,
                                   r.A_b,
                                   r.bare ? r.bare->A_s : kNaN,
                                   r.bare ? r.bare_pm_gap : kNaN,
                                   r.H_s,
                                   r.H_s_fd,
                                   r.U_s,
                                   r.G_s,
                                   r.S_s,
                                   r.S_vN,
                                   r.residual_A,
                                   r.fd_error_A,
                                   r.residual_enthalpy,
                                   r.fd_error_enthalpy,
                                   r.residual_local_U,
                                   r.residual_local_A,
                                   r.nonsensical_difference,
                                   r.U_i_asymmetry,
                                   r.flagged ? 1.0 : 0.0};
      });
      break;
    case SweepKind::Canonical:
      t.columns = head;
      t.columns.insert(t.columns.end(), {"log_Z_s[1]", "F_s[E]", "U_s[E]", "S_s[k_B]", "C_s[k_B]", "U_c[E]",
                                         "C_c[k_B]"});
      t.rows = sweep_rows(cfg, jobs, [&](const QuantumPoint& p) {
        MeanForceSolver solver(build(cfg.model_at(p.g, p.J)));
        CanonicalReport c = canonical_report(solver.model().h_s_local, p.beta);
        SpectralStats cs = solver.composite_stats(p.beta);
        return std::vector<double>{p.beta, p.g, p.J, c.log_Z, c.F, c.U, c.S, c.C, cs.energy, cs.heat_capacity()};
      });
      break;
  }
  return t;
}

CsvTable run_classical(const RunConfig& cfg, int jobs) {
  ClassicalModel model(cfg.classical);
  const std::vector<ClassicalPoint> pts = classical_points(cfg);
  CsvTable t;
  t.columns = {"beta[1/E]",   "P[E/V]",     "G_s[E]",      "G_c[E]",    "G_b[E]",     "V_bare[V]",
               "V_pm[V]",     "gap_V[V]",   "U_bare[E]",   "U_pm[E]",   "gap_U[E]",   "H_bare[E]",
               "H_pm[E]",     "gap_H[E]",   "S_bare[k_B]", "S_pm[k_B]", "gap_S[k_B]", "V_fd[V]",
               "S_fd[k_B]",   "S_c[k_B]",   "S_b[k_B]",    "closed_form_deviation[1]"};
  t.rows.resize(pts.size());
  parallel_for(pts.size(), jobs, [&](std::size_t i) {
    const ClassicalPoint& p = pts[i];
    ClassicalReport r = classical_report(model, p.P, p.beta, cfg.fd);
    auto bare = [&](double BareBlock::*f) { return r.bare ? (*r.bare).*f : kNaN; };
    t.rows[i] = {p.beta,
                 p.P,
                 r.G_s,
                 r.G_c,
                 r.G_b,
                 bare(&BareBlock::V),
                 r.pm.V,
                 r.bare ? r.gap_V : kNaN,
                 bare(&BareBlock::U),
                 r.pm.U,
                 r.bare ? r.gap_U : kNaN,
                 bare(&BareBlock::H),
                 r.pm.H,
                 r.bare ? r.gap_H : kNaN,
                 bare(&BareBlock::S),
                 r.pm.S,
                 r.bare ? r.gap_S : kNaN,
                 r.pm.V_fd,
                 r.pm.S_fd,
                 r.pm.S_c,
                 r.pm.S_b,
                 r.closed_form_deviation ? *r.closed_form_deviation : kNaN};
  });
  if (pts.empty()) t.summary.push_back("no classical points: grid.P is empty");
  return t;
}

std::string timestamp_now() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

json rounded(double x) {
  if (!std::isfinite(x)) return nullptr;
  return std::strtod(fmt(x, 15).c_str(), nullptr);
}

json quantum_snapshot(const RunConfig& cfg, const QuantumPoint& p) {
  const ModelSpec spec = cfg.model_at(p.g, p.J);
  MeanForceSolver solver(build(spec));
  MeanForceResult mf = solver.solve(p.beta);
  GTReport gt = gt_report(solver, p.beta, cfg.fd);
  PMReport pm = pm_report(solver, p.beta, cfg.fd);
  JZReport jz = jz_partial_molar(spec, p.beta, cfg.fd);
  json j;
  auto put = [&](const char* k, double v) { j[k] = rounded(v); };
  put("log_Z_star", mf.log_Z_star);
  put("log_Z_c", mf.log_Z_c);
  put("log_Z_b", mf.log_Z_b);
  put("F_star", mf.F_star);
  put("F_b", mf.F_b);
  put("gt.U_s", gt.U_s_gt);
  put("gt.S_vN", gt.S_vN);
  put("gt.F_c", gt.F_c);
  put("gt.mean_delta", gt.mean_delta);
  put("gt.mean_ddelta", gt.mean_ddelta);
  put("gt.d_mean_delta", gt.d_mean_delta);
  put("gt.C_s", gt.C_s_gt);
  put("gt.C_s_alt", gt.C_s_gt_alt);
  put("pm.S_s", pm.S_s);
  put("pm.S_s_alt", pm.S_s_alt);
  put("pm.entropy_gap", pm.entropy_gap);
  put("pm.U_s", pm.U_s_pm);
  put("pm.C_s", pm.C_s_pm);
  put("pm.S_c", pm.S_c);
  put("pm.S_b", pm.S_b);
  put("pm.S_b_prime", pm.S_b_prime);
  put("pm.I_sb", pm.I_sb.value);
  put("pm.mean_h_star", pm.mean_h_star);
  put("pm.corr_symmetrized", pm.corr_symmetrized);
  put("pm.corr_left", pm.corr_left);
  put("jz.A_s", jz.A_s_pm);
  put("jz.A_c", jz.A_c);
  put("jz.A_b", jz.A_b);
  put("jz.H_s", jz.H_s);
  put("jz.U_s", jz.U_s);
  put("jz.G_s", jz.G_s);
  put("jz.S_s", jz.S_s);
  put("jz.naive_difference", jz.nonsensical_difference);
  if (jz.bare) put("jz.A_s_bare", jz.bare->A_s);
  return j;
}

json classical_snapshot(const RunConfig& cfg, const ClassicalPoint& p) {
  ClassicalModel model(cfg.classical);
  ClassicalReport r = classical_report(model, p.P, p.beta, cfg.fd);
  json j;
  auto put = [&](const char* k, double v) { j[k] = rounded(v); };
  put("G_s", r.G_s);
  put("G_c", r.G_c);
  put("G_b", r.G_b);
  put("pm.V", r.pm.V);
  put("pm.U", r.pm.U);
  put("pm.H", r.pm.H);
  put("pm.S", r.pm.S);
  put("S_c", r.pm.S_c);
  put("S_b", r.pm.S_b);
  if (r.bare) {
    put("bare.V", r.bare->V);
    put("bare.U", r.bare->U);
    put("bare.H", r.bare->H);
    put("bare.S", r.bare->S);
  }
  return j;
}

}  // namespace

std::string snapshot_json(const RunConfig& cfg, int jobs) {
  const std::vector<QuantumPoint> qp = quantum_points(cfg);
  const std::vector<ClassicalPoint> cp = classical_points(cfg);
  std::vector<json> blocks(qp.size() + cp.size());
  parallel_for(blocks.size(), jobs, [&](std::size_t i) {
    blocks[i] = i < qp.size() ? quantum_snapshot(cfg, qp[i]) : classical_snapshot(cfg, cp[i - qp.size()]);
  });
  json root = json::object();
  for (std::size_t i = 0; i < blocks.size(); ++i)
    root[i < qp.size() ? qp[i].label() : cp[i - qp.size()].label()] = std::move(blocks[i]);
  return root.dump(2) + "\n";
}

GoldenComparison compare_golden(const std::string& golden, const std::string& current, double rel_tol,
                                double abs_floor) {
  json g, c;
  try {
    g = json::parse(golden);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("golden file is not valid JSON: ") + e.what());
  }
  c = json::parse(current);
  GoldenComparison out;
  for (auto& [point, fields] : g.items()) {
    if (!c.contains(point)) {
      out.mismatches.push_back(point + ": point missing from current run");
      continue;
    }
    const json& cur = c[point];
    for (auto& [name, gv] : fields.items()) {
      ++out.fields;
      const std::string where = point + "/" + name;
      if (!cur.contains(name)) {
        out.mismatches.push_back(where + ": field missing from current run");
        continue;
      }
      const json& cv = cur[name];
      if (gv.is_null() || cv.is_null()) {
        if (!(gv.is_null() && cv.is_null())) out.mismatches.push_back(where + ": null in only one file");
        continue;
      }
      const double a = gv.get<double>(), b = cv.get<double>();
      const double diff = std::abs(a - b);
      if (!(diff <= std::max(rel_tol * std::max(std::abs(a), std::abs(b)), abs_floor)))
        out.mismatches.push_back(where + ": golden " + fmt(a, 15) + " vs current " + fmt(b, 15) +
                                 " (relative " + fmt(diff / std::max(std::abs(a), std::abs(b)), 3) + ")");
    }
    for (auto& [name, cv] : cur.items())
      if (!fields.contains(name)) out.mismatches.push_back(point + "/" + name + ": field not in golden file");
  }
  for (auto& [point, fields] : c.items())
    if (!g.contains(point)) out.mismatches.push_back(point + ": point not in golden file");
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "': " + std::strerror(errno));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "': " + std::strerror(errno));
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace qthermo
