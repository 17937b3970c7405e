#pragma once

#include "qthermo/classical_jz.hpp"
#include "qthermo/jarzynski_drive.hpp"

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace qthermo {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BetaGrid {
  double from = 0.1, to = 50.0;
  int steps = 4;
  bool log = true;
  std::vector<double> explicit_values;  // grid.beta.values wins when set

  std::vector<double> values() const;
};

/// Coupling g on a grid point multiplies the per-mode weights in model.couplings.
struct RunConfig {
  ModelSpec model;
  BetaGrid beta;
  std::vector<double> g_scale{0.0, 0.2, 0.5, 1.0};
  std::vector<double> J{0.0};
  std::vector<double> P;  // classical pressures; empty disables classical points
  ClassicalParams classical;
  DerivativeConfig fd;
  std::map<std::string, double> tolerances;  // overrides by identity name
  std::string csv_path, json_path, golden_path;
  std::string sweep_kind = "pm";
  std::uint64_t seed = 20240229;
  std::vector<std::string> warnings;

  RunConfig() { model.couplings = {1.0}; }
  ModelSpec model_at(double g, double J) const;
};

inline constexpr double kToleranceFloor = 1e-13;

/// Flat `section.key = value` text. Throws ConfigError naming source, line and key.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);
/// `name=value`; values below kToleranceFloor are kept with a warning.
void apply_tolerance(RunConfig& cfg, const std::string& assignment);

struct IdentitySpec {
  std::string name;
  std::string relation;
  double tolerance = 0.0;
  bool lower_bound = false;  // passes when the residual exceeds the tolerance
};

/// Every gated identity, in ledger order.
const std::vector<IdentitySpec>& identity_inventory();
const IdentitySpec& identity(const std::string& name);

struct LedgerEntry {
  std::string identity;
  std::string relation;
  std::string point;
  double residual = 0.0;
  double tolerance = 0.0;
  double fd_error = 0.0;
  bool lower_bound = false;
  bool pass = false;
  bool flagged = false;  // fd_error above tolerance
};

struct IdentityLedger {
  std::vector<LedgerEntry> entries;
  std::vector<std::string> points;

  bool ok() const;
  std::vector<const LedgerEntry*> failures() const;
  std::string to_json() const;
};

struct QuantumPoint {
  double beta = 0.0, g = 0.0, J = 0.0;
  std::string label() const;
};

struct ClassicalPoint {
  double beta = 0.0, P = 0.0;
  std::string label() const;
};

std::vector<QuantumPoint> quantum_points(const RunConfig& cfg);
std::vector<ClassicalPoint> classical_points(const RunConfig& cfg);

/// Identities of one point, in inventory order.
std::vector<LedgerEntry> validate_point(const RunConfig& cfg, const QuantumPoint& pt, std::uint64_t seed);
std::vector<LedgerEntry> validate_point(const RunConfig& cfg, const ClassicalPoint& pt);

IdentityLedger run_validate(const RunConfig& cfg, int jobs = 1);

enum class SweepKind { GT, PM, JZ, Canonical };
SweepKind parse_sweep_kind(const std::string& text);

struct CsvTable {
  std::vector<std::string> columns;  // names carry units
  std::vector<std::vector<double>> rows;
  std::vector<std::string> summary;  // trailing comment lines

  std::string render(const std::string& timestamp) const;
};

CsvTable run_sweep(const RunConfig& cfg, SweepKind kind, int jobs = 1);
CsvTable run_classical(const RunConfig& cfg, int jobs = 1);

/// UTC time in ISO 8601.
std::string timestamp_now();

/// JSON object {point: {field: value}} with 15 significant digits.
std::string snapshot_json(const RunConfig& cfg, int jobs = 1);

struct GoldenComparison {
  std::size_t fields = 0;
  std::vector<std::string> mismatches;
  bool ok() const { return mismatches.empty(); }
};

GoldenComparison compare_golden(const std::string& golden, const std::string& current, double rel_tol = 1e-9,
                                double abs_floor = 1e-14);

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first failing
/// index (in index order) has its exception rethrown.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace qthermo
