#include "qthermo/cli_report.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace qthermo;

namespace {

enum Exit { kPass = 0, kGateFailure = 1, kUsage = 2 };

struct Options {
  std::string config;
  std::string out;
  std::string golden;
  std::string kind;
  std::vector<std::string> tol;
  long long seed = -1;
  int jobs = 1;
};

RunConfig load(const Options& o) {
  RunConfig cfg = load_config(o.config);
  for (const std::string& t : o.tol) apply_tolerance(cfg, t);
  if (o.seed >= 0) cfg.seed = std::uint64_t(o.seed);
  for (const std::string& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
  return cfg;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_file(path, text);
}

int validate(const Options& o) {
  RunConfig cfg = load(o);
  IdentityLedger ledger = run_validate(cfg, o.jobs);
  emit(o.out.empty() ? cfg.json_path : o.out, ledger.to_json());
  auto failures = ledger.failures();
  std::cerr << ledger.entries.size() << " identity checks over " << ledger.points.size() << " points, "
            << failures.size() << " failing\n";
  for (const LedgerEntry* e : failures)
    std::cerr << "  " << (e->pass ? "FLAGGED " : "FAIL ") << e->identity << " at " << e->point
              << ": residual " << e->residual << " tolerance " << e->tolerance << " fd_error " << e->fd_error
              << "\n";
  return failures.empty() ? kPass : kGateFailure;
}

int sweep(const Options& o) {
  RunConfig cfg = load(o);
  SweepKind kind = parse_sweep_kind(o.kind.empty() ? cfg.sweep_kind : o.kind);
  CsvTable t = run_sweep(cfg, kind, o.jobs);
  emit(o.out.empty() ? cfg.csv_path : o.out, t.render(timestamp_now()));
  for (const std::string& s : t.summary) std::cerr << s << "\n";
  return kPass;
}

int classical(const Options& o) {
  RunConfig cfg = load(o);
  CsvTable t = run_classical(cfg, o.jobs);
  emit(o.out.empty() ? cfg.csv_path : o.out, t.render(timestamp_now()));
  return kPass;
}

int snapshot(const Options& o) {
  RunConfig cfg = load(o);
  std::string path = !o.out.empty() ? o.out : cfg.golden_path;
  emit(path, snapshot_json(cfg, o.jobs));
  return kPass;
}

int compare(const Options& o) {
  RunConfig cfg = load(o);
  std::string path = !o.golden.empty() ? o.golden : cfg.golden_path;
  if (path.empty()) throw ConfigError("compare needs a golden file (--golden or output.golden)");
  std::string golden = read_file(path);
  std::string current = snapshot_json(cfg, o.jobs);
  if (!o.out.empty()) write_file(o.out, current);
  GoldenComparison c = compare_golden(golden, current);
  std::cerr << c.fields << " golden fields compared, " << c.mismatches.size() << " mismatches\n";
  for (const std::string& m : c.mismatches) std::cerr << "  " << m << "\n";
  return c.ok() ? kPass : kGateFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Strong-coupling thermodynamics: identity ledger, sweeps and golden regression"};
  app.require_subcommand(1, 1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "config file (section.key = value)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output path ('-' for stdout)");
    sub->add_option("--tol", o.tol, "tolerance override name=value (repeatable)");
    sub->add_option("--seed", o.seed, "seed for randomized checks")->check(CLI::NonNegativeNumber);
    sub->add_option("--jobs", o.jobs, "grid points evaluated concurrently")->check(CLI::Range(1, 256));
  };
  CLI::App* v = app.add_subcommand("validate", "run every identity gate and write the ledger JSON");
  CLI::App* s = app.add_subcommand("sweep", "write a CSV sweep");
  CLI::App* c = app.add_subcommand("classical", "write the classical representation CSV");
  CLI::App* n = app.add_subcommand("snapshot", "write report scalars as golden JSON");
  CLI::App* k = app.add_subcommand("compare", "compare report scalars against a golden file");
  for (CLI::App* sub : {v, s, c, n, k}) common(sub);
  s->add_option("--kind", o.kind, "gt, pm, jz or canonical (default sweep.kind)");
  k->add_option("--golden", o.golden, "golden file (default output.golden)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kPass : kUsage;
  }

  try {
    if (*v) return validate(o);
    if (*s) return sweep(o);
    if (*c) return classical(o);
    if (*n) return snapshot(o);
    return compare(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kGateFailure;
  }
}
