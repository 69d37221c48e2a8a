#include "driftsync/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "driftsync/config.hpp"
#include "driftsync/run_io.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace driftsync {

namespace {

void apply_thread_cap() {
#ifdef _OPENMP
  if (const char* env = std::getenv("DRIFTSYNC_THREADS")) {
    int n = 0;
    const std::string_view sv(env);
    auto [p, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), n);
    if (ec == std::errc{} && p == sv.data() + sv.size() && n >= 1)
      omp_set_num_threads(n);
  }
#endif
}

std::vector<double> parse_values(const std::string& csv, bool integral) {
  std::vector<double> out;
  std::istringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || p != item.data() + item.size())
      throw ConfigError("--values: '" + item + "' is not a number");
    if (integral && v != std::floor(v))
      throw ConfigError("--values: '" + item + "' must be an integer");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("--values: empty list");
  return out;
}

int run_command(const ExperimentConfig& cfg, const std::string& out_dir) {
  const RunResult res = run(cfg);

  std::filesystem::create_directories(out_dir);
  std::ostringstream log;
  write_run_log(log, res);
  write_text_file(out_dir + "/run_log.csv", log.str());
  std::ostringstream sum;
  write_summary(sum, cfg, res);
  write_text_file(out_dir + "/summary.txt", sum.str());
  write_manifest(out_dir, {"run_log.csv", "summary.txt"});

  std::cout << "run: " << res.rounds_completed << " rounds, loss "
            << format_double(res.total_loss) << ", errors " << res.total_errors
            << ", bytes " << res.ledger.total_bytes() << ", syncs "
            << res.ledger.sync_count() << "\n"
            << "wrote " << out_dir << "/run_log.csv, summary.txt, manifest.txt\n";
  if (res.shortened)
    std::cout << "note: stream exhausted, run shortened to "
              << res.rounds_completed << " rounds\n";
  return 0;
}

int sweep_command(const ExperimentConfig& base, const std::string& axis,
                  const std::string& values_csv, const std::string& out_dir) {
  std::vector<double> values;
  if (axis == "delta") {
    if (base.strategy.kind != SyncStrategy::Kind::dynamic)
      throw ConfigError("--axis delta requires strategy.kind = dynamic");
    values = parse_values(values_csv, false);
  } else if (axis == "period") {
    if (base.strategy.kind != SyncStrategy::Kind::periodic)
      throw ConfigError("--axis period requires strategy.kind = periodic");
    values = parse_values(values_csv, true);
  } else if (axis == "tau") {
    if (base.learner.compression.kind != CompressionKind::truncate)
      throw ConfigError("--axis tau requires learner.compression = truncate");
    values = parse_values(values_csv, true);
  } else {
    throw ConfigError("--axis must be delta, period or tau, got '" + axis + "'");
  }

  std::vector<SweepRow> rows;
  for (double v : values) {
    ExperimentConfig cfg = base;
    if (axis == "delta")
      cfg.strategy.delta = v;
    else if (axis == "period")
      cfg.strategy.period = static_cast<std::int64_t>(v);
    else
      cfg.learner.compression.budget = static_cast<int>(v);
    const RunResult res = run(cfg);
    rows.push_back({v, res.total_loss, res.total_errors, res.ledger.total_bytes(),
                    res.ledger.violations_total(), res.ledger.quiescence_round()});
  }

  std::filesystem::create_directories(out_dir);
  std::ostringstream table;
  write_sweep_table(table, rows);
  write_text_file(out_dir + "/sweep.csv", table.str());
  write_manifest(out_dir, {"sweep.csv"});

  std::cout << "sweep: " << rows.size() << " " << axis << " values\n"
            << "wrote " << out_dir << "/sweep.csv, manifest.txt\n";
  return 0;
}

struct CheckLine {
  std::string name;
  bool ok = true;
  std::string detail;
};

void add_inequality(std::vector<CheckLine>& checks, const std::string& name,
                    bool applicable, bool ok, double lhs, double rhs) {
  CheckLine c{name, ok, ""};
  if (!applicable)
    c.detail = "not applicable";
  else
    c.detail = "lhs=" + format_double(lhs) + " rhs=" + format_double(rhs);
  checks.push_back(std::move(c));
}

int verify_command(const ExperimentConfig& cfg, bool inject_ledger_fault) {
  RunResult res = run(cfg);
  const RunResult twin = run(cfg);
  const bool deterministic = res.content_hash() == twin.content_hash();
  if (inject_ledger_fault) corrupt_ledger_for_testing(res.ledger);

  std::vector<CheckLine> checks;

  checks.push_back({"ledger_replay", res.ledger.replay_matches(res.costs),
                    "recompute sync-round bytes from logged set sizes"});

  bool mono = true;
  for (std::size_t i = 1; i < res.cum_loss.size(); ++i)
    mono = mono && res.cum_loss[i] >= res.cum_loss[i - 1] &&
           res.cum_errors[i] >= res.cum_errors[i - 1];
  std::int64_t cum_bytes = 0, cum_syncs = 0;
  for (const RoundRecord& r : res.ledger.rounds()) {
    if (r.bytes_up < 0 || r.bytes_down < 0) mono = false;
    cum_bytes += r.bytes_up + r.bytes_down;
    cum_syncs += r.synced ? 1 : 0;
  }
  mono = mono && cum_bytes == res.ledger.total_bytes() &&
         cum_syncs == res.ledger.sync_count();
  checks.push_back({"monotone_series", mono, "loss, errors, bytes, syncs"});

  const bool conserved =
      res.examples_consumed ==
          static_cast<std::int64_t>(cfg.m) * res.rounds_completed &&
      static_cast<std::int64_t>(res.ledger.rounds().size()) ==
          res.rounds_completed &&
      (res.shortened || res.rounds_completed == cfg.rounds);
  checks.push_back({"conservation", conserved,
                    std::to_string(res.examples_consumed) + " examples"});

  const bool dynamic = cfg.strategy.kind == SyncStrategy::Kind::dynamic;
  bool safety = true;
  double worst = 0.0;
  for (const RoundRecord& r : res.ledger.rounds())
    if (!std::isnan(r.divergence_at_check) && r.violations == 0 &&
        r.divergence_at_check > cfg.strategy.delta) {
      safety = false;
      worst = std::max(worst, r.divergence_at_check);
    }
  add_inequality(checks, "local_safety", dynamic, safety, worst,
                 cfg.strategy.delta);

  add_inequality(checks, "sync_bound", res.report.sync_bound_applicable,
                 res.report.sync_bound_ok, res.report.sync_bound_lhs,
                 res.report.sync_bound_rhs);

  add_inequality(checks, "comm_bound", res.comm_bound.applicable, res.comm_bound.ok,
                 res.comm_bound.lhs, res.comm_bound.rhs);

  if (dynamic && cfg.learner.learn_rate > 0.0) {
    const CompareReport rep =
        compare(cfg, {SyncStrategy::periodic(1), cfg.strategy});
    const LossBoundCheck& b = rep.loss_bounds.at(0);
    add_inequality(checks, "loss_bound", true, b.ok, b.lhs, b.rhs);
  } else {
    add_inequality(checks, "loss_bound", false, true, 0.0, 0.0);
  }

  checks.push_back({"determinism", deterministic, "two runs, one fingerprint"});

  int failed = 0;
  for (const CheckLine& c : checks) {
    std::cout << (c.ok ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
    std::cout << "\n";
    if (!c.ok) ++failed;
  }
  std::cout << "verify: " << checks.size() << " checks, " << failed
            << " failed\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  apply_thread_cap();

  CLI::App app{"communication-efficient distributed online learning simulator"};
  app.name("driftsync");
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", axis, values;
  std::uint64_t seed = 0;
  bool inject_fault = false;

  CLI::App* cmd_run = app.add_subcommand("run", "run one experiment");
  cmd_run->add_option("--config", config_path, "config file")->required();
  cmd_run->add_option("--out", out_dir, "output directory");
  cmd_run->add_option("--seed", seed, "override the config seed");

  CLI::App* cmd_sweep =
      app.add_subcommand("sweep", "run one experiment per axis value");
  cmd_sweep->add_option("--config", config_path, "config file")->required();
  cmd_sweep->add_option("--out", out_dir, "output directory");
  cmd_sweep->add_option("--axis", axis, "delta | period | tau")->required();
  cmd_sweep->add_option("--values", values, "comma-separated list")->required();
  cmd_sweep->add_option("--seed", seed, "override the config seed");

  CLI::App* cmd_verify =
      app.add_subcommand("verify", "run the invariant and bound checks");
  cmd_verify->add_option("--config", config_path, "config file")->required();
  cmd_verify->add_option("--seed", seed, "override the config seed");
  cmd_verify->add_flag("--inject-ledger-fault", inject_fault,
                       "negative control: corrupt the ledger before checking");

  std::vector<const char*> argv;
  argv.push_back("driftsync");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    ExperimentConfig cfg = parse_config_file(config_path);
    if (cmd_run->parsed() && cmd_run->count("--seed")) cfg.seed = seed;
    if (cmd_sweep->parsed() && cmd_sweep->count("--seed")) cfg.seed = seed;
    if (cmd_verify->parsed() && cmd_verify->count("--seed")) cfg.seed = seed;

    if (cmd_run->parsed()) return run_command(cfg, out_dir);
    if (cmd_sweep->parsed()) return sweep_command(cfg, axis, values, out_dir);
    return verify_command(cfg, inject_fault);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace driftsync
