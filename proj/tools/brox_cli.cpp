// brox: experiment driver.
//
//   brox <subcommand> [--config FILE] [--seed S] [--seeds COUNT] [--out DIR] [--threads T]
//                     [--tolerance-profile default|strict] [--set key=value ...]
//   brox report RUN_DIR
//   brox schema
//
// Exit codes: 0 all declared checks pass, 1 a check failed (listed on stderr), 2 bad config or usage.

#include <chrono>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "brox/errors.hpp"
#include "brox/experiments.hpp"

namespace {

std::string out_root(const brox::ExperimentConfig& cfg, const std::string& flag) {
  if (!flag.empty()) return flag;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv("BROX_OUT_ROOT"); env && *env) return env;
  return "runs";
}

std::string seed_dir(std::uint64_t seed) {
  std::string s = std::to_string(seed);
  return "seed-" + std::string(s.size() < 4 ? 4 - s.size() : 0, '0') + s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Brox diffusion experiments", "brox"};
  app.require_subcommand(1);
  app.set_version_flag("--version", brox::exp::version_string());

  std::string config_path, out, profile;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  int seeds = 0;
  unsigned threads = 1;

  for (const auto& [name, runner] : brox::exp::registry()) {
    (void)runner;
    CLI::App* sub = app.add_subcommand(name, "run " + name);
    sub->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "environment seed (overrides noise.seed)");
    sub->add_option("--seeds", seeds, "consecutive environment seeds (overrides noise.seed_count)");
    sub->add_option("--out", out, "output root (default: output.dir, $BROX_OUT_ROOT, ./runs)");
    sub->add_option("--threads", threads, "Monte Carlo worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--tolerance-profile", profile, "threshold set")->check(CLI::IsMember({"default", "strict"}));
    sub->add_option("--set", overrides, "extra key=value assignment (repeatable)");
  }
  std::string report_dir;
  CLI::App* rep = app.add_subcommand("report", "aggregate completed runs");
  rep->add_option("run_dir", report_dir, "directory holding runs")->required();
  app.add_subcommand("schema", "print every config key with its type and default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  try {
    if (command == "schema") {
      std::cout << brox::ExperimentConfig::schema();
      return 0;
    }
    if (command == "report") {
      const auto summary = brox::exp::report(report_dir);
      std::cout << summary.dump(2) << "\n";
      return 0;
    }

    brox::ExperimentConfig cfg = config_path.empty() ? brox::ExperimentConfig{} : brox::ExperimentConfig::load(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw brox::ConfigError("--set " + kv + ": expected key=value");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (sub->count("--seed")) cfg.noise_seed = seed;
    if (sub->count("--seeds")) cfg.noise_seed_count = seeds;
    if (!profile.empty()) cfg.set("tolerance.profile", profile);
    cfg.validate();

    const std::string root = out_root(cfg, out) + "/" + command;
    const brox::exp::Context ctx{threads};
    bool all_ok = true;
    for (int i = 0; i < cfg.noise_seed_count; ++i) {
      const std::uint64_t s = cfg.noise_seed + static_cast<std::uint64_t>(i);
      std::cerr << "[" << command << "] seed " << s << " (" << i + 1 << "/" << cfg.noise_seed_count << ")\n";
      const auto t0 = std::chrono::steady_clock::now();
      const brox::exp::Outcome o = brox::exp::run(command, cfg, s, ctx);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const std::string dir = root + "/" + seed_dir(s);
      brox::exp::write_run(dir, o, cfg, secs);
      for (const auto& c : o.checks)
        std::cerr << "  " << (c.pass ? "ok   " : "FAIL ") << c.name << " = " << brox::format_double(c.value) << "\n";
      if (!o.ok()) {
        all_ok = false;
        for (const auto& f : o.failed()) std::cerr << "failed check (seed " << s << "): " << f << "\n";
      }
      std::cerr << "  wrote " << dir << " in " << secs << " s\n";
    }
    return all_ok ? 0 : 1;
  } catch (const brox::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const brox::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
