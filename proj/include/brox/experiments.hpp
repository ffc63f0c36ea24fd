#pragma once

// Experiment runners behind the command-line driver and the acceptance suite.
//
// A runner takes the effective configuration and one environment seed and returns the
// checks it declared (with thresholds from the tolerance profile), its output tables, and
// long-format metric rows (command, seed, n, M, t, metric, value) that `report` aggregates
// without recomputing anything.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "brox/config.hpp"
#include "brox/io.hpp"

namespace brox::exp {

struct Check {
  std::string name;
  double value = 0.0;
  std::string relation;  // "<=", ">=", "<", ">", "in"
  double threshold = 0.0;
  double threshold_hi = 0.0;  // upper end for "in"
  bool pass = false;
};

struct Outcome {
  std::string command;
  std::uint64_t seed = 0;
  std::vector<Check> checks;
  std::map<std::string, io::Table> tables;  // file name → table
  io::Table metrics{"brox.metrics/1", {"command", "seed", "n", "M", "t", "metric", "value"}};
  io::json extra = io::json::object();
  std::vector<std::pair<std::string, FourierField>> fields;  // binary artifacts
  struct Matrix {
    std::string name;
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;
    io::json meta;
  };
  std::vector<Matrix> matrices;

  bool ok() const;
  std::vector<std::string> failed() const;
  Check& check(const std::string& name, double value, const std::string& relation, double threshold);
  Check& check_in(const std::string& name, double value, double lo, double hi);
  void metric(int n, int M, double t, const std::string& name, double value);
};

struct Context {
  unsigned threads = 1;
};

using Runner = Outcome (*)(const ExperimentConfig&, std::uint64_t seed, const Context&);

/// Subcommand name → runner (everything except `report`).
const std::map<std::string, Runner>& registry();
Outcome run(const std::string& command, const ExperimentConfig& cfg, std::uint64_t seed, const Context& ctx = {});

/// Writes manifest.json, metrics.csv, every table and binary artifact into `dir`.
void write_run(const std::string& dir, const Outcome& out, const ExperimentConfig& cfg, double seconds);

/// Aggregates every run below `root` into summary.json and aggregate.csv (plus convergence.csv
/// for enhance sweeps). Throws Error when no manifest is found.
io::json report(const std::string& root);

/// Power of two not exceeding `limit`.
double dyadic_step(double limit);
/// Smallest multiple of `unit` that is ≥ x.
double ceil_to(double x, double unit);

std::string version_string();

}  // namespace brox::exp
