#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "brox/config.hpp"
#include "brox/errors.hpp"
#include "brox/experiments.hpp"
#include "brox/io.hpp"

using namespace brox;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("brox_unit_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("runners are deterministic and write manifests") {
  ExperimentConfig c;
  const fs::path root = fresh_dir("determinism");
  for (const char* run : {"a", "b"}) {
    const exp::Outcome o = exp::run("spectrum", c, 4);
    CHECK(o.ok());
    exp::write_run((root / run).string(), o, c, 0.0);
  }
  CHECK(slurp(root / "a" / "spectrum.csv") == slurp(root / "b" / "spectrum.csv"));
  CHECK(slurp(root / "a" / "metrics.csv") == slurp(root / "b" / "metrics.csv"));
  const io::json m = io::read_json((root / "a" / "manifest.json").string());
  CHECK(m.at("schema") == "brox.manifest/1");
  CHECK(m.at("command") == "spectrum");
  CHECK(m.at("seed") == 4);
  CHECK(m.at("ok") == true);
  CHECK(m.at("config").at("spectral.kernel_basis") == "ground_state");
  CHECK(io::read_csv((root / "a" / "metrics.csv").string()).schema == "brox.metrics/1");
}

TEST_CASE("report aggregates runs and refuses an empty directory") {
  const fs::path empty = fresh_dir("empty_report");
  fs::create_directories(empty);
  CHECK_THROWS_WITH_AS(exp::report(empty.string()), doctest::Contains("manifest.json"), Error);

  ExperimentConfig c;
  c.noise_levels = {8, 16, 32};
  c.noise_K_max = 64;
  const fs::path root = fresh_dir("report");
  for (std::uint64_t s = 1; s <= 3; ++s)
    exp::write_run((root / "enhance" / ("seed-" + std::to_string(s))).string(), exp::run("enhance", c, s), c, 0.0);
  const io::json summary = exp::report(root.string());
  CHECK(summary.at("runs") == 3);
  const io::Table agg = io::read_csv((root / "aggregate.csv").string());
  CHECK(agg.schema == "brox.aggregate/1");
  CHECK(!agg.rows.empty());
  CHECK(fs::exists(root / "convergence.csv"));
}

TEST_CASE("unknown commands and invalid configs are rejected") {
  CHECK_THROWS_AS(exp::run("no-such-command", ExperimentConfig{}, 1), ConfigError);
  ExperimentConfig c;
  c.spectral_kernel_basis = "chebyshev";
  CHECK_THROWS_WITH_AS(exp::run("heat-kernel", c, 1), doctest::Contains("spectral.kernel_basis"), ConfigError);
}

TEST_CASE("kernel basis choice does not change the heat-kernel verdict on a mild seed") {
  ExperimentConfig c;
  const exp::Outcome g = exp::run("heat-kernel", c, 1);
  c.spectral_kernel_basis = "fourier";
  const exp::Outcome f = exp::run("heat-kernel", c, 1);
  CHECK(g.ok());
  CHECK(f.ok());
  REQUIRE(g.checks.size() == f.checks.size());
  CHECK(g.checks[0].name == "kernel_min");
}

TEST_CASE("dyadic helpers") {
  CHECK(exp::dyadic_step(0.3) == 0.25);
  CHECK(exp::dyadic_step(1.0) == 1.0);
  CHECK(exp::ceil_to(0.26, 0.125) == 0.375);
  CHECK(exp::ceil_to(0.25, 0.125) == 0.25);
}
