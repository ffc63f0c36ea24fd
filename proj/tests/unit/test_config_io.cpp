#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "brox/config.hpp"
#include "brox/errors.hpp"
#include "brox/io.hpp"
#include "brox/noise.hpp"

using namespace brox;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("brox_unit_" + name)).string();
}

}  // namespace

TEST_CASE("config text round-trips bit-exactly") {
  ExperimentConfig c;
  c.noise_alpha = 1.2345678901234567;
  c.spectral_times = {0.1, 1.0 / 3.0, 2.0 / 7.0};
  c.mc_dt = 3.0517578125e-05;
  c.generator_gamma_tolerance = 1e-11;
  c.tolerance_profile = ToleranceProfile::strict;
  c.output_dir = "some/dir";
  const ExperimentConfig d = ExperimentConfig::parse(c.to_text());
  CHECK(d.to_text() == c.to_text());
  CHECK(d.noise_alpha == c.noise_alpha);
  CHECK(d.spectral_times == c.spectral_times);
  CHECK(d.mc_dt == c.mc_dt);
  CHECK(d.tolerance_profile == ToleranceProfile::strict);
  CHECK(d.tolerances().exactness < Tolerances{}.exactness);
}

TEST_CASE("config parsing errors name the field") {
  CHECK_THROWS_WITH_AS(ExperimentConfig::parse("grid.Q = 3"), doctest::Contains("grid.Q"), ConfigError);
  CHECK_THROWS_WITH_AS(ExperimentConfig::parse("grid.M = 10x"), doctest::Contains("grid.M"), ConfigError);
  CHECK_THROWS_WITH_AS(ExperimentConfig::parse("noise.flat = maybe"), doctest::Contains("noise.flat"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("just text"), ConfigError);
  const auto c = ExperimentConfig::parse("# comment\n\ngrid.M = 256 # trailing\ngrid.K = 85\nnoise.K_max = 64\n"
                                         "noise.levels = 8, 16,32\nspectral.n = 16\nmc.n = 8\n");
  CHECK(c.grid_M == 256);
  CHECK(c.noise_levels == std::vector<int>{8, 16, 32});
  c.validate();
}

TEST_CASE("config validation lists every violation") {
  ExperimentConfig c;
  c.grid_M = 1000;
  c.noise_alpha = 1.5;
  c.noise_levels = {16, 512};
  try {
    c.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string m = e.what();
    CHECK(m.find("grid.M") != std::string::npos);
    CHECK(m.find("noise.alpha") != std::string::npos);
    CHECK(m.find("noise.levels") != std::string::npos);
  }
  ExperimentConfig{}.validate();
  CHECK(ExperimentConfig::schema().find("mc.dt_fraction") != std::string::npos);
}

TEST_CASE("field and matrix files round-trip") {
  const PeriodicGrid g(128, 42);
  const FourierField xi = truncate(sample_noise(3, 20), 20, g);
  const auto path = temp_path("field.bin");
  io::write_field(path, xi, {{"seed", 3}});
  const FourierField back = io::read_field(path);
  CHECK(back.grid().points() == 128);
  CHECK(back.max_mode() == 42);
  for (int k = 0; k <= 42; ++k) CHECK(back.coeff(k) == xi.coeff(k));
  CHECK(io::read_json(path + ".json")["meta"]["seed"] == 3);

  const std::vector<double> data{1.0, -2.5, 1e-300, 3.25, 0.1, 7.0};
  const auto mpath = temp_path("matrix.bin");
  io::write_matrix(mpath, 2, 3, data);
  std::size_t r = 0, c = 0;
  CHECK(io::read_matrix(mpath, r, c) == data);
  CHECK(r == 2);
  CHECK(c == 3);
  CHECK_THROWS_AS(io::read_field(mpath), Error);
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".json");
  std::filesystem::remove(mpath);
  std::filesystem::remove(mpath + ".json");
}

TEST_CASE("csv tables carry a schema line") {
  io::Table t("brox.test/1", {"n", "value", "label"});
  t.add(16, 0.1, "a");
  t.add(32, 1.0 / 3.0, std::string("b"));
  const auto path = temp_path("table.csv");
  io::write_csv(path, t);
  const io::Table back = io::read_csv(path);
  CHECK(back.schema == "brox.test/1");
  CHECK(back.columns == t.columns);
  CHECK(back.rows == t.rows);
  CHECK(std::stod(back.rows[1][back.column("value")]) == 1.0 / 3.0);
  CHECK_THROWS_AS(back.column("missing"), Error);
  std::filesystem::remove(path);
}
