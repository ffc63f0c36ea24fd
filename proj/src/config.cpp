#include "brox/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "brox/errors.hpp"

namespace brox {

Tolerances Tolerances::profile(ToleranceProfile p) {
  Tolerances t;
  if (p == ToleranceProfile::strict) {
    t.exactness = 1e-11;
    t.round_trip = 1e-11;
    t.gamma_one = 1e-13;
    t.form = 1e-11;
    t.eigen_zero = 1e-11;
    t.e1_constancy = 1e-10;
    t.flat_spectrum = 1e-12;
    t.row_sum = 1e-10;
    t.chapman_kolmogorov = 1e-10;
    t.detailed_balance = 1e-10;
    t.adjoint = 1e-11;
  }
  return t;
}

std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T x{};
  const auto s = trim(v);
  const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw ConfigError(key + ": cannot parse '" + v + "' as a number");
  return x;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& v) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_number<T>(key, item));
  }
  if (out.empty()) throw ConfigError(key + ": list is empty");
  return out;
}

std::string to_str(int x) { return std::to_string(x); }
std::string to_str(std::uint64_t x) { return std::to_string(x); }
std::string to_str(double x) { return format_double(x); }
std::string to_str(bool x) { return x ? "true" : "false"; }
std::string to_str(const std::string& x) { return x; }
std::string to_str(ToleranceProfile p) { return p == ToleranceProfile::strict ? "strict" : "default"; }
template <class T>
std::string to_str(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + to_str(v[i]);
  return s;
}

void from_str(const std::string& k, const std::string& v, int& x) { x = parse_number<int>(k, v); }
void from_str(const std::string& k, const std::string& v, std::uint64_t& x) { x = parse_number<std::uint64_t>(k, v); }
void from_str(const std::string& k, const std::string& v, double& x) { x = parse_number<double>(k, v); }
void from_str(const std::string&, const std::string& v, std::string& x) { x = trim(v); }
void from_str(const std::string& k, const std::string& v, bool& x) {
  const auto s = trim(v);
  if (s == "true" || s == "1") x = true;
  else if (s == "false" || s == "0") x = false;
  else throw ConfigError(k + ": expected true or false, got '" + v + "'");
}
void from_str(const std::string& k, const std::string& v, ToleranceProfile& x) {
  const auto s = trim(v);
  if (s == "strict") x = ToleranceProfile::strict;
  else if (s == "default") x = ToleranceProfile::standard;
  else throw ConfigError(k + ": expected strict or default, got '" + v + "'");
}
template <class T>
void from_str(const std::string& k, const std::string& v, std::vector<T>& x) { x = parse_list<T>(k, v); }

std::string type_name(int) { return "int"; }
std::string type_name(std::uint64_t) { return "uint64"; }
std::string type_name(double) { return "float"; }
std::string type_name(bool) { return "bool"; }
std::string type_name(const std::string&) { return "string"; }
std::string type_name(ToleranceProfile) { return "{default,strict}"; }
std::string type_name(const std::vector<int>&) { return "int list"; }
std::string type_name(const std::vector<double>&) { return "float list"; }

struct Field {
  std::string key;
  std::string doc;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string()> type;
};

template <class T>
Field field(std::string key, std::string doc, T ExperimentConfig::*m) {
  Field f{key, std::move(doc), nullptr, nullptr, nullptr};
  f.get = [m](const ExperimentConfig& c) { return to_str(c.*m); };
  f.set = [m, key](ExperimentConfig& c, const std::string& v) { from_str(key, v, c.*m); };
  f.type = [m] { return type_name(ExperimentConfig{}.*m); };
  return f;
}

const std::vector<Field>& fields() {
  using C = ExperimentConfig;
  static const std::vector<Field> f{
      field("master_seed", "Monte Carlo path streams", &C::master_seed),
      field("grid.M", "collocation points (power of two)", &C::grid_M),
      field("grid.K", "retained modes, K <= M/3", &C::grid_K),
      field("noise.seed", "environment seed", &C::noise_seed),
      field("noise.seed_count", "consecutive environment seeds in sweeps", &C::noise_seed_count),
      field("noise.K_max", "sampled noise modes", &C::noise_K_max),
      field("noise.levels", "regularization levels n", &C::noise_levels),
      field("noise.alpha", "Hölder exponent of the enhanced-noise norm, in (1, 3/2)", &C::noise_alpha),
      field("noise.flat", "replace the noise by 0", &C::noise_flat),
      field("noise.renorm_seeds", "seeds of the mean-zero check of grad X1 . xi_n (0: off)", &C::noise_renorm_seeds),
      field("generator.N", "reference level (0: estimate N_Xi)", &C::generator_N),
      field("generator.c_shift", "resolvent shift c > 0", &C::generator_c_shift),
      field("generator.gamma_tolerance", "Gamma fixed-point tolerance", &C::generator_gamma_tolerance),
      field("generator.resolvent_tolerance", "GMRES relative tolerance", &C::generator_resolvent_tolerance),
      field("generator.probes", "number of probe functions", &C::generator_probes),
      field("generator.probe_seed", "probe stream seed", &C::generator_probe_seed),
      field("spectral.n", "level of the spectral problem", &C::spectral_n),
      field("spectral.levels", "levels of the Gaussian-fit uniformity sweep", &C::spectral_levels),
      field("spectral.basis_modes", "Galerkin modes K_b", &C::spectral_basis_modes),
      field("spectral.band_factor", "raise K_b to at least this multiple of the e^{2W} band (0: off)", &C::spectral_band_factor),
      field("spectral.kernel_basis", "Galerkin basis of heat kernels and Gaussian fits: ground_state (e^{-W}φ) or fourier",
            &C::spectral_kernel_basis),
      field("spectral.eigencount", "eigenpairs reported", &C::spectral_eigencount),
      field("spectral.points", "kernel grid points (power of two)", &C::spectral_points),
      field("spectral.times", "heat-kernel times", &C::spectral_times),
      field("spectral.t_min", "Gaussian-fit window start", &C::spectral_t_min),
      field("spectral.t_max", "Gaussian-fit window end", &C::spectral_t_max),
      field("spectral.t_count", "Gaussian-fit log-spaced times", &C::spectral_t_count),
      field("mc.n", "drift level of the SDE", &C::mc_n),
      field("mc.dt", "time step (0: dt_fraction x stability bound)", &C::mc_dt),
      field("mc.dt_fraction", "fraction of the stability bound", &C::mc_dt_fraction),
      field("mc.T", "horizon (0: derived from the spectral gap)", &C::mc_T),
      field("mc.n_paths", "paths", &C::mc_n_paths),
      field("mc.burn_in", "burn-in time (0: 5/gap)", &C::mc_burn_in),
      field("mc.stride", "record every stride steps (0: every 1/32 time unit)", &C::mc_stride),
      field("mc.bins", "histogram bins", &C::mc_bins),
      field("mc.bootstrap", "bootstrap resamples", &C::mc_bootstrap),
      field("mc.x0", "start point (mixing and fdd-check start at argmax |e_2|)", &C::mc_x0),
      field("tolerance.profile", "threshold set", &C::tolerance_profile),
      field("output.dir", "run directory root (empty: $BROX_OUT_ROOT or ./runs)", &C::output_dir),
  };
  return f;
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  for (const auto& f : fields())
    if (f.key == key) {
      f.set(*this, value);
      return;
    }
  throw ConfigError(key + ": unknown key");
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig c;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    c.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::map<std::string, std::string> ExperimentConfig::to_map() const {
  std::map<std::string, std::string> m;
  for (const auto& f : fields()) m[f.key] = f.get(*this);
  return m;
}

std::string ExperimentConfig::to_text() const {
  std::string s;
  for (const auto& f : fields()) s += f.key + " = " + f.get(*this) + "\n";
  return s;
}

std::string ExperimentConfig::schema() {
  std::string s;
  for (const auto& f : fields())
    s += f.key + " : " + f.type() + " = " + f.get(ExperimentConfig{}) + "  # " + f.doc + "\n";
  return s;
}

void ExperimentConfig::validate() const {
  std::vector<std::string> bad;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) bad.push_back(msg);
  };
  const bool pow2 = grid_M >= 4 && (grid_M & (grid_M - 1)) == 0;
  need(pow2, "grid.M: must be a power of two >= 4");
  need(grid_K >= 1 && 3 * grid_K <= grid_M, "grid.K: must satisfy 1 <= K <= M/3");
  need(noise_seed_count >= 1, "noise.seed_count: must be >= 1");
  need(noise_K_max >= 1 && noise_K_max <= grid_K, "noise.K_max: must satisfy 1 <= K_max <= grid.K");
  for (int n : noise_levels) need(n >= 1 && n <= noise_K_max, "noise.levels: level " + std::to_string(n) + " outside [1, K_max]");
  need(noise_alpha > 1.0 && noise_alpha < 1.5, "noise.alpha: must lie in (1, 3/2)");
  need(generator_N >= 0 && generator_N <= noise_K_max, "generator.N: must lie in [0, K_max]");
  need(generator_c_shift > 0, "generator.c_shift: must be positive");
  need(generator_gamma_tolerance > 0, "generator.gamma_tolerance: must be positive");
  need(generator_resolvent_tolerance > 0, "generator.resolvent_tolerance: must be positive");
  need(generator_probes >= 1, "generator.probes: must be >= 1");
  need(spectral_n >= 1 && spectral_n <= noise_K_max, "spectral.n: must lie in [1, K_max]");
  need(noise_renorm_seeds == 0 || noise_renorm_seeds >= 2, "noise.renorm_seeds: must be 0 or >= 2");
  for (int n : spectral_levels) need(n >= 1 && n <= noise_K_max, "spectral.levels: level " + std::to_string(n) + " outside [1, K_max]");
  need(spectral_basis_modes >= 1, "spectral.basis_modes: must be >= 1");
  need(spectral_band_factor >= 0, "spectral.band_factor: must be >= 0");
  need(spectral_kernel_basis == "ground_state" || spectral_kernel_basis == "fourier",
       "spectral.kernel_basis: must be ground_state or fourier");
  need(spectral_eigencount >= 2 && spectral_eigencount <= 2 * spectral_basis_modes + 1,
       "spectral.eigencount: must lie in [2, 2 K_b + 1]");
  need(spectral_points >= 4 && (spectral_points & (spectral_points - 1)) == 0, "spectral.points: must be a power of two");
  for (double t : spectral_times) need(t > 0, "spectral.times: times must be positive");
  need(spectral_t_min > 0 && spectral_t_max > spectral_t_min, "spectral.t_min/t_max: need 0 < t_min < t_max");
  need(spectral_t_count >= 2, "spectral.t_count: must be >= 2");
  need(mc_n >= 1 && mc_n <= noise_K_max, "mc.n: must lie in [1, K_max]");
  need(mc_dt >= 0, "mc.dt: must be >= 0");
  need(mc_dt_fraction > 0 && mc_dt_fraction <= 1, "mc.dt_fraction: must lie in (0, 1]");
  need(mc_T >= 0, "mc.T: must be >= 0");
  need(mc_n_paths >= 1, "mc.n_paths: must be >= 1");
  need(mc_burn_in >= 0, "mc.burn_in: must be >= 0");
  need(mc_stride >= 0, "mc.stride: must be >= 0");
  need(mc_bins >= 2, "mc.bins: must be >= 2");
  need(mc_bootstrap >= 2, "mc.bootstrap: must be >= 2");
  if (!bad.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& b : bad) msg += "\n  " + b;
    throw ConfigError(msg);
  }
}

}  // namespace brox
