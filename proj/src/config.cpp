#include "mdopt/config.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mdopt/errors.hpp"
#include "mdopt/io.hpp"

namespace mdopt {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

class KeyReader {
 public:
  explicit KeyReader(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string required(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError("config: missing required key '" + key + "'");
    used_.insert(key);
    return it->second;
  }
  std::string optional(const std::string& key, const std::string& fallback) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    used_.insert(key);
    return it->second;
  }
  double number(const std::string& key) { return to_number(key, required(key)); }
  double number(const std::string& key, double fallback) {
    return has(key) ? to_number(key, required(key)) : fallback;
  }
  long integer(const std::string& key) { return to_integer(key, required(key)); }
  long integer(const std::string& key, long fallback) {
    return has(key) ? to_integer(key, required(key)) : fallback;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : kv_)
      if (!used_.count(key)) throw ConfigError("config: unknown key '" + key + "'");
  }

 private:
  double to_number(const std::string& key, const std::string& value) const {
    char* end = nullptr;
    const double x = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0' || !std::isfinite(x))
      throw ConfigError("config: key '" + key + "' is not a finite number: '" + value + "'");
    return x;
  }
  long to_integer(const std::string& key, const std::string& value) const {
    char* end = nullptr;
    const long x = std::strtol(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0')
      throw ConfigError("config: key '" + key + "' is not an integer: '" + value + "'");
    return x;
  }

  std::map<std::string, std::string> kv_;
  std::set<std::string> used_;
};

std::map<std::string, std::string> read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config: line " + std::to_string(lineno) + " has an empty key or value");
    if (kv.count(key))
      throw ConfigError("config: duplicate key '" + key + "'");
    kv[key] = value;
  }
  return kv;
}

std::string resolve_path(const std::string& config_path, const std::string& rel) {
  const std::filesystem::path p(rel);
  if (p.is_absolute()) return rel;
  return (std::filesystem::path(config_path).parent_path() / p).string();
}

/// number -> uniform field; file:PATH -> per-cell CSV
ScalarField load_medium_field(const std::string& key, const std::string& spec, const Grid& grid,
                              const std::string& config_path) {
  if (spec.rfind("file:", 0) == 0) {
    try {
      return read_field_csv(resolve_path(config_path, spec.substr(5)), grid);
    } catch (const FormatError& e) {
      throw ConfigError("config: key '" + key + "': " + e.what());
    }
  }
  char* end = nullptr;
  const double x = std::strtod(spec.c_str(), &end);
  if (end == spec.c_str() || *end != '\0' || !std::isfinite(x))
    throw ConfigError("config: key '" + key + "' must be a number or file:PATH, got '" + spec +
                      "'");
  return ScalarField(static_cast<std::size_t>(grid.num_cells()), x);
}

std::vector<long> parse_int_list(const std::string& key, const std::string& csv) {
  std::vector<long> out;
  std::istringstream is(csv);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    char* end = nullptr;
    out.push_back(std::strtol(tok.c_str(), &end, 10));
    if (end == tok.c_str() || *end != '\0')
      throw ConfigError("config: key '" + key + "' has a malformed entry '" + tok + "'");
  }
  return out;
}

ScalarField load_source(const std::string& spec, const Grid& grid,
                        const std::string& config_path) {
  if (spec.rfind("file:", 0) == 0) {
    try {
      return read_field_csv(resolve_path(config_path, spec.substr(5)), grid);
    } catch (const FormatError& e) {
      throw ConfigError(std::string("config: key 'q': ") + e.what());
    }
  }
  if (spec.rfind("dipole:", 0) == 0) {
    // dipole:i1,j1[,k1],i2,j2[,k2],MAG  (cell indices and a magnitude)
    const std::string body = spec.substr(7);
    const auto last_comma = body.find_last_of(',');
    if (last_comma == std::string::npos)
      throw ConfigError("config: key 'q': dipole needs cell indices and a magnitude");
    char* end = nullptr;
    const std::string mag_str = body.substr(last_comma + 1);
    const double mag = std::strtod(mag_str.c_str(), &end);
    if (end == mag_str.c_str() || *end != '\0' || !std::isfinite(mag))
      throw ConfigError("config: key 'q': dipole magnitude is not a number");
    const auto idx = parse_int_list("q", body.substr(0, last_comma));
    if (static_cast<int>(idx.size()) != 2 * grid.dim)
      throw ConfigError("config: key 'q': dipole needs " + std::to_string(2 * grid.dim) +
                        " cell indices for dim " + std::to_string(grid.dim));
    for (int a = 0; a < 2 * grid.dim; ++a)
      if (idx[a] < 0 || idx[a] >= grid.n[a % grid.dim])
        throw ConfigError("config: key 'q': dipole cell index out of range");
    ScalarField q(static_cast<std::size_t>(grid.num_cells()), 0.0);
    if (grid.dim == 2) {
      q[grid.idx(static_cast<int>(idx[0]), static_cast<int>(idx[1]))] += mag;
      q[grid.idx(static_cast<int>(idx[2]), static_cast<int>(idx[3]))] -= mag;
    } else {
      q[grid.idx(static_cast<int>(idx[0]), static_cast<int>(idx[1]), static_cast<int>(idx[2]))] +=
          mag;
      q[grid.idx(static_cast<int>(idx[3]), static_cast<int>(idx[4]), static_cast<int>(idx[5]))] -=
          mag;
    }
    return q;
  }
  throw ConfigError("config: key 'q' must be file:PATH or dipole:..., got '" + spec + "'");
}

}  // namespace

SolverOptions RunConfig::solver_options() const {
  SolverOptions opts;
  opts.pressure_tol = pressure_tol;
  opts.transport_tol = transport_tol;
  opts.max_iter_factor = max_iter_factor;
  return opts;
}

OptimizeOptions RunConfig::optimize_options() const {
  OptimizeOptions opts;
  opts.max_iters = max_iters;
  opts.tol_grad = tol_grad;
  opts.armijo_c1 = armijo_c1;
  opts.backtrack = backtrack;
  opts.max_backtracks = max_backtracks;
  opts.probe_seed = seed;
  return opts;
}

RunConfig parse_config(const std::string& path) {
  KeyReader keys(read_key_values(path));
  RunConfig cfg;

  cfg.dim = static_cast<int>(keys.integer("dim"));
  if (cfg.dim != 2 && cfg.dim != 3) throw ConfigError("config: key 'dim' must be 2 or 3");
  cfg.nx = static_cast<int>(keys.integer("nx"));
  cfg.ny = static_cast<int>(keys.integer("ny"));
  cfg.lx = keys.number("Lx");
  cfg.ly = keys.number("Ly");
  if (cfg.dim == 3) {
    cfg.nz = static_cast<int>(keys.integer("nz"));
    cfg.lz = keys.number("Lz");
  }
  try {
    cfg.grid = (cfg.dim == 2) ? Grid::box_2d(cfg.nx, cfg.ny, cfg.lx, cfg.ly)
                              : Grid::box_3d(cfg.nx, cfg.ny, cfg.nz, cfg.lx, cfg.ly, cfg.lz);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: grid keys invalid: ") + e.what());
  }

  cfg.total_time = keys.number("T");
  if (!(cfg.total_time > 0.0)) throw ConfigError("config: key 'T' must be positive");
  cfg.n_steps = static_cast<int>(keys.integer("n_steps"));
  if (cfg.n_steps < 1) throw ConfigError("config: key 'n_steps' must be at least 1");

  cfg.d_m = keys.number("d_m");
  cfg.d_t = keys.number("d_t");
  cfg.d_l = keys.number("d_l");
  cfg.eps_reg = keys.number("eps_reg", 1e-12);
  if (!(cfg.d_m > 0.0)) throw ConfigError("config: key 'd_m' must be positive");
  if (cfg.d_t < 0.0) throw ConfigError("config: key 'd_t' must be nonnegative");
  if (cfg.d_l < 0.0) throw ConfigError("config: key 'd_l' must be nonnegative");
  if (cfg.eps_reg < 0.0) throw ConfigError("config: key 'eps_reg' must be nonnegative");

  cfg.phi_spec = keys.required("phi");
  cfg.perm_spec = keys.required("K");
  cfg.medium.phi = load_medium_field("phi", cfg.phi_spec, cfg.grid, path);
  cfg.medium.perm = load_medium_field("K", cfg.perm_spec, cfg.grid, path);
  cfg.medium.d_m = cfg.d_m;
  cfg.medium.d_t = cfg.d_t;
  cfg.medium.d_l = cfg.d_l;
  try {
    cfg.medium.validate(cfg.grid);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: keys 'phi'/'K': ") + e.what());
  }

  cfg.q_spec = keys.required("q");
  cfg.q = load_source(cfg.q_spec, cfg.grid, path);
  const double total = field_sum(cfg.q) * cfg.grid.cell_volume();
  const double scale = field_l2(cfg.q) * std::sqrt(cfg.grid.cell_volume());
  if (std::abs(total) > 1e-10 * std::max(scale, 1e-300))
    throw ConfigError("config: key 'q': source must integrate to zero over the domain "
                      "(incompressible flow with an impermeable boundary), got total " +
                      format_double(total));

  cfg.alpha = keys.number("alpha", 0.0);
  if (cfg.alpha < 0.0) throw ConfigError("config: key 'alpha' must be nonnegative");
  cfg.gamma = keys.number("gamma");
  if (!(cfg.gamma > 0.0)) throw ConfigError("config: key 'gamma' must be positive");

  cfg.targets_spec = keys.optional("targets", "none");
  if (cfg.targets_spec != "none" && cfg.targets_spec != "self_consistent" &&
      cfg.targets_spec.rfind("files:", 0) != 0)
    throw ConfigError("config: key 'targets' must be none, self_consistent or files:...");
  cfg.hstar_spec = keys.optional("hstar", "none");
  if (cfg.hstar_spec != "none" && cfg.hstar_spec.rfind("pulse:", 0) != 0 &&
      cfg.hstar_spec.rfind("files:", 0) != 0)
    throw ConfigError("config: key 'hstar' must be none, pulse:AMPLITUDE or files:PREFIX");
  if (cfg.targets_spec == "self_consistent" && cfg.hstar_spec == "none")
    throw ConfigError("config: key 'hstar' is required when targets = self_consistent");

  cfg.pressure_tol = keys.number("pressure_tol", 1e-12);
  cfg.transport_tol = keys.number("transport_tol", 1e-13);
  cfg.max_iter_factor = keys.integer("max_iter_factor", 50);
  cfg.max_iters = static_cast<int>(keys.integer("max_iters", 200));
  cfg.tol_grad = keys.number("tol_grad", 5e-5);
  cfg.armijo_c1 = keys.number("armijo_c1", 1e-4);
  cfg.backtrack = keys.number("backtrack", 0.5);
  cfg.max_backtracks = static_cast<int>(keys.integer("max_backtracks", 40));
  cfg.grad_check_directions = static_cast<int>(keys.integer("grad_check_directions", 10));
  cfg.grad_check_eps = keys.number("grad_check_eps", 1e-3);
  cfg.grad_check_tol = keys.number("grad_check_tol", 5e-2);
  cfg.seed = static_cast<std::uint64_t>(keys.integer("seed", 1));
  cfg.out_dir = keys.optional("out_dir", "out");
  cfg.snapshot_stride = static_cast<int>(keys.integer("snapshot_stride", 0));

  keys.reject_unknown();
  return cfg;
}

std::string canonical_config_text(const RunConfig& cfg) {
  std::ostringstream os;
  os << "dim = " << cfg.dim << "\n";
  os << "nx = " << cfg.nx << "\n";
  os << "ny = " << cfg.ny << "\n";
  if (cfg.dim == 3) os << "nz = " << cfg.nz << "\n";
  os << "Lx = " << format_double(cfg.lx) << "\n";
  os << "Ly = " << format_double(cfg.ly) << "\n";
  if (cfg.dim == 3) os << "Lz = " << format_double(cfg.lz) << "\n";
  os << "T = " << format_double(cfg.total_time) << "\n";
  os << "n_steps = " << cfg.n_steps << "\n";
  os << "phi = " << cfg.phi_spec << "\n";
  os << "K = " << cfg.perm_spec << "\n";
  os << "q = " << cfg.q_spec << "\n";
  os << "d_m = " << format_double(cfg.d_m) << "\n";
  os << "d_t = " << format_double(cfg.d_t) << "\n";
  os << "d_l = " << format_double(cfg.d_l) << "\n";
  os << "eps_reg = " << format_double(cfg.eps_reg) << "\n";
  os << "alpha = " << format_double(cfg.alpha) << "\n";
  os << "gamma = " << format_double(cfg.gamma) << "\n";
  os << "targets = " << cfg.targets_spec << "\n";
  os << "hstar = " << cfg.hstar_spec << "\n";
  os << "pressure_tol = " << format_double(cfg.pressure_tol) << "\n";
  os << "transport_tol = " << format_double(cfg.transport_tol) << "\n";
  os << "max_iter_factor = " << cfg.max_iter_factor << "\n";
  os << "max_iters = " << cfg.max_iters << "\n";
  os << "tol_grad = " << format_double(cfg.tol_grad) << "\n";
  os << "armijo_c1 = " << format_double(cfg.armijo_c1) << "\n";
  os << "backtrack = " << format_double(cfg.backtrack) << "\n";
  os << "max_backtracks = " << cfg.max_backtracks << "\n";
  os << "grad_check_directions = " << cfg.grad_check_directions << "\n";
  os << "grad_check_eps = " << format_double(cfg.grad_check_eps) << "\n";
  os << "grad_check_tol = " << format_double(cfg.grad_check_tol) << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "out_dir = " << cfg.out_dir << "\n";
  os << "snapshot_stride = " << cfg.snapshot_stride << "\n";
  return os.str();
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return canonical_config_text(a) == canonical_config_text(b) && a.q == b.q &&
         a.medium.phi == b.medium.phi && a.medium.perm == b.medium.perm;
}

}  // namespace mdopt
