#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sklab/csv.hpp"
#include "sklab/errors.hpp"
#include "sklab/feynman_kac.hpp"
#include "sklab/lattice.hpp"
#include "sklab/monte_carlo.hpp"
#include "sklab/oracles.hpp"
#include "sklab/padic/checks.hpp"
#include "sklab/padic/feynman_kac.hpp"
#include "sklab/padic/vladimirov.hpp"
#include "sklab/paths.hpp"
#include "sklab/potential.hpp"
#include "sklab/qops.hpp"
#include "sklab/selfcheck.hpp"

#ifndef SKLAB_VERSION
#define SKLAB_VERSION "0.0.0"
#endif

namespace sklab::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kInvalidConfig = 2, kNumericalFailure = 3, kIoFailure = 4 };

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  std::uint64_t seed = 1;
  std::size_t substreams = 16;
  std::size_t threads = default_thread_count();
  std::string output;

  MonteCarloConfig mc() const { return {seed, substreams, threads}; }
};

/// What a command produced: the main table, extra files, and its status.
struct CommandResult {
  CsvTable table;
  std::vector<std::pair<std::string, CsvTable>> extra_files;
  int status = kOk;
};

// ---- argument parsing helpers

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

inline long long parse_int(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw invalid_argument(what + ": '" + s + "' is not an integer");
  }
  if (used != s.size()) throw invalid_argument(what + ": '" + s + "' is not an integer");
  return v;
}

inline double parse_real(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw invalid_argument(what + ": '" + s + "' is not a number");
  }
  if (used != s.size()) throw invalid_argument(what + ": '" + s + "' is not a number");
  return v;
}

inline std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
  std::vector<int> out;
  for (const auto& tok : split(s, ',')) out.push_back(static_cast<int>(parse_int(tok, what)));
  detail::require(!out.empty(), what + ": empty list");
  return out;
}

inline std::vector<double> parse_real_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& tok : split(s, ',')) out.push_back(parse_real(tok, what));
  detail::require(!out.empty(), what + ": empty list");
  return out;
}

/// "lo..hi" (inclusive).
inline std::pair<std::int64_t, std::int64_t> parse_range(const std::string& s, const std::string& what) {
  const auto dots = s.find("..");
  if (dots == std::string::npos) throw invalid_argument(what + ": expected lo..hi, got '" + s + "'");
  const auto lo = parse_int(s.substr(0, dots), what), hi = parse_int(s.substr(dots + 2), what);
  detail::require(lo <= hi, what + ": empty range " + s);
  detail::require(hi - lo <= 100000, what + ": range too long");
  return {lo, hi};
}

/// "n" or "n/d" with d a power of p.
inline padic::PadicNumber parse_padic(const std::string& s, std::uint32_t p, int precision, const std::string& what) {
  const auto slash = s.find('/');
  const auto num = parse_int(s.substr(0, slash), what);
  std::int64_t shift = 0;
  if (slash != std::string::npos) {
    auto den = parse_int(s.substr(slash + 1), what);
    detail::require(den >= 1, what + ": denominator must be positive");
    while (den % p == 0) {
      den /= p;
      ++shift;
    }
    detail::require(den == 1, what + ": denominator of '" + s + "' is not a power of p = " + std::to_string(p));
  }
  auto x = padic::PadicNumber::from_integer(p, num, precision);
  if (shift && !x.is_zero()) x = x * padic::PadicNumber::power_of_p(p, -shift, precision);
  return x;
}

inline std::string join_coords(const std::vector<std::int64_t>& c) {
  std::string s;
  for (std::size_t i = 0; i < c.size(); ++i) s += (i ? ";" : "") + std::to_string(c[i]);
  return s;
}

inline GridPoint parse_grid_point(const GridSpec& g, const std::string& s, const std::string& what) {
  const auto coords = parse_int_list(s, what);
  detail::require(coords.size() == static_cast<std::size_t>(g.d()), what + ": expected " + std::to_string(g.d()) + " coordinates");
  GridPoint p{coords};
  detail::require(g.contains(p), what + ": point outside the grid");
  return p;
}

inline void require_positive(double x, const std::string& what) {
  detail::require(x > 0.0 && std::isfinite(x), what + " must be positive");
}

inline void require_dense_size(const GridSpec& g) {
  detail::require(g.size() <= 4000, "grid has " + std::to_string(g.size()) + " points; dense operators are limited to 4000");
}

// ---- commands

struct SpectrumArgs {
  int N = 21;
  int d = 1;
  std::string V = "harmonic";
  int count = 5;
  std::string kind = "schwinger";
};

inline CommandResult run_spectrum(const SpectrumArgs& a) {
  const auto g = make_grid(a.N, a.d);
  require_dense_size(g);
  const auto V = PotentialSpec::parse(a.V);
  detail::require(a.count >= 1 && static_cast<std::size_t>(a.count) <= g.size(), "count must lie in [1, N^d]");
  detail::require(a.kind == "schwinger" || a.kind == "stochastic", "kind must be schwinger or stochastic");
  const auto h = a.kind == "schwinger" ? schwinger_hamiltonian(g, V) : stochastic_hamiltonian(g, V);
  const auto ev = eigenvalues(h);
  CommandResult r{CsvTable({"n", "eigenvalue"})};
  for (int i = 0; i < a.count; ++i) r.table.row() << i << ev(i);
  return r;
}

struct TraceTableArgs {
  std::string V = "harmonic";
  double t = 1.0;
  std::string N = "9,21,41";
  int d = 1;
  std::size_t samples = 2000;
};

inline CommandResult run_trace_table(const TraceTableArgs& a, const GlobalOptions& g) {
  const auto V = PotentialSpec::parse(a.V);
  require_positive(a.t, "t");
  detail::require(a.samples >= 2, "samples must be at least 2");
  const auto ns = parse_int_list(a.N, "N");
  for (int n : ns) require_dense_size(make_grid(n, a.d));
  const auto rows = convergence_experiment(V, a.t, ns, a.samples, g.mc(), a.d);
  CommandResult r{CsvTable({"N", "epsilon", "exact_trace", "mc_trace", "mc_stderr", "trace_norm_gap", "marginal_gap"})};
  for (const auto& row : rows)
    r.table.row() << row.N << row.epsilon << row.exact_trace << row.mc_trace.mean << row.mc_trace.std_error
                  << (row.trace_norm_gap ? format_real(*row.trace_norm_gap) : std::string()) << row.marginal_gap;
  return r;
}

struct FkKernelArgs {
  std::string mode = "grid";
  int N = 9;
  int d = 1;
  std::string V = "x^2";
  double t = 0.5;
  std::string a = "0";
  std::string b = "0";
  std::size_t samples = 10000;
  int level = 10;
};

inline CommandResult run_fk_kernel(const FkKernelArgs& a, const GlobalOptions& g) {
  const auto V = PotentialSpec::parse(a.V);
  require_positive(a.t, "t");
  detail::require(a.samples >= 2, "samples must be at least 2");
  CommandResult r{CsvTable({"mode", "estimate", "std_error", "n_samples", "free_kernel", "reference"})};
  if (a.mode == "grid") {
    const auto grid = make_grid(a.N, a.d);
    require_dense_size(grid);
    const auto pa = parse_grid_point(grid, a.a, "a"), pb = parse_grid_point(grid, a.b, "b");
    const GridWalkChain chain(grid);
    const auto ia = point_index(grid, pa), ib = point_index(grid, pb);
    const auto e = fk_kernel_grid(chain, V, a.t, ia, ib, a.samples, g.mc(), Rng(g.seed));
    const double exact = semigroup(stochastic_hamiltonian(grid, V), a.t)(ia, ib).real();
    r.table.row() << a.mode << e.mean << e.std_error << e.n_samples << chain.transition(ia, ib, a.t) << exact;
  } else if (a.mode == "lattice") {
    const auto grid = make_grid(a.N, a.d);
    const auto ca = parse_int_list(a.a, "a"), cb = parse_int_list(a.b, "b");
    detail::require(ca.size() == static_cast<std::size_t>(a.d) && cb.size() == ca.size(), "a, b need d coordinates");
    const LatticePoint pa{{ca.begin(), ca.end()}}, pb{{cb.begin(), cb.end()}};
    const auto w = walk_params(grid);
    const auto e = fk_kernel_lattice(w, V, a.t, pa, pb, a.samples, g.mc());
    r.table.row() << a.mode << e.mean << e.std_error << e.n_samples << walk_transition(w, pa, pb, a.t) << "";
  } else if (a.mode == "continuum") {
    const auto x = parse_real_list(a.a, "a"), y = parse_real_list(a.b, "b");
    detail::require(x.size() == static_cast<std::size_t>(a.d) && y.size() == x.size(), "a, b need d coordinates");
    detail::require(a.level >= 1 && a.level <= 20, "level must lie in [1, 20]");
    const auto e = fk_kernel_continuum(V, a.t, x, y, a.samples, a.level, g.mc());
    const std::string ref = (a.d == 1 && V.is_harmonic(1)) ? format_real(mehler_kernel(x[0], y[0], a.t)) : "";
    r.table.row() << a.mode << e.mean << e.std_error << e.n_samples << gaussian_kernel(x, y, a.t) << ref;
  } else {
    throw invalid_argument("mode must be grid, lattice or continuum");
  }
  return r;
}

struct FkTraceArgs {
  int N = 9;
  int d = 1;
  std::string V = "0.5*x^2";
  double t = 1.0;
  std::size_t samples = 2000;
};

inline CommandResult run_fk_trace(const FkTraceArgs& a, const GlobalOptions& g) {
  const auto V = PotentialSpec::parse(a.V);
  require_positive(a.t, "t");
  detail::require(a.samples >= 2, "samples must be at least 2");
  const auto grid = make_grid(a.N, a.d);
  require_dense_size(grid);
  const auto est = fk_trace_by_point(grid, V, a.t, a.samples, g.mc());
  const auto exact = semigroup(stochastic_hamiltonian(grid, V), a.t);
  CommandResult r{CsvTable({"point", "coords", "estimate", "std_error", "exact"})};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto p = index_point(grid, i);
    r.table.row() << i << join_coords({p.coords.begin(), p.coords.end()}) << est.diagonal[i].mean
                  << est.diagonal[i].std_error << exact(i, i).real();
  }
  r.table.row() << "total" << "" << est.total.mean << est.total.std_error << exact.trace();
  return r;
}

struct WeakConvergenceArgs {
  std::string N = "9,21,41,81";
  double t = 1.0;
  std::size_t samples = 100000;
  std::string paths;
  int path_count = 5;
};

inline CommandResult run_weak_convergence(const WeakConvergenceArgs& a, const GlobalOptions& g) {
  require_positive(a.t, "t");
  detail::require(a.samples >= 2, "samples must be at least 2");
  detail::require(a.path_count >= 1 && a.path_count <= 10000, "path-count must lie in [1, 10000]");
  const auto ns = parse_int_list(a.N, "N");
  CommandResult r{CsvTable({"N", "epsilon", "kolmogorov_distance"})};
  const Rng root(g.seed);
  for (int n : ns) {
    const auto grid = make_grid(n, 1);
    const double gap = bridge_midpoint_gap(walk_params(grid), a.t, a.samples, g.mc(),
                                           root.substream(static_cast<std::uint64_t>(n)));
    r.table.row() << n << grid.epsilon() << gap;
  }
  if (!a.paths.empty()) {
    CsvTable paths({"path", "N", "time", "state"});
    const auto grid = make_grid(ns.back(), 1);
    const auto w = walk_params(grid);
    Rng rng = root.substream(std::uint64_t{1} << 40);
    const LatticePoint origin{{0}};
    for (int i = 0; i < a.path_count; ++i) {
      const auto path = sample_walk_bridge(w, origin, origin, a.t, rng);
      paths.row() << i << ns.back() << 0.0 << path.states()[0].coords[0];
      for (std::size_t j = 0; j < path.jump_count(); ++j)
        paths.row() << i << ns.back() << path.jump_times()[j] << path.states()[j + 1].coords[0];
    }
    r.extra_files.emplace_back(a.paths, std::move(paths));
  }
  return r;
}

struct PadicDensityArgs {
  std::uint32_t p = 2;
  double b = 2.0;
  double t = 1.0;
  std::string m = "-10..10";
};

inline CommandResult run_padic_density(const PadicDensityArgs& a) {
  const padic::RadialDensitySpec s{a.p, a.b, a.t};
  s.validate();
  const auto [lo, hi] = parse_range(a.m, "m");
  CommandResult r{CsvTable({"m", "f", "sphere_volume", "probability"})};
  for (auto m = lo; m <= hi; ++m) {
    const double f = padic::radial_density(s, m), vol = padic::sphere_volume(a.p, m);
    r.table.row() << m << f << vol << vol * f;
  }
  return r;
}

struct PadicFkArgs {
  std::uint32_t p = 2;
  double b = 2.0;
  double t = 1.0;
  std::string V = "|x|";
  std::string x = "0";
  std::string y = "0";
  std::size_t samples = 10000;
  int level = 8;
  int precision = padic::kDefaultPrecision;
  double stability = 1e-3;
};

inline CommandResult run_padic_fk(const PadicFkArgs& a, const GlobalOptions& g) {
  const padic::RadialDensitySpec s{a.p, a.b, a.t};
  s.validate();
  detail::require(a.level >= 1 && a.level <= 16, "level must lie in [1, 16]");
  detail::require(a.precision >= 1 && a.precision <= 256, "precision must lie in [1, 256]");
  detail::require(a.samples >= 2, "samples must be at least 2");
  const auto V = PotentialSpec::parse(a.V);
  padic::require_padic_potential(V);
  const auto x = parse_padic(a.x, a.p, a.precision, "x"), y = parse_padic(a.y, a.p, a.precision, "y");
  const auto e = padic::padic_fk_kernel(s, V, a.t, x, y, a.samples, a.level, g.mc(), a.precision);
  const double free = padic::RadialDensity(s).at(x - y);
  CommandResult r{CsvTable({"estimate", "std_error", "n_samples", "level", "free_kernel", "matrix_reference",
                            "matrix_M", "matrix_M_prime"})};
  if (x.is_zero() && y.is_zero()) {
    padic::VladimirovSpec vs;
    vs.p = a.p;
    vs.b = a.b;
    vs.M = 1;
    vs.M_prime = 1;
    vs.V = V;
    const auto st = padic::stable_vladimirov_kernel(vs, a.t, a.stability);
    r.table.row() << e.mean << e.std_error << e.n_samples << a.level << free << st.fine_value << st.coarse.M + 1
                  << st.coarse.M_prime + 1;
  } else {
    r.table.row() << e.mean << e.std_error << e.n_samples << a.level << free << "" << "" << "";
  }
  return r;
}

struct PadicChecksArgs {
  std::uint32_t p = 2;
  double b = 1.0;
  double t = 1.0;
  std::string k;  // default: 0 and b/2
  double s = 0.0;  // default: t/2
  int points = 16;
};

inline CommandResult run_padic_checks(const PadicChecksArgs& a, const GlobalOptions& g) {
  const padic::RadialDensitySpec spec{a.p, a.b, a.t};
  spec.validate();
  detail::require(a.points >= 1 && a.points <= 500, "points must lie in [1, 500]");
  const std::vector<double> ks = a.k.empty() ? std::vector<double>{0.0, a.b / 2} : parse_real_list(a.k, "k");
  const double s = a.s > 0.0 ? a.s : a.t / 2;
  detail::require(s < a.t, "s must lie in (0, t)");
  CommandResult r{CsvTable({"check", "parameter", "value", "bound", "pass"})};
  bool all = true;
  auto add = [&](const std::string& check, const std::string& param, double value, double bound, bool pass) {
    r.table.row() << check << param << value << bound << pass;
    all = all && pass;
  };

  const padic::RadiusDistribution radii(spec);
  add("normalization", "", std::abs(radii.total() - 1.0), 1e-10, std::abs(radii.total() - 1.0) <= 1e-10);
  double fmin = std::numeric_limits<double>::infinity(), fmax = 0.0;
  for (std::int64_t m = -20; m <= 20; ++m) {
    const double f = padic::radial_density(spec, m);
    fmin = std::min(fmin, f);
    fmax = std::max(fmax, f);
  }
  add("positivity", "m=-20..20", fmin, 0.0, fmin > 0.0);
  const double f0 = padic::radial_density_at_zero(spec);
  add("maximum_at_zero", "m=-20..20", fmax, f0, fmax <= f0);
  for (double k : ks) {
    const auto coarse = padic::moment_and_bound_checks(spec, k, padic::log_grid(1e-3, 1e3, 24));
    const auto fine = padic::moment_and_bound_checks(spec, k, padic::log_grid(1e-3, 1e3, 48));
    const std::string param = "k=" + format_real(k);
    add("moment_ratio_sup", param, coarse.sup_moment_ratio, fine.sup_moment_ratio,
        std::isfinite(coarse.sup_moment_ratio) &&
            std::abs(coarse.sup_moment_ratio - fine.sup_moment_ratio) <= 0.01 * fine.sup_moment_ratio);
    if (k == ks.front())
      add("density_ratio_sup", "", coarse.sup_density_ratio, fine.sup_density_ratio,
          std::isfinite(coarse.sup_density_ratio) &&
              std::abs(coarse.sup_density_ratio - fine.sup_density_ratio) <= 0.01 * fine.sup_density_ratio);
  }
  const double dev = padic::semigroup_convolution_check(spec, s, a.t - s);
  add("convolution_semigroup", "s=" + format_real(s) + ";t=" + format_real(a.t - s), dev, 1e-8, dev < 1e-8);
  Rng rng = Rng(g.seed).substream(1);
  std::vector<padic::PadicNumber> pts;
  while (pts.size() < static_cast<std::size_t>(a.points)) {
    const auto x = padic::PadicNumber::random_on_sphere(a.p, static_cast<std::int64_t>(rng.below(9)) - 4, 12, rng);
    if (std::none_of(pts.begin(), pts.end(), [&](const auto& y) { return padic::agree(x, y); })) pts.push_back(x);
  }
  const double mineig = padic::positive_definiteness_check(spec, pts);
  add("positive_definite", "points=" + std::to_string(a.points), mineig, -1e-10, mineig >= -1e-10);
  r.status = all ? kOk : kCheckFailed;
  return r;
}

/// Library oracle checks plus two end-to-end command checks.
inline std::vector<SelfCheck> all_checks() {
  auto checks = library_checks();
  checks.push_back({"cli.spectrum", [](const MonteCarloConfig&) {
                      SpectrumArgs a;
                      a.V = "0.5*x^2";
                      const auto r = run_spectrum(a);
                      return detail::within("cli.spectrum", std::stod(r.table.rows()[0][1]), 0.5, 1e-3);
                    }});
  checks.push_back({"cli.trace_table", [](const MonteCarloConfig& cfg) {
                      TraceTableArgs a;
                      GlobalOptions g;
                      g.seed = Rng(cfg.seed).substream(401).key();
                      g.threads = cfg.threads;
                      const auto r = run_trace_table(a, g);
                      const double target = oracles::harmonic_trace(1.0);
                      double prev = std::numeric_limits<double>::infinity();
                      bool ok = r.table.size() == 3;
                      double last = 0.0;
                      for (const auto& row : r.table.rows()) {
                        last = std::abs(std::stod(row[2]) - target);
                        ok = ok && last <= prev;
                        prev = last;
                      }
                      return CheckResult{"cli.trace_table", last, target, 0.0, ok};
                    }});
  return checks;
}

inline CommandResult run_selfcheck(const GlobalOptions& g, const std::string& filter, std::ostream* progress) {
  CommandResult r{CsvTable({"check", "value", "reference", "tolerance", "pass"})};
  bool all = true;
  for (const auto& c : all_checks()) {
    if (!filter.empty() && c.name.find(filter) == std::string::npos) continue;
    CheckResult res;
    try {
      res = c.run(g.mc());
    } catch (const std::exception& ex) {
      res = {c.name, std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0, false};
      if (progress) *progress << c.name << ": " << ex.what() << '\n';
    }
    if (progress) *progress << (res.passed ? "ok   " : "FAIL ") << res.name << '\n';
    r.table.row() << res.name << res.value << res.reference << res.tolerance << res.passed;
    all = all && res.passed;
  }
  detail::require(r.table.size() > 0, "selfcheck: no check matches '" + filter + "'");
  r.status = all ? kOk : kCheckFailed;
  return r;
}

// ---- config file and manifest

/// Turns a flat JSON object into command-line tokens. Keys are option names
/// without dashes; "command" names the subcommand. Global keys come first so
/// that explicit flags, parsed later, take precedence.
struct ConfigTokens {
  std::vector<std::string> global;
  std::vector<std::string> command_args;
  std::string command;
};

inline ConfigTokens load_config(const std::string& path, const std::vector<std::string>& global_keys) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot read config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw invalid_argument("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw invalid_argument("config file must hold a JSON object");
  ConfigTokens out;
  for (const auto& [key, value] : j.items()) {
    std::string text;
    if (value.is_string()) text = value.get<std::string>();
    else if (value.is_boolean()) text = value.get<bool>() ? "true" : "false";
    else if (value.is_number_integer()) text = std::to_string(value.get<long long>());
    else if (value.is_number()) text = format_real(value.get<double>());
    else if (value.is_array()) {
      for (const auto& v : value) {
        if (!text.empty()) text += ',';
        text += v.is_string() ? v.get<std::string>() : v.dump();
      }
    } else {
      throw invalid_argument("config key '" + key + "' has an unsupported value");
    }
    if (key == "command") {
      out.command = text;
      continue;
    }
    const bool global = std::find(global_keys.begin(), global_keys.end(), key) != global_keys.end();
    auto& dst = global ? out.global : out.command_args;
    dst.push_back("--" + key);
    dst.push_back(text);
  }
  return out;
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

inline nlohmann::json option_values(const CLI::App& app) {
  nlohmann::json j = nlohmann::json::object();
  for (const CLI::Option* opt : app.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config" || name.empty()) continue;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      j[name] = res.size() == 1 ? nlohmann::json(res.front()) : nlohmann::json(res);
    } else {
      j[name] = opt->get_default_str();
    }
  }
  return j;
}

inline void write_file(const std::string& path, const std::string& body) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw io_error("cannot open '" + path + "' for writing");
  os << body;
  os.flush();
  if (!os) throw io_error("failed writing '" + path + "'");
}

// ---- entry point

/// Runs one command. CSV goes to --output (plus a manifest next to it) or to
/// `out`; diagnostics go to `err`.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"sklab: finite and p-adic Feynman-Kac laboratory", "sklab"};
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", SKLAB_VERSION);

  GlobalOptions g;
  std::string config_path;
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--substreams", g.substreams, "Number of random substreams (fixes the result)")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1} << 20));
  app.add_option("--threads", g.threads, "Worker threads (default: SKLAB_THREADS or 1)")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1024}));
  app.add_option("-o,--output", g.output, "CSV output file (default: stdout)");
  app.add_option("--config", config_path, "JSON config file; explicit flags override it");
  const std::vector<std::string> global_keys{"seed", "substreams", "threads", "output"};

  std::function<CommandResult()> command;
  auto bind = [&](CLI::App* sub, auto fn) { sub->callback([&command, fn] { command = fn; }); };

  SpectrumArgs sp;
  auto* c_spec = app.add_subcommand("spectrum", "Lowest eigenvalues of a finite Hamiltonian");
  c_spec->add_option("--N", sp.N, "Points per axis (odd)");
  c_spec->add_option("--d", sp.d, "Dimension");
  c_spec->add_option("--V", sp.V, "Potential");
  c_spec->add_option("--count", sp.count, "Number of eigenvalues");
  c_spec->add_option("--kind", sp.kind, "schwinger or stochastic");
  bind(c_spec, [&] { return run_spectrum(sp); });

  TraceTableArgs tt;
  auto* c_tt = app.add_subcommand("trace-table", "Exact and Monte Carlo traces of e^{-tH*} along N");
  c_tt->add_option("--V", tt.V, "Potential");
  c_tt->add_option("--t", tt.t, "Time");
  c_tt->add_option("--N", tt.N, "Comma-separated odd grid sizes");
  c_tt->add_option("--d", tt.d, "Dimension");
  c_tt->add_option("--samples", tt.samples, "Bridges per grid point and per marginal");
  bind(c_tt, [&] { return run_trace_table(tt, g); });

  FkKernelArgs fk;
  auto* c_fk = app.add_subcommand("fk-kernel", "Feynman-Kac kernel estimate");
  c_fk->add_option("--mode", fk.mode, "grid, lattice or continuum");
  c_fk->add_option("--N", fk.N, "Points per axis (odd)");
  c_fk->add_option("--d", fk.d, "Dimension");
  c_fk->add_option("--V", fk.V, "Potential");
  c_fk->add_option("--t", fk.t, "Time");
  c_fk->add_option("--a", fk.a, "Start point (comma-separated coordinates)");
  c_fk->add_option("--b", fk.b, "End point (comma-separated coordinates)");
  c_fk->add_option("--samples", fk.samples, "Number of bridges");
  c_fk->add_option("--level", fk.level, "Brownian bridge mesh level (continuum)");
  bind(c_fk, [&] { return run_fk_kernel(fk, g); });

  FkTraceArgs ft;
  auto* c_ft = app.add_subcommand("fk-trace", "Feynman-Kac trace estimate on the finite grid");
  c_ft->add_option("--N", ft.N, "Points per axis (odd)");
  c_ft->add_option("--d", ft.d, "Dimension");
  c_ft->add_option("--V", ft.V, "Potential");
  c_ft->add_option("--t", ft.t, "Time");
  c_ft->add_option("--samples", ft.samples, "Bridges per grid point");
  bind(c_ft, [&] { return run_fk_trace(ft, g); });

  WeakConvergenceArgs wc;
  auto* c_wc = app.add_subcommand("weak-convergence", "Kolmogorov gap of lattice-bridge midpoints to N(0, t/4)");
  c_wc->add_option("--N", wc.N, "Comma-separated odd grid sizes");
  c_wc->add_option("--t", wc.t, "Time");
  c_wc->add_option("--samples", wc.samples, "Bridges per N");
  c_wc->add_option("--paths", wc.paths, "Also write sample bridges (largest N) to this CSV");
  c_wc->add_option("--path-count", wc.path_count, "Number of bridges written with --paths");
  bind(c_wc, [&] { return run_weak_convergence(wc, g); });

  PadicDensityArgs pd;
  auto* c_pd = app.add_subcommand("padic-density", "Radial density f_{t,b} on Q_p by sphere");
  c_pd->add_option("--p", pd.p, "Prime");
  c_pd->add_option("--b", pd.b, "Exponent b > 0");
  c_pd->add_option("--t", pd.t, "Time");
  c_pd->add_option("--m", pd.m, "Sphere exponents lo..hi");
  bind(c_pd, [&] { return run_padic_density(pd); });

  PadicFkArgs pf;
  auto* c_pf = app.add_subcommand("padic-fk", "p-adic Feynman-Kac kernel estimate");
  c_pf->add_option("--p", pf.p, "Prime");
  c_pf->add_option("--b", pf.b, "Exponent b > 0");
  c_pf->add_option("--t", pf.t, "Time T");
  c_pf->add_option("--V", pf.V, "Radial potential in |x|");
  c_pf->add_option("--x", pf.x, "Start point n or n/p^k");
  c_pf->add_option("--y", pf.y, "End point n or n/p^k");
  c_pf->add_option("--samples", pf.samples, "Number of bridges");
  c_pf->add_option("--level", pf.level, "Dyadic mesh level J");
  c_pf->add_option("--precision", pf.precision, "p-adic digits tracked");
  c_pf->add_option("--stability", pf.stability, "Resolution stability required of the matrix reference");
  bind(c_pf, [&] { return run_padic_fk(pf, g); });

  PadicChecksArgs pc;
  auto* c_pc = app.add_subcommand("padic-checks", "Positivity, moments, semigroup and positive definiteness of f_{t,b}");
  c_pc->add_option("--p", pc.p, "Prime");
  c_pc->add_option("--b", pc.b, "Exponent b > 0");
  c_pc->add_option("--t", pc.t, "Time");
  c_pc->add_option("--k", pc.k, "Comma-separated moment orders (default 0,b/2)");
  c_pc->add_option("--s", pc.s, "Split time for the semigroup check (default t/2)");
  c_pc->add_option("--points", pc.points, "Random points in the Gram matrix");
  bind(c_pc, [&] { return run_padic_checks(pc, g); });

  std::string filter;
  bool quiet = false;
  auto* c_sc = app.add_subcommand("selfcheck", "Run every oracle comparison");
  c_sc->add_option("--filter", filter, "Only checks whose name contains this text");
  c_sc->add_flag("--quiet", quiet, "No progress lines");
  bind(c_sc, [&] { return run_selfcheck(g, filter, quiet ? nullptr : &err); });

  try {
    // config file tokens go before explicit ones of the same scope
    std::vector<std::string> tokens = args;
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
      if (args[i] == "--config") config_path = args[i + 1];
    if (!config_path.empty()) {
      const auto cfg = load_config(config_path, global_keys);
      const std::vector<std::string> valued{"--seed", "--substreams", "--threads", "-o", "--output", "--config"};
      std::size_t sub_at = tokens.size();
      for (std::size_t i = 0; i < tokens.size() && sub_at == tokens.size(); ++i) {
        const bool is_value = i > 0 && std::find(valued.begin(), valued.end(), tokens[i - 1]) != valued.end();
        if (!is_value && app.get_subcommand_no_throw(tokens[i]) != nullptr) sub_at = i;
      }
      std::vector<std::string> merged = cfg.global;
      merged.insert(merged.end(), tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(sub_at));
      if (sub_at < tokens.size()) {
        merged.push_back(tokens[sub_at]);
      } else {
        if (cfg.command.empty()) throw invalid_argument("no command given on the command line or in the config");
        merged.push_back(cfg.command);
      }
      merged.insert(merged.end(), cfg.command_args.begin(), cfg.command_args.end());
      if (sub_at < tokens.size())
        merged.insert(merged.end(), tokens.begin() + static_cast<std::ptrdiff_t>(sub_at) + 1, tokens.end());
      tokens = std::move(merged);
    }
    std::vector<std::string> reversed(tokens.rbegin(), tokens.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << SKLAB_VERSION << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const io_error& e) {
    err << "error: " << e.what() << '\n';
    return kIoFailure;
  }

  try {
    CommandResult result = command();
    const std::string body = result.table.str();
    if (g.output.empty()) {
      out << body;
    } else {
      write_file(g.output, body);
    }
    for (const auto& [path, table] : result.extra_files) write_file(path, table.str());
    if (!g.output.empty()) {
      const CLI::App* sub = app.get_subcommands().front();
      nlohmann::json m;
      m["command"] = sub->get_name();
      m["version"] = SKLAB_VERSION;
      m["seed"] = g.seed;
      m["substreams"] = g.substreams;
      m["threads"] = g.threads;
      m["config"] = option_values(*sub);
      m["config"]["seed"] = g.seed;
      m["config"]["substreams"] = g.substreams;
      m["config"]["output"] = g.output;
      nlohmann::json outputs = nlohmann::json::array({g.output});
      for (const auto& f : result.extra_files) outputs.push_back(f.first);
      m["outputs"] = outputs;
      m["exit_status"] = result.status;
      m["created"] = utc_timestamp();
      write_file(g.output + ".manifest.json", m.dump(2) + "\n");
    }
    return result.status;
  } catch (const invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const io_error& e) {
    err << "error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const numerical_error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace sklab::cli
