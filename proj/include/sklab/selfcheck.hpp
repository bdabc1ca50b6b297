#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "sklab/feynman_kac.hpp"
#include "sklab/lattice.hpp"
#include "sklab/monte_carlo.hpp"
#include "sklab/oracles.hpp"
#include "sklab/padic/checks.hpp"
#include "sklab/padic/feynman_kac.hpp"
#include "sklab/padic/process.hpp"
#include "sklab/padic/vladimirov.hpp"
#include "sklab/paths.hpp"
#include "sklab/potential.hpp"
#include "sklab/qops.hpp"
#include "sklab/stats.hpp"

namespace sklab {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct SelfCheck {
  std::string name;
  std::function<CheckResult(const MonteCarloConfig&)> run;
};

namespace detail {

inline CheckResult within(std::string name, double value, double reference, double tolerance) {
  return {std::move(name), value, reference, tolerance, std::abs(value - reference) <= tolerance};
}

inline CheckResult at_least(std::string name, double value, double bound) {
  return {std::move(name), value, bound, 0.0, value >= bound};
}

inline CheckResult at_most(std::string name, double value, double bound) {
  return {std::move(name), value, bound, 0.0, value <= bound};
}

inline CheckResult mc_within(std::string name, const MCEstimate& e, double reference) {
  return within(std::move(name), e.mean, reference, 3.0 * e.std_error);
}

/// Chi-square of integer draws against pmf(k) on [lo, hi]; draws outside
/// the range land in the end cells.
inline ChiSquareResult integer_chi_square(const std::vector<std::int64_t>& draws, std::int64_t lo, std::int64_t hi,
                                          const std::function<double(std::int64_t)>& pmf) {
  std::vector<double> observed(static_cast<std::size_t>(hi - lo + 1), 0.0), probs(observed.size());
  for (auto k : draws) observed[static_cast<std::size_t>(std::clamp(k, lo, hi) - lo)] += 1.0;
  for (std::int64_t k = lo; k <= hi; ++k) probs[static_cast<std::size_t>(k - lo)] = pmf(k);
  return chi_square_test(observed, probs);
}

inline CheckResult chi_square_check(std::string name, const ChiSquareResult& r) {
  return at_least(std::move(name), r.p_value, 0.01);
}

/// Radius exponents of n draws produced by `draw`.
template <class Fn>
std::vector<std::int64_t> radius_draws(std::size_t n, Rng rng, Fn&& draw) {
  std::vector<std::int64_t> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const padic::PadicNumber x = draw(rng);
    out.push_back(x.is_zero() ? std::numeric_limits<std::int64_t>::min() / 2 : x.norm_exponent());
  }
  return out;
}

}  // namespace detail

/// Every oracle comparison of the library, each on its own substream of the
/// configured seed.
inline std::vector<SelfCheck> library_checks() {
  using detail::at_least;
  using detail::at_most;
  using detail::mc_within;
  using detail::within;
  std::vector<SelfCheck> c;

  // qops
  c.push_back({"qops.momentum_trace_n3", [](const MonteCarloConfig&) {
                 return within("qops.momentum_trace_n3", momentum_operators(make_grid(3, 1))[0].trace(), 0.0, 1e-12);
               }});
  c.push_back({"qops.free_schwinger_trace_n3", [](const MonteCarloConfig&) {
                 const auto g = make_grid(3, 1);
                 return within("qops.free_schwinger_trace_n3", schwinger_hamiltonian(g, PotentialSpec::zero()).trace(),
                               g.epsilon() * g.epsilon(), 1e-12);
               }});
  c.push_back({"qops.harmonic_ground_n21", [](const MonteCarloConfig&) {
                 const auto ev = eigenvalues(schwinger_hamiltonian(make_grid(21, 1), PotentialSpec::parse("0.5*x^2")));
                 return within("qops.harmonic_ground_n21", ev(0), oracles::harmonic_eigenvalue(0), 1e-3);
               }});
  c.push_back({"qops.free_stochastic_spectrum_n3", [](const MonteCarloConfig&) {
                 const auto g = make_grid(3, 1);
                 const auto ev = eigenvalues(stochastic_hamiltonian(g, PotentialSpec::zero()));
                 const auto ref = oracles::free_stochastic_spectrum_n3(g.epsilon());
                 double worst = 0.0;
                 for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(ev(i) - ref[static_cast<std::size_t>(i)]));
                 return at_most("qops.free_stochastic_spectrum_n3", worst, 1e-12);
               }});
  c.push_back({"qops.mehler_trace_n101", [](const MonteCarloConfig&) {
                 return within("qops.mehler_trace_n101", mehler_reference(make_grid(101, 1), 1.0).trace(),
                               oracles::harmonic_trace(1.0), 1e-4);
               }});

  // paths
  c.push_back({"paths.free_walk_skellam", [](const MonteCarloConfig& cfg) {
                 const WalkParams w{1.0, 1};
                 Rng rng = Rng(cfg.seed).substream(101);
                 std::vector<std::int64_t> ends;
                 for (int i = 0; i < 100000; ++i)
                   ends.push_back(sample_free_walk(w, LatticePoint{{0}}, 1.0, rng).terminal().coords[0]);
                 const auto r = detail::integer_chi_square(ends, -12, 12, [](std::int64_t j) {
                   return oracles::walk_transition_1d(j, 1.0, 1.0);
                 });
                 return detail::chi_square_check("paths.free_walk_skellam", r);
               }});
  c.push_back({"paths.transition_mass", [](const MonteCarloConfig&) {
                 const WalkParams w{1.0, 1};
                 long double s = 0.0L;
                 for (std::int64_t j = -60; j <= 60; ++j) s += walk_transition(w, LatticePoint{{j}}, LatticePoint{{0}}, 1.0);
                 return within("paths.transition_mass", static_cast<double>(s), 1.0, 1e-10);
               }});
  c.push_back({"paths.bridge_zero_jumps", [](const MonteCarloConfig& cfg) {
                 const WalkParams w{1.0, 1};
                 Rng rng = Rng(cfg.seed).substream(102);
                 std::vector<double> none;
                 for (int i = 0; i < 100000; ++i)
                   none.push_back(sample_walk_bridge(w, LatticePoint{{0}}, LatticePoint{{0}}, 1.0, rng).jump_count() == 0);
                 const auto m = sample_moments(none);
                 const double ref = std::exp(-1.0) / oracles::walk_transition_1d(0, 1.0, 1.0);
                 return within("paths.bridge_zero_jumps", m.mean, ref, 3.0 * m.std_error);
               }});
  c.push_back({"paths.bridge_midpoint_law", [](const MonteCarloConfig& cfg) {
                 const WalkParams w{1.0, 1};
                 Rng rng = Rng(cfg.seed).substream(103);
                 std::vector<std::int64_t> mid;
                 for (int i = 0; i < 100000; ++i)
                   mid.push_back(sample_walk_bridge(w, LatticePoint{{0}}, LatticePoint{{0}}, 1.0, rng).at(0.5).coords[0]);
                 const auto r = detail::integer_chi_square(mid, -10, 10, [](std::int64_t z) {
                   return oracles::walk_bridge_midpoint(z, 1.0, 1.0);
                 });
                 return detail::chi_square_check("paths.bridge_midpoint_law", r);
               }});
  c.push_back({"paths.bridge_origin_indicator", [](const MonteCarloConfig& cfg) {
                 const WalkParams w{1.0, 1};
                 Rng rng = Rng(cfg.seed).substream(104);
                 std::vector<LatticePath> paths;
                 for (int i = 0; i < 20000; ++i) paths.push_back(sample_walk_bridge(w, LatticePoint{{0}}, LatticePoint{{0}}, 1.0, rng));
                 const auto m = marginal_statistics(paths, 0.5, [](const LatticePoint& x) { return x.coords[0] == 0 ? 1.0 : 0.0; });
                 return within("paths.bridge_origin_indicator", m.mean, oracles::walk_bridge_midpoint(0, 1.0, 1.0),
                               3.0 * m.std_error);
               }});
  c.push_back({"paths.trapezoid_refinement", [](const MonteCarloConfig& cfg) {
                 // mean over a fixed set of level-12 bridges of |I_J - I_{J+1}|, J = 2..10
                 Rng rng = Rng(cfg.seed).substream(105);
                 const auto V = PotentialSpec::parse("x^2");
                 const double zero = 0.0;
                 std::vector<double> mean_gap(9, 0.0);
                 const int paths = 200;
                 for (int i = 0; i < paths; ++i) {
                   const auto fine = sample_brownian_bridge({&zero, 1}, {&zero, 1}, 1.0, 12, rng);
                   for (int J = 2; J <= 10; ++J)
                     mean_gap[static_cast<std::size_t>(J - 2)] +=
                         std::abs(integrate_potential(fine.coarsened(J), V) - integrate_potential(fine.coarsened(J + 1), V)) / paths;
                 }
                 double worst = -1.0;
                 for (std::size_t j = 1; j < mean_gap.size(); ++j) worst = std::max(worst, mean_gap[j] / mean_gap[j - 1]);
                 return at_most("paths.trapezoid_refinement", worst, 1.0);
               }});

  // feynman_kac
  c.push_back({"fk.kernel_grid_n9", [](const MonteCarloConfig& cfg) {
                 const auto g = make_grid(9, 1);
                 const auto V = PotentialSpec::parse("x^2");
                 const auto exact = semigroup(stochastic_hamiltonian(g, V), 0.5);
                 MonteCarloConfig sub = cfg;
                 sub.seed = Rng(cfg.seed).substream(201).key();
                 const auto e = fk_kernel_grid(g, V, 0.5, GridPoint{{0}}, GridPoint{{0}}, 100000, sub);
                 return mc_within("fk.kernel_grid_n9", e, exact(4, 4).real());
               }});
  c.push_back({"fk.trace_n9", [](const MonteCarloConfig& cfg) {
                 const auto g = make_grid(9, 1);
                 const auto V = PotentialSpec::parse("0.5*x^2");
                 MonteCarloConfig sub = cfg;
                 sub.seed = Rng(cfg.seed).substream(202).key();
                 const auto e = fk_trace(g, V, 1.0, 10000, sub);
                 return mc_within("fk.trace_n9", e, semigroup(stochastic_hamiltonian(g, V), 1.0).trace());
               }});
  c.push_back({"fk.continuum_mehler", [](const MonteCarloConfig& cfg) {
                 const double zero = 0.0;
                 MonteCarloConfig sub = cfg;
                 sub.seed = Rng(cfg.seed).substream(203).key();
                 const auto e = fk_kernel_continuum(PotentialSpec::parse("0.5*x^2"), 1.0, {&zero, 1}, {&zero, 1}, 100000, 12, sub);
                 return mc_within("fk.continuum_mehler", e, mehler_kernel(0.0, 0.0, 1.0));
               }});
  c.push_back({"fk.convergence_rows", [](const MonteCarloConfig& cfg) {
                 MonteCarloConfig sub = cfg;
                 sub.seed = Rng(cfg.seed).substream(204).key();
                 const int ns[] = {9, 21, 41};
                 const auto rows = convergence_experiment(PotentialSpec::harmonic(), 1.0, ns, 4000, sub);
                 const double target = oracles::harmonic_trace(1.0);
                 bool ok = true;
                 double worst = 0.0;
                 for (std::size_t i = 0; i < rows.size(); ++i) {
                   const double z = std::abs(rows[i].mc_trace.mean - rows[i].exact_trace) / rows[i].mc_trace.std_error;
                   worst = std::max(worst, z);
                   ok = ok && z <= 3.0;
                   if (i > 0) {
                     ok = ok && std::abs(rows[i].exact_trace - target) <= std::abs(rows[i - 1].exact_trace - target);
                     ok = ok && rows[i].marginal_gap <= rows[i - 1].marginal_gap;
                   }
                 }
                 return CheckResult{"fk.convergence_rows", worst, 3.0, 0.0, ok};
               }});

  // padic
  c.push_back({"padic.sphere_character", [](const MonteCarloConfig&) {
                 double worst = 0.0;
                 for (std::uint32_t p : {2u, 3u})
                   for (int m : {1, 2})
                     worst = std::max(worst, std::abs(padic::sphere_character_integral(p, m, 0) -
                                                      oracles::brute_sphere_character_integral(p, m, 0)));
                 return at_most("padic.sphere_character", worst, 1e-12);
               }});
  c.push_back({"padic.density_at_zero", [](const MonteCarloConfig&) {
                 return within("padic.density_at_zero", padic::radial_density_at_zero({2, 2.0, 1.0}),
                               oracles::padic_density_at_zero(2, 2.0, 1.0), 1e-12);
               }});
  c.push_back({"padic.dirac_limit", [](const MonteCarloConfig&) {
                 const padic::RadialDensitySpec s{2, 1.0, 1e-4};
                 const padic::RadiusDistribution r(s);
                 double mass = 0.0, ref = 0.0;
                 for (std::int64_t m = r.m_min(); m <= 0; ++m) {
                   mass += r.probability(m);
                   ref += padic::sphere_volume(2, m) * oracles::padic_density(2, 1.0, 1e-4, m);
                 }
                 const bool ok = mass >= 0.99 && ref >= 0.99 && std::abs(mass - ref) < 1e-10;
                 return CheckResult{"padic.dirac_limit", mass, ref, 1e-10, ok};
               }});
  c.push_back({"padic.increment_radius_law", [](const MonteCarloConfig& cfg) {
                 const padic::RadialDensitySpec s{2, 1.0, 1.0};
                 const padic::IncrementSampler inc(s);
                 const auto draws = detail::radius_draws(100000, Rng(cfg.seed).substream(301), [&](Rng& r) { return inc(r); });
                 const auto r = detail::integer_chi_square(draws, -30, 40, [](std::int64_t m) {
                   return padic::sphere_volume(2, m) * oracles::padic_density(2, 1.0, 1.0, m);
                 });
                 return detail::chi_square_check("padic.increment_radius_law", r);
               }});
  c.push_back({"padic.increment_semigroup", [](const MonteCarloConfig& cfg) {
                 const padic::RadialDensitySpec s{2, 1.0, 1.0};
                 const padic::IncrementSampler a(s.at_time(0.4)), b(s.at_time(0.6));
                 const auto draws = detail::radius_draws(100000, Rng(cfg.seed).substream(302), [&](Rng& r) { return a(r) + b(r); });
                 const auto r = detail::integer_chi_square(draws, -30, 40, [](std::int64_t m) {
                   return padic::sphere_volume(2, m) * oracles::padic_density(2, 1.0, 1.0, m);
                 });
                 return detail::chi_square_check("padic.increment_semigroup", r);
               }});
  c.push_back({"padic.path_terminal_law", [](const MonteCarloConfig& cfg) {
                 const padic::RadialDensitySpec s{2, 1.0, 1.0};
                 const auto zero = padic::PadicNumber::zero(2);
                 const auto draws = detail::radius_draws(20000, Rng(cfg.seed).substream(303), [&](Rng& r) {
                   return padic::sample_padic_path(s, zero, 1.0, 3, r).terminal();
                 });
                 const auto r = detail::integer_chi_square(draws, -30, 40, [](std::int64_t m) {
                   return padic::sphere_volume(2, m) * oracles::padic_density(2, 1.0, 1.0, m);
                 });
                 return detail::chi_square_check("padic.path_terminal_law", r);
               }});
  c.push_back({"padic.bridge_midpoint_law", [](const MonteCarloConfig& cfg) {
                 const padic::RadialDensitySpec s{2, 2.0, 1.0};
                 const padic::PadicBridgeSampler bridge(s, 1.0, 1);
                 const auto zero = padic::PadicNumber::zero(2);
                 const auto draws = detail::radius_draws(100000, Rng(cfg.seed).substream(304), [&](Rng& r) {
                   return bridge.midpoint(1, zero, zero, r);
                 });
                 const auto r = detail::integer_chi_square(draws, -30, 20, [](std::int64_t m) {
                   return oracles::padic_bridge_midpoint(2, 2.0, 0.5, m);
                 });
                 return detail::chi_square_check("padic.bridge_midpoint_law", r);
               }});
  c.push_back({"padic.bridge_acceptance_rate", [](const MonteCarloConfig& cfg) {
                 // proposals per accepted midpoint, forward scheme: mean f_{T/2}(0) / f_T(y - x)
                 const padic::RadialDensitySpec s{2, 2.0, 1.0};
                 const padic::PadicBridgeSampler bridge(s, 1.0, 1, padic::kDefaultPrecision, padic::BridgeProposal::forward);
                 const auto x = padic::PadicNumber::zero(2), y = padic::PadicNumber::from_integer(2, 1);
                 Rng rng = Rng(cfg.seed).substream(305);
                 std::vector<double> counts;
                 for (int i = 0; i < 50000; ++i) {
                   std::size_t k = 0;
                   bridge.midpoint(1, x, y, rng, &k);
                   counts.push_back(static_cast<double>(k));
                 }
                 const auto m = sample_moments(counts);
                 const double ref = oracles::padic_density_at_zero(2, 2.0, 0.5) / oracles::padic_density(2, 2.0, 1.0, 0);
                 return within("padic.bridge_acceptance_rate", m.mean, ref, 3.0 * m.std_error);
               }});
  c.push_back({"padic.vladimirov_two_state", [](const MonteCarloConfig&) {
                 padic::VladimirovSpec vs;
                 vs.p = 2;
                 vs.b = 2.0;
                 vs.M = 0;
                 vs.M_prime = 1;
                 const auto ev = eigenvalues(padic::vladimirov_hamiltonian(vs));
                 const auto ref = oracles::vladimirov_two_state_spectrum(2.0);
                 return at_most("padic.vladimirov_two_state", std::max(std::abs(ev(0) - ref[0]), std::abs(ev(1) - ref[1])), 1e-12);
               }});
  c.push_back({"padic.fk_matrix_oracle", [](const MonteCarloConfig& cfg) {
                 padic::VladimirovSpec vs;
                 vs.p = 2;
                 vs.b = 2.0;
                 vs.M = 1;
                 vs.M_prime = 1;
                 vs.V = PotentialSpec::parse("|x|");
                 const auto stable = padic::stable_vladimirov_kernel(vs, 1.0, 1e-3);
                 MonteCarloConfig sub = cfg;
                 sub.seed = Rng(cfg.seed).substream(306).key();
                 const auto zero = padic::PadicNumber::zero(2);
                 const auto e = padic::padic_fk_kernel({2, 2.0, 1.0}, vs.V, 1.0, zero, zero, 20000, 8, sub);
                 return mc_within("padic.fk_matrix_oracle", e, stable.fine_value);
               }});
  c.push_back({"padic.moment_grid_stability", [](const MonteCarloConfig&) {
                 const padic::RadialDensitySpec s{2, 2.0, 1.0};
                 const double a = padic::moment_and_bound_checks(s, 1.0, padic::log_grid(1e-3, 1e3, 24)).sup_moment_ratio;
                 const double b = padic::moment_and_bound_checks(s, 1.0, padic::log_grid(1e-3, 1e3, 48)).sup_moment_ratio;
                 return within("padic.moment_grid_stability", a, b, 0.01 * b);
               }});
  c.push_back({"padic.convolution_semigroup", [](const MonteCarloConfig&) {
                 return at_most("padic.convolution_semigroup",
                                padic::semigroup_convolution_check({2, 1.0, 1.0}, 0.5, 0.5), 1e-8);
               }});
  c.push_back({"padic.convolution_dirac", [](const MonteCarloConfig&) {
                 const padic::RadialDensitySpec s{2, 1.0, 1.0};
                 double worst = 0.0;
                 for (std::int64_t m = -12; m <= 12; ++m)
                   worst = std::max(worst, std::abs(padic::radial_convolution(s.at_time(1e-6), s, m) -
                                                    oracles::padic_density(2, 1.0, 1.0, m)));
                 return at_most("padic.convolution_dirac", worst, 1e-4);
               }});
  c.push_back({"padic.gram_psd", [](const MonteCarloConfig& cfg) {
                 Rng rng = Rng(cfg.seed).substream(307);
                 std::vector<padic::PadicNumber> pts;
                 while (pts.size() < 16) {
                   const auto x = padic::PadicNumber::random_on_sphere(3, static_cast<std::int64_t>(rng.below(7)) - 3, 8, rng);
                   if (std::none_of(pts.begin(), pts.end(), [&](const auto& y) { return padic::agree(x, y); })) pts.push_back(x);
                 }
                 return at_least("padic.gram_psd", padic::positive_definiteness_check({3, 1.0, 1.0}, pts), -1e-10);
               }});
  return c;
}

}  // namespace sklab
