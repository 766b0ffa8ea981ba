#include <doctest.h>

#include <cmath>
#include <numeric>

#include "neuropop/model.hpp"
#include "neuropop/particle.hpp"
#include "neuropop/pde.hpp"

using namespace neuropop;

namespace {

// zero-rate model for pure-transport checks (bypasses config validation on purpose)
ModelSpec flow_only_model(double lambda) {
  ModelSpec s = make_constant_model(1.0, lambda > 0.0 ? lambda : 1.0, 0.5);
  s.lambda = lambda;
  s.firing.f_max = 0.0;
  s.firing.sigma = 0.0;
  s.m_max = 4.0;
  return s;
}

}  // namespace

TEST_CASE("free age transport translates a box exactly at CFL = 1") {
  ModelSpec s = flow_only_model(0.0);
  GridSpec g = make_grid(10.0, 100, 0.0, 4.0, 8);
  DensityGrid rho = zero_density(g);
  for (int i = 20; i < 30; ++i) rho.at(i, 3) = 1.0;
  const double m0 = rho.mass();

  PdeWorkspace ws;
  const double dt = g.da();  // unit speed: exact translation
  for (int k = 0; k < 15; ++k) pde_step_inplace(s, rho, 0.0, dt, ws);
  for (int i = 0; i < g.n_a; ++i) {
    const double want = (i >= 35 && i < 45) ? 1.0 : 0.0;
    REQUIRE(rho.at(i, 3) == doctest::Approx(want).epsilon(1e-12));
  }
  CHECK(rho.mass() == doctest::Approx(m0).epsilon(1e-12));
  CHECK(rho.leaked_mass == doctest::Approx(0.0));
}

TEST_CASE("zero-rate step conserves mass + leak to 1e-12 relative") {
  ModelSpec s = flow_only_model(0.8);
  GridSpec g = make_grid(6.0, 64, 0.0, 4.0, 48);
  DensityGrid rho = gaussian_initial(g, 4.5, 1.2, 1.0, 0.4);  // mass near the outflow edge
  PdeWorkspace ws;
  const double dt = 0.8 * cfl_limit(s, g);
  for (int k = 0; k < 400; ++k) pde_step_inplace(s, rho, 0.0, dt, ws);
  CHECK(rho.mass() + rho.leaked_mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rho.leaked_mass > 0.1);  // the box really does flow out
}

TEST_CASE("densities stay nonnegative and the CFL guard throws") {
  ModelSpec s = make_constant_model(1.0, 1.0, 0.5);
  s.m_max = 6.0;
  GridSpec g = make_grid(12.0, 60, 0.0, 6.0, 30);
  DensityGrid rho = gaussian_initial(g, 1.0, 0.5, 1.0, 0.3);
  PdeWorkspace ws;
  CHECK_THROWS_AS(pde_step_inplace(s, rho, 0.0, 10.0 * cfl_limit(s, g), ws),
                  std::invalid_argument);
  const double dt = 0.9 * cfl_limit(s, g);
  for (int k = 0; k < 200; ++k) pde_step_inplace(s, rho, 0.0, dt, ws);
  double lo = 0.0;
  for (const double v : rho.values) lo = std::min(lo, v);
  CHECK(lo >= 0.0);
}

TEST_CASE("sink mass re-enters at a = 0: per-step boundary identity is exact") {
  ModelSpec s = make_constant_model(1.5, 1.0, 0.5);
  s.m_max = 8.0;
  GridSpec g = make_grid(12.0, 80, 0.0, 8.0, 40);
  DensityGrid rho = gaussian_initial(g, 2.0, 0.7, 1.0, 0.3);
  PdeWorkspace ws;
  const double dt = 0.9 * cfl_limit(s, g);
  for (int k = 0; k < 50; ++k) {
    PdeStepOutputs out = pde_step_inplace(s, rho, 0.0, dt, ws);
    REQUIRE(out.injected_mass <= out.removed_mass * (1.0 + 1e-13));
    // injected profile integrates to the injected mass
    double flux_mass = 0.0;
    for (int j = 0; j < g.n_m; ++j) flux_mass += out.boundary_flux[j] * g.dm(j) * dt;
    REQUIRE(flux_mass == doctest::Approx(out.injected_mass).epsilon(1e-12));
  }
  CHECK(rho.mass() + rho.leaked_mass == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("renewal oracle: constant hazard relaxes to the exponential age profile") {
  // f = c, no coupling: stationary age marginal is c e^{-c a}
  const double c = 1.0;
  ModelSpec s = make_constant_model(c, 1.0, 0.5);
  GridSpec g = make_grid(12.0, 400, 0.0, s.m_max, 100);
  DensityGrid u0 = gaussian_initial(g, 2.0, 0.7, 1.0, 0.3);
  auto [trace, rho] = run_nonlinear(s, u0, 50.0 / c, 0.9 * cfl_limit(s, g), 5.0);

  const std::vector<double> marg = rho.age_marginal();
  const double total = rho.mass();
  double l1 = 0.0;
  for (int i = 0; i < g.n_a; ++i) {
    const double cell_exact =
        std::exp(-c * g.a_lo(i)) - std::exp(-c * (g.a_lo(i) + g.da()));
    l1 += std::abs(marg[i] * g.da() / total - cell_exact);
  }
  l1 += std::exp(-c * g.a_max);  // truncated analytic tail
  CHECK(l1 <= 1e-2);
}

TEST_CASE("epsilon = 0 nonlinear run equals the frozen run at x~ = 0 exactly") {
  ModelSpec s = make_asrm0_model();
  s.epsilon = 0.0;
  GridSpec g = make_grid(25.5, 120, 0.0, s.m_max, 40);
  DensityGrid u0 = gaussian_initial(g, 1.0, 0.5, 1.0, 0.3);
  const double dt = 0.9 * cfl_limit(s, g);
  auto [t1, r1] = run_nonlinear(s, u0, 3.0, dt, 0.5);
  auto [t2, r2] = run_frozen(s, 0.0, u0, 3.0, dt, 0.5);
  double dmax = 0.0;
  for (std::size_t i = 0; i < r1.values.size(); ++i)
    dmax = std::max(dmax, std::abs(r1.values[i] - r2.values[i]));
  CHECK(dmax == 0.0);          // identical density trajectories, bitwise
  CHECK(t1.x_values.back() > 0.0);  // but the recorded potential differs
  CHECK(t2.x_values.back() == 0.0);
}

TEST_CASE("weighted norm obeys the Lyapunov bound along the run") {
  ModelSpec s = make_constant_model(2.0, 1.0, 0.5);
  GridSpec g = make_grid(12.0, 200, 0.0, s.m_max, 80);
  DensityGrid u0 = gaussian_initial(g, 1.0, 0.5, 2.0, 0.4);
  const LyapunovConstants lc = lyapunov_constants(s);
  const double w0 = u0.weighted_norm();
  auto [trace, rho] = run_nonlinear(s, u0, 20.0, 0.9 * cfl_limit(s, g), 0.25);
  double worst = -1e300;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const double t = trace.times[i];
    const double bound =
        w0 * std::exp(-lc.alpha * t) + lc.b / lc.alpha * (1.0 - std::exp(-lc.alpha * t));
    worst = std::max(worst, trace.weighted_norm[i] - bound);
  }
  CHECK(worst <= 1e-3);
}

TEST_CASE("frozen run matches the characteristics formula for a >= t") {
  ModelSpec s = make_asrm0_model();
  s.m_max = 8.0;  // concentrate the grid where the test datum lives
  const double x_tilde = 0.3;
  const double t_end = 1.0;
  auto profile = [](double a, double m) {
    return std::exp(-0.5 * std::pow((a - 3.0) / 0.8, 2)) *
           std::exp(-0.5 * std::pow((std::log(m) - std::log(1.5)) / 0.35, 2)) / m;
  };

  auto error_at = [&](int n_a, int n_m) {
    GridSpec gg = make_grid(25.5, n_a, 0.0, s.m_max, n_m);
    DensityGrid u0 = zero_density(gg);
    for (int i = 0; i < gg.n_a; ++i)
      for (int j = 0; j < gg.n_m; ++j) u0.at(i, j) = profile(gg.a_center(i), gg.m_center(j));
    auto [trace, rho] = run_frozen(s, x_tilde, u0, t_end, 0.45 * cfl_limit(s, gg), t_end);
    // compare on a band of cells well inside a >= t
    double err = 0.0, norm = 0.0;
    for (int i = 0; i < gg.n_a; ++i) {
      const double a = gg.a_center(i);
      if (a < t_end + 2.0 * gg.da() || a > 6.0) continue;
      for (int j = 0; j < gg.n_m; ++j) {
        const double m = gg.m_center(j);
        const double m_birth = std::exp(s.lambda * t_end) * m;
        if (m_birth > gg.m_max) continue;
        double haz = 0.0;  // int_0^t f(a-t+s, e^{lambda(t-s)} m, x~) ds by fine midpoint
        const int steps = 64;
        for (int k = 0; k < steps; ++k) {
          const double sc = t_end * (k + 0.5) / steps;
          haz += s.firing(a - t_end + sc, std::exp(s.lambda * (t_end - sc)) * m, x_tilde);
        }
        haz *= t_end / steps;
        const double exact =
            profile(a - t_end, m_birth) * std::exp(s.lambda * t_end - haz);
        err += std::abs(rho.at(i, j) - exact) * gg.cell_area(j);
        norm += std::abs(exact) * gg.cell_area(j);
      }
    }
    return err / norm;
  };

  const double coarse = error_at(160, 80);
  const double fine = error_at(320, 160);
  CHECK(coarse < 0.25);
  CHECK(fine < 0.7 * coarse);  // converges toward the representation formula
}

TEST_CASE("two initial data contract under the frozen semigroup") {
  ModelSpec s = make_asrm0_model();
  GridSpec g = make_grid(25.5, 160, 0.0, s.m_max, 60);
  DensityGrid u0 = gaussian_initial(g, 1.0, 0.5, 1.0, 0.3);
  DensityGrid v0 = gaussian_initial(g, 4.0, 1.0, 2.0, 0.5);
  const double dt = 0.9 * cfl_limit(s, g);
  const double d0 = weighted_l1_distance(u0, v0);
  PdeWorkspace wa, wb;
  for (int k = 0; k < std::lround(14.0 / dt); ++k) {
    pde_step_inplace(s, u0, 0.2, dt, wa);
    pde_step_inplace(s, v0, 0.2, dt, wb);
  }
  CHECK(weighted_l1_distance(u0, v0) < 0.2 * d0);
}

TEST_CASE("particle histogram approaches the pde density as N grows") {
  ModelSpec s = make_std_model(1.0, 1.0, 0.5);
  GridSpec fine = make_grid(10.0, 400, 0.0, 1.0, 100);
  DensityGrid u0 = gaussian_initial(fine, 1.0, 0.5, 0.6, 0.2);
  auto [trace, rho] = run_nonlinear(s, u0, 10.0, 0.9 * cfl_limit(s, fine), 5.0);
  GridSpec coarse = make_grid(10.0, 50, 0.0, 1.0, 25);  // histogram comparison grid
  DensityGrid pde_coarse = zero_density(coarse);
  for (int i = 0; i < fine.n_a; ++i)
    for (int j = 0; j < fine.n_m; ++j) {
      const int ci = coarse.a_cell_of(fine.a_center(i));
      const int cj = coarse.m_cell_of(fine.m_center(j));
      if (ci >= 0 && cj >= 0)
        pde_coarse.at(ci, cj) += rho.at(i, j) * fine.cell_area(j) / coarse.cell_area(cj);
    }

  InitialSpec init;
  init.a0 = 1.0;
  init.a_sigma = 0.5;
  init.m0 = 0.6;
  init.m_sigma = 0.2;
  double prev = 1e300;
  for (const std::size_t n : {1000u, 10000u, 100000u}) {
    ParticleState st = sample_initial(s, init, fine, n, 123);
    for (long k = 0; k < std::lround(10.0 / 0.01); ++k) particle_step(s, st, 0.01);
    const double d = l1_distance(empirical_density(st, coarse), pde_coarse);
    CHECK(d < prev);  // sampling noise shrinks with N
    prev = d;
  }
  // what remains at N = 1e5 is the transport scheme's smearing of the sharp
  // depression band, not sampling error
  CHECK(prev < 0.5);
}

TEST_CASE("geometric m-spacing conserves mass and tracks the bottom leak") {
  ModelSpec s = make_constant_model(1.0, 1.0, 0.5);
  s.m_min = 1e-3;
  s.m_max = 8.0;
  GridSpec g = make_grid(12.0, 60, 1e-3, 8.0, 48, MSpacing::geometric);
  CHECK(g.dm(0) < g.dm(47));  // cells widen geometrically
  DensityGrid rho = gaussian_initial(g, 1.0, 0.5, 1.0, 0.3);
  const double m0 = rho.mass();
  PdeWorkspace ws;
  const double dt = 0.9 * cfl_limit(s, g);
  for (int k = 0; k < 300; ++k) pde_step_inplace(s, rho, 0.0, dt, ws);
  CHECK(rho.mass() + rho.leaked_mass == doctest::Approx(m0).epsilon(1e-10));
  double lo = 0.0;
  for (const double v : rho.values) lo = std::min(lo, v);
  CHECK(lo >= 0.0);
}

TEST_CASE("pde_step value wrapper leaves the input untouched") {
  ModelSpec s = make_constant_model(1.0, 1.0, 0.5);
  s.m_max = 6.0;
  GridSpec g = make_grid(12.0, 40, 0.0, 6.0, 16);
  DensityGrid rho = gaussian_initial(g, 1.0, 0.5, 1.0, 0.3);
  DensityGrid before = rho;
  PdeStepResult res = pde_step(s, rho, 0.0, 0.5 * cfl_limit(s, g));
  CHECK(rho.values == before.values);
  CHECK(res.rate_integral > 0.0);
  CHECK(res.rho.mass() < rho.mass() * (1.0 + 1e-12));
}
