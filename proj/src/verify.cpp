#include "neuropop/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "neuropop/pde.hpp"

namespace neuropop {

double doeblin_m_lower(const ModelSpec& spec, double R, double a_bar, double T) {
  const double lam = spec.lambda;
  const double dabs = spec.firing.delta_abs;
  const JumpMap& g = spec.jump;
  return g.gamma(std::exp(-lam * (T - a_bar - dabs)) * g.gamma(std::exp(-lam * dabs) * R));
}

double doeblin_m_upper(const ModelSpec& spec, double a_bar) {
  const double lam = spec.lambda;
  const double dabs = spec.firing.delta_abs;
  const JumpMap& g = spec.jump;
  return std::exp(-lam * a_bar) * g.gamma(std::exp(-lam * dabs) * g.gamma0());
}

double a_star(const ModelSpec& spec, double a, double m) {
  const double ginv = spec.jump.gamma_inv(std::exp(spec.lambda * a) * m);
  if (!(ginv > 0.0)) throw std::invalid_argument("a_star undefined: gamma^-1(e^{la} m) <= 0");
  return (std::log(spec.jump.gamma0()) - std::log(ginv)) / spec.lambda;
}

double psi_map(const ModelSpec& spec, double T, double a, double m, double a_prime) {
  const double lam = spec.lambda;
  const double inner = spec.jump.gamma_inv(std::exp(lam * a) * m);
  return std::exp(lam * (T - a - a_prime)) *
         spec.jump.gamma_inv(std::exp(lam * a_prime) * inner);
}

DoeblinWindow doeblin_window(const ModelSpec& spec, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("R must be positive");
  DoeblinWindow w;
  w.R = R;
  const double lam = spec.lambda;
  const double dabs = spec.firing.delta_abs;
  const double g0 = spec.jump.gamma0();

  if (!(g0 > 0.0)) {
    w.note = "gamma(0) = 0: the two-jump window degenerates (Gamma > 0 fails)";
    return w;
  }
  // m_upper(a_bar) must stay above gamma(0)
  const double abar_cap =
      std::log(spec.jump.gamma(std::exp(-lam * dabs) * g0) / g0) / lam;
  if (!(abar_cap > 0.0)) {
    w.note = "no a_bar with m_upper > gamma(0)";
    return w;
  }

  // coarse lattice: T in absolute steps of 0.5/lambda so several a_bar compete
  // at the same minimal T; break ties by rectangle area (thin slivers are
  // useless to the empirical check)
  const int n_abar = 12;
  const double t_step = 0.5 / lam;
  const double t_cap = 60.0 / lam;
  double best_T = std::numeric_limits<double>::infinity();
  double best_area = -1.0;

  for (int i = 0; i < n_abar; ++i) {
    const double a_bar = abar_cap * (0.25 + 0.73 * i / (n_abar - 1));
    const double m_up = doeblin_m_upper(spec, a_bar);
    for (double T = t_step; T < t_cap; T += t_step) {
      if (T <= a_bar + dabs + 1e-9) continue;
      const double m_lo = doeblin_m_lower(spec, R, a_bar, T);
      if (m_lo <= 0.99 * m_up) {
        const double area = a_bar * (m_up - m_lo);
        if (T < best_T - 1e-12 || (std::abs(T - best_T) <= 1e-12 && area > best_area)) {
          best_T = T;
          best_area = area;
          w.T = T;
          w.a_bar = a_bar;
          w.m_lower = m_lo;
          w.m_upper = m_up;
          w.feasible = true;
        }
        break;  // larger T only shrinks m_lower further
      }
    }
  }
  if (!w.feasible) {
    w.note = "no feasible (a_bar, T) within the search bounds";
    return w;
  }
  w.nu_constant = std::exp(-3.0 * spec.firing.f_max * w.T) * spec.firing.sigma *
                  spec.firing.sigma * spec.jump.c_gamma() / (lam * w.m_upper);
  return w;
}

DoeblinReport doeblin_empirical(const ModelSpec& spec, const DoeblinWindow& window,
                                const DoeblinCheckOptions& opt) {
  if (!window.feasible) throw std::invalid_argument("doeblin window is infeasible");
  DoeblinReport rep;
  rep.window = window;

  const double probe_a_max = opt.probe_a_max > 0.0
                                 ? opt.probe_a_max
                                 : spec.firing.delta_abs + 10.0 / spec.firing.sigma;
  // grid tall enough that probe mass cannot hit the age truncation within T,
  // and wide enough in m for two jump generations from (0, R]
  const double a_max_grid = probe_a_max + window.T + 1.0;
  double m_top = std::max(window.m_upper * 1.2,
                          spec.jump.gamma(spec.jump.gamma(window.R)) * 1.05);
  m_top = std::min(m_top, spec.m_max);
  GridSpec grid = make_grid(a_max_grid, opt.n_a, 0.0, m_top, opt.n_m);

  double dt = opt.dt > 0.0 ? opt.dt : 0.9 * cfl_limit(spec, grid);
  const long n_steps = std::max<long>(1, std::lround(std::ceil(window.T / dt)));
  dt = window.T / static_cast<double>(n_steps);

  // cells fully inside the rectangle [0, a_bar] x [m_lower, m_upper]
  std::vector<std::pair<int, int>> cells;
  for (int i = 0; i < grid.n_a; ++i) {
    if (grid.a_lo(i) + grid.da() > window.a_bar) break;
    for (int j = 0; j < grid.n_m; ++j)
      if (grid.m_lo(j) >= window.m_lower && grid.m_hi(j) <= window.m_upper)
        cells.emplace_back(i, j);
  }
  if (cells.empty()) {
    rep.note = "no grid cell fits inside the minoration rectangle; refine the grid";
    return rep;
  }

  std::vector<std::pair<double, double>> probe_points;
  const int n = opt.probes_per_axis;
  for (int i = 0; i < n; ++i)
    for (int j = 1; j <= n; ++j)
      probe_points.emplace_back(probe_a_max * i / std::max(1, n - 1),
                                window.R * j / static_cast<double>(n));
  for (const auto& p : opt.extra_probes) probe_points.push_back(p);

  rep.all_positive = true;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  for (const auto& [a0, m0] : probe_points) {
    DoeblinProbeReport pr;
    pr.a0 = a0;
    pr.m0 = m0;
    pr.excluded = m0 > window.R;  // the lemma conditions on mass in (0, R]
    if (!pr.excluded) {
      DensityGrid u0 = dirac_initial(grid, a0, m0);
      auto [trace, rho] = run_frozen(spec, opt.x_tilde, u0, window.T, dt, window.T);
      double lo = std::numeric_limits<double>::infinity();
      for (const auto& [i, j] : cells) lo = std::min(lo, rho.at(i, j));
      pr.min_density = lo;
      pr.ratio = lo / window.nu_constant;
      rep.min_ratio = std::min(rep.min_ratio, pr.ratio);
      if (!(lo > 0.0)) rep.all_positive = false;
    }
    rep.probes.push_back(pr);
  }
  return rep;
}

namespace {

RateFit fit_window(const std::vector<double>& times, const std::vector<double>& values,
                   double t_min, double cutoff) {
  RateFit fit;
  std::vector<double> ts, ls;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_min) continue;
    if (values[i] < cutoff) break;  // truncated window
    ts.push_back(times[i]);
    ls.push_back(std::log(values[i]));
  }
  if (ts.size() < 3) {
    fit.degenerate = true;
    return fit;
  }
  const double n = static_cast<double>(ts.size());
  double st = 0, sl = 0, stt = 0, stl = 0, sll = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sl += ls[i];
    stt += ts[i] * ts[i];
    stl += ts[i] * ls[i];
    sll += ls[i] * ls[i];
  }
  const double cov = stl - st * sl / n;
  const double var_t = stt - st * st / n;
  const double var_l = sll - sl * sl / n;
  if (!(var_t > 0.0)) {
    fit.degenerate = true;
    return fit;
  }
  const double slope = cov / var_t;
  fit.rate = -slope;
  fit.prefactor = std::exp(sl / n - slope * st / n);
  fit.r_squared = var_l > 0.0 ? cov * cov / (var_t * var_l) : 1.0;
  fit.window_start = ts.front();
  fit.window_end = ts.back();
  return fit;
}

}  // namespace

RateFit fit_log_decay(const std::vector<double>& times, const std::vector<double>& values,
                      double skip_fraction) {
  if (times.size() != values.size() || times.empty())
    throw std::invalid_argument("fit needs matching nonempty series");
  RateFit fit = fit_window(times, values, skip_fraction * times.back(), 1e-12);
  if (!fit.degenerate && fit.r_squared > 0.9) return fit;
  // the series may sit on a discretization floor; refit on the live transient
  double floor = values.front();
  for (const double v : values) floor = std::min(floor, v);
  const double cutoff = std::max(2.5 * floor, 1e-12);
  double t_hit = times.back();
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] < cutoff) {
      t_hit = times[i];
      break;
    }
  RateFit refit = fit_window(times, values, skip_fraction * t_hit, cutoff);
  if (refit.degenerate) return fit;
  return refit.r_squared > fit.r_squared || fit.degenerate ? refit : fit;
}

RateFit harris_rate(const ModelSpec& spec, double x_tilde, const DensityGrid& u0,
                    const DensityGrid& v0, double t_end, double dt, double record_stride,
                    double skip_fraction) {
  if (u0.values.size() != v0.values.size())
    throw std::invalid_argument("harris_rate needs matching grids");
  if (record_stride <= 0.0) record_stride = t_end / 200.0;

  DensityGrid a = u0, b = v0;
  PdeWorkspace wa, wb;
  const long n_steps = std::lround(t_end / dt);
  const long stride = std::max<long>(1, std::lround(record_stride / dt));
  std::vector<double> ts, ds;
  ts.push_back(0.0);
  ds.push_back(weighted_l1_distance(a, b));
  for (long s = 0; s < n_steps; ++s) {
    pde_step_inplace(spec, a, x_tilde, dt, wa);
    pde_step_inplace(spec, b, x_tilde, dt, wb);
    if ((s + 1) % stride == 0 || s + 1 == n_steps) {
      ts.push_back((s + 1) * dt);
      ds.push_back(weighted_l1_distance(a, b));
    }
  }
  return fit_log_decay(ts, ds, skip_fraction);
}

std::vector<StabilityReport> weak_coupling_experiment(const ModelSpec& base,
                                                      const std::vector<double>& epsilons,
                                                      const DensityGrid& u0, double t_end,
                                                      double dt,
                                                      const StationaryOptions& sopt) {
  std::vector<StabilityReport> out;
  for (const double eps : epsilons) {
    ModelSpec spec = base;
    spec.epsilon = eps;
    StabilityReport rep;
    rep.epsilon = eps;

    StationaryResult st = solve_stationary(spec, sopt.outer_tol, u0.grid, sopt);
    rep.stationary_converged = st.converged;
    rep.x_inf = st.x_inf;
    if (!st.converged) {
      rep.classification = "unresolved";
      out.push_back(rep);
      continue;
    }

    std::vector<double> ts, ds, xs;
    PdeRunOptions opt;
    opt.t_end = t_end;
    opt.dt = dt;
    opt.record_stride = std::max(dt, t_end / 400.0);
    opt.observer = [&](double t, const DensityGrid& rho, double x) {
      ts.push_back(t);
      ds.push_back(weighted_l1_distance(rho, st.rho_inf) + std::abs(x - st.x_inf));
      xs.push_back(x);
    };
    run_pde(spec, u0, opt);

    // d(t) saturates at the discrete-stationary floor; fit the approach to it
    double floor = ds.front(), range = 0.0;
    for (const double d : ds) floor = std::min(floor, d);
    for (const double d : ds) range = std::max(range, d - floor);
    std::vector<double> ts_sub, ds_sub;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds[i] - floor < 0.02 * range) break;
      ts_sub.push_back(ts[i]);
      ds_sub.push_back(ds[i] - floor);
    }
    rep.fit = ts_sub.size() >= 3 ? fit_log_decay(ts_sub, ds_sub) : fit_log_decay(ts, ds);
    const std::size_t last_third = (2 * ts.size()) / 3;
    double lo_l = std::numeric_limits<double>::infinity(), hi_l = -lo_l;
    double lo_g = lo_l, hi_g = -lo_l;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      lo_g = std::min(lo_g, xs[i]);
      hi_g = std::max(hi_g, xs[i]);
      if (i >= last_third) {
        lo_l = std::min(lo_l, xs[i]);
        hi_l = std::max(hi_l, xs[i]);
      }
    }
    rep.x_pp_last = hi_l - lo_l;
    rep.x_pp_global = hi_g - lo_g;

    const bool oscillating =
        rep.x_pp_global > 1e-8 && rep.x_pp_last >= 0.5 * rep.x_pp_global;
    const bool decaying = !rep.fit.degenerate && rep.fit.rate > 0.0 && rep.fit.r_squared > 0.9;
    if (oscillating)
      rep.classification = "oscillating";
    else if (decaying || (rep.fit.degenerate && ds.back() < 1e-10))
      rep.classification = "decaying";
    else
      rep.classification = "diverged";
    out.push_back(rep);
  }
  return out;
}

}  // namespace neuropop
