#include "neuropop/pde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace neuropop {

double cfl_limit(const ModelSpec& spec, const GridSpec& grid) {
  double lim = grid.da();
  if (spec.lambda > 0.0 && grid.m_max > 0.0)
    lim = std::min(lim, grid.dm_min() / (spec.lambda * grid.m_max));
  return lim;
}

namespace {

void refresh_rate_cache(const ModelSpec& spec, const GridSpec& g, double x, double dt,
                        PdeWorkspace& ws) {
  if (ws.cache_valid && ws.cached_x == x && ws.cached_dt == dt) return;
  const std::size_t n = static_cast<std::size_t>(g.n_a) * g.n_m;
  ws.rate.resize(n);
  ws.sink.resize(n);
  for (int i = 0; i < g.n_a; ++i) {
    const double a = g.a_center(i);
    for (int j = 0; j < g.n_m; ++j) {
      const double f = spec.firing(a, g.m_center(j), x);
      ws.rate[static_cast<std::size_t>(i) * g.n_m + j] = f;
      ws.sink[static_cast<std::size_t>(i) * g.n_m + j] = std::exp(-f * dt);
    }
  }
  ws.cached_x = x;
  ws.cached_dt = dt;
  ws.cache_valid = true;
}

void prepare_m_coeffs(const ModelSpec& spec, const GridSpec& g, double dt, PdeWorkspace& ws) {
  ws.out_coef.assign(g.n_m, 0.0);
  for (int j = 0; j < g.n_m; ++j)
    ws.out_coef[j] = spec.lambda * g.m_center(j) * dt / g.dm(j);
  // nothing crosses the m = 0 edge
  if (g.m_min <= 0.0) ws.out_coef[0] = 0.0;
}

}  // namespace

PdeStepOutputs pde_step_inplace(const ModelSpec& spec, DensityGrid& rho, double x, double dt,
                                PdeWorkspace& ws) {
  const GridSpec& g = rho.grid;
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (dt > cfl_limit(spec, g) * (1.0 + 1e-9))
    throw std::invalid_argument("dt violates the CFL bound " +
                                std::to_string(cfl_limit(spec, g)));
  if (!std::isfinite(x)) throw std::invalid_argument("potential x is not finite");

  PdeStepOutputs out;
  out.boundary_flux.assign(g.n_m, 0.0);
  const int n_a = g.n_a, n_m = g.n_m;
  const double da = g.da();
  double leaked = 0.0;

  // (1) upwind transport in a, speed 1; zero inflow at a = 0
  {
    const double c = dt / da;
    double* v = rho.values.data();
    const double* last = v + static_cast<std::size_t>(n_a - 1) * n_m;
    for (int j = 0; j < n_m; ++j) leaked += c * last[j] * da * g.dm(j);
    for (int i = n_a - 1; i >= 1; --i) {
      double* cur = v + static_cast<std::size_t>(i) * n_m;
      const double* prev = cur - n_m;
      for (int j = 0; j < n_m; ++j) cur[j] += c * (prev[j] - cur[j]);
    }
    for (int j = 0; j < n_m; ++j) v[j] *= (1.0 - c);
  }

  // (2) donor-cell transport in m, speed -lambda*m
  if (spec.lambda > 0.0) {
    prepare_m_coeffs(spec, g, dt, ws);
    ws.row.resize(n_m);
    const bool bottom_leaks = g.m_min > 0.0;
    for (int i = 0; i < n_a; ++i) {
      double* cur = rho.values.data() + static_cast<std::size_t>(i) * n_m;
      std::copy(cur, cur + n_m, ws.row.begin());
      for (int j = 0; j < n_m; ++j) {
        double v = ws.row[j] * (1.0 - ws.out_coef[j]);
        if (j + 1 < n_m)
          v += ws.row[j + 1] * ws.out_coef[j + 1] * (g.dm(j + 1) / g.dm(j));
        cur[j] = v;
      }
      if (bottom_leaks) leaked += ws.row[0] * ws.out_coef[0] * da * g.dm(0);
    }
  }

  // (3) sink + (4) re-injection at a = 0 through the jump map
  refresh_rate_cache(spec, g, x, dt, ws);
  ws.col_removed.assign(n_m, 0.0);
  double rate_int = 0.0;
  for (int i = 0; i < n_a; ++i) {
    const std::size_t off = static_cast<std::size_t>(i) * n_m;
    for (int j = 0; j < n_m; ++j) {
      const double v = rho.values[off + j];
      if (v == 0.0) continue;
      const double area = da * g.dm(j);
      rate_int += ws.rate[off + j] * v * area;
      const double kept = v * ws.sink[off + j];
      ws.col_removed[j] += (v - kept) * area;
      rho.values[off + j] = kept;
    }
  }
  out.rate_integral = rate_int;

  double injected = 0.0, leaked_map = 0.0, removed = 0.0, kappa_removed = 0.0;
  for (int j = 0; j < n_m; ++j) {
    const double mass = ws.col_removed[j];
    if (mass == 0.0) continue;
    removed += mass;
    kappa_removed += spec.kernel.weight(g.m_center(j)) * mass;
    const double lo = spec.jump.gamma(g.m_lo(j));
    const double hi = spec.jump.gamma(g.m_hi(j));
    const double width = hi - lo;
    if (!(width > 0.0)) throw std::runtime_error("jump map image has zero width");
    if (lo < g.m_min) leaked_map += mass * std::min(1.0, (g.m_min - lo) / width);
    if (hi > g.m_max) leaked_map += mass * std::min(1.0, (hi - g.m_max) / width);
    int jt = g.m_cell_of(std::max(lo, g.m_min));
    if (jt < 0) continue;  // whole image outside the window
    for (; jt < n_m && g.m_lo(jt) < hi; ++jt) {
      const double ov = std::min(hi, g.m_hi(jt)) - std::max(lo, g.m_lo(jt));
      if (ov <= 0.0) continue;
      const double part = mass * (ov / width);
      rho.values[jt] += part / (da * g.dm(jt));  // a-cell 0
      out.boundary_flux[jt] += part / (dt * g.dm(jt));
      injected += part;
    }
  }
  out.removed_mass = removed;
  out.injected_mass = injected;
  out.kappa_removed = kappa_removed;
  out.leaked_mass = leaked + leaked_map;
  rho.leaked_mass += out.leaked_mass;
  return out;
}

PdeStepResult pde_step(const ModelSpec& spec, const DensityGrid& rho, double x, double dt) {
  PdeStepResult res{rho, {}, 0.0};
  PdeWorkspace ws;
  PdeStepOutputs out = pde_step_inplace(spec, res.rho, x, dt, ws);
  for (const double v : res.rho.values)
    if (v < 0.0) throw std::runtime_error("negative density after step");
  res.boundary_flux = std::move(out.boundary_flux);
  res.rate_integral = out.rate_integral;
  return res;
}

std::pair<Trace, DensityGrid> run_pde(const ModelSpec& spec, DensityGrid rho,
                                      const PdeRunOptions& opt) {
  if (!(opt.t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
  PdeWorkspace ws;
  Trace trace;
  double x = opt.frozen ? opt.x_tilde : opt.x0;
  const long n_steps = std::lround(opt.t_end / opt.dt);
  const long stride = std::max<long>(1, std::lround(opt.record_stride / opt.dt));
  const double decay = std::exp(-spec.kernel.decay * opt.dt);

  auto record = [&](double t) {
    trace.times.push_back(t);
    trace.x_values.push_back(x);
    const double x_arg = opt.frozen ? opt.x_tilde : spec.epsilon * x;
    refresh_rate_cache(spec, rho.grid, x_arg, opt.dt, ws);
    double n_rate = 0.0;
    for (int i = 0; i < rho.grid.n_a; ++i) {
      const std::size_t off = static_cast<std::size_t>(i) * rho.grid.n_m;
      for (int j = 0; j < rho.grid.n_m; ++j)
        n_rate += ws.rate[off + j] * rho.values[off + j] * rho.grid.cell_area(j);
    }
    trace.pop_rate.push_back(n_rate);
    trace.mass.push_back(rho.mass());
    trace.weighted_norm.push_back(rho.weighted_norm());
    if (opt.observer) opt.observer(t, rho, x);
  };

  // spikes are spread uniformly over the step inside the kernel filter
  const double incr = (1.0 - decay) / (spec.kernel.decay * opt.dt);

  record(0.0);
  for (long s = 0; s < n_steps; ++s) {
    const double x_arg = opt.frozen ? opt.x_tilde : spec.epsilon * x;
    PdeStepOutputs st = pde_step_inplace(spec, rho, x_arg, opt.dt, ws);
    x = opt.frozen ? opt.x_tilde
                   : x * decay + spec.kernel.amplitude * st.kappa_removed * incr;
    if ((s + 1) % stride == 0 || s + 1 == n_steps) record((s + 1) * opt.dt);
  }
  return {std::move(trace), std::move(rho)};
}

std::pair<Trace, DensityGrid> run_nonlinear(const ModelSpec& spec, const DensityGrid& u0,
                                            double t_end, double dt, double record_stride) {
  PdeRunOptions opt;
  opt.t_end = t_end;
  opt.dt = dt;
  opt.record_stride = record_stride;
  return run_pde(spec, u0, opt);
}

std::pair<Trace, DensityGrid> run_frozen(const ModelSpec& spec, double x_tilde,
                                         const DensityGrid& u0, double t_end, double dt,
                                         double record_stride) {
  PdeRunOptions opt;
  opt.t_end = t_end;
  opt.dt = dt;
  opt.record_stride = record_stride;
  opt.frozen = true;
  opt.x_tilde = x_tilde;
  return run_pde(spec, u0, opt);
}

}  // namespace neuropop
